// Copyright 2026 The fpec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: gamma profiles, channel inversion, single
// estimates, depth sweeps and the mischaracterization study.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric or precondition
// failure (including an incomplete sweep, whose partial results are still
// written).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpec/config.hpp"
#include "fpec/errors.hpp"
#include "fpec/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "Experiment config (.toml or .json)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output file (default: config output, else stdout)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

fpec::ExperimentConfig resolve_config(const CommonOptions& o) {
  fpec::ExperimentConfig c = fpec::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (!o.out.empty()) c.output = o.out;
  if (!o.format.empty()) c.format = o.format;
  return c;
}

void deliver(const std::string& text, const std::optional<std::string>& path) {
  if (path && !path->empty()) {
    fpec::write_text_file(*path, text);
  } else {
    std::cout << text;
  }
}

std::optional<std::string> out_path(const CommonOptions& o) {
  return o.out.empty() ? std::nullopt : std::optional<std::string>(o.out);
}

int finish_sweep(const fpec::SweepResult& r, const fpec::ExperimentConfig& c) {
  deliver(fpec::emit_report(r, c.format), c.output);
  if (!r.complete) {
    std::cerr << "error: sweep incomplete: " << r.error << "\n";
    return kExitNumeric;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binomial-expansion probabilistic error cancellation toolkit"};
  app.require_subcommand(1);

  // gamma
  CommonOptions gamma_opts;
  std::size_t sites = 0;
  std::optional<double> eps1, eps2, depolarizing;
  unsigned arity = 2;
  std::size_t min_orders = 0;
  auto* gamma = app.add_subcommand("gamma", "Emit |gamma_k| against k");
  add_common(gamma, gamma_opts, false);
  gamma->add_option("--sites", sites, "Number of noise sites l");
  gamma->add_option("--eps1", eps1, "Identity excess eps1");
  gamma->add_option("--eps2", eps2, "Inverse-generator weight eps2");
  gamma->add_option("--depolarizing", depolarizing, "Derive eps1, eps2 from a depolarizing error probability");
  gamma->add_option("--arity", arity, "Arity of the depolarizing channel")->check(CLI::Range(1, 6));
  gamma->add_option("--min-orders", min_orders, "Emit at least this many orders, past the storage cutoff");

  // invert
  CommonOptions invert_opts;
  std::string channel_file;
  auto* invert = app.add_subcommand("invert", "Print the quasi-probability inverse of a channel");
  add_common(invert, invert_opts, false);
  invert->add_option("--channel", channel_file, "Channel description file (JSON)");

  // estimate
  CommonOptions estimate_opts;
  std::optional<std::size_t> steps;
  std::vector<std::string> methods;
  auto* estimate = app.add_subcommand("estimate", "Single-depth estimate");
  add_common(estimate, estimate_opts, true);
  estimate->add_option("--steps", steps, "Trotter steps (default: first configured depth)");
  estimate->add_option("--method", methods, "raw, fpec, pec or zne (repeatable)");

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Sweep depth and method");
  add_common(sweep, sweep_opts, true);

  CommonOptions mischar_opts;
  auto* mischar = app.add_subcommand("mischar", "FPEC with an assumed channel against the true one");
  add_common(mischar, mischar_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gamma->parsed()) {
      double e1 = 0.0, e2 = 0.0;
      std::size_t l = sites;
      std::string format = gamma_opts.format.empty() ? "csv" : gamma_opts.format;
      std::optional<std::string> path = out_path(gamma_opts);
      if (!gamma_opts.config.empty()) {
        const fpec::ExperimentConfig c = resolve_config(gamma_opts);
        const auto q = c.make_inverse();
        e1 = q.eps1();
        e2 = q.eps2();
        if (l == 0) {
          std::size_t deepest = 0;
          for (std::size_t s : c.steps) deepest = std::max(deepest, s);
          l = deepest * fpec::torus_edges(c.lattice.rows, c.lattice.cols).size();
        }
        if (gamma_opts.format.empty()) format = c.format;
        if (!path) path = c.output;
      } else if (depolarizing) {
        if (eps1 || eps2) throw fpec::ConfigError("gamma: give --depolarizing or --eps1/--eps2, not both");
        const auto q = fpec::invert_channel(fpec::depolarizing_channel(arity, *depolarizing));
        e1 = q.eps1();
        e2 = q.eps2();
      } else if (eps1 && eps2) {
        e1 = *eps1;
        e2 = *eps2;
      } else {
        throw fpec::ConfigError("gamma: need --config, --depolarizing or both --eps1 and --eps2");
      }
      if (l == 0) throw fpec::ConfigError("gamma: --sites must be >= 1");
      const auto rows = fpec::gamma_profile(l, e1, e2, min_orders);
      deliver(format == "json" ? fpec::to_json(rows).dump(2) + "\n" : fpec::gamma_to_csv(rows), path);
      return 0;
    }

    if (invert->parsed()) {
      fpec::StochasticPauliChannel ch;
      if (!channel_file.empty()) {
        ch = fpec::load_channel_file(channel_file);
      } else if (!invert_opts.config.empty()) {
        const auto c = resolve_config(invert_opts);
        ch = c.assumed_channel ? *c.assumed_channel : c.channel;
      } else {
        throw fpec::ConfigError("invert: need --channel or --config");
      }
      deliver(fpec::quasi_to_json(fpec::invert_channel(ch)).dump(2) + "\n", out_path(invert_opts));
      return 0;
    }

    if (estimate->parsed()) {
      fpec::ExperimentConfig c = resolve_config(estimate_opts);
      if (!methods.empty()) {
        c.methods.clear();
        for (const auto& m : methods) c.methods.push_back(fpec::parse_method(m));
      }
      const std::size_t depth = steps.value_or(c.steps.front());
      c.steps = {depth};
      if (c.format == "csv") return finish_sweep(fpec::run_sweep(c), c);
      const auto exact = fpec::exact_value_for(c, depth);
      nlohmann::json reports = nlohmann::json::array();
      for (fpec::Method m : c.methods) {
        const fpec::PointResult p = fpec::run_point(c, depth, m);
        nlohmann::json j = fpec::to_json(p.report);
        if (p.zne) j["zne"] = fpec::to_json(*p.zne);
        reports.push_back(j);
      }
      const nlohmann::json doc{{"steps", depth},
                               {"exact_value", exact ? nlohmann::json(*exact) : nlohmann::json(nullptr)},
                               {"reports", reports}};
      deliver(doc.dump(2) + "\n", c.output);
      return 0;
    }

    if (sweep->parsed()) {
      const auto c = resolve_config(sweep_opts);
      return finish_sweep(fpec::run_sweep(c), c);
    }

    if (mischar->parsed()) {
      const auto c = resolve_config(mischar_opts);
      return finish_sweep(fpec::mischaracterization_study(c), c);
    }
  } catch (const fpec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fpec::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fpec::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
