// Copyright 2026 The fmdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fmd/anonymity.hpp"
#include "fmd/attacks.hpp"
#include "fmd/dp.hpp"
#include "fmd/experiment.hpp"
#include "fmd/game.hpp"
#include "fmd/graph.hpp"
#include "fmd/simulate.hpp"

namespace {

using nlohmann::json;

int g_exit_code = 0;

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Commands draw and announce a seed when none was given, so every run is
// reproducible from its own output.
void finalize_seed(fmd::ExperimentConfig* config) {
  if (!config->seed_set) {
    config->seed = entropy_seed();
    config->seed_set = true;
    std::cout << "seed: " << config->seed << '\n';
  }
}

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + output_path);
  out << text;
}

// Shared experiment options; each field records whether the flag was passed so
// config-file values are only overridden explicitly.
struct ExperimentCli {
  CLI::Option* config_opt = nullptr;
  std::string config_path;
  fmd::ExperimentConfig flags;
  CLI::Option* dataset_opt = nullptr;
  CLI::Option* output_opt = nullptr;
  CLI::Option* rates_opt = nullptr;
  CLI::Option* folds_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* epoch_opt = nullptr;
  CLI::Option* backend_opt = nullptr;
  CLI::Option* epochs_random_opt = nullptr;
  CLI::Option* unordered_opt = nullptr;
  CLI::Option* dump_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  fmd::ExperimentConfig resolve() const {
    fmd::ExperimentConfig config;
    if (config_opt->count() > 0) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config file: " + config_path);
      fmd::apply_config_entries(fmd::parse_key_value_file(in, config_path), &config);
    }
    if (dataset_opt->count() > 0) config.dataset_path = flags.dataset_path;
    if (output_opt->count() > 0) config.output_dir = flags.output_dir;
    if (rates_opt->count() > 0) config.rate_exponents = flags.rate_exponents;
    if (folds_opt->count() > 0) config.folds = flags.folds;
    if (seed_opt->count() > 0) {
      config.seed = flags.seed;
      config.seed_set = true;
    }
    if (alpha_opt->count() > 0) config.alpha = flags.alpha;
    if (epoch_opt->count() > 0) config.epoch_size = flags.epoch_size;
    if (backend_opt->count() > 0) config.backend = flags.backend;
    if (epochs_random_opt->count() > 0) config.epochs_random = flags.epochs_random;
    if (unordered_opt->count() > 0) config.unordered_pairs = flags.unordered_pairs;
    if (dump_opt->count() > 0) config.dump_all_pairs = flags.dump_all_pairs;
    if (threads_opt->count() > 0) config.threads = flags.threads;
    if (config.dataset_path.empty()) {
      throw CLI::ValidationError("dataset", "a dataset path is required (flag or config file)");
    }
    return config;
  }
};

void add_experiment_options(CLI::App* cmd, ExperimentCli* cli, bool dataset_positional) {
  cli->config_opt = cmd->add_option("--config", cli->config_path, "flat key = value config file");
  if (dataset_positional) {
    cli->dataset_opt = cmd->add_option("dataset", cli->flags.dataset_path, "edge list file");
  } else {
    cli->dataset_opt = cmd->add_option("--dataset", cli->flags.dataset_path, "edge list file");
  }
  cli->output_opt = cmd->add_option("--output-dir", cli->flags.output_dir, "output directory")
                        ->envname("FMD_OUTPUT_DIR");
  cli->rates_opt = cmd->add_option("--rates", cli->flags.rate_exponents,
                                   "dyadic rate exponents (default 1..7)")
                       ->delimiter(',');
  cli->folds_opt = cmd->add_option("--folds", cli->flags.folds, "number of folds (default 10)");
  cli->seed_opt = cmd->add_option("--seed", cli->flags.seed, "64-bit seed (default: entropy)");
  cli->alpha_opt = cmd->add_option("--alpha", cli->flags.alpha, "significance level (default 0.01)");
  cli->epoch_opt =
      cmd->add_option("--epoch-size", cli->flags.epoch_size, "messages per epoch (default 25000)");
  cli->backend_opt = cmd->add_option("--backend", cli->flags.backend, "aggregated | per_message")
                         ->check(CLI::IsMember({"aggregated", "per_message"}));
  cli->epochs_random_opt = cmd->add_flag("--epochs-random", cli->flags.epochs_random,
                                         "random epoch membership instead of contiguous blocks");
  cli->unordered_opt = cmd->add_flag("--unordered", cli->flags.unordered_pairs,
                                     "aggregate pair verdicts without direction");
  cli->dump_opt = cmd->add_flag("--dump-all-pairs", cli->flags.dump_all_pairs,
                                "write every tested pair, not just flagged ones");
  cli->threads_opt = cmd->add_option("--threads", cli->flags.threads, "fold-level parallelism");
}

// ---- game command support ----

struct GameCli {
  std::string config_path;
  std::string dataset;
  std::int64_t users = 0;
  double f = 1.0;
  double big_l = 0.0;
  std::int64_t total_messages = 0;
  std::vector<std::int64_t> in_counts;
  std::int64_t grid = 1001;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output_path;

  CLI::Option* f_opt = nullptr;
  CLI::Option* l_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_game_options(CLI::App* cmd, GameCli* cli) {
  cmd->add_option("--config", cli->config_path, "flat key = value game config file");
  cmd->add_option("--dataset", cli->dataset, "derive in(u) and M from an edge list");
  cmd->add_option("--users", cli->users, "number of players");
  cli->f_opt = cmd->add_option("--f", cli->f, "download cost per message (default 1)");
  cli->l_opt = cmd->add_option("--L", cli->big_l, "privacy loss (default 10*f*M)");
  cmd->add_option("--M", cli->total_messages, "total messages");
  cmd->add_option("--in", cli->in_counts, "incoming counts per user (single value broadcasts)")
      ->delimiter(',');
  cmd->add_option("--grid", cli->grid, "rate grid points (default 1001)");
  cli->seed_opt = cmd->add_option("--seed", cli->seed, "seed for randomized starts/samples");
  cmd->add_option("--output", cli->output_path, "write the JSON report here instead of stdout");
}

fmd::GameConfig build_game_config(GameCli* cli) {
  fmd::GameConfig config;
  if (!cli->config_path.empty()) {
    std::ifstream in(cli->config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + cli->config_path);
    auto entries = fmd::parse_key_value_file(in, cli->config_path);
    for (const auto& [key, value] : entries) {
      if (key == "users") {
        cli->users = std::stoll(value);
      } else if (key == "f") {
        cli->f = std::stod(value);
        cli->f_opt->add_result(value);  // mark as set
      } else if (key == "L") {
        cli->big_l = std::stod(value);
        cli->l_opt->add_result(value);
      } else if (key == "M") {
        cli->total_messages = std::stoll(value);
      } else if (key == "in_counts") {
        cli->in_counts.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) cli->in_counts.push_back(std::stoll(item));
      } else if (key == "dataset") {
        cli->dataset = value;
      } else {
        throw std::runtime_error("unknown game config key '" + key + "'");
      }
    }
  }
  if (!cli->dataset.empty()) {
    fmd::CommGraph graph = fmd::load_edge_list(cli->dataset);
    fmd::DegreeStats stats = fmd::degree_stats(graph);
    config.user_count = graph.user_count;
    config.total_messages = graph.message_count();
    config.in_counts = stats.in_degree;
  } else {
    if (cli->users < 1) throw CLI::ValidationError("--users", "a player count is required");
    config.user_count = cli->users;
    config.total_messages = cli->total_messages;
    if (cli->in_counts.empty()) {
      throw CLI::ValidationError("--in", "incoming counts are required without --dataset");
    }
    if (static_cast<std::int64_t>(cli->in_counts.size()) == 1 && cli->users > 1) {
      cli->in_counts.assign(static_cast<std::size_t>(cli->users), cli->in_counts[0]);
    }
    config.in_counts = cli->in_counts;
  }
  config.download_cost_f = cli->f;
  config.privacy_loss_L = cli->l_opt->count() > 0
                              ? cli->big_l
                              : 10.0 * cli->f * static_cast<double>(config.total_messages);
  fmd::validate_config(config);
  return config;
}

std::uint64_t game_seed(GameCli* cli) {
  if (cli->seed_opt->count() == 0 && !cli->seed_set) {
    cli->seed = entropy_seed();
    cli->seed_set = true;
    std::cout << "seed: " << cli->seed << '\n';
  }
  return cli->seed;
}

json game_config_json(const fmd::GameConfig& config) {
  return json{{"users", config.user_count},
              {"f", config.download_cost_f},
              {"L", config.privacy_loss_L},
              {"M", config.total_messages},
              {"in_counts", config.in_counts}};
}

fmd::StrategyProfile random_profile(const fmd::GameConfig& config, std::uint64_t seed) {
  fmd::KeyedStream stream = fmd::make_stream(seed, 0, fmd::StreamDomain::game_random, 0);
  fmd::StrategyProfile profile(static_cast<std::size_t>(config.user_count));
  for (double& p : profile) p = stream.next_double();
  return profile;
}

// ---- calc helpers ----

std::vector<double> dyadic_values(unsigned lo, unsigned hi) {
  std::vector<double> values;
  for (unsigned l = lo; l <= hi; ++l) values.push_back(std::ldexp(1.0, -static_cast<int>(l)));
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy analysis toolkit for fuzzy message detection"};
  app.require_subcommand(1);

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "load an edge list and dump degree statistics");
  auto ingest_cli = std::make_shared<ExperimentCli>();
  add_experiment_options(ingest, ingest_cli.get(), true);
  ingest->callback([ingest_cli] {
    fmd::ExperimentConfig config = ingest_cli->resolve();
    finalize_seed(&config);
    g_exit_code = fmd::cmd_ingest(config);
  });

  // ---- reproduce ----
  auto* reproduce =
      app.add_subcommand("reproduce", "run the full multi-fold attack reproduction pipeline");
  auto reproduce_cli = std::make_shared<ExperimentCli>();
  add_experiment_options(reproduce, reproduce_cli.get(), true);
  reproduce->callback([reproduce_cli] {
    fmd::ExperimentConfig config = reproduce_cli->resolve();
    finalize_seed(&config);
    g_exit_code = fmd::cmd_reproduce(config);
  });

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "one simulation fold, tag table to CSV");
  auto simulate_cli = std::make_shared<ExperimentCli>();
  add_experiment_options(simulate, simulate_cli.get(), true);
  auto with_epochs = std::make_shared<bool>(false);
  simulate->add_flag("--with-epochs", *with_epochs, "also write per-epoch counts");
  simulate->callback([simulate_cli, with_epochs] {
    fmd::ExperimentConfig config = simulate_cli->resolve();
    finalize_seed(&config);
    g_exit_code = fmd::cmd_simulate(config, *with_epochs);
  });

  // ---- calc ----
  auto* calc = app.add_subcommand("calc", "closed-form calculators");
  calc->require_subcommand(1);

  {  // calc ru
    auto* ru = calc->add_subcommand("ru", "recipient unlinkability advantage");
    struct RuOpts {
      std::int64_t users = 0;
      double p = -1.0;
      std::vector<double> rates;
      std::int64_t mc_trials = 0;
      bool exact = false;
      bool sweep = false;
      std::uint64_t seed = 0;
      std::string output;
      CLI::Option* seed_opt = nullptr;
    };
    auto opts = std::make_shared<RuOpts>();
    ru->add_option("--users", opts->users, "population size");
    ru->add_option("--p", opts->p, "uniform rate");
    ru->add_option("--rates-list", opts->rates, "per-user rates (enables exact/MC on them)")
        ->delimiter(',');
    ru->add_flag("--exact", opts->exact, "evaluate the exact subset sum (U <= 22)");
    ru->add_option("--mc-trials", opts->mc_trials, "also run the game this many trials");
    ru->add_flag("--sweep", opts->sweep, "emit the approx heatmap CSV (U,p,advantage)");
    opts->seed_opt = ru->add_option("--seed", opts->seed, "Monte-Carlo seed");
    ru->add_option("--output", opts->output, "write CSV/For sweep output here");
    ru->callback([opts] {
      if (opts->sweep) {
        std::ostringstream csv;
        csv << "U,p,advantage\n";
        for (std::int64_t u : {100, 1000, 10000, 100000, 1000000}) {
          for (double p : dyadic_values(1, 12)) {
            csv << u << ',' << p << ',' << fmd::ru_advantage_approx(u, p).value << '\n';
          }
        }
        emit(csv.str(), opts->output);
        return;
      }
      std::vector<double> rates = opts->rates;
      if (rates.empty() && opts->users > 0 && opts->p >= 0.0) {
        rates.assign(static_cast<std::size_t>(opts->users), opts->p);
      }
      if (opts->users > 0 && opts->p >= 0.0) {
        std::cout << "approx_lower_bound: " << fmd::ru_advantage_approx(opts->users, opts->p).value
                  << '\n';
      }
      if (opts->exact) {
        if (rates.empty()) throw CLI::ValidationError("--exact", "needs --rates-list or --users/--p");
        std::cout << "exact: " << fmd::ru_advantage_exact(rates).value << '\n';
      }
      if (opts->mc_trials > 0) {
        if (rates.empty()) {
          throw CLI::ValidationError("--mc-trials", "needs --rates-list or --users/--p");
        }
        if (opts->seed_opt->count() == 0) {
          opts->seed = entropy_seed();
          std::cout << "seed: " << opts->seed << '\n';
        }
        fmd::RuGameResult game = fmd::ru_game_montecarlo(rates, opts->mc_trials, opts->seed);
        std::cout << "monte_carlo overall: " << game.overall.value << " (se "
                  << *game.overall.std_error << ")\n"
                  << "monte_carlo conditional_b1: " << game.conditional_b1.value << " (se "
                  << *game.conditional_b1.std_error << ", trials " << game.trials_b1 << ")\n";
      }
      if (rates.empty() && !(opts->users > 0 && opts->p >= 0.0)) {
        throw CLI::ValidationError("ru", "give --users and --p, or --rates-list");
      }
    });
  }

  {  // calc intersection
    auto* inter = calc->add_subcommand("intersection", "anonymity set after l intersections");
    auto users = std::make_shared<std::int64_t>(0);
    auto p = std::make_shared<double>(0.0);
    auto rounds = std::make_shared<std::int64_t>(1);
    inter->add_option("--users", *users, "population size")->required();
    inter->add_option("--p", *p, "uniform rate")->required();
    inter->add_option("--rounds", *rounds, "number of intersected sets")->required();
    inter->callback([users, p, rounds] {
      fmd::IntersectionResult r = fmd::intersection_attack(*users, *p, *rounds);
      std::cout << "expected_residual: " << r.expected_residual << '\n'
                << "distribution: Binomial(n=" << r.set_size_n << ", p=" << r.member_prob << ")\n";
    });
  }

  {  // calc sybil
    auto* sybil = calc->add_subcommand("sybil", "pinpointing probability under collusion");
    auto users = std::make_shared<std::int64_t>(0);
    auto colluders = std::make_shared<std::int64_t>(0);
    auto candidates = std::make_shared<std::int64_t>(0);
    sybil->add_option("--users", *users, "population size")->required();
    sybil->add_option("--colluders", *colluders, "colluding users K")->required();
    sybil->add_option("--candidates", *candidates, "non-colluding candidates N")->required();
    sybil->callback([users, colluders, candidates] {
      std::cout << "pinpoint_prob: " << fmd::sybil_pinpoint_prob(*users, *colluders, *candidates)
                << '\n';
    });
  }

  {  // calc peedp
    auto* peedp = calc->add_subcommand("peedp", "event-level epsilon for a detection rate");
    auto p = std::make_shared<double>(-1.0);
    peedp->add_option("--p", *p, "detection rate")->required();
    peedp->callback([p] {
      double eps = fmd::peedp_epsilon(*p);
      if (std::isinf(eps)) {
        std::cout << "epsilon: inf (rate 0 leaves nothing to bound)\n";
      } else {
        std::cout << "epsilon: " << eps << '\n';
      }
    });
  }

  {  // calc incoming-dp
    auto* dp = calc->add_subcommand("incoming-dp", "(epsilon, delta) for incoming counts");
    auto ms = std::make_shared<std::vector<std::int64_t>>();
    auto ins = std::make_shared<std::vector<std::int64_t>>();
    auto ps = std::make_shared<std::vector<double>>();
    auto group = std::make_shared<bool>(false);
    auto output = std::make_shared<std::string>();
    dp->add_option("--M", *ms, "total messages (repeatable)")->required()->delimiter(',');
    dp->add_option("--in", *ins, "incoming count (repeatable)")->required()->delimiter(',');
    dp->add_option("--p", *ps, "rate (repeatable)")->required()->delimiter(',');
    dp->add_flag("--group", *group, "append the worst-user row (requires equal M)");
    dp->add_option("--output", *output, "write the CSV here instead of stdout");
    dp->callback([ms, ins, ps, group, output] {
      if (ms->size() != ins->size() || ms->size() != ps->size()) {
        throw CLI::ValidationError("incoming-dp", "--M, --in, --p must have equal counts");
      }
      std::ostringstream csv;
      csv << "M,in,p,epsilon,log10_delta,delta\n";
      for (std::size_t i = 0; i < ms->size(); ++i) {
        fmd::DpParams r = fmd::incoming_dp((*ms)[i], (*ins)[i], (*ps)[i]);
        csv << (*ms)[i] << ',' << (*ins)[i] << ',' << (*ps)[i] << ',' << r.epsilon << ','
            << r.log10_delta << ',' << fmd::delta_decimal_string(r.log10_delta) << '\n';
      }
      if (*group) {
        for (std::size_t i = 1; i < ms->size(); ++i) {
          if ((*ms)[i] != (*ms)[0]) {
            throw CLI::ValidationError("--group", "all --M values must match");
          }
        }
        fmd::DpParams g = fmd::incoming_dp_group((*ms)[0], *ins, *ps);
        csv << (*ms)[0] << ",group,max," << g.epsilon << ',' << g.log10_delta << ','
            << fmd::delta_decimal_string(g.log10_delta) << '\n';
      }
      emit(csv.str(), *output);
    });
  }

  {  // calc min-expose
    auto* expose = calc->add_subcommand("min-expose", "smallest exposing message count");
    auto out_count = std::make_shared<std::int64_t>(0);
    auto p = std::make_shared<double>(-1.0);
    auto alpha = std::make_shared<double>(0.01);
    auto sweep = std::make_shared<bool>(false);
    auto outs = std::make_shared<std::vector<std::int64_t>>(
        std::vector<std::int64_t>{30, 100, 300, 1000});
    auto output = std::make_shared<std::string>();
    expose->add_option("--out", *out_count, "sender's total sent messages");
    expose->add_option("--p", *p, "recipient's rate");
    expose->add_option("--alpha", *alpha, "significance level");
    expose->add_flag("--sweep", *sweep, "emit CSV over --outs and dyadic rates 2^-1..2^-7");
    expose->add_option("--outs", *outs, "sweep grid of out values")->delimiter(',');
    expose->add_option("--output", *output, "write the CSV here instead of stdout");
    expose->callback([out_count, p, alpha, sweep, outs, output] {
      fmd::SignificanceLevel level{*alpha};
      if (*sweep) {
        std::ostringstream csv;
        csv << "out,p,min_exposing\n";
        for (std::int64_t n : *outs) {
          for (double rate : dyadic_values(1, 7)) {
            auto result = fmd::min_exposing_messages(n, fmd::DetectionRate::from_value(rate), level);
            csv << n << ',' << rate << ',';
            if (result) {
              csv << *result;
            } else {
              csv << "none";
            }
            csv << '\n';
          }
        }
        emit(csv.str(), *output);
        return;
      }
      if (*out_count < 1 || *p < 0.0) {
        throw CLI::ValidationError("min-expose", "give --out and --p (or --sweep)");
      }
      auto result = fmd::min_exposing_messages(*out_count, fmd::DetectionRate::from_value(*p), level);
      if (result) {
        std::cout << "min_exposing_messages: " << *result << '\n';
      } else {
        std::cout << "min_exposing_messages: none\n";
      }
    });
  }

  {  // calc min-rate
    auto* min_rate = calc->add_subcommand("min-rate", "smallest deniability-preserving rate");
    auto epoch_messages = std::make_shared<std::int64_t>(25000);
    auto in_epoch = std::make_shared<std::int64_t>(-1);
    auto alpha = std::make_shared<double>(0.01);
    auto sweep = std::make_shared<bool>(false);
    auto in_max = std::make_shared<std::int64_t>(60);
    auto output = std::make_shared<std::string>();
    min_rate->add_option("--epoch-messages", *epoch_messages, "messages in the epoch");
    min_rate->add_option("--in", *in_epoch, "genuine incoming messages in the epoch");
    min_rate->add_option("--alpha", *alpha, "significance level");
    min_rate->add_flag("--sweep", *sweep, "emit CSV over in = 1..in-max");
    min_rate->add_option("--in-max", *in_max, "sweep upper bound (default 60)");
    min_rate->add_option("--output", *output, "write the CSV here instead of stdout");
    min_rate->callback([epoch_messages, in_epoch, alpha, sweep, in_max, output] {
      fmd::SignificanceLevel level{*alpha};
      if (*sweep) {
        std::ostringstream csv;
        csv << "epoch_messages,in,min_rate\n";
        for (std::int64_t in = 1; in <= *in_max; ++in) {
          csv << *epoch_messages << ',' << in << ','
              << fmd::min_rate_for_tda(*epoch_messages, in, level) << '\n';
        }
        emit(csv.str(), *output);
        return;
      }
      if (*in_epoch < 0) throw CLI::ValidationError("min-rate", "give --in (or --sweep)");
      std::cout << "min_rate_for_tda: " << fmd::min_rate_for_tda(*epoch_messages, *in_epoch, level)
                << '\n';
    });
  }

  // ---- game ----
  auto* game = app.add_subcommand("game", "rate-selection game analyses");
  game->require_subcommand(1);

  {  // game br
    auto* br = game->add_subcommand("br", "best-response dynamics from a random start");
    auto cli = std::make_shared<GameCli>();
    add_game_options(br, cli.get());
    auto max_iters = std::make_shared<std::int64_t>(100);
    br->add_option("--max-iters", *max_iters, "maximum rounds (default 100)");
    br->callback([cli, max_iters] {
      fmd::GameConfig config = build_game_config(cli.get());
      fmd::StrategyProfile initial = random_profile(config, game_seed(cli.get()));
      fmd::BrResult result = fmd::br_dynamics(initial, config, *max_iters, cli->grid);
      json report{{"config", game_config_json(config)},
                  {"initial", initial},
                  {"final", result.final},
                  {"rounds", result.rounds},
                  {"accepted_steps", result.accepted_steps},
                  {"converged", result.converged},
                  {"potential_trace", result.potential_trace},
                  {"final_is_nash", fmd::is_nash(result.final, config, cli->grid, 1e-9)}};
      emit(report.dump(2) + "\n", cli->output_path);
    });
  }

  {  // game nash-check
    auto* nash = game->add_subcommand("nash-check", "verify a profile is an equilibrium");
    auto cli = std::make_shared<GameCli>();
    add_game_options(nash, cli.get());
    auto profile = std::make_shared<std::vector<double>>();
    auto tolerance = std::make_shared<double>(1e-9);
    nash->add_option("--profile", *profile, "rates (default all zero; single value broadcasts)")
        ->delimiter(',');
    nash->add_option("--tolerance", *tolerance, "improvement tolerance (default 1e-9)");
    nash->callback([cli, profile, tolerance] {
      fmd::GameConfig config = build_game_config(cli.get());
      fmd::StrategyProfile p(*profile);
      if (p.empty()) p.assign(static_cast<std::size_t>(config.user_count), 0.0);
      if (p.size() == 1 && config.user_count > 1) {
        p.assign(static_cast<std::size_t>(config.user_count), p[0]);
      }
      json report{{"config", game_config_json(config)},
                  {"profile", p},
                  {"grid", cli->grid},
                  {"tolerance", *tolerance},
                  {"is_nash", fmd::is_nash(p, config, cli->grid, *tolerance)}};
      emit(report.dump(2) + "\n", cli->output_path);
    });
  }

  {  // game so
    auto* so = game->add_subcommand("so", "social-optimum condition and uniform optimum");
    auto cli = std::make_shared<GameCli>();
    add_game_options(so, cli.get());
    so->callback([cli] {
      fmd::GameConfig config = build_game_config(cli.get());
      fmd::OptimalUniform best = fmd::optimal_uniform_p(config, cli->grid);
      double welfare_zero = 0.0;
      for (std::int64_t u = 0; u < config.user_count; ++u) {
        welfare_zero += fmd::uniform_utility(0.0, static_cast<std::size_t>(u), config);
      }
      // All-zero is the unique equilibrium, so its welfare anchors the
      // (experimental) efficiency ratio.
      json report{{"config", game_config_json(config)},
                  {"so_condition", fmd::so_condition(config)},
                  {"p_star", best.p_star},
                  {"welfare_at_p_star", best.welfare},
                  {"welfare_at_zero", welfare_zero},
                  {"welfare_gain", best.welfare - welfare_zero},
                  {"efficiency_ratio_experimental",
                   best.welfare != 0.0 ? welfare_zero / best.welfare : 1.0}};
      emit(report.dump(2) + "\n", cli->output_path);
    });
  }

  {  // game potential-check
    auto* pot = game->add_subcommand("potential-check", "sample the exact-potential identity");
    auto cli = std::make_shared<GameCli>();
    add_game_options(pot, cli.get());
    auto samples = std::make_shared<std::int64_t>(1000);
    auto tolerance = std::make_shared<double>(1e-9);
    pot->add_option("--samples", *samples, "random deviations to test (default 1000)");
    pot->add_option("--tolerance", *tolerance, "relative tolerance (default 1e-9)");
    pot->callback([cli, samples, tolerance] {
      fmd::GameConfig config = build_game_config(cli.get());
      fmd::KeyedStream stream =
          fmd::make_stream(game_seed(cli.get()), 0, fmd::StreamDomain::game_random, 1);
      double max_violation = 0.0;
      for (std::int64_t s = 0; s < *samples; ++s) {
        fmd::StrategyProfile profile(static_cast<std::size_t>(config.user_count));
        for (double& p : profile) p = stream.next_double();
        std::size_t u = static_cast<std::size_t>(stream.uniform_index(
            static_cast<std::uint64_t>(config.user_count)));
        double deviated = stream.next_double();
        double before_u = fmd::utility(u, profile, config).total;
        double before_pot = fmd::potential(profile, config);
        fmd::StrategyProfile changed = profile;
        changed[u] = deviated;
        double du = fmd::utility(u, changed, config).total - before_u;
        double dpot = fmd::potential(changed, config) - before_pot;
        double scale = std::max({1.0, std::fabs(du), std::fabs(dpot)});
        max_violation = std::max(max_violation, std::fabs(du - dpot) / scale);
      }
      json report{{"config", game_config_json(config)},
                  {"samples", *samples},
                  {"max_relative_violation", max_violation},
                  {"tolerance", *tolerance},
                  {"identity_holds", max_violation < *tolerance}};
      emit(report.dump(2) + "\n", cli->output_path);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems exit 2, --help exits 0
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return g_exit_code;
}
