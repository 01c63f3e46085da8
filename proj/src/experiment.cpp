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

#include "fmd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "fmd/attacks.hpp"
#include "fmd/graph.hpp"
#include "fmd/simulate.hpp"

namespace fmd {
namespace {

using nlohmann::json;

std::vector<DetectionRate> to_rate_set(const std::vector<unsigned>& exponents) {
  if (exponents.empty()) throw std::invalid_argument("rate set must be non-empty");
  std::vector<DetectionRate> set;
  set.reserve(exponents.size());
  for (unsigned l : exponents) set.push_back(DetectionRate::dyadic(l));
  return set;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

// Sample standard deviation; 0 for fewer than two folds.
double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

json confusion_json(const ConfusionStats& c, const ScanMetadata& meta) {
  return json{{"tp", c.true_positive},
              {"fp", c.false_positive},
              {"fn", c.false_negative},
              {"tn", c.true_negative},
              {"precision", c.precision()},
              {"recall", c.recall()},
              {"tested", meta.tested},
              {"guard_violations", meta.guard_violations},
              {"inapplicable", meta.inapplicable}};
}

struct FoldOutput {
  ConfusionStats rel;
  ScanMetadata rel_meta;
  ConfusionStats tda;
  ScanMetadata tda_meta;
  std::int64_t fuzzy_edges = 0;
  // (recipient rate, exchanged count) -> (tested pairs, flagged pairs)
  std::map<std::pair<double, std::int64_t>, std::pair<std::int64_t, std::int64_t>> breakdown;
};

int thread_count(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(fold) for every fold on up to `threads` workers; rethrows the first
// failure after all workers join.
void for_each_fold(std::int64_t folds, int threads, const std::function<void(std::int64_t)>& fn) {
  int workers = std::min<std::int64_t>(threads, folds);
  if (workers <= 1) {
    for (std::int64_t k = 0; k < folds; ++k) fn(k);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t k = next.fetch_add(1); k < folds; k = next.fetch_add(1)) fn(k);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::map<std::string, std::string> parse_key_value_file(std::istream& in,
                                                        const std::string& name) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t\r");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty key");
    }
    entries[key] = value;
  }
  return entries;
}

void apply_config_entries(const std::map<std::string, std::string>& entries,
                          ExperimentConfig* config) {
  auto parse_bool = [](const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config key '" + key + "': expected true/false, got '" + v + "'");
  };
  for (const auto& [key, value] : entries) {
    try {
      if (key == "dataset") {
        config->dataset_path = value;
      } else if (key == "output_dir") {
        config->output_dir = value;
      } else if (key == "rate_exponents") {
        std::vector<unsigned> exps;
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) exps.push_back(static_cast<unsigned>(std::stoul(item)));
        config->rate_exponents = exps;
      } else if (key == "folds") {
        config->folds = std::stoll(value);
      } else if (key == "seed") {
        config->seed = std::stoull(value);
        config->seed_set = true;
      } else if (key == "alpha") {
        config->alpha = std::stod(value);
      } else if (key == "epoch_size") {
        config->epoch_size = std::stoll(value);
      } else if (key == "backend") {
        if (value != "aggregated" && value != "per_message") {
          throw std::runtime_error("backend must be 'aggregated' or 'per_message'");
        }
        config->backend = value;
      } else if (key == "epochs_random") {
        config->epochs_random = parse_bool(value, key);
      } else if (key == "unordered") {
        config->unordered_pairs = parse_bool(value, key);
      } else if (key == "dump_all_pairs") {
        config->dump_all_pairs = parse_bool(value, key);
      } else if (key == "threads") {
        config->threads = std::stoi(value);
      } else {
        throw std::runtime_error("unknown config key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config key '" + key + "': cannot parse value '" + value + "'");
    } catch (const std::out_of_range&) {
      throw std::runtime_error("config key '" + key + "': value out of range: '" + value + "'");
    }
  }
}

int cmd_reproduce(const ExperimentConfig& config) {
  if (config.folds < 1) throw std::invalid_argument("folds must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }
  const CommGraph graph = load_edge_list(config.dataset_path);
  const DegreeStats stats = degree_stats(graph);
  const std::vector<DetectionRate> rate_set = to_rate_set(config.rate_exponents);
  const SignificanceLevel level{config.alpha};
  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<FoldOutput> outputs(static_cast<std::size_t>(config.folds));
  for_each_fold(config.folds, thread_count(config), [&](std::int64_t k) {
    FoldOutput& fold_out = outputs[static_cast<std::size_t>(k)];
    const std::uint32_t fold = static_cast<std::uint32_t>(k);
    KeyedStream rate_stream = make_stream(config.seed, fold, StreamDomain::rate_assign, 0);
    RateAssignment rates = assign_rates(graph, rate_set, rate_stream);
    {
      std::ofstream deg = open_out(out_dir / ("degrees_fold" + std::to_string(k) + ".csv"));
      write_degree_csv(graph, stats, rates, deg);
    }

    SimulationRun run{config.seed, fold,
                      config.backend == "per_message" ? Backend::per_message : Backend::aggregated};
    TagTable table = simulate(graph, stats, rates, run);
    fold_out.fuzzy_edges = table.fuzzy_edge_count();

    std::unique_ptr<std::ofstream> all_rows;
    if (config.dump_all_pairs) {
      all_rows = std::make_unique<std::ofstream>(
          out_dir / ("relationship_all_fold" + std::to_string(k) + ".csv"));
      write_relationship_header(*all_rows);
    }
    RelRowSink sink = [&](const PairTestResult& r, bool truth) {
      std::int64_t exchanged = stats.pair_count(r.sender, r.recipient);
      auto& cell = fold_out.breakdown[{rates.rate(r.recipient).value(), exchanged}];
      ++cell.first;
      cell.second += r.verdict == Verdict::flagged ? 1 : 0;
      if (all_rows) {
        write_relationship_row(*all_rows, graph.original_ids[r.sender],
                               graph.original_ids[r.recipient], r, truth);
      }
    };
    RelationshipScanResult rel =
        relationship_scan(table, stats, rates, level, config.unordered_pairs, sink);
    fold_out.rel = rel.confusion;
    fold_out.rel_meta = rel.meta;
    {
      std::ofstream flagged =
          open_out(out_dir / ("relationship_flagged_fold" + std::to_string(k) + ".csv"));
      write_relationship_header(flagged);
      for (const PairTestResult& r : rel.flagged) {
        write_relationship_row(flagged, graph.original_ids[r.sender],
                               graph.original_ids[r.recipient], r,
                               stats.pair_count(r.sender, r.recipient) >= 1);
      }
    }

    EpochPartition epochs =
        partition_epochs(graph, rates, run, config.epoch_size, config.epochs_random);
    TdaScanResult tda = tda_scan(epochs, rates, level);
    fold_out.tda = tda.confusion;
    fold_out.tda_meta = tda.meta;
    {
      std::ofstream tda_csv = open_out(out_dir / ("tda_fold" + std::to_string(k) + ".csv"));
      write_tda_csv(tda, graph, tda_csv);
    }
  });

  // Aggregate across folds (deterministic fold order).
  json summary;
  summary["dataset"] = config.dataset_path;
  summary["users"] = graph.user_count;
  summary["messages"] = graph.message_count();
  summary["self_loops_dropped"] = graph.self_loops_dropped;
  summary["folds"] = config.folds;
  summary["seed"] = config.seed;
  summary["alpha"] = config.alpha;
  summary["epoch_size"] = config.epoch_size;
  summary["backend"] = config.backend;
  summary["unordered_pairs"] = config.unordered_pairs;

  std::vector<double> rel_prec, rel_rec, tda_prec, tda_rec, fuzzy;
  json rel_folds = json::array();
  json tda_folds = json::array();
  for (std::int64_t k = 0; k < config.folds; ++k) {
    const FoldOutput& f = outputs[static_cast<std::size_t>(k)];
    rel_prec.push_back(f.rel.precision());
    rel_rec.push_back(f.rel.recall());
    tda_prec.push_back(f.tda.precision());
    tda_rec.push_back(f.tda.recall());
    fuzzy.push_back(static_cast<double>(f.fuzzy_edges));
    json rf = confusion_json(f.rel, f.rel_meta);
    rf["fold"] = k;
    rel_folds.push_back(rf);
    json tf = confusion_json(f.tda, f.tda_meta);
    tf["fold"] = k;
    tda_folds.push_back(tf);
  }
  summary["relationship"] = json{{"per_fold", rel_folds},
                                 {"precision_mean", mean_of(rel_prec)},
                                 {"precision_stddev", stddev_of(rel_prec)},
                                 {"recall_mean", mean_of(rel_rec)},
                                 {"recall_stddev", stddev_of(rel_rec)}};
  summary["tda"] = json{{"per_fold", tda_folds},
                        {"precision_mean", mean_of(tda_prec)},
                        {"precision_stddev", stddev_of(tda_prec)},
                        {"recall_mean", mean_of(tda_rec)},
                        {"recall_stddev", stddev_of(tda_rec)}};
  summary["fuzzy_edges"] = json{{"per_fold", fuzzy}, {"mean", mean_of(fuzzy)}};

  {
    std::ofstream summary_out = open_out(out_dir / "summary.json");
    summary_out << summary.dump(2) << '\n';
  }
  {
    // Pooled (rate, exchanged-count) flag-rate breakdown across folds.
    std::map<std::pair<double, std::int64_t>, std::pair<std::int64_t, std::int64_t>> merged;
    for (const FoldOutput& f : outputs) {
      for (const auto& [key, cell] : f.breakdown) {
        merged[key].first += cell.first;
        merged[key].second += cell.second;
      }
    }
    std::ofstream breakdown = open_out(out_dir / "relationship_breakdown.csv");
    breakdown << "rate,exchanged,pairs,flagged,flag_rate\n";
    for (const auto& [key, cell] : merged) {
      double rate = cell.first > 0
                        ? static_cast<double>(cell.second) / static_cast<double>(cell.first)
                        : 0.0;
      breakdown << key.first << ',' << key.second << ',' << cell.first << ',' << cell.second << ','
                << rate << '\n';
    }
  }
  {
    std::ofstream fuzzy_out = open_out(out_dir / "fuzzy_edges.csv");
    fuzzy_out << "fold,fuzzy_edge_count\n";
    for (std::int64_t k = 0; k < config.folds; ++k) {
      fuzzy_out << k << ',' << outputs[static_cast<std::size_t>(k)].fuzzy_edges << '\n';
    }
  }

  std::cout << "reproduce: users=" << graph.user_count << " messages=" << graph.message_count()
            << " folds=" << config.folds << '\n'
            << "relationship precision=" << mean_of(rel_prec) << " recall=" << mean_of(rel_rec)
            << '\n'
            << "tda precision=" << mean_of(tda_prec) << " recall=" << mean_of(tda_rec) << '\n'
            << "fuzzy edges mean=" << mean_of(fuzzy) << '\n'
            << "outputs in " << out_dir.string() << '\n';
  return 0;
}

int cmd_ingest(const ExperimentConfig& config) {
  const CommGraph graph = load_edge_list(config.dataset_path);
  const DegreeStats stats = degree_stats(graph);
  KeyedStream rate_stream = make_stream(config.seed, 0, StreamDomain::rate_assign, 0);
  RateAssignment rates = assign_rates(graph, to_rate_set(config.rate_exponents), rate_stream);
  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);
  std::ofstream deg = open_out(out_dir / "degrees.csv");
  write_degree_csv(graph, stats, rates, deg);
  std::cout << "users=" << graph.user_count << " messages=" << graph.message_count()
            << " self_loops_dropped=" << graph.self_loops_dropped << '\n'
            << "degree table: " << (out_dir / "degrees.csv").string() << '\n';
  return 0;
}

int cmd_simulate(const ExperimentConfig& config, bool with_epochs) {
  const CommGraph graph = load_edge_list(config.dataset_path);
  const DegreeStats stats = degree_stats(graph);
  KeyedStream rate_stream = make_stream(config.seed, 0, StreamDomain::rate_assign, 0);
  RateAssignment rates = assign_rates(graph, to_rate_set(config.rate_exponents), rate_stream);
  SimulationRun run{config.seed, 0,
                    config.backend == "per_message" ? Backend::per_message : Backend::aggregated};
  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);

  TagTable table = simulate(graph, stats, rates, run);
  {
    std::ofstream tags = open_out(out_dir / "tags.csv");
    write_tag_table_csv(table, stats, graph, tags);
  }
  if (with_epochs) {
    EpochPartition epochs =
        partition_epochs(graph, rates, run, config.epoch_size, config.epochs_random);
    std::ofstream epochs_csv = open_out(out_dir / "epochs.csv");
    write_epoch_csv(epochs, graph, epochs_csv);
  }
  std::cout << "fuzzy_edge_count=" << table.fuzzy_edge_count() << '\n'
            << "outputs in " << out_dir.string() << '\n';
  return 0;
}

}  // namespace fmd
