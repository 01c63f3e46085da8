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

#ifndef FMD_EXPERIMENT_HPP_
#define FMD_EXPERIMENT_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fmd {

// Flat experiment parameters; file values are overridden by CLI flags.
struct ExperimentConfig {
  std::string dataset_path;
  std::string output_dir = ".";
  std::vector<unsigned> rate_exponents = {1, 2, 3, 4, 5, 6, 7};
  std::int64_t folds = 10;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double alpha = 0.01;
  std::int64_t epoch_size = 25000;
  std::string backend = "aggregated";  // relationship scan; epochs are always per-message
  bool epochs_random = false;
  bool unordered_pairs = false;
  bool dump_all_pairs = false;
  int threads = 0;  // 0: hardware default
};

// Flat "key = value" lines, '#' comments. Unknown keys are an error.
std::map<std::string, std::string> parse_key_value_file(std::istream& in, const std::string& name);
void apply_config_entries(const std::map<std::string, std::string>& entries,
                          ExperimentConfig* config);

// Full pipeline: per fold, assign rates, simulate, run both scans; write
// per-fold CSVs plus aggregate summary JSON into output_dir. Returns the
// process exit code.
int cmd_reproduce(const ExperimentConfig& config);

// Load a dataset, assign fold-0 rates, dump the degree CSV, print a summary.
int cmd_ingest(const ExperimentConfig& config);

// One fold of simulation; writes the tag table CSV (and epoch CSV when
// epoch_size > 0) and prints the fuzzy edge count.
int cmd_simulate(const ExperimentConfig& config, bool with_epochs);

}  // namespace fmd

#endif  // FMD_EXPERIMENT_HPP_
