// Copyright 2026 The RelPrior Authors.
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

#ifndef RELPRIOR_COMMANDS_H_
#define RELPRIOR_COMMANDS_H_

// The CLI subcommands as library functions returning process exit codes.

#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "relprior/config.h"
#include "relprior/corpus.h"

namespace relprior {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitBackend = 2,
  kExitSelftest = 3,
};

// Backend-side failures map to kExitBackend, everything else to
// kExitValidation.
int ExitCodeFor(const absl::Status& status);

struct CommandIo {
  std::ostream& out;
  std::ostream& err;
};

// paths.rel_info (or the bundled set) plus paths.aliases when set.
absl::StatusOr<RelationRegistry> LoadRegistry(const AppConfig& config);

// The split named `split`; "selftest" is the bundled fixture.
absl::StatusOr<LoadedCorpus> LoadSplit(const AppConfig& config,
                                       const std::string& split,
                                       const RelationRegistry& registry);

// Prints one statistics row per split.
int CmdStats(const AppConfig& config, const std::vector<std::string>& splits,
             CommandIo io);
// task: epf|rc|head|tail|all. Writes {out_dir}/export/{task}.jsonl.
int CmdExport(const AppConfig& config, const std::string& split,
              const std::string& task, CommandIo io);
// Writes {out_dir}/predictions.json and {out_dir}/results.jsonl. Responses
// are cached in paths.run_log, so an interrupted run resumes from it.
int CmdRun(const AppConfig& config, const std::string& split, CommandIo io);
// Writes {out_dir}/metrics.json and {out_dir}/per_relation.csv. An empty
// train_split disables the Ign correction.
int CmdEval(const AppConfig& config, const std::string& predictions_path,
            const std::string& split, const std::string& train_split,
            CommandIo io);
// Prints the stage report and writes {out_dir}/stage_report.{txt,csv}.
int CmdReport(const AppConfig& config, const std::string& results_path,
              CommandIo io);
// Zero-noise oracle over the bundled fixture. Passes iff stage-EPF F1 = 1
// and fused recall = 1; fused precision is reported, not gated.
int CmdSelftest(const AppConfig& config, CommandIo io);

}  // namespace relprior

#endif  // RELPRIOR_COMMANDS_H_
