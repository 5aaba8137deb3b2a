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

// Command-line entry point: relprior <stats|export|run|eval|report|selftest>.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relprior/commands.h"
#include "relprior/config.h"

int main(int argc, char** argv) {
  CLI::App app{"RelPrior document-level relation extraction"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON file of dotted configuration keys");
  app.add_option("--set", overrides, "key=value override (repeatable)");

  std::vector<std::string> stats_splits;
  auto* stats = app.add_subcommand("stats", "corpus statistics per split");
  stats->add_option("splits", stats_splits, "split names")
      ->default_val(std::vector<std::string>{"docred_train", "docred_dev",
                                             "redocred_train", "redocred_dev",
                                             "redocred_test"});

  std::string export_split = "docred_train";
  std::string export_task = "all";
  auto* exp = app.add_subcommand("export", "write fine-tuning JSONL datasets");
  exp->add_option("--split", export_split);
  exp->add_option("--task", export_task, "epf|rc|head|tail|all");

  std::string run_split = "docred_dev";
  auto* run = app.add_subcommand("run", "run the pipeline over a split");
  run->add_option("--split", run_split);

  std::string eval_predictions;
  std::string eval_split = "docred_dev";
  std::string eval_train = "docred_train";
  auto* eval = app.add_subcommand("eval", "score a predictions file");
  eval->add_option("--predictions", eval_predictions)->required();
  eval->add_option("--split", eval_split);
  eval->add_option("--train-split", eval_train, "empty disables the Ign correction");

  std::string report_results;
  auto* report = app.add_subcommand("report", "stage counts from results.jsonl");
  report->add_option("--results", report_results)->required();

  auto* selftest = app.add_subcommand("selftest", "zero-noise oracle on the bundled fixture");

  // Subcommand options may also come after the subcommand name.
  for (CLI::App* sub : {stats, exp, run, eval, report, selftest}) {
    sub->add_option("--config", config_path);
    sub->add_option("--set", overrides);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : relprior::kExitValidation;
  }

  absl::StatusOr<relprior::AppConfig> config =
      relprior::AppConfig::Load(config_path, overrides);
  if (!config.ok()) {
    std::cerr << "error: " << config.status().message() << "\n";
    return relprior::kExitValidation;
  }
  relprior::CommandIo io{std::cout, std::cerr};
  if (*stats) return relprior::CmdStats(*config, stats_splits, io);
  if (*exp) return relprior::CmdExport(*config, export_split, export_task, io);
  if (*run) return relprior::CmdRun(*config, run_split, io);
  if (*eval) return relprior::CmdEval(*config, eval_predictions, eval_split, eval_train, io);
  if (*report) return relprior::CmdReport(*config, report_results, io);
  return relprior::CmdSelftest(*config, io);
}
