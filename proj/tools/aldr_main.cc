// tools/aldr_main.cc

// Copyright 2026  The ALDR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <iostream>

#include "CLI11.hpp"
#include "aldr/commands.h"
#include "aldr/error.h"

int main(int argc, char **argv) {
  CLI::App app{"aldr: adversarial disentanglement of speaker embeddings"};
  app.require_subcommand(1);

  aldr::cli::GenerateArgs ga;
  CLI::App *gen = app.add_subcommand(
      "generate", "materialize a synthetic speaker dataset");
  gen->add_option("--out", ga.out_dir, "output directory")->required();
  gen->add_option("--speakers", ga.speakers, "number of speakers");
  gen->add_option("--nuisance", ga.nuisance, "number of nuisance classes");
  gen->add_option("--utts", ga.utts, "utterances per speaker");
  CLI::Option *gen_seed = gen->add_option("--seed", ga.seed, "dataset seed");
  gen->add_option("--seconds", ga.seconds, "utterance length in seconds");
  gen->add_flag("--force", ga.force, "overwrite a non-empty directory");

  aldr::cli::TrainArgs ta;
  CLI::App *train =
      app.add_subcommand("train", "run the two-phase training schedule");
  train->add_option("--config", ta.config_path, "key=value run config")
      ->required();
  train->add_option("--ablation", ta.ablation,
                    "override the configured training branch");
  train->add_option("--resume", ta.resume, "checkpoint to continue from");

  aldr::cli::EvalArgs ea;
  CLI::App *eval =
      app.add_subcommand("eval", "score a trial list and emit reports");
  eval->add_option("--checkpoint", ea.checkpoint, "trained model checkpoint")
      ->required();
  eval->add_option("--trials", ea.trials, "trial list file")->required();
  eval->add_option("--manifest", ea.manifest,
                   "manifest (default: manifest.txt next to the trials)");
  eval->add_option("--out", ea.out_dir, "report output directory")->required();
  eval->add_flag("--probe", ea.probe,
                 "fit speaker/nuisance linear probes on both features");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // flag mistakes are config faults
  }

  try {
    if (gen->parsed()) {
      if (gen_seed->count() == 0) ga.seed = aldr::cli::seed_from_env(ga.seed);
      aldr::cli::cmd_generate(ga, std::cout);
    } else if (train->parsed()) {
      aldr::cli::cmd_train(ta, std::cout);
    } else if (eval->parsed()) {
      aldr::cli::cmd_eval(ea, std::cout);
    }
  } catch (const aldr::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const aldr::DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const aldr::NumericError &e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
