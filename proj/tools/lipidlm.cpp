//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

// lipidlm: corpus generation, pre-training, fine-tuning, structural
// analysis, embedding export and 2D projection.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lipidlm/cli/commands.hpp"
#include "lipidlm/cli/run_config.hpp"
#include "lipidlm/error.hpp"

namespace {

using namespace lipidlm;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_lipids;
  std::optional<int> epochs;
  std::string tasks;
  std::string sweep;
  cli::IoConfig io;
  std::vector<std::string> smiles;
  bool json = false;
};

std::vector<int> parse_sizes(const std::string &csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw Error(Errc::ConfigError, "--sweep expects comma-separated integers, got \"" + csv + "\"");
    }
  }
  return out;
}

/// Config file first, then flags; flags only override what they name.
cli::RunConfig resolve(const Flags &f, const std::string &command) {
  cli::RunConfig rc = f.config.empty() ? cli::RunConfig {} : cli::load_run_config(f.config);
  auto set = [](std::string &dst, const std::string &src) {
    if (!src.empty())
      dst = src;
  };
  set(rc.io.corpus, f.io.corpus);
  set(rc.io.out, f.io.out);
  set(rc.io.checkpoint, f.io.checkpoint);
  set(rc.io.data, f.io.data);
  set(rc.io.file, f.io.file);
  set(rc.io.embeddings, f.io.embeddings);
  if (!f.tasks.empty())
    rc.tasks = model::TaskSet::parse(f.tasks);
  if (!f.sweep.empty())
    rc.sweep = parse_sizes(f.sweep);
  if (f.n_lipids)
    rc.generator.n_lipids = *f.n_lipids;
  if (f.seed) {
    if (command == "gen-corpus")
      rc.generator.seed = *f.seed;
    else if (command == "pretrain")
      rc.pretrain.seed = *f.seed;
    else if (command == "finetune")
      rc.finetune.seed = *f.seed;
  }
  if (f.epochs) {
    if (command == "pretrain")
      rc.pretrain.epochs = *f.epochs;
    else if (command == "finetune")
      rc.finetune.epochs = *f.epochs;
  }
  rc.generator.validate();
  rc.pretrain.validate();
  rc.finetune.validate();
  return rc;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "Lipid SMILES language model toolkit" };
  app.require_subcommand(1);
  Flags f;

  auto add_config = [&](CLI::App *c) {
    c->add_option("--config", f.config, "RunConfig JSON file");
  };

  auto *gen = app.add_subcommand("gen-corpus", "Generate a labeled lipid corpus");
  add_config(gen);
  gen->add_option("--out", f.io.out, "Output directory");
  gen->add_option("--seed", f.seed, "Root seed");
  gen->add_option("--n", f.n_lipids, "Number of lipids");

  auto *pre = app.add_subcommand("pretrain", "Pre-train the encoder");
  add_config(pre);
  pre->add_option("--corpus", f.io.corpus, "Corpus directory from gen-corpus");
  pre->add_option("--tasks", f.tasks, "Comma-separated tasks: mlm,ntails,connseq,conntoken,headtail,pair");
  pre->add_option("--out", f.io.out, "Output directory");
  pre->add_option("--seed", f.seed, "Training seed");
  pre->add_option("--epochs", f.epochs, "Epochs");

  auto *fin = app.add_subcommand("finetune", "Fine-tune the regression head");
  add_config(fin);
  fin->add_option("--checkpoint", f.io.checkpoint, "Pre-trained checkpoint directory");
  fin->add_option("--data", f.io.data, "Labeled JSON Lines {smiles, value}");
  fin->add_option("--out", f.io.out, "Output directory");
  fin->add_option("--sweep", f.sweep, "Pre-training sizes, e.g. 500,2500,5000");
  fin->add_option("--corpus", f.io.corpus, "Corpus directory for --sweep");
  fin->add_option("--tasks", f.tasks, "Pre-training tasks for --sweep");
  fin->add_option("--seed", f.seed, "Training seed");
  fin->add_option("--epochs", f.epochs, "Epochs");

  auto *ana = app.add_subcommand("analyze", "Structural report per molecule");
  ana->add_option("--smiles", f.smiles, "SMILES to analyze (repeatable)");
  ana->add_option("--file", f.io.file, "File of SMILES or corpus records, one per line");
  ana->add_flag("--json", f.json, "JSON Lines output");

  auto *emb = app.add_subcommand("embed", "Export [CLS] embeddings as CSV");
  add_config(emb);
  emb->add_option("--checkpoint", f.io.checkpoint, "Checkpoint directory");
  emb->add_option("--file", f.io.file, "File of SMILES or corpus records");
  emb->add_option("--out", f.io.out, "Output CSV");

  auto *proj = app.add_subcommand("project", "Top-2 principal-component projection");
  add_config(proj);
  proj->add_option("--embeddings", f.io.embeddings, "Embedding CSV from embed");
  proj->add_option("--out", f.io.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (ana->parsed()) {
      std::vector<std::string> inputs = f.smiles;
      if (!f.io.file.empty()) {
        std::ifstream in(f.io.file);
        if (!in)
          throw Error(Errc::IoFailure, "cannot open " + f.io.file);
        for (std::string line; std::getline(in, line);)
          inputs.push_back(line);
      }
      if (inputs.empty())
        throw Error(Errc::ConfigError, "analyze needs --smiles or --file");
      return cli::cmd_analyze(inputs, f.json, std::cout, std::cerr);
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const auto rc = resolve(f, name);
    if (name == "gen-corpus")
      cli::cmd_gen_corpus(rc, std::cout);
    else if (name == "pretrain")
      cli::cmd_pretrain(rc, std::cout);
    else if (name == "finetune")
      cli::cmd_finetune(rc, std::cout);
    else if (name == "embed")
      cli::cmd_embed(rc, std::cout);
    else if (name == "project")
      cli::cmd_project(rc, std::cout);
    return cli::kExitOk;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }
}
