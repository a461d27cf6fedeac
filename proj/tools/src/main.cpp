#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "jointparse/errors.hpp"
#include "jointparse/trainer.hpp"

namespace {

using namespace jointparse::cli;

int run(int argc, char** argv) {
  CLI::App app{"Joint syntacto-discourse parser"};
  app.require_subcommand(1);

  ConvertOptions convert;
  auto* convert_cmd = app.add_subcommand("convert", "Build joint trees from constituency and discourse treebanks");
  convert_cmd->add_option("--ptb", convert.ptb_dir, "Directory of bracketed constituency files")->required();
  convert_cmd->add_option("--rst", convert.rst_dir, "Directory of discourse tree files")->required();
  convert_cmd->add_option("--out", convert.out, "Output treebank")->required();
  convert_cmd->add_option("--dropped", convert.dropped, "Write dropped documents with reasons here");

  GenerateOptions generate;
  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic joint treebank");
  generate_cmd->add_option("--seed", generate.seed, "Random seed");
  generate_cmd->add_option("--count", generate.count, "Number of trees");
  generate_cmd->add_option("--max-tokens", generate.max_tokens, "Longest document")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--out", generate.out, "Output treebank")->required();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model with dynamic-oracle exploration");
  train_cmd->add_option("--config", train.config, "JSON configuration")->check(CLI::ExistingFile);
  train_cmd->add_option("--treebank", train.treebank, "Training treebank")->required();
  train_cmd->add_option("--out", train.out, "Checkpoint directory");
  train_cmd->add_option("--beta-sweep", train.beta_sweep, "Train once per beta and report the best dev F1")
      ->delimiter(',');

  ParseOptions parse;
  auto* parse_cmd = app.add_subcommand("parse", "Parse pre-tokenized documents");
  parse_cmd->add_option("--model", parse.model, "Checkpoint")->required();
  parse_cmd->add_option("--input", parse.input, "Token file, one document per blank-line block")->required();
  parse_cmd->add_option("--gold-edus", parse.gold_edus, "One segmentation line per document");
  parse_cmd->add_option("--jobs", parse.jobs, "Documents parsed in parallel");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted trees against gold trees");
  eval_cmd->add_option("--gold", eval.gold, "Gold treebank")->required();
  eval_cmd->add_option("--pred", eval.pred, "Predicted treebank")->required();
  eval_cmd->add_option("--mode", eval.mode, "end2end or goldedu");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle and gradient self-checks");
  verify_cmd->add_flag("--oracle", verify.oracle, "Dynamic oracle against exhaustive search");
  verify_cmd->add_flag("--gradcheck", verify.gradcheck, "Gradients against finite differences");
  verify_cmd->add_option("--seed", verify.seed, "Random seed");
  verify_cmd->add_option("--states", verify.states, "Minimum number of oracle states")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (*train_cmd && train.beta_sweep.empty() && train.out.empty()) {
    std::cerr << "train: --out is required unless --beta-sweep is given\n";
    return kExitValidation;
  }

  if (*convert_cmd) return cmd_convert(convert, std::cout, std::cerr);
  if (*generate_cmd) return cmd_generate(generate, std::cout, std::cerr);
  if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
  if (*parse_cmd) return cmd_parse(parse, std::cout, std::cerr);
  if (*eval_cmd) return cmd_eval(eval, std::cout, std::cerr);
  return cmd_verify(verify, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const jointparse::TrainingDiverged& e) {
    std::cerr << "error: training diverged at " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
