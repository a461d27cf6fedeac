#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "jointparse/corpus_stats.hpp"
#include "jointparse/errors.hpp"
#include "jointparse/eval.hpp"
#include "jointparse/joint_format.hpp"
#include "jointparse/model.hpp"
#include "jointparse/rst.hpp"
#include "jointparse/spans.hpp"
#include "jointparse/synthetic.hpp"
#include "jointparse/trainer.hpp"
#include "jointparse/transition.hpp"
#include "jointparse/verify.hpp"
#include "train_config.hpp"

namespace jointparse::cli {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

// Document identifier: the file name up to its first dot
// (wsj_0600.out.dis and wsj_0600.mrg both give wsj_0600).
std::string stem_of(const fs::path& path) {
  const std::string name = path.filename().string();
  return name.substr(0, name.find('.'));
}

std::map<std::string, fs::path> list_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a readable directory");
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string stem = stem_of(entry.path());
    if (stem.empty()) continue;
    if (!files.emplace(stem, entry.path()).second) {
      throw ValidationError("two files in " + dir.string() + " share the document name " + stem);
    }
  }
  return files;
}

std::vector<JointTree> read_treebank_file(const fs::path& path) {
  try {
    return read_treebank(read_file(path));
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_stats(const std::string& name, const CorpusStats& stats) {
  std::ostringstream out;
  out << name << ": " << stats.trees << " trees, " << stats.tokens << " tokens";
  if (stats.trees > 0) out << ", lengths " << stats.min_length << "-" << stats.max_length;
  out << "\n";
  for (const auto& [bucket, trees] : stats.histogram) {
    out << "  " << std::setw(5) << bucket << "-" << std::setw(5) << bucket + stats.bucket_width - 1 << "  " << trees
        << "\n";
  }
  return out.str();
}

}  // namespace

int cmd_convert(const ConvertOptions& options, std::ostream& out, std::ostream& err) {
  const auto ptb_files = list_directory(options.ptb_dir);
  const auto rst_files = list_directory(options.rst_dir);

  std::vector<JointTree> converted;
  std::vector<std::pair<std::string, std::string>> dropped;
  for (const auto& [stem, rst_path] : rst_files) {
    auto ptb = ptb_files.find(stem);
    if (ptb == ptb_files.end()) {
      dropped.emplace_back(stem, "no constituency file");
      continue;
    }
    try {
      converted.push_back(convert_document(read_file(rst_path), read_file(ptb->second)));
    } catch (const ParseError& e) {
      dropped.emplace_back(stem, std::string("malformed input: ") + e.what());
    } catch (const StructureError& e) {
      dropped.emplace_back(stem, std::string("structure: ") + e.what());
    } catch (const AlignmentError& e) {
      dropped.emplace_back(stem, std::string("alignment: ") + e.what());
    }
  }
  for (const auto& [stem, path] : ptb_files) {
    if (!rst_files.contains(stem)) dropped.emplace_back(stem, "no discourse file");
  }
  std::sort(dropped.begin(), dropped.end());

  write_file(options.out, write_treebank(converted));
  if (options.dropped) {
    std::string text;
    for (const auto& [stem, reason] : dropped) text += stem + "\t" + reason + "\n";
    write_file(*options.dropped, text);
  }
  for (const auto& [stem, reason] : dropped) err << "dropped " << stem << ": " << reason << "\n";
  out << format_stats("converted", corpus_stats(converted));
  out << "dropped: " << dropped.size() << " documents\n";
  return kExitOk;
}

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream&) {
  if (options.count < 0) throw ValidationError("--count must be non-negative");
  SyntheticParams params;
  params.max_tokens = options.max_tokens;
  params.max_edus = std::max(1, std::min(params.max_edus, options.max_tokens / 2));
  std::vector<JointTree> trees;
  try {
    trees = generate_treebank(options.seed, options.count, params);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  write_file(options.out, write_treebank(trees));
  out << format_stats("generated", corpus_stats(trees));
  return kExitOk;
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  try {
    if (options.config) config = parse_train_config(read_file(*options.config));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(options.config->string() + ": " + e.what());
  }
  const auto treebank = read_treebank_file(options.treebank);
  for (std::size_t i = 0; i < treebank.size(); ++i) {
    try {
      validate(treebank[i]);
    } catch (const StructureError& e) {
      throw ValidationError(options.treebank.string() + ", tree " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  try {
    config.validate(treebank.size());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }

  if (!options.beta_sweep.empty()) {
    for (double beta : options.beta_sweep) {
      if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta values must lie in [0, 1]");
    }
    out << "beta\tbest_dev_f1\tbest_epoch\n";
    for (const auto& point : beta_sweep(treebank, config, options.beta_sweep)) {
      out << point.beta << "\t" << std::fixed << std::setprecision(2) << 100.0 * point.best_dev_f1 << "\t"
          << point.best_epoch << "\n"
          << std::defaultfloat;
    }
    return kExitOk;
  }

  config.output_dir = options.out;
  const auto result = train(treebank, config, [&](const EpochRecord& record) { err << format_epoch(record) << "\n"; });
  out << "best epoch " << result.best_epoch << ", checkpoint " << (options.out / "best.ckpt").string() << "\n";
  return kExitOk;
}

int cmd_parse(const ParseOptions& options, std::ostream& out, std::ostream&) {
  if (options.jobs < 1) throw ValidationError("--jobs must be at least 1");
  const Model model = Model::load(options.model);
  const auto documents = read_token_documents(read_file(options.input));

  std::vector<std::vector<EduSpan>> edus;
  if (options.gold_edus) {
    std::istringstream lines(read_file(*options.gold_edus));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        edus.push_back(read_edu_line(line));
      } catch (const ParseError& e) {
        throw ValidationError(options.gold_edus->string() + ": " + e.what());
      }
    }
    if (edus.size() != documents.size()) {
      throw ValidationError("--gold-edus lists " + std::to_string(edus.size()) + " segmentations for " +
                            std::to_string(documents.size()) + " documents");
    }
    for (std::size_t i = 0; i < edus.size(); ++i) {
      if (!tiles(edus[i], static_cast<int>(documents[i].size()))) {
        throw ValidationError("segmentation " + std::to_string(i + 1) + " does not tile its document");
      }
    }
  }

  // Documents are independent; workers take every jobs-th one and results
  // are written back in input order.
  std::vector<std::string> rendered(documents.size());
  std::vector<std::exception_ptr> failures(documents.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < documents.size(); i += stride) {
      try {
        DocumentGraph graph(model, model.vocabulary().encode(documents[i]));
        DecodeOptions decode;
        if (!edus.empty()) decode.gold_edus = edus[i];
        rendered[i] = write_joint(parse_greedy(graph, documents[i], decode).tree);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(options.jobs), std::max<std::size_t>(documents.size(), 1));
  std::vector<std::thread> workers;
  for (std::size_t j = 1; j < jobs; ++j) workers.emplace_back(work, j, jobs);
  work(0, jobs);
  for (auto& worker : workers) worker.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  for (std::size_t i = 0; i < rendered.size(); ++i) out << (i ? "\n" : "") << rendered[i] << "\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream&) {
  TrainMode mode;
  try {
    mode = parse_mode(options.mode);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  const auto gold = read_treebank_file(options.gold);
  const auto predicted = read_treebank_file(options.pred);
  if (mode == TrainMode::GoldEdu) {
    for (std::size_t i = 0; i < std::min(gold.size(), predicted.size()); ++i) {
      if (extract_edus(gold[i]) != extract_edus(predicted[i])) {
        throw ValidationError("document " + std::to_string(i + 1) + " does not use the gold segmentation");
      }
    }
  }
  try {
    out << report_json(evaluate_corpus(gold, predicted)) << "\n";
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream&) {
  if (!options.oracle && !options.gradcheck) throw ValidationError("choose --oracle, --gradcheck or both");
  bool ok = true;
  if (options.oracle) {
    const auto report = verify::check_dynamic_oracle(options.seed, options.states, 6);
    out << "oracle: " << report.states << " states, " << report.set_mismatches << " action-set mismatches, "
        << report.count_mismatches << " reachable-count mismatches\n";
    for (const auto& example : report.examples) out << "  " << example << "\n";
    ok = ok && report.ok();
  }
  if (options.gradcheck) {
    const auto report = verify::check_gradients(options.seed);
    out << "gradcheck: " << report.coordinates << " coordinates over " << report.slices << " slices and "
        << report.documents << " documents, " << report.failures << " failures, " << report.kinks
        << " rechecked across ReLU kinks, max relative error " << report.max_relative_error << "\n";
    for (const auto& example : report.examples) out << "  " << example << "\n";
    ok = ok && report.ok();
  }
  return ok ? kExitOk : kExitValidation;
}

}  // namespace jointparse::cli
