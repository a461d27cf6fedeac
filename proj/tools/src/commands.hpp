#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jointparse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Bad user input: arguments, configuration or file contents.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConvertOptions {
  std::filesystem::path ptb_dir;
  std::filesystem::path rst_dir;
  std::filesystem::path out;
  std::optional<std::filesystem::path> dropped;
};
int cmd_convert(const ConvertOptions& options, std::ostream& out, std::ostream& err);

struct GenerateOptions {
  std::uint64_t seed = 1;
  int count = 100;
  int max_tokens = 40;
  std::filesystem::path out;
};
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path treebank;
  std::filesystem::path out;
  std::vector<double> beta_sweep;
};
int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);

struct ParseOptions {
  std::filesystem::path model;
  std::filesystem::path input;
  std::optional<std::filesystem::path> gold_edus;
  int jobs = 1;
};
int cmd_parse(const ParseOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::filesystem::path gold;
  std::filesystem::path pred;
  std::string mode = "end2end";
};
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  bool oracle = false;
  bool gradcheck = false;
  std::uint64_t seed = 1;
  long states = 1000;
};
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

// Whole file as a string; throws std::runtime_error when unreadable.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace jointparse::cli
