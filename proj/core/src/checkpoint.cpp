// Checkpoint container:
//   "JPCK" | u32 version | u64 header length | JSON header | tensors
// The header holds dimensions, vocabulary, label inventory and each
// tensor's name and shape; tensors follow as column-major doubles.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "jointparse/model.hpp"

namespace jointparse {

namespace {

constexpr char kMagic[4] = {'J', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint is truncated");
  return value;
}

}  // namespace

void Model::save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["dims"] = {{"word_dim", dims_.word_dim}, {"hidden_dim", dims_.hidden_dim}, {"mlp_dim", dims_.mlp_dim}};
  header["words"] = vocabulary_.words();
  header["counts"] = vocabulary_.counts();
  header["labels"] = vocabulary_.labels();
  auto& tensors = header["tensors"] = nlohmann::json::array();
  for (int i = 0; i < ParameterSet::kCount; ++i) {
    tensors.push_back({{"name", ParameterSet::name(i)}, {"rows", parameters_[i].rows()}, {"cols", parameters_[i].cols()}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (int i = 0; i < ParameterSet::kCount; ++i) {
    const auto& t = parameters_[i];
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path.string() + " is not a checkpoint");
  }
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto length = read_raw<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw std::runtime_error("checkpoint header is truncated");

  const auto header = nlohmann::json::parse(text);
  ModelDims dims;
  dims.word_dim = header.at("dims").at("word_dim").get<int>();
  dims.hidden_dim = header.at("dims").at("hidden_dim").get<int>();
  dims.mlp_dim = header.at("dims").at("mlp_dim").get<int>();
  auto vocabulary = Vocabulary::from_lists(header.at("words").get<std::vector<std::string>>(),
                                           header.at("counts").get<std::vector<int>>(),
                                           header.at("labels").get<std::vector<std::string>>());

  ParameterSet parameters(dims, static_cast<int>(vocabulary.words().size()), vocabulary.no_label_id() + 1);
  const auto& tensors = header.at("tensors");
  if (tensors.size() != static_cast<std::size_t>(ParameterSet::kCount)) {
    throw std::runtime_error("checkpoint holds " + std::to_string(tensors.size()) + " tensors, expected " +
                             std::to_string(ParameterSet::kCount));
  }
  for (int i = 0; i < ParameterSet::kCount; ++i) {
    const auto& entry = tensors[static_cast<std::size_t>(i)];
    auto& t = parameters[i];
    if (entry.at("name").get<std::string>() != ParameterSet::name(i) || entry.at("rows").get<Eigen::Index>() != t.rows() ||
        entry.at("cols").get<Eigen::Index>() != t.cols()) {
      throw std::runtime_error("checkpoint tensor '" + entry.at("name").get<std::string>() +
                               "' does not match the declared dimensions");
    }
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint tensor data is truncated");
  }
  in.peek();
  if (!in.eof()) throw std::runtime_error("trailing bytes after checkpoint tensors");
  return Model(std::move(vocabulary), dims, std::move(parameters));
}

}  // namespace jointparse
