#include "connselect/checkpoint.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "connselect/diagnostics.hpp"

namespace connselect {
namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "reggnn-checkpoint";
constexpr int kVersion = 1;

json row_major(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Matrix read_row_major(const json& doc, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const json& arr = doc.at(key);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    throw ValidationError(fmt::format("checkpoint field '{}' must hold {} numbers", key, rows * cols));
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[k++].get<double>();
  }
  return m;
}

}  // namespace

std::string_view to_string(ClampMode mode) {
  return mode == ClampMode::Entries ? "entries" : "eigenvalues";
}

ClampMode parse_clamp_mode(std::string_view text) {
  if (text == "entries") return ClampMode::Entries;
  if (text == "eigenvalues") return ClampMode::Eigenvalues;
  throw ValidationError(fmt::format("unknown clamp mode '{}' (expected entries or eigenvalues)", text));
}

std::string checkpoint_to_json(const RegGnnModel& model) {
  model.validate();
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["hyper"] = {{"dim", model.hyper.dim},
                  {"hidden", model.hyper.hidden},
                  {"dropout", model.hyper.dropout},
                  {"mu", model.hyper.mu},
                  {"clamp", std::string(to_string(model.hyper.clamp))}};
  doc["w0"] = row_major(model.w0);
  doc["w1"] = row_major(model.w1);
  doc["fc_weights"] = row_major(model.fc_weights);
  doc["fc_bias"] = model.fc_bias;
  return doc.dump(2);
}

RegGnnModel checkpoint_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw ValidationError("not a RegGNN checkpoint");
    }
    if (doc.at("version").get<int>() != kVersion) {
      throw ValidationError(fmt::format("unsupported checkpoint version {}", doc.at("version").dump()));
    }
    const json& h = doc.at("hyper");
    RegGnnHyper hyper;
    hyper.dim = h.at("dim").get<Eigen::Index>();
    hyper.hidden = h.at("hidden").get<Eigen::Index>();
    hyper.dropout = h.at("dropout").get<double>();
    hyper.mu = h.at("mu").get<double>();
    hyper.clamp = parse_clamp_mode(h.at("clamp").get<std::string>());
    if (hyper.dim < 1 || hyper.hidden < 1) throw ValidationError("checkpoint has invalid dimensions");

    RegGnnModel model;
    model.hyper = hyper;
    model.w0 = read_row_major(doc, "w0", hyper.dim, hyper.hidden);
    model.w1 = read_row_major(doc, "w1", hyper.hidden, 1);
    model.fc_weights = read_row_major(doc, "fc_weights", hyper.dim, 1);
    model.fc_bias = doc.at("fc_bias").get<double>();
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const RegGnnModel& model, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError(fmt::format("cannot write checkpoint '{}'", file.string()));
  out << checkpoint_to_json(model) << '\n';
}

RegGnnModel load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(fmt::format("cannot read checkpoint '{}'", file.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return checkpoint_from_json(text.str());
}

}  // namespace connselect
