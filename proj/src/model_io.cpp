#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdelap/error.hpp"
#include "sdelap/surrogate.hpp"

namespace sdelap {

namespace {

constexpr const char* kFormat = "sdelap-surrogate";
constexpr int kVersion = 1;

}  // namespace

std::string serialize_model(const SurrogateModel& model) {
  const auto& a = model.architecture();
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["input_grid_size"] = a.input_grid_size;
  j["hidden_width"] = a.hidden_width;
  j["latent_dim"] = a.latent_dim;
  j["sigma0"] = a.ilt.sigma0;
  j["n_terms"] = a.ilt.n_terms;
  j["horizon"] = a.ilt.horizon;
  j["head_scale_time"] = a.head_scale_time;
  j["weight_order"] = "W1,b1,W2,b2,W3,b3,W4,b4 (row-major)";
  const auto w = model.weights();
  j["weights"] = std::vector<double>(w.begin(), w.end());
  return j.dump() + "\n";
}

SurrogateModel deserialize_model(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw IoError("not a surrogate model file");
    if (j.at("version").get<int>() != kVersion) {
      throw IoError("unsupported model version " + std::to_string(j.at("version").get<int>()));
    }
    Architecture a;
    a.input_grid_size = j.at("input_grid_size").get<std::size_t>();
    a.hidden_width = j.at("hidden_width").get<std::size_t>();
    a.latent_dim = j.at("latent_dim").get<std::size_t>();
    a.ilt.sigma0 = j.at("sigma0").get<double>();
    a.ilt.n_terms = j.at("n_terms").get<std::size_t>();
    a.ilt.horizon = j.at("horizon").get<double>();
    a.head_scale_time = j.at("head_scale_time").get<double>();
    return SurrogateModel(a, j.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const SurrogateModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_model(model);
  if (!out) throw IoError("failed writing " + path.string());
}

SurrogateModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace sdelap
