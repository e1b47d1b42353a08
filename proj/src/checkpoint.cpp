#include "mter/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace mter {

namespace {

constexpr int kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void write_array(const std::filesystem::path& path, const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_array(const std::filesystem::path& path, std::size_t expected,
                               const std::string& name) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("checkpoint array missing: " + name + " (" + path.string() + ")");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected * sizeof(double))
    throw std::runtime_error("checkpoint array " + name + " has " + std::to_string(bytes) +
                             " bytes, expected " + std::to_string(expected * sizeof(double)));
  in.seekg(0);
  std::vector<double> data(expected);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("read failed for checkpoint array " + name);
  for (double v : data) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::runtime_error("checkpoint array " + name + " violates non-negativity");
  }
  return data;
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
  return {{"lambda_b", cfg.lambda_b},   {"lambda_f", cfg.lambda_f},
          {"lambda_g", cfg.lambda_g},   {"batch_x", cfg.batch_x},
          {"batch_yu", cfg.batch_yu},   {"batch_yi", cfg.batch_yi},
          {"n_s_bpr", cfg.n_s_bpr},     {"t_iter", cfg.t_iter},
          {"eta", cfg.eta},             {"ada_eps", cfg.ada_eps},
          {"seed", cfg.seed},           {"init_scale", cfg.init_scale},
          {"eval_interval", cfg.eval_interval},
          {"dims", {{"a", cfg.dims.a}, {"b", cfg.dims.b}, {"c", cfg.dims.c}, {"d", cfg.dims.d}}}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.lambda_b = j.at("lambda_b");
  cfg.lambda_f = j.at("lambda_f");
  cfg.lambda_g = j.at("lambda_g");
  cfg.batch_x = j.at("batch_x");
  cfg.batch_yu = j.at("batch_yu");
  cfg.batch_yi = j.at("batch_yi");
  cfg.n_s_bpr = j.at("n_s_bpr");
  cfg.t_iter = j.at("t_iter");
  cfg.eta = j.at("eta");
  cfg.ada_eps = j.at("ada_eps");
  cfg.seed = j.at("seed");
  cfg.init_scale = j.at("init_scale");
  cfg.eval_interval = j.at("eval_interval");
  cfg.dims.a = j.at("dims").at("a");
  cfg.dims.b = j.at("dims").at("b");
  cfg.dims.c = j.at("dims").at("c");
  cfg.dims.d = j.at("dims").at("d");
  return cfg;
}

IdMap map_from_json(const nlohmann::json& arr) {
  IdMap map;
  for (const auto& v : arr) map.intern(v.get<std::string>());
  return map;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  const FactorModel& model = ckpt.model;
  nlohmann::json manifest = {
      {"version", kFormatVersion},
      {"m", model.m()},
      {"n", model.n()},
      {"p", model.p()},
      {"q", model.q()},
      {"rating_scale", ckpt.rating_scale},
      {"dims",
       {{"a", model.dims().a}, {"b", model.dims().b}, {"c", model.dims().c}, {"d", model.dims().d}}},
      {"users", ckpt.users.externals()},
      {"items", ckpt.items.externals()},
      {"features", ckpt.features.externals()},
      {"opinions", ckpt.opinions.externals()},
      {"config", config_to_json(ckpt.config)},
  };
  {
    std::ofstream out(base / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest: " + (base / "manifest.json").string());
    out << manifest.dump(2) << "\n";
  }
  // feature_factors rows 0..p-1 are F, row p is the dummy feature row
  const auto& ff = model.feature_factors.data();
  const std::size_t cc = model.feature_factors.cols();
  std::vector<double> f_rows(ff.begin(), ff.begin() + static_cast<std::ptrdiff_t>(model.p() * cc));
  std::vector<double> f_dummy(ff.end() - static_cast<std::ptrdiff_t>(cc), ff.end());

  write_array(base / "U.bin", model.user_factors.data());
  write_array(base / "I.bin", model.item_factors.data());
  write_array(base / "F.bin", f_rows);
  write_array(base / "f_dummy.bin", f_dummy);
  write_array(base / "O.bin", model.opinion_factors.data());
  write_array(base / "G1.bin", model.core_x.data());
  write_array(base / "G2.bin", model.core_yu.data());
  write_array(base / "G3.bin", model.core_yi.data());
}

Checkpoint load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  std::ifstream in(base / "manifest.json");
  if (!in) throw std::runtime_error("checkpoint manifest missing: " + (base / "manifest.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("invalid checkpoint manifest: ") + e.what());
  }

  const int version = manifest.at("version");
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  const int m = manifest.at("m"), n = manifest.at("n"), p = manifest.at("p"),
            q = manifest.at("q");
  const int a = manifest.at("dims").at("a"), b = manifest.at("dims").at("b"),
            c = manifest.at("dims").at("c"), d = manifest.at("dims").at("d");
  if (m < 1 || n < 1 || p < 1 || q < 1 || a < 1 || b < 1 || c < 1 || d < 1)
    throw std::runtime_error("checkpoint manifest has invalid shapes");
  ckpt.rating_scale = manifest.at("rating_scale");
  ckpt.users = map_from_json(manifest.at("users"));
  ckpt.items = map_from_json(manifest.at("items"));
  ckpt.features = map_from_json(manifest.at("features"));
  ckpt.opinions = map_from_json(manifest.at("opinions"));
  ckpt.config = config_from_json(manifest.at("config"));
  if (static_cast<int>(ckpt.users.size()) != m || static_cast<int>(ckpt.items.size()) != n ||
      static_cast<int>(ckpt.features.size()) != p || static_cast<int>(ckpt.opinions.size()) != q)
    throw std::runtime_error("checkpoint id maps do not match manifest entity counts");

  FactorModel& model = ckpt.model;
  model.user_factors = Matrix(m, a);
  model.item_factors = Matrix(n, b);
  model.feature_factors = Matrix(p + 1, c);
  model.opinion_factors = Matrix(q, d);
  model.core_x = Tensor3(a, b, c);
  model.core_yu = Tensor3(a, c, d);
  model.core_yi = Tensor3(b, c, d);

  model.user_factors.data() = read_array(base / "U.bin", model.user_factors.size(), "U");
  model.item_factors.data() = read_array(base / "I.bin", model.item_factors.size(), "I");
  {
    std::vector<double> f_rows = read_array(base / "F.bin", static_cast<std::size_t>(p) * c, "F");
    std::vector<double> f_dummy = read_array(base / "f_dummy.bin", static_cast<std::size_t>(c),
                                             "f_dummy");
    auto& ff = model.feature_factors.data();
    std::copy(f_rows.begin(), f_rows.end(), ff.begin());
    std::copy(f_dummy.begin(), f_dummy.end(), ff.end() - c);
  }
  model.opinion_factors.data() = read_array(base / "O.bin", model.opinion_factors.size(), "O");
  model.core_x.data() = read_array(base / "G1.bin", model.core_x.size(), "G1");
  model.core_yu.data() = read_array(base / "G2.bin", model.core_yu.size(), "G2");
  model.core_yi.data() = read_array(base / "G3.bin", model.core_yi.size(), "G3");
  return ckpt;
}

}  // namespace mter
