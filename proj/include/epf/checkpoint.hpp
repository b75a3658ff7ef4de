// Versioned JSON checkpoints. Weights are stored row-major as decimal
// floats; load(save(m)) reproduces m exactly at double precision.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epf/error.hpp"
#include "epf/lstm.hpp"
#include "epf/normalization.hpp"

namespace epf {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

template <typename S>
nlohmann::json matrix_to_json(const MatX<S>& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(static_cast<double>(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

template <typename S>
MatX<S> matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    fail(ErrorClass::schema, "checkpoint: malformed tensor " + what);
  Eigen::Index rows = j["rows"].get<Eigen::Index>();
  Eigen::Index cols = j["cols"].get<Eigen::Index>();
  const auto& data = j["data"];
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
    fail(ErrorClass::schema, "checkpoint: tensor " + what + " has inconsistent shape");
  MatX<S> m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = data[k++].get<double>();
      if (!std::isfinite(v)) fail(ErrorClass::schema, "checkpoint: non-finite value in " + what);
      m(r, c) = static_cast<S>(v);
    }
  return m;
}

template <typename S>
nlohmann::json vector_to_json(const VecX<S>& v) {
  std::vector<double> data(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) data[static_cast<std::size_t>(i)] = static_cast<double>(v(i));
  return data;
}

template <typename S>
VecX<S> vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorClass::schema, "checkpoint: malformed vector " + what);
  VecX<S> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    double x = j[i].get<double>();
    if (!std::isfinite(x)) fail(ErrorClass::schema, "checkpoint: non-finite value in " + what);
    v(static_cast<Eigen::Index>(i)) = static_cast<S>(x);
  }
  return v;
}

}  // namespace detail

template <typename S>
void save_checkpoint(const LstmModel<S>& model, const std::string& path,
                     const std::string& config_hash = {}) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  const LstmConfig& c = model.config;
  j["config"] = {{"depth", c.depth},
                 {"width", c.width},
                 {"input_width", c.input_width},
                 {"seq_len", c.seq_len},
                 {"dropout", c.dropout},
                 {"sigma_floor", c.sigma_floor},
                 {"learning_rate", c.learning_rate},
                 {"batch_size", c.batch_size},
                 {"patience", c.patience},
                 {"max_epochs", c.max_epochs}};
  j["norm"] = {{"columns", model.norm.columns},
               {"scales", model.norm.scales},
               {"target_scale", model.norm.target_scale}};
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : model.params.layers)
    j["layers"].push_back({{"wx", detail::matrix_to_json(layer.wx)},
                           {"wh", detail::matrix_to_json(layer.wh)},
                           {"b", detail::vector_to_json(layer.b)}});
  j["head"] = {{"w", detail::matrix_to_json(model.params.head_w)},
               {"b", detail::vector_to_json(model.params.head_b)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorClass::io, "cannot open checkpoint for writing: " + path);
  out << j.dump() << '\n';
  if (!out) fail(ErrorClass::io, "write failed: " + path);
}

template <typename S>
LstmModel<S> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorClass::io, "cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorClass::schema, "checkpoint parse: " + std::string(e.what()));
  }
  if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion)
    fail(ErrorClass::schema, "checkpoint: unsupported version");
  LstmModel<S> m;
  try {
    const auto& c = j.at("config");
    m.config.depth = c.at("depth").get<int>();
    m.config.width = c.at("width").get<int>();
    m.config.input_width = c.at("input_width").get<int>();
    m.config.seq_len = c.at("seq_len").get<int>();
    m.config.dropout = c.at("dropout").get<double>();
    m.config.sigma_floor = c.at("sigma_floor").get<double>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.patience = c.at("patience").get<int>();
    m.config.max_epochs = c.at("max_epochs").get<int>();
    const auto& n = j.at("norm");
    m.norm.columns = n.at("columns").get<std::vector<std::string>>();
    m.norm.scales = n.at("scales").get<std::vector<double>>();
    m.norm.target_scale = n.at("target_scale").get<double>();
    const auto& layers = j.at("layers");
    if (!layers.is_array() || static_cast<int>(layers.size()) != m.config.depth)
      fail(ErrorClass::schema, "checkpoint: layer count does not match depth");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      LstmLayer<S> layer;
      layer.wx = detail::matrix_from_json<S>(layers[l].at("wx"), "layers[" + std::to_string(l) + "].wx");
      layer.wh = detail::matrix_from_json<S>(layers[l].at("wh"), "layers[" + std::to_string(l) + "].wh");
      layer.b = detail::vector_from_json<S>(layers[l].at("b"), "layers[" + std::to_string(l) + "].b");
      m.params.layers.push_back(std::move(layer));
    }
    m.params.head_w = detail::matrix_from_json<S>(j.at("head").at("w"), "head.w");
    m.params.head_b = detail::vector_from_json<S>(j.at("head").at("b"), "head.b");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorClass::schema, "checkpoint: " + std::string(e.what()));
  }
  const int w = m.config.width;
  if (m.params.head_w.rows() != 2 || m.params.head_w.cols() != w || m.params.head_b.size() != 2)
    fail(ErrorClass::schema, "checkpoint: head shape mismatch");
  for (int l = 0; l < m.config.depth; ++l) {
    const auto& layer = m.params.layers[static_cast<std::size_t>(l)];
    int in = l == 0 ? m.config.input_width : w;
    if (layer.wx.rows() != in || layer.wx.cols() != 4 * w || layer.wh.rows() != w ||
        layer.wh.cols() != 4 * w || layer.b.size() != 4 * w)
      fail(ErrorClass::schema, "checkpoint: layer " + std::to_string(l) + " shape mismatch");
  }
  return m;
}

}  // namespace epf
