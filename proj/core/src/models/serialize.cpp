#include "ckdprog/models/serialize.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const Json& arr) {
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& item : arr) v[i++] = item.get<double>();
  return v;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json obj;
  obj["rows"] = m.rows();
  obj["cols"] = m.cols();
  Json data = Json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) data.push_back(m(i, j));
  obj["data"] = std::move(data);
  return obj;
}

Eigen::MatrixXd matrix_from_json(const Json& obj) {
  const Eigen::Index rows = obj.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = obj.at("cols").get<Eigen::Index>();
  const Json& data = obj.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw ValidationError("matrix payload size does not match its declared shape");
  Eigen::MatrixXd m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = data[at++].get<double>();
  return m;
}

Json tree_to_json(const TreeModel& tree) {
  Json obj;
  obj["n_features"] = tree.n_features;
  Json nodes = Json::array();
  for (const TreeNode& node : tree.nodes) {
    Json n;
    n["feature"] = node.feature;
    n["threshold"] = node.threshold;
    n["left"] = node.left;
    n["right"] = node.right;
    n["value"] = node.value;
    n["n_samples"] = node.n_samples;
    nodes.push_back(std::move(n));
  }
  obj["nodes"] = std::move(nodes);
  return obj;
}

TreeModel tree_from_json(const Json& obj) {
  TreeModel tree;
  tree.n_features = obj.at("n_features").get<int>();
  for (const auto& n : obj.at("nodes")) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.value = n.at("value").get<double>();
    node.n_samples = n.at("n_samples").get<int>();
    tree.nodes.push_back(node);
  }
  tree.validate();
  return tree;
}

Json payload_to_json(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        Json obj;
        if constexpr (std::is_same_v<T, LinearModel>) {
          obj["weights"] = vector_to_json(m.weights);
          obj["intercept"] = m.intercept;
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          obj = tree_to_json(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          obj["n_features"] = m.n_features;
          Json trees = Json::array();
          for (const TreeModel& tree : m.trees) trees.push_back(tree_to_json(tree));
          obj["trees"] = std::move(trees);
        } else if constexpr (std::is_same_v<T, BoostedModel>) {
          obj["n_features"] = m.n_features;
          obj["base_score"] = m.base_score;
          obj["learning_rate"] = m.learning_rate;
          Json trees = Json::array();
          for (const TreeModel& tree : m.trees) trees.push_back(tree_to_json(tree));
          obj["trees"] = std::move(trees);
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          obj["arch"] = m.arch == MlpArch::kResidual ? "residual" : "plain";
          obj["n_features"] = m.n_features;
          obj["dropout_rate"] = m.dropout_rate;
          obj["n_blocks"] = m.n_blocks;
          Json layers = Json::array();
          for (const MlpLayer& layer : m.layers) {
            Json l;
            l["W"] = matrix_to_json(layer.W);
            l["b"] = vector_to_json(layer.b);
            layers.push_back(std::move(l));
          }
          obj["layers"] = std::move(layers);
          Json projections = Json::array();
          for (const Eigen::MatrixXd& p : m.projections)
            projections.push_back(p.size() > 0 ? matrix_to_json(p) : Json(nullptr));
          obj["projections"] = std::move(projections);
        }
        return obj;
      },
      model);
}

AnyModel payload_from_json(Family family, const Json& obj) {
  switch (family) {
    case Family::kLr: {
      LinearModel m;
      m.weights = vector_from_json(obj.at("weights"));
      m.intercept = obj.at("intercept").get<double>();
      return m;
    }
    case Family::kDt:
      return tree_from_json(obj);
    case Family::kRf: {
      ForestModel m;
      m.n_features = obj.at("n_features").get<int>();
      for (const auto& tree : obj.at("trees")) m.trees.push_back(tree_from_json(tree));
      if (m.trees.empty()) throw ValidationError("forest payload has no trees");
      return m;
    }
    case Family::kGbt: {
      BoostedModel m;
      m.n_features = obj.at("n_features").get<int>();
      m.base_score = obj.at("base_score").get<double>();
      m.learning_rate = obj.at("learning_rate").get<double>();
      for (const auto& tree : obj.at("trees")) m.trees.push_back(tree_from_json(tree));
      if (m.trees.empty()) throw ValidationError("boosted payload has no trees");
      return m;
    }
    case Family::kMlp:
    case Family::kResMlp: {
      MlpModel m;
      m.arch = obj.at("arch").get<std::string>() == "residual" ? MlpArch::kResidual
                                                               : MlpArch::kPlain;
      m.n_features = obj.at("n_features").get<int>();
      m.dropout_rate = obj.at("dropout_rate").get<double>();
      m.n_blocks = obj.at("n_blocks").get<int>();
      for (const auto& l : obj.at("layers"))
        m.layers.push_back({matrix_from_json(l.at("W")), vector_from_json(l.at("b"))});
      for (const auto& p : obj.at("projections"))
        m.projections.push_back(p.is_null() ? Eigen::MatrixXd() : matrix_from_json(p));
      m.validate();
      return m;
    }
    case Family::kBaseline:
      break;
  }
  throw ValidationError("family '" + to_string(family) + "' has no model payload");
}

}  // namespace

std::string serialize_model(const AnyModel& model) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["family"] = to_string(model_family(model));
  doc["model"] = payload_to_json(model);
  return doc.dump(2) + "\n";
}

AnyModel deserialize_model(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("model JSON is malformed: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw ValidationError("unsupported model format version " + std::to_string(version));
    const Family family = family_from_string(doc.at("family").get<std::string>());
    return payload_from_json(family, doc.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON is missing required fields: ") + e.what());
  }
}

void save_model(const AnyModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << serialize_model(model);
  if (!out) throw ValidationError("failed writing model to '" + path + "'");
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace ckdprog
