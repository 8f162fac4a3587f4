// Copyright 2026 The Xmera Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xmera/detector.hpp"

namespace xmera {
namespace {

using nlohmann::json;

json hyperparams_json(const Hyperparams& hp) {
  return {{"n_estimators", hp.n_estimators},
          {"max_depth", hp.max_depth ? json(*hp.max_depth) : json(nullptr)},
          {"min_samples_split", hp.min_samples_split},
          {"min_samples_leaf", hp.min_samples_leaf},
          {"max_features", to_string(hp.max_features)}};
}

Hyperparams hyperparams_from(const json& j) {
  Hyperparams hp;
  hp.n_estimators = j.at("n_estimators").get<int>();
  if (!j.at("max_depth").is_null()) hp.max_depth = j.at("max_depth").get<int>();
  hp.min_samples_split = j.at("min_samples_split").get<int>();
  hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  hp.max_features = parse_max_features(j.at("max_features").get<std::string>());
  return hp;
}

}  // namespace

std::string model_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const DecisionTree& tree : model.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(),
         right = json::array(), value = json::array();
    for (const TreeNode& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  const TrainingMetadata& m = model.metadata;
  json metadata = {
      {"grid_index", m.grid_index ? json(*m.grid_index) : json(nullptr)},
      {"cv_auc", m.cv_auc ? json(*m.cv_auc) : json(nullptr)},
      {"fold_aucs", m.fold_aucs},
      {"n_train", m.n_train},
      {"n_synthetic", m.n_synthetic},
  };
  json doc = {{"format_version", kModelFormatVersion},
              {"n_features", model.n_features},
              {"hyperparams", hyperparams_json(model.hyperparams)},
              {"seed", model.seed},
              {"trees", std::move(trees)},
              {"training_metadata", std::move(metadata)}};
  return doc.dump();
}

ForestModel model_from_json(std::string_view text) {
  const json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError(1, "model file is not a JSON object");
  }
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw SchemaError(1, "missing format_version");
  }
  const int version = doc["format_version"].get<int>();
  if (version > kModelFormatVersion) {
    throw Error(Errc::kUnsupportedFormat,
                "model format_version " + std::to_string(version) +
                    " is newer than supported version " +
                    std::to_string(kModelFormatVersion));
  }
  try {
    ForestModel model;
    model.n_features = doc.at("n_features").get<std::size_t>();
    model.hyperparams = hyperparams_from(doc.at("hyperparams"));
    model.seed = doc.at("seed").get<std::uint64_t>();
    for (const json& t : doc.at("trees")) {
      DecisionTree tree;
      const auto& feature = t.at("feature");
      const std::size_t n = feature.size();
      if (t.at("threshold").size() != n || t.at("left").size() != n ||
          t.at("right").size() != n || t.at("value").size() != n || n == 0) {
        throw SchemaError(1, "tree arrays have inconsistent lengths");
      }
      for (std::size_t i = 0; i < n; ++i) {
        TreeNode node{feature[i].get<int>(), t.at("threshold")[i].get<double>(),
                      t.at("left")[i].get<int>(), t.at("right")[i].get<int>(),
                      t.at("value")[i].get<double>()};
        const auto limit = static_cast<int>(n);
        if (node.feature >= static_cast<int>(model.n_features) ||
            (node.feature >= 0 && (node.left <= static_cast<int>(i) ||
                                   node.right <= static_cast<int>(i) ||
                                   node.left >= limit || node.right >= limit)) ||
            node.value < 0.0 || node.value > 1.0) {
          throw SchemaError(1, "malformed tree node");
        }
        tree.nodes.push_back(node);
      }
      model.trees.push_back(std::move(tree));
    }
    const json& m = doc.at("training_metadata");
    if (!m.at("grid_index").is_null()) {
      model.metadata.grid_index = m.at("grid_index").get<std::size_t>();
    }
    if (!m.at("cv_auc").is_null()) model.metadata.cv_auc = m.at("cv_auc").get<double>();
    model.metadata.fold_aucs = m.at("fold_aucs").get<std::vector<double>>();
    model.metadata.n_train = m.at("n_train").get<std::size_t>();
    model.metadata.n_synthetic = m.at("n_synthetic").get<std::size_t>();
    if (model.trees.empty()) throw SchemaError(1, "model has no trees");
    return model;
  } catch (const json::exception& e) {
    throw SchemaError(1, e.what());
  }
}

void save_model(const std::filesystem::path& path, const ForestModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace xmera
