#include <algorithm>
#include <cmath>
#include <set>

#include "gso/classifiers.h"

namespace gso {

using json = nlohmann::json;

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kNaiveBayes: return "naive_bayes";
    case Algorithm::kSmo: return "smo";
    case Algorithm::kLogistic: return "logistic";
    case Algorithm::kAdaBoost: return "adaboost";
    case Algorithm::kRandomForest: return "random_forest";
  }
  return "smo";
}

std::string_view AlgorithmDisplayName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kNaiveBayes: return "Naive Bayes";
    case Algorithm::kSmo: return "SMO";
    case Algorithm::kLogistic: return "Logistic";
    case Algorithm::kAdaBoost: return "AdaBoost";
    case Algorithm::kRandomForest: return "Rand.Forest";
  }
  return "SMO";
}

std::optional<Algorithm> ParseAlgorithm(std::string_view name) {
  for (Algorithm algorithm : kAllAlgorithms) {
    if (name == AlgorithmName(algorithm)) return algorithm;
  }
  if (name == "nb" || name == "naivebayes") return Algorithm::kNaiveBayes;
  if (name == "svm") return Algorithm::kSmo;
  if (name == "lr") return Algorithm::kLogistic;
  if (name == "rf" || name == "randomforest") return Algorithm::kRandomForest;
  return std::nullopt;
}

void TrainParams::Validate() const {
  auto fail = [](const std::string &message) {
    throw Error(ErrorCode::kInvalidParameter, message);
  };
  if (!(naive_bayes.alpha > 0.0)) fail("naive bayes alpha must be > 0");
  if (!(smo.c > 0.0)) fail("SMO C must be > 0");
  if (!(smo.tol > 0.0)) fail("SMO tol must be > 0");
  if (smo.max_passes < 1) fail("SMO max_passes must be >= 1");
  if (!(logistic.l2 >= 0.0)) fail("logistic l2 must be >= 0");
  if (logistic.max_epochs < 1) fail("logistic max_epochs must be >= 1");
  if (!(logistic.gradient_tol > 0.0)) fail("logistic gradient_tol must be > 0");
  if (adaboost.rounds < 1) fail("adaboost rounds must be >= 1");
  if (random_forest.trees < 1) fail("random forest needs at least one tree");
  if (random_forest.features_per_split < 0) fail("features_per_split must be >= 0");
}

json TrainParams::ToJson() const {
  return {
      {"algorithm", AlgorithmName(algorithm)},
      {"seed", seed},
      {"naive_bayes", {{"alpha", naive_bayes.alpha}}},
      {"smo", {{"c", smo.c}, {"tol", smo.tol}, {"max_passes", smo.max_passes}}},
      {"logistic",
       {{"l2", logistic.l2},
        {"max_epochs", logistic.max_epochs},
        {"gradient_tol", logistic.gradient_tol}}},
      {"adaboost", {{"rounds", adaboost.rounds}}},
      {"random_forest",
       {{"trees", random_forest.trees},
        {"features_per_split", random_forest.features_per_split},
        {"bootstrap", random_forest.bootstrap}}},
  };
}

TrainParams TrainParams::FromJson(const json &record) {
  TrainParams params;
  auto algorithm = ParseAlgorithm(record.at("algorithm").get<std::string>());
  if (!algorithm) throw Error(ErrorCode::kParseError, "unknown algorithm");
  params.algorithm = *algorithm;
  params.seed = record.at("seed").get<std::uint64_t>();
  params.naive_bayes.alpha = record.at("naive_bayes").at("alpha").get<double>();
  const json &smo = record.at("smo");
  params.smo.c = smo.at("c").get<double>();
  params.smo.tol = smo.at("tol").get<double>();
  params.smo.max_passes = smo.at("max_passes").get<int>();
  const json &logistic = record.at("logistic");
  params.logistic.l2 = logistic.at("l2").get<double>();
  params.logistic.max_epochs = logistic.at("max_epochs").get<int>();
  params.logistic.gradient_tol = logistic.at("gradient_tol").get<double>();
  params.adaboost.rounds = record.at("adaboost").at("rounds").get<int>();
  const json &forest = record.at("random_forest");
  params.random_forest.trees = forest.at("trees").get<int>();
  params.random_forest.features_per_split = forest.at("features_per_split").get<int>();
  params.random_forest.bootstrap = forest.at("bootstrap").get<bool>();
  return params;
}

int BreakTie(std::span<const double> votes,
             std::span<const std::size_t> class_counts) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(votes.size()); ++k) {
    if (votes[k] > votes[best] ||
        (votes[k] == votes[best] && class_counts[k] > class_counts[best])) {
      best = k;
    }
  }
  return best;
}

TrainedModel Train(const FeatureMatrix &features, std::span<const int> labels,
                   const TrainParams &params) {
  params.Validate();
  if (features.rows.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "row count differs from label count");
  }
  for (const SparseVector &row : features.rows) {
    if (row.dimension != features.dimension) {
      throw Error(ErrorCode::kDimensionMismatch, "row dimension differs from matrix");
    }
    for (const SparseEntry &e : row.entries) {
      if (e.index >= features.dimension) {
        throw Error(ErrorCode::kDimensionMismatch, "feature index out of range");
      }
      if (!std::isfinite(e.value)) {
        throw Error(ErrorCode::kNonFiniteFeature, "feature value is not finite");
      }
    }
  }
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw Error(ErrorCode::kSingleClass, "training data holds fewer than two classes");
  }

  TrainedModel model;
  model.params = params;
  model.labels.assign(distinct.begin(), distinct.end());
  model.dimension = features.dimension;
  model.class_counts.assign(model.labels.size(), 0);
  std::vector<int> positions(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int position = static_cast<int>(
        std::lower_bound(model.labels.begin(), model.labels.end(), labels[r]) -
        model.labels.begin());
    positions[r] = position;
    ++model.class_counts[position];
  }
  const int classes = static_cast<int>(model.labels.size());

  switch (params.algorithm) {
    case Algorithm::kNaiveBayes:
      model.body = TrainNaiveBayes(features, positions, classes, params.naive_bayes);
      break;
    case Algorithm::kSmo:
      model.body = TrainSmo(features, positions, classes, params.smo);
      break;
    case Algorithm::kLogistic:
      model.body = TrainLogistic(features, positions, classes, params.logistic);
      break;
    case Algorithm::kAdaBoost:
      model.body = TrainAdaBoost(features, positions, classes, params.adaboost);
      break;
    case Algorithm::kRandomForest:
      model.body = TrainRandomForest(features, positions, classes, params.random_forest,
                                     params.seed, model.class_counts);
      break;
  }
  return model;
}

int Predict(const TrainedModel &model, const SparseVector &x) {
  if (x.dimension != model.dimension) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector has dimension " + std::to_string(x.dimension) +
                    ", model expects " + std::to_string(model.dimension));
  }
  const int classes = static_cast<int>(model.labels.size());
  const auto &counts = model.class_counts;
  const int position = std::visit(
      [&](const auto &body) -> int {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, NaiveBayesModel>) {
          return PredictNaiveBayes(body, x, counts);
        } else if constexpr (std::is_same_v<Body, SmoModel>) {
          return PredictSmo(body, x, classes, counts);
        } else if constexpr (std::is_same_v<Body, LogisticModel>) {
          return PredictLogistic(body, x, counts);
        } else if constexpr (std::is_same_v<Body, AdaBoostModel>) {
          return PredictAdaBoost(body, x, classes, counts);
        } else {
          return PredictRandomForest(body, x, classes, counts);
        }
      },
      model.body);
  return model.labels[position];
}

namespace {

json MatrixJson(const Matrix &m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix MatrixFromJson(const json &record) {
  Matrix m;
  m.rows = record.at("rows").get<std::size_t>();
  m.cols = record.at("cols").get<std::size_t>();
  m.data = record.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) {
    throw Error(ErrorCode::kParseError, "matrix data has the wrong length");
  }
  return m;
}

json BodyJson(const TrainedModel &model) {
  return std::visit(
      [](const auto &body) -> json {
        using Body = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<Body, NaiveBayesModel>) {
          return {{"log_prior", body.log_prior},
                  {"log_likelihood", MatrixJson(body.log_likelihood)}};
        } else if constexpr (std::is_same_v<Body, SmoModel>) {
          json machines = json::array();
          for (const BinarySvm &m : body.machines) {
            machines.push_back({{"positive", m.positive},
                                {"negative", m.negative},
                                {"weights", m.weights},
                                {"bias", m.bias},
                                {"support_vectors", m.support_vectors},
                                {"converged", m.converged}});
          }
          return {{"machines", machines}};
        } else if constexpr (std::is_same_v<Body, LogisticModel>) {
          return {{"weights", MatrixJson(body.weights)}};
        } else if constexpr (std::is_same_v<Body, AdaBoostModel>) {
          json stumps = json::array();
          for (const Stump &s : body.stumps) {
            stumps.push_back({{"feature", s.feature},
                              {"threshold", s.threshold},
                              {"left", s.left_class},
                              {"right", s.right_class},
                              {"alpha", s.alpha}});
          }
          return {{"stumps", stumps}};
        } else {
          json trees = json::array();
          for (const DecisionTree &tree : body.trees) {
            // Columnar layout keeps forest files compact.
            std::vector<int> feature, left, right, label;
            std::vector<double> threshold;
            for (const TreeNode &node : tree.nodes) {
              feature.push_back(node.feature);
              threshold.push_back(node.threshold);
              left.push_back(node.left);
              right.push_back(node.right);
              label.push_back(node.label);
            }
            trees.push_back({{"feature", feature},
                             {"threshold", threshold},
                             {"left", left},
                             {"right", right},
                             {"label", label}});
          }
          return {{"trees", trees}};
        }
      },
      model.body);
}

}  // namespace

json ModelToJson(const TrainedModel &model) {
  return {{"format", "gso-model"},
          {"version", kModelFormatVersion},
          {"algorithm", AlgorithmName(model.algorithm())},
          {"params", model.params.ToJson()},
          {"labels", model.labels},
          {"class_counts", model.class_counts},
          {"dimension", model.dimension},
          {"body", BodyJson(model)}};
}

TrainedModel ModelFromJson(const json &record) {
  try {
    if (record.at("format").get<std::string>() != "gso-model") {
      throw Error(ErrorCode::kParseError, "not a model file");
    }
    const int version = record.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "model format version " + std::to_string(version) +
                      " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");
    }
    TrainedModel model;
    model.params = TrainParams::FromJson(record.at("params"));
    model.labels = record.at("labels").get<std::vector<int>>();
    model.class_counts = record.at("class_counts").get<std::vector<std::size_t>>();
    model.dimension = record.at("dimension").get<std::size_t>();
    const json &body = record.at("body");
    switch (model.params.algorithm) {
      case Algorithm::kNaiveBayes: {
        NaiveBayesModel nb;
        nb.log_prior = body.at("log_prior").get<std::vector<double>>();
        nb.log_likelihood = MatrixFromJson(body.at("log_likelihood"));
        model.body = std::move(nb);
        break;
      }
      case Algorithm::kSmo: {
        SmoModel smo;
        for (const json &m : body.at("machines")) {
          BinarySvm machine;
          machine.positive = m.at("positive").get<int>();
          machine.negative = m.at("negative").get<int>();
          machine.weights = m.at("weights").get<std::vector<double>>();
          machine.bias = m.at("bias").get<double>();
          machine.support_vectors = m.at("support_vectors").get<std::size_t>();
          machine.converged = m.at("converged").get<bool>();
          smo.machines.push_back(std::move(machine));
        }
        model.body = std::move(smo);
        break;
      }
      case Algorithm::kLogistic:
        model.body = LogisticModel{MatrixFromJson(body.at("weights"))};
        break;
      case Algorithm::kAdaBoost: {
        AdaBoostModel ada;
        for (const json &s : body.at("stumps")) {
          ada.stumps.push_back({s.at("feature").get<int>(), s.at("threshold").get<double>(),
                                s.at("left").get<int>(), s.at("right").get<int>(),
                                s.at("alpha").get<double>()});
        }
        model.body = std::move(ada);
        break;
      }
      case Algorithm::kRandomForest: {
        RandomForestModel forest;
        for (const json &t : body.at("trees")) {
          const auto feature = t.at("feature").get<std::vector<int>>();
          const auto threshold = t.at("threshold").get<std::vector<double>>();
          const auto left = t.at("left").get<std::vector<int>>();
          const auto right = t.at("right").get<std::vector<int>>();
          const auto label = t.at("label").get<std::vector<int>>();
          DecisionTree tree;
          for (std::size_t i = 0; i < feature.size(); ++i) {
            tree.nodes.push_back({feature[i], threshold.at(i), left.at(i), right.at(i),
                                  label.at(i)});
          }
          forest.trees.push_back(std::move(tree));
        }
        model.body = std::move(forest);
        break;
      }
    }
    return model;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
}

}  // namespace gso
