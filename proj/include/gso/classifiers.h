#ifndef GSO_CLASSIFIERS_H_
#define GSO_CLASSIFIERS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gso/features.h"
#include "json.hpp"

namespace gso {

enum class Algorithm { kNaiveBayes, kSmo, kLogistic, kAdaBoost, kRandomForest };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::kNaiveBayes, Algorithm::kSmo, Algorithm::kLogistic,
    Algorithm::kAdaBoost, Algorithm::kRandomForest};

// Machine names: naive_bayes, smo, logistic, adaboost, random_forest.
std::string_view AlgorithmName(Algorithm algorithm);
// Table row names, e.g. "Rand.Forest".
std::string_view AlgorithmDisplayName(Algorithm algorithm);
std::optional<Algorithm> ParseAlgorithm(std::string_view name);

struct NaiveBayesParams {
  double alpha = 1.0;
  bool operator==(const NaiveBayesParams &) const = default;
};

struct SmoParams {
  double c = 1.0;
  double tol = 1e-3;
  // Iteration budget is max_passes * n working-set updates.
  int max_passes = 1000;
  bool operator==(const SmoParams &) const = default;
};

struct LogisticParams {
  double l2 = 1e-4;
  int max_epochs = 500;
  double gradient_tol = 1e-6;
  bool operator==(const LogisticParams &) const = default;
};

struct AdaBoostParams {
  int rounds = 10;
  bool operator==(const AdaBoostParams &) const = default;
};

struct RandomForestParams {
  int trees = 100;
  // Candidate features per split; 0 means ceil(sqrt(d)).
  int features_per_split = 0;
  bool bootstrap = true;
  // Worker threads for tree construction; 0 picks the hardware count. The
  // result does not depend on this value.
  int threads = 0;
  bool operator==(const RandomForestParams &other) const {
    return trees == other.trees &&
           features_per_split == other.features_per_split &&
           bootstrap == other.bootstrap;
  }
};

struct TrainParams {
  Algorithm algorithm = Algorithm::kSmo;
  NaiveBayesParams naive_bayes;
  SmoParams smo;
  LogisticParams logistic;
  AdaBoostParams adaboost;
  RandomForestParams random_forest;
  std::uint64_t seed = 1;

  // Throws InvalidParameter when a hyperparameter is out of range.
  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainParams FromJson(const nlohmann::json &record);
  bool operator==(const TrainParams &) const = default;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  bool operator==(const Matrix &) const = default;
};

// Learned parameters. Class indices inside a model body are positions in
// TrainedModel::labels.
struct NaiveBayesModel {
  std::vector<double> log_prior;
  Matrix log_likelihood;  // classes x features
  bool operator==(const NaiveBayesModel &) const = default;
};

struct BinarySvm {
  int positive = 0;  // class position voted for when the decision is >= 0
  int negative = 1;
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t support_vectors = 0;
  bool converged = true;
  bool operator==(const BinarySvm &) const = default;
};

struct SmoModel {
  std::vector<BinarySvm> machines;  // one per class pair
  bool operator==(const SmoModel &) const = default;
};

struct LogisticModel {
  Matrix weights;  // classes x (features + 1); last column is the bias
  bool operator==(const LogisticModel &) const = default;
};

// Predicts left_class when x[feature] <= threshold. feature < 0 is a constant
// stump predicting left_class.
struct Stump {
  int feature = -1;
  double threshold = 0.0;
  int left_class = 0;
  int right_class = 0;
  double alpha = 0.0;
  bool operator==(const Stump &) const = default;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  bool operator==(const AdaBoostModel &) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  int label = 0;   // leaf class
  bool operator==(const TreeNode &) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int Predict(const SparseVector &x) const;
  bool operator==(const DecisionTree &) const = default;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  bool operator==(const RandomForestModel &) const = default;
};

struct TrainedModel {
  TrainParams params;
  std::vector<int> labels;                // sorted class ids seen in training
  std::vector<std::size_t> class_counts;  // per position in labels
  std::size_t dimension = 0;
  std::variant<NaiveBayesModel, SmoModel, LogisticModel, AdaBoostModel,
               RandomForestModel>
      body;

  Algorithm algorithm() const { return params.algorithm; }
  bool operator==(const TrainedModel &) const = default;
};

// Fits a model. Deterministic in (features, labels, params). Throws
// SingleClass, DimensionMismatch, NonFiniteFeature or InvalidParameter.
TrainedModel Train(const FeatureMatrix &features, std::span<const int> labels,
                   const TrainParams &params);

// Returns a class id from model.labels. Throws DimensionMismatch.
int Predict(const TrainedModel &model, const SparseVector &x);

inline constexpr int kModelFormatVersion = 1;
nlohmann::json ModelToJson(const TrainedModel &model);
// Throws VersionMismatch for other format versions.
TrainedModel ModelFromJson(const nlohmann::json &record);

// Ranks classes for tie-breaks: more training instances first, then the
// lower class position.
int BreakTie(std::span<const double> votes,
             std::span<const std::size_t> class_counts);

// ---- Per-algorithm trainers. Labels are class positions 0..classes-1.

NaiveBayesModel TrainNaiveBayes(const FeatureMatrix &features,
                                std::span<const int> labels, int classes,
                                const NaiveBayesParams &params);
int PredictNaiveBayes(const NaiveBayesModel &model, const SparseVector &x,
                      std::span<const std::size_t> class_counts);

struct SmoResult {
  std::vector<double> alphas;
  double bias = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Linear-kernel soft-margin SVM dual solved by SMO with second-order working
// set selection. Targets are +1/-1. The decision function is w.x + bias.
SmoResult SmoSolve(const FeatureMatrix &features, std::span<const int> targets,
                   const SmoParams &params);

// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j <x_i, x_j>
double SvmDualObjective(const FeatureMatrix &features,
                        std::span<const int> targets,
                        std::span<const double> alphas);

std::vector<double> SvmWeights(const FeatureMatrix &features,
                               std::span<const int> targets,
                               std::span<const double> alphas);

// Largest KKT violation in terms of y_i f(x_i): 1 - yf where alpha = 0,
// yf - 1 where alpha = C, |yf - 1| otherwise (clipped at zero).
double KktViolation(const FeatureMatrix &features, std::span<const int> targets,
                    std::span<const double> alphas, double bias, double c);

SmoModel TrainSmo(const FeatureMatrix &features, std::span<const int> labels,
                  int classes, const SmoParams &params);
int PredictSmo(const SmoModel &model, const SparseVector &x, int classes,
               std::span<const std::size_t> class_counts);

// Mean softmax cross-entropy plus (l2/2)|W|^2. W is classes x dimension.
double CrossEntropyLoss(const Matrix &weights, const FeatureMatrix &features,
                        std::span<const int> labels, double l2);
Matrix CrossEntropyGradient(const Matrix &weights, const FeatureMatrix &features,
                            std::span<const int> labels, double l2);

// Full-batch gradient descent with Barzilai-Borwein trial steps and Armijo
// backtracking. The input gets a constant bias column appended.
LogisticModel TrainLogistic(const FeatureMatrix &features,
                            std::span<const int> labels, int classes,
                            const LogisticParams &params,
                            std::vector<double> *loss_trace = nullptr);
int PredictLogistic(const LogisticModel &model, const SparseVector &x,
                    std::span<const std::size_t> class_counts);

// SAMME. When weight_sums is given it receives the instance-weight total after
// each round's renormalization.
AdaBoostModel TrainAdaBoost(const FeatureMatrix &features,
                            std::span<const int> labels, int classes,
                            const AdaBoostParams &params,
                            std::vector<double> *weight_sums = nullptr);
int PredictAdaBoost(const AdaBoostModel &model, const SparseVector &x,
                    int classes, std::span<const std::size_t> class_counts);

// Unpruned CART tree (Gini) over the given rows, sampling features_per_split
// candidates per node. Ties between splits go to the lower feature index.
DecisionTree GrowTree(const FeatureMatrix &features, std::span<const int> labels,
                      int classes, std::span<const std::size_t> rows,
                      int features_per_split, std::uint64_t seed,
                      std::span<const std::size_t> class_counts);

RandomForestModel TrainRandomForest(const FeatureMatrix &features,
                                    std::span<const int> labels, int classes,
                                    const RandomForestParams &params,
                                    std::uint64_t seed,
                                    std::span<const std::size_t> class_counts);
int PredictRandomForest(const RandomForestModel &model, const SparseVector &x,
                        int classes, std::span<const std::size_t> class_counts);

}  // namespace gso

#endif  // GSO_CLASSIFIERS_H_
