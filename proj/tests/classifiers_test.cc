#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "oracles.h"
#include "gso/classifiers.h"
#include "gso/rng.h"

using namespace gso;
using gso::testing::DenseToMatrix;

namespace {

// Three loosely separated blobs in 6 sparse-ish dimensions.
std::pair<FeatureMatrix, std::vector<int>> Blobs(std::uint64_t seed, std::size_t n = 90,
                                                 std::vector<int> label_ids = {0, 1, 2}) {
  Rng rng(seed);
  std::vector<std::vector<double>> dense;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % label_ids.size();
    std::vector<double> row(6, 0.0);
    for (std::size_t j = 0; j < 6; ++j) {
      const bool hot = j / 2 == c;
      row[j] = rng.Bernoulli(hot ? 0.8 : 0.15) ? 1.0 : 0.0;
    }
    dense.push_back(row);
    labels.push_back(label_ids[c]);
  }
  return {DenseToMatrix(dense), labels};
}

TrainParams ParamsFor(Algorithm algorithm) {
  TrainParams params;
  params.algorithm = algorithm;
  params.random_forest.trees = 15;
  params.seed = 17;
  return params;
}

double TrainingAccuracy(const TrainedModel &model, const FeatureMatrix &x,
                        const std::vector<int> &y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += Predict(model, x.rows[i]) == y[i];
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

ErrorCode TrainError(const FeatureMatrix &x, const std::vector<int> &y, const TrainParams &p) {
  try {
    Train(x, y, p);
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::kParseError;
}

}  // namespace

TEST_CASE("algorithm names") {
  for (Algorithm a : kAllAlgorithms) CHECK(ParseAlgorithm(AlgorithmName(a)) == a);
  CHECK(ParseAlgorithm("svm") == Algorithm::kSmo);
  CHECK(ParseAlgorithm("nb") == Algorithm::kNaiveBayes);
  CHECK_FALSE(ParseAlgorithm("perceptron").has_value());
  CHECK(AlgorithmDisplayName(Algorithm::kNaiveBayes) == "Naive Bayes");
}

TEST_CASE("training input errors") {
  auto [x, y] = Blobs(1, 12);
  for (Algorithm a : kAllAlgorithms) {
    CAPTURE(AlgorithmName(a));
    const TrainParams p = ParamsFor(a);
    CHECK(TrainError(x, std::vector<int>(y.size(), 2), p) == ErrorCode::kSingleClass);
    CHECK(TrainError(x, std::vector<int>(y.begin(), y.end() - 1), p) ==
          ErrorCode::kDimensionMismatch);
    FeatureMatrix bad = x;
    bad.rows[3].entries.push_back({5, std::numeric_limits<double>::quiet_NaN()});
    bad.rows[3] = MakeSparse(6, bad.rows[3].entries);
    bad.rows[4].entries = {{0, std::numeric_limits<double>::infinity()}};
    CHECK(TrainError(bad, y, p) == ErrorCode::kNonFiniteFeature);
  }
  const TrainedModel model = Train(x, y, ParamsFor(Algorithm::kNaiveBayes));
  SparseVector wrong;
  wrong.dimension = 4;
  try {
    Predict(model, wrong);
    FAIL("accepted a vector of the wrong dimension");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("invalid hyperparameters") {
  TrainParams p;
  p.smo.c = 0.0;
  CHECK_THROWS_AS(p.Validate(), Error);
  p = TrainParams{};
  p.random_forest.trees = 0;
  CHECK_THROWS_AS(p.Validate(), Error);
  p = TrainParams{};
  p.naive_bayes.alpha = -1.0;
  CHECK_THROWS_AS(p.Validate(), Error);
  CHECK_NOTHROW(TrainParams{}.Validate());
}

TEST_CASE("every algorithm fits separable blobs and keeps the original label ids") {
  auto [x, y] = Blobs(2, 90, {0, 2, 1});
  for (Algorithm a : kAllAlgorithms) {
    CAPTURE(AlgorithmName(a));
    const TrainedModel model = Train(x, y, ParamsFor(a));
    CHECK(model.labels == std::vector<int>{0, 1, 2});
    CHECK(TrainingAccuracy(model, x, y) >= 0.7);
  }
}

TEST_CASE("serialized models are deterministic and round-trip") {
  auto [x, y] = Blobs(3);
  for (Algorithm a : kAllAlgorithms) {
    CAPTURE(AlgorithmName(a));
    const TrainedModel first = Train(x, y, ParamsFor(a));
    const TrainedModel second = Train(x, y, ParamsFor(a));
    const std::string bytes = ModelToJson(first).dump();
    CHECK(bytes == ModelToJson(second).dump());
    const TrainedModel loaded = ModelFromJson(nlohmann::json::parse(bytes));
    CHECK(loaded == first);
    CHECK(ModelToJson(loaded).dump() == bytes);
    for (const auto &row : x.rows) CHECK(Predict(loaded, row) == Predict(first, row));
  }
}

TEST_CASE("loading a model with another format version fails") {
  auto [x, y] = Blobs(4);
  nlohmann::json record = ModelToJson(Train(x, y, ParamsFor(Algorithm::kLogistic)));
  record["version"] = kModelFormatVersion + 1;
  try {
    ModelFromJson(record);
    FAIL("accepted a future version");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kVersionMismatch);
  }
  CHECK_THROWS_AS(ModelFromJson(nlohmann::json::parse(R"({"format":"gso-model"})")), Error);
}

TEST_CASE("tie breaking prefers the larger class, then the earlier one") {
  const std::vector<std::size_t> counts = {5, 9, 9};
  CHECK(BreakTie(std::vector<double>{1, 1, 0}, counts) == 1);
  CHECK(BreakTie(std::vector<double>{2, 2, 2}, counts) == 1);
  CHECK(BreakTie(std::vector<double>{3, 1, 1}, counts) == 0);
  CHECK(BreakTie(std::vector<double>{0, 1, 1}, std::vector<std::size_t>{4, 4, 4}) == 1);
}

TEST_CASE("naive bayes smoothed likelihood") {
  // class 0: f,f,f,g  class 1: f,g,g,g  (one occurrence per row)
  const FeatureMatrix x = DenseToMatrix({{1, 0}, {1, 0}, {1, 0}, {0, 1},
                                         {1, 0}, {0, 1}, {0, 1}, {0, 1}});
  const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const NaiveBayesModel model = TrainNaiveBayes(x, y, 2, NaiveBayesParams{1.0});
  CHECK(std::exp(model.log_likelihood(0, 0)) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
  CHECK(std::exp(model.log_likelihood(1, 0)) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
  for (double v : model.log_likelihood.data) CHECK(std::isfinite(v));
}

TEST_CASE("naive bayes falls back to the prior on an empty vector") {
  const FeatureMatrix x = DenseToMatrix({{1, 0}, {0, 1}, {1, 1}, {0, 1}, {1, 0}});
  const std::vector<int> y = {0, 1, 1, 1, 0};
  TrainParams p;
  p.algorithm = Algorithm::kNaiveBayes;
  const TrainedModel model = Train(x, y, p);
  SparseVector zero;
  zero.dimension = 2;
  CHECK(Predict(model, zero) == 1);
}

TEST_CASE("logistic prediction matches a hand-evaluated softmax") {
  LogisticModel model;
  // rows: classes; columns: two features then bias
  model.weights = Matrix(3, 3);
  model.weights.data = {0.5, -1.0, 0.1,
                        -0.2, 0.8, 0.0,
                        1.0, 0.3, -2.0};
  // x = (1, 2): scores -1.4, 1.4, -0.4
  const SparseVector x = MakeSparse(2, {{0, 1.0}, {1, 2.0}});
  const std::vector<std::size_t> counts = {1, 1, 1};
  CHECK(PredictLogistic(model, x, counts) == 1);
  const SparseVector y = MakeSparse(2, {{0, 3.0}});
  // scores 1.6, -0.6, 1.0
  CHECK(PredictLogistic(model, y, counts) == 0);
}

TEST_CASE("cross-entropy gradient") {
  SUBCASE("class rows cancel") {
    const FeatureMatrix x = DenseToMatrix({{1, 0}, {0, 1}, {1, 1}, {0, 0}});
    const std::vector<int> y = {0, 1, 0, 1};
    const Matrix g = CrossEntropyGradient(Matrix(2, 2), x, y, 0.0);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(g(0, j) + g(1, j)) < 1e-15);
  }
  SUBCASE("data term vanishes on zero inputs") {
    const FeatureMatrix x = DenseToMatrix({{0, 0, 0}, {0, 0, 0}});
    Matrix w(3, 3);
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] = 0.1 * static_cast<double>(i) - 0.4;
    const Matrix g = CrossEntropyGradient(w, x, std::vector<int>{0, 2}, 0.3);
    for (std::size_t i = 0; i < w.data.size(); ++i) CHECK(g.data[i] == 0.3 * w.data[i]);
  }
  SUBCASE("central differences") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      CHECK(testing::GradientRelativeError(testing::RandomGradientDraw(MixSeed(8, s))) < 1e-4);
    }
  }
}

TEST_CASE("logistic training loss never increases") {
  auto [x, y] = Blobs(5);
  std::vector<double> trace;
  TrainLogistic(x, y, 3, LogisticParams{}, &trace);
  REQUIRE(trace.size() > 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("smo with one point per class bisects them") {
  const FeatureMatrix x = DenseToMatrix({{1, 0}, {-1, 0}});
  const std::vector<int> y = {1, -1};
  const SmoResult r = SmoSolve(x, y, SmoParams{});
  CHECK(r.converged);
  CHECK(r.alphas[0] > 0.0);
  CHECK(r.alphas[1] > 0.0);
  const auto w = SvmWeights(x, y, r.alphas);
  // decision value at the midpoint
  CHECK(std::abs(r.bias) < 1e-9);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("smo with conflicting duplicates puts both alphas at C") {
  const FeatureMatrix x = DenseToMatrix({{1, 0}, {1, 0}});
  const std::vector<int> y = {1, -1};
  const SmoResult r = SmoSolve(x, y, SmoParams{});
  CHECK(r.alphas[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.alphas[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("smo six-point problem against a grid search of the dual") {
  const auto [x, y] = testing::SixPointProblem();
  SmoParams params;
  const SmoResult r = SmoSolve(x, y, params);
  CHECK(r.converged);
  const double dual = SvmDualObjective(x, y, r.alphas);
  const double grid = testing::GridDualOptimum(x, y, params.c);
  CHECK(std::abs(dual - grid) <= 1e-3);
  CHECK(dual == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(KktViolation(x, y, r.alphas, r.bias, params.c) <= params.tol);
  double balance = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) balance += r.alphas[i] * y[i];
  CHECK(std::abs(balance) <= 1e-9);
}

TEST_CASE("smo invariants on noisy data") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto [x, labels] = Blobs(MixSeed(40, seed), 60, {0, 1});
    std::vector<int> y;
    for (int l : labels) y.push_back(l == 0 ? 1 : -1);
    SmoParams params;
    const SmoResult r = SmoSolve(x, y, params);
    CHECK(r.converged);
    double balance = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(r.alphas[i] >= 0.0);
      CHECK(r.alphas[i] <= params.c);
      balance += r.alphas[i] * y[i];
    }
    CHECK(std::abs(balance) <= 1e-9);
    CHECK(KktViolation(x, y, r.alphas, r.bias, params.c) <= params.tol);
  }
}

TEST_CASE("smo separates a two-feature toy set") {
  const FeatureMatrix x = DenseToMatrix({{0, 0}, {1, 0}, {0, 1}, {3, 3}, {4, 3}, {3, 4}});
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  TrainParams p;
  p.algorithm = Algorithm::kSmo;
  CHECK(TrainingAccuracy(Train(x, y, p), x, y) == 1.0);
}

TEST_CASE("adaboost weights stay a distribution") {
  auto [x, y] = Blobs(6);
  std::vector<double> sums;
  TrainAdaBoost(x, y, 3, AdaBoostParams{}, &sums);
  REQUIRE_FALSE(sums.empty());
  for (double s : sums) CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("agreeing stumps always give their label") {
  AdaBoostModel model;
  for (int i = 0; i < 4; ++i) model.stumps.push_back({i % 2, 0.5, 2, 2, 0.3 + i});
  const std::vector<std::size_t> counts = {10, 10, 1};
  for (int i = 0; i < 4; ++i) {
    const SparseVector x = MakeSparse(2, {{static_cast<std::size_t>(i % 2), static_cast<double>(i)}});
    CHECK(PredictAdaBoost(model, x, 3, counts) == 2);
  }
}

TEST_CASE("one-tree forest equals the single tree") {
  auto [x, y] = Blobs(7);
  RandomForestParams params;
  params.trees = 1;
  params.bootstrap = false;
  params.features_per_split = 6;
  const std::vector<std::size_t> counts = {30, 30, 30};
  const RandomForestModel forest = TrainRandomForest(x, y, 3, params, 5, counts);
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  const DecisionTree tree = GrowTree(x, y, 3, rows, 6, MixSeed(5, 0), counts);
  for (const auto &row : x.rows) {
    CHECK(PredictRandomForest(forest, row, 3, counts) == tree.Predict(row));
  }
}

TEST_CASE("forest does not depend on the thread count") {
  auto [x, y] = Blobs(8);
  TrainParams p = ParamsFor(Algorithm::kRandomForest);
  p.random_forest.trees = 24;
  p.random_forest.threads = 1;
  const std::string serial = ModelToJson(Train(x, y, p)).dump();
  p.random_forest.threads = 4;
  CHECK(ModelToJson(Train(x, y, p)).dump() == serial);
}
