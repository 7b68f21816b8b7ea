#ifndef GSO_EVAL_H_
#define GSO_EVAL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gso/classifiers.h"
#include "gso/dataset.h"
#include "gso/features.h"
#include "json.hpp"

namespace gso {

// Counts indexed by (true class, predicted class) in the order positive,
// negative, neutral.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 3>, 3> counts{};

  void Add(int truth, int predicted) { ++counts[truth][predicted]; }
  std::size_t total() const;
  std::size_t correct() const;
  ConfusionMatrix &operator+=(const ConfusionMatrix &other);
  bool operator==(const ConfusionMatrix &) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool operator==(const ClassMetrics &) const = default;
};

// Per-class values use 0 when a denominator is empty; the weighted values
// are averaged by true-class support.
struct Metrics {
  std::array<ClassMetrics, 3> per_class;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;
  bool operator==(const Metrics &) const = default;
};

// Throws EmptyMatrix when the matrix holds no instances.
Metrics ComputeMetrics(const ConfusionMatrix &cm);

// How one train split becomes a model.
struct PipelineConfig {
  Representation representation = Representation::kSentiPair;
  VocabularyOptions vocabulary;
  bool cfs = false;
  TrainParams params;
};

struct FittedPipeline {
  FeatureSpace space;
  TrainedModel model;
  bool operator==(const FittedPipeline &) const = default;
};

// Filters to the representation, builds the vocabulary, optionally runs CFS,
// then trains. Only `train` is read.
FittedPipeline FitPipeline(const Dataset &train, const PipelineConfig &config);

// Predicted class index (0..2) for one sequence.
int PredictSequence(const FittedPipeline &pipeline,
                    const SentiPairSequence &sequence,
                    Representation representation);

struct FoldDetail {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t vocabulary = 0;
  std::size_t features = 0;  // after selection
  ConfusionMatrix confusion;
  bool operator==(const FoldDetail &) const = default;
};

struct EvalReport {
  PipelineConfig config;
  int k = 10;
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;  // pooled over folds
  Metrics metrics;
  std::vector<FoldDetail> folds;
};

// Stratified k-fold cross-validation. Each fold's pipeline sees only its
// training instances. When `fitted` is given it receives every fold's
// pipeline in fold order.
EvalReport CrossValidate(const Dataset &dataset, const PipelineConfig &config,
                         int k, std::uint64_t seed,
                         std::vector<FittedPipeline> *fitted = nullptr);

struct SuiteConfig {
  std::vector<Algorithm> algorithms = {std::begin(kAllAlgorithms),
                                       std::end(kAllAlgorithms)};
  int k = 10;
  std::uint64_t seed = 1;
  VocabularyOptions vocabulary;
  TrainParams params;  // hyperparameters; the algorithm field is overridden
  int threads = 0;     // 0 = hardware concurrency; does not affect results
};

struct SuiteCell {
  Algorithm algorithm = Algorithm::kSmo;
  bool cfs = false;
  Representation representation = Representation::kSentiPair;
  EvalReport report;
};

struct SuiteReport {
  SuiteConfig config;
  std::size_t instances = 0;  // evaluated (non-CantJudge) instances
  // Grid order: algorithm, then selection off/on, then ANP, VNP, SentiPair.
  std::vector<SuiteCell> cells;

  // Null when the cell was not run.
  const SuiteCell *Find(Algorithm algorithm, bool cfs,
                        Representation representation) const;
};

SuiteReport RunSuite(const Dataset &dataset, const SuiteConfig &config);

nlohmann::json MetricsToJson(const Metrics &metrics);
nlohmann::json ReportToJson(const EvalReport &report);
// Machine-readable suite record; contains nothing run-dependent.
nlohmann::json SuiteToJson(const SuiteReport &report);

std::string RenderReport(const EvalReport &report);
// One-decimal percentages, one row per cell.
std::string RenderSuiteTable(const SuiteReport &report);
// Three-decimal tables: per-algorithm metrics without and with CFS, and the
// representation comparison (once per selection setting).
std::string RenderPaperTables(const SuiteReport &report);

}  // namespace gso

#endif  // GSO_EVAL_H_
