#include "gso/eval.h"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace gso {

using json = nlohmann::json;

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto &row : counts) {
    for (std::size_t c : row) sum += c;
  }
  return sum;
}

std::size_t ConfusionMatrix::correct() const {
  return counts[0][0] + counts[1][1] + counts[2][2];
}

ConfusionMatrix &ConfusionMatrix::operator+=(const ConfusionMatrix &other) {
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < 3; ++p) counts[t][p] += other.counts[t][p];
  }
  return *this;
}

Metrics ComputeMetrics(const ConfusionMatrix &cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");

  Metrics m;
  m.total = total;
  for (int c = 0; c < 3; ++c) {
    std::size_t predicted = 0, support = 0;
    for (int o = 0; o < 3; ++o) {
      predicted += cm.counts[o][c];
      support += cm.counts[c][o];
    }
    const double tp = static_cast<double>(cm.counts[c][c]);
    ClassMetrics &k = m.per_class[c];
    k.support = support;
    k.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    k.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    k.f1 = k.precision + k.recall > 0.0
               ? 2.0 * k.precision * k.recall / (k.precision + k.recall)
               : 0.0;
    const double weight = static_cast<double>(support) / static_cast<double>(total);
    m.precision += weight * k.precision;
    m.recall += weight * k.recall;
    m.f1 += weight * k.f1;
  }
  m.accuracy = static_cast<double>(cm.correct()) / static_cast<double>(total);
  return m;
}

FittedPipeline FitPipeline(const Dataset &train, const PipelineConfig &config) {
  const Dataset filtered = FilterDataset(train, config.representation);
  FittedPipeline pipeline;
  pipeline.space = BuildVocabulary(filtered, config.vocabulary);
  if (config.cfs) {
    const LabeledMatrix full = FeaturizeDataset(filtered, pipeline.space);
    const CfsResult chosen = CfsSelect(full.features, full.labels);
    std::vector<bool> mask(pipeline.space.vocabulary().size(), false);
    for (std::size_t f : chosen.selected) mask[pipeline.space.VocabularyIndex(f)] = true;
    pipeline.space.Select(std::move(mask));
  }
  const LabeledMatrix matrix = FeaturizeDataset(filtered, pipeline.space);
  pipeline.model = Train(matrix.features, matrix.labels, config.params);
  return pipeline;
}

int PredictSequence(const FittedPipeline &pipeline,
                    const SentiPairSequence &sequence,
                    Representation representation) {
  return Predict(pipeline.model,
                 Featurize(FilterSequence(sequence, representation), pipeline.space));
}

EvalReport CrossValidate(const Dataset &dataset, const PipelineConfig &config,
                         int k, std::uint64_t seed,
                         std::vector<FittedPipeline> *fitted) {
  EvalReport report;
  report.config = config;
  report.k = k;
  report.seed = seed;
  for (const Fold &fold : StratifiedKFold(dataset, k, seed)) {
    FittedPipeline pipeline = FitPipeline(SubsetDataset(dataset, fold.train), config);
    FoldDetail detail;
    detail.train_size = fold.train.size();
    detail.test_size = fold.test.size();
    detail.vocabulary = pipeline.space.vocabulary().size();
    detail.features = pipeline.space.dimension();
    for (std::size_t row : fold.test) {
      const AnnotatedInstance &instance = dataset.instances[row];
      detail.confusion.Add(ClassIndex(instance.label),
                           PredictSequence(pipeline, instance.sequence,
                                           config.representation));
    }
    report.confusion += detail.confusion;
    report.folds.push_back(detail);
    if (fitted) fitted->push_back(std::move(pipeline));
  }
  report.metrics = ComputeMetrics(report.confusion);
  return report;
}

namespace {

constexpr Representation kGridRepresentations[] = {
    Representation::kAnpOnly, Representation::kVnpOnly, Representation::kSentiPair};

std::string_view RepresentationTitle(Representation representation) {
  switch (representation) {
    case Representation::kAnpOnly: return "ANP only";
    case Representation::kVnpOnly: return "VNP only";
    case Representation::kSentiPair: return "SentiPair";
  }
  return "SentiPair";
}

}  // namespace

const SuiteCell *SuiteReport::Find(Algorithm algorithm, bool cfs,
                                   Representation representation) const {
  for (const SuiteCell &cell : cells) {
    if (cell.algorithm == algorithm && cell.cfs == cfs &&
        cell.representation == representation) {
      return &cell;
    }
  }
  return nullptr;
}

SuiteReport RunSuite(const Dataset &dataset, const SuiteConfig &config) {
  SuiteReport report;
  report.config = config;
  for (const AnnotatedInstance &instance : dataset.instances) {
    report.instances += instance.label != SentimentLabel::kCantJudge;
  }
  for (Algorithm algorithm : config.algorithms) {
    for (bool cfs : {false, true}) {
      for (Representation representation : kGridRepresentations) {
        SuiteCell cell;
        cell.algorithm = algorithm;
        cell.cfs = cfs;
        cell.representation = representation;
        report.cells.push_back(std::move(cell));
      }
    }
  }

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(report.cells.size()));

  auto run = [&](std::size_t i) {
    SuiteCell &cell = report.cells[i];
    PipelineConfig pipeline;
    pipeline.representation = cell.representation;
    pipeline.vocabulary = config.vocabulary;
    pipeline.cfs = cell.cfs;
    pipeline.params = config.params;
    pipeline.params.algorithm = cell.algorithm;
    // Cells already run in parallel.
    if (workers > 1) pipeline.params.random_forest.threads = 1;
    cell.report = CrossValidate(dataset, pipeline, config.k, config.seed);
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < report.cells.size(); ++i) run(i);
    return report;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < report.cells.size(); i = next++) {
        try {
          run(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread &thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
  return report;
}

json MetricsToJson(const Metrics &metrics) {
  json per_class = json::object();
  for (int c = 0; c < 3; ++c) {
    const ClassMetrics &k = metrics.per_class[c];
    per_class[std::string(LabelName(kSentimentClasses[c]))] = {
        {"precision", k.precision},
        {"recall", k.recall},
        {"f1", k.f1},
        {"support", k.support}};
  }
  return {{"precision", metrics.precision},
          {"recall", metrics.recall},
          {"f1", metrics.f1},
          {"accuracy", metrics.accuracy},
          {"total", metrics.total},
          {"per_class", per_class}};
}

namespace {

json ConfusionJson(const ConfusionMatrix &cm) {
  json rows = json::array();
  for (const auto &row : cm.counts) rows.push_back(row);
  return rows;
}

}  // namespace

json ReportToJson(const EvalReport &report) {
  json folds = json::array();
  for (const FoldDetail &fold : report.folds) {
    folds.push_back({{"train", fold.train_size},
                     {"test", fold.test_size},
                     {"vocabulary", fold.vocabulary},
                     {"features", fold.features},
                     {"confusion", ConfusionJson(fold.confusion)}});
  }
  const PipelineConfig &config = report.config;
  return {{"config",
           {{"algorithm", AlgorithmName(config.params.algorithm)},
            {"representation", RepresentationName(config.representation)},
            {"feature_mode", FeatureModeName(config.vocabulary.mode)},
            {"bigrams", config.vocabulary.bigrams},
            {"min_freq", config.vocabulary.min_freq},
            {"cfs", config.cfs},
            {"params", config.params.ToJson()},
            {"k", report.k},
            {"seed", report.seed}}},
          {"labels", {"positive", "negative", "neutral"}},
          {"confusion", ConfusionJson(report.confusion)},
          {"metrics", MetricsToJson(report.metrics)},
          {"folds", folds}};
}

json SuiteToJson(const SuiteReport &report) {
  json cells = json::array();
  for (const SuiteCell &cell : report.cells) cells.push_back(ReportToJson(cell.report));
  json algorithms = json::array();
  for (Algorithm a : report.config.algorithms) algorithms.push_back(AlgorithmName(a));
  return {{"format", "gso-suite"},
          {"version", 1},
          {"instances", report.instances},
          {"k", report.config.k},
          {"seed", report.config.seed},
          {"algorithms", algorithms},
          {"cells", cells}};
}

std::string RenderReport(const EvalReport &report) {
  const Metrics &m = report.metrics;
  std::string out = fmt::format(
      "{} | {} | cfs {} | {}-fold, seed {}\n", AlgorithmName(report.config.params.algorithm),
      RepresentationName(report.config.representation), report.config.cfs ? "on" : "off",
      report.k, report.seed);
  out += fmt::format("{:<10} {:>9} {:>9} {:>9} {:>8}\n", "class", "precision", "recall",
                     "f1", "support");
  for (int c = 0; c < 3; ++c) {
    const ClassMetrics &k = m.per_class[c];
    out += fmt::format("{:<10} {:>9.3f} {:>9.3f} {:>9.3f} {:>8}\n",
                       LabelName(kSentimentClasses[c]), k.precision, k.recall, k.f1,
                       k.support);
  }
  out += fmt::format("{:<10} {:>9.3f} {:>9.3f} {:>9.3f} {:>8}\n", "weighted", m.precision,
                     m.recall, m.f1, m.total);
  out += fmt::format("accuracy {} ({}/{})\n", FormatPercent(m.accuracy),
                     report.confusion.correct(), m.total);
  out += "confusion (rows = truth, cols = predicted; pos neg neu)\n";
  for (const auto &row : report.confusion.counts) {
    out += fmt::format("  {:>6} {:>6} {:>6}\n", row[0], row[1], row[2]);
  }
  return out;
}

std::string RenderSuiteTable(const SuiteReport &report) {
  std::string out = fmt::format("{} instances, {}-fold, seed {}\n", report.instances,
                                report.config.k, report.config.seed);
  out += fmt::format("{:<14} {:<4} {:<11} {:>7} {:>7} {:>7} {:>7} {:>9}\n", "algorithm",
                     "cfs", "pairs", "prec", "recall", "f1", "acc", "features");
  for (const SuiteCell &cell : report.cells) {
    const Metrics &m = cell.report.metrics;
    double features = 0.0;
    for (const FoldDetail &fold : cell.report.folds) {
      features += static_cast<double>(fold.features);
    }
    if (!cell.report.folds.empty()) features /= static_cast<double>(cell.report.folds.size());
    out += fmt::format("{:<14} {:<4} {:<11} {:>7} {:>7} {:>7} {:>7} {:>9.1f}\n",
                       AlgorithmDisplayName(cell.algorithm), cell.cfs ? "on" : "off",
                       RepresentationName(cell.representation), FormatPercent(m.precision),
                       FormatPercent(m.recall), FormatPercent(m.f1),
                       FormatPercent(m.accuracy), features);
  }
  return out;
}

namespace {

std::string MetricsTable(const SuiteReport &report, bool cfs, const std::string &caption) {
  std::string out = caption + "\n";
  out += fmt::format("{:<12} {:>6} {:>6} {:>6} {:>6}\n", "Algorithm", "Prec.", "Recall",
                     "FScore", "Acc.");
  for (Algorithm algorithm : report.config.algorithms) {
    const SuiteCell *cell = report.Find(algorithm, cfs, Representation::kSentiPair);
    if (!cell) continue;
    const Metrics &m = cell->report.metrics;
    out += fmt::format("{:<12} {:>6.3f} {:>6.3f} {:>6.3f} {:>6.3f}\n",
                       AlgorithmDisplayName(algorithm), m.precision, m.recall, m.f1,
                       m.accuracy);
  }
  return out;
}

std::string RepresentationTable(const SuiteReport &report, bool cfs,
                                const std::string &caption) {
  std::vector<Algorithm> columns;
  for (Algorithm a : {Algorithm::kSmo, Algorithm::kLogistic, Algorithm::kRandomForest}) {
    if (report.Find(a, cfs, Representation::kSentiPair)) columns.push_back(a);
  }
  std::string out = caption + "\n";
  out += fmt::format("{:<10}", "Type");
  for (Algorithm a : columns) {
    out += fmt::format(" {:>12}", a == Algorithm::kRandomForest ? "Rand. Forest"
                                                                 : AlgorithmDisplayName(a));
  }
  out += "\n";
  for (Representation representation : kGridRepresentations) {
    out += fmt::format("{:<10}", RepresentationTitle(representation));
    for (Algorithm a : columns) {
      out += fmt::format(" {:>12.3f}",
                         report.Find(a, cfs, representation)->report.metrics.accuracy);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string RenderPaperTables(const SuiteReport &report) {
  std::string out;
  out += MetricsTable(report, false, "Table 1: Accuracy without attribute selection");
  out += "\n";
  out += MetricsTable(report, true, "Table 2: Accuracy with Correlation Based Subset");
  out += "\n";
  out += RepresentationTable(report, true,
                             "Table 3: Accuracy with Correlation Based Subset");
  out += "\n";
  out += RepresentationTable(report, false,
                             "Table 3 (without attribute selection)");
  return out;
}

}  // namespace gso
