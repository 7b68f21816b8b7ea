#ifndef GSO_DATASET_H_
#define GSO_DATASET_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gso/ontology.h"
#include "json.hpp"

namespace gso {

enum class SentimentLabel {
  kPositive = 0,
  kNegative = 1,
  kNeutral = 2,
  kCantJudge = 3,
};

// The three classes that enter training and evaluation, in matrix order.
inline constexpr std::array<SentimentLabel, 3> kSentimentClasses = {
    SentimentLabel::kPositive, SentimentLabel::kNegative,
    SentimentLabel::kNeutral};
inline constexpr std::array<SentimentLabel, 4> kAllLabels = {
    SentimentLabel::kPositive, SentimentLabel::kNegative,
    SentimentLabel::kNeutral, SentimentLabel::kCantJudge};

// Wire names: "positive", "negative", "neutral", "cant_judge".
std::string_view LabelName(SentimentLabel label);
// Accepts wire names and display spellings such as "Can't Judge".
std::optional<SentimentLabel> ParseLabel(std::string_view name);
std::string_view LabelDisplayName(SentimentLabel label);

enum class NoiseFlag {
  kMixedContent = 0,
  kExplanativeText = 1,
  kMotionBlur = 2,
  kIlluminationChange = 3,
};

inline constexpr std::array<NoiseFlag, 4> kAllNoiseFlags = {
    NoiseFlag::kMixedContent, NoiseFlag::kExplanativeText,
    NoiseFlag::kMotionBlur, NoiseFlag::kIlluminationChange};

std::string_view NoiseFlagName(NoiseFlag flag);
std::optional<NoiseFlag> ParseNoiseFlag(std::string_view name);

struct AnnotatedInstance {
  std::string gif_id;
  SentiPairSequence sequence;
  SentimentLabel label = SentimentLabel::kNeutral;
  std::optional<double> duration_s;
  // Sorted and unique when present.
  std::optional<std::vector<NoiseFlag>> noise_flags;

  bool operator==(const AnnotatedInstance &other) const = default;
};

enum class LoadMode { kStrict, kLenient };

// A pair reference that did not resolve during a lenient load.
struct DroppedPair {
  std::size_t line = 0;
  std::size_t position = 0;
  PairRef ref;
  ErrorCode code = ErrorCode::kUnknownSynset;
};

struct Dataset {
  std::shared_ptr<const SynsetForest> forest;
  std::vector<AnnotatedInstance> instances;
  std::vector<DroppedPair> dropped;

  std::size_t size() const { return instances.size(); }
  std::size_t dropped_pairs() const { return dropped.size(); }
};

// Dataset files (.gso.jsonl) hold one record per line:
//   {"gif_id", "pairs": [{"modifier", "noun"}], "label",
//    "duration_s"?, "noise_flags"?}
// The pairs array is in occurrence order.
Dataset ParseDataset(std::istream &in,
                     std::shared_ptr<const SynsetForest> forest,
                     LoadMode mode);
Dataset LoadDataset(const std::string &path,
                    std::shared_ptr<const SynsetForest> forest, LoadMode mode);

nlohmann::json InstanceToJson(const AnnotatedInstance &instance);
void WriteDataset(std::ostream &out, const Dataset &dataset);
void SaveDataset(const std::string &path, const Dataset &dataset);

struct DatasetStats {
  std::size_t total = 0;
  std::array<std::size_t, 4> label_counts{};
  // Shares of positive/negative/neutral among the non-CantJudge instances.
  // Absent when there are none.
  std::optional<std::array<double, 3>> class_proportions;

  std::size_t with_duration = 0;
  std::optional<double> duration_mean;
  std::optional<double> duration_min;
  std::optional<double> duration_max;

  // Share of all instances carrying each flag; absent for an empty dataset.
  std::optional<std::array<double, 4>> noise_proportions;

  std::map<std::size_t, std::size_t> length_histogram;
  std::size_t anp_pairs = 0;
  std::size_t vnp_pairs = 0;
};

DatasetStats ComputeStats(const Dataset &dataset);
std::string RenderStatsTable(const DatasetStats &stats);
nlohmann::json StatsToJson(const DatasetStats &stats);

// Formats a share as a one-decimal percentage, e.g. 0.6014 -> "60.1%".
std::string FormatPercent(double share);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified k-fold partition over the non-CantJudge instances. Indices refer
// to dataset.instances. Throws ClassTooSmall or InvalidParameter.
std::vector<Fold> StratifiedKFold(const Dataset &dataset, int k,
                                  std::uint64_t seed);

struct SyntheticConfig {
  std::size_t n = 1000;
  std::array<double, 3> class_ratios = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  // Planted weights. When empty, weights are taken from the ontology pair
  // weights of a seeded sample of anp_pool ANPs and vnp_pool VNPs.
  std::map<PairRef, double> signal;
  double noise_rate = 0.0;
  double vnp_signal_share = 0.5;
  std::uint64_t seed = 0;

  std::size_t anp_pool = 30;
  std::size_t vnp_pool = 30;
  int min_length = 2;
  int max_length = 6;
  double neutral_band = 0.25;
  // Draws whose planted sum falls within this distance of a band edge are
  // rejected, so every clean label is decided with some slack.
  double margin = 0.1;
};

struct SyntheticDataset {
  Dataset dataset;
  // Planted weights after the VNP share rescaling.
  std::map<PairRef, double> signal;
  // Labels before noise was injected.
  std::vector<SentimentLabel> clean_labels;
};

// Label implied by a planted sum: >= band positive, <= -band negative,
// otherwise neutral.
SentimentLabel PlantedLabel(double planted_sum, double band);

// Exact per-class counts for n draws at the given ratios (normalized, then
// largest remainder). Throws InvalidRatio.
std::array<std::size_t, 3> AllocateClassCounts(std::size_t n,
                                               const std::array<double, 3> &ratios);

// Builds a dataset whose clean labels follow the planted sign rule, then flips
// each label to a different sentiment class with probability noise_rate.
SyntheticDataset GenerateSynthetic(std::shared_ptr<const SynsetForest> forest,
                                   const SyntheticConfig &config);

}  // namespace gso

#endif  // GSO_DATASET_H_
