#ifndef GSO_FEATURES_H_
#define GSO_FEATURES_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gso/dataset.h"
#include "gso/ontology.h"
#include "json.hpp"

namespace gso {

enum class FeatureMode { kBinary, kCount, kWeighted };

std::string_view FeatureModeName(FeatureMode mode);
std::optional<FeatureMode> ParseFeatureMode(std::string_view name);

// Which pair kinds an experiment keeps.
enum class Representation { kSentiPair, kAnpOnly, kVnpOnly };

std::string_view RepresentationName(Representation representation);
std::optional<Representation> ParseRepresentation(std::string_view name);
bool Keeps(Representation representation, PairKind kind);

// Drops the pairs a representation does not keep; order of the rest is
// unchanged.
SentiPairSequence FilterSequence(const SentiPairSequence &sequence,
                                 Representation representation);
Dataset FilterDataset(const Dataset &dataset, Representation representation);

// Copies the listed instances (in the given order).
Dataset SubsetDataset(const Dataset &dataset, std::span<const std::size_t> rows);

struct SparseEntry {
  std::size_t index = 0;
  double value = 0.0;

  bool operator==(const SparseEntry &other) const = default;
};

// Entries sorted by strictly increasing index, no explicit zeros.
struct SparseVector {
  std::size_t dimension = 0;
  std::vector<SparseEntry> entries;

  double Get(std::size_t index) const;
  double Dot(std::span<const double> dense) const;
  bool operator==(const SparseVector &other) const = default;
};

// Builds a SparseVector from unsorted (index, value) contributions, summing
// duplicates and dropping zeros.
SparseVector MakeSparse(std::size_t dimension,
                        std::vector<SparseEntry> contributions);

struct FeatureMatrix {
  std::size_t dimension = 0;
  std::vector<SparseVector> rows;

  std::size_t size() const { return rows.size(); }
};

// A vocabulary entry: one pair, or two consecutive pairs when bigrams are on.
struct FeatureKey {
  PairRef first;
  PairKind first_kind = PairKind::kAnp;
  std::optional<PairRef> second;
  PairKind second_kind = PairKind::kAnp;

  bool is_bigram() const { return second.has_value(); }
  bool operator==(const FeatureKey &other) const = default;
};

class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(std::vector<FeatureKey> vocabulary, FeatureMode mode,
               bool bigrams);

  const std::vector<FeatureKey> &vocabulary() const { return vocabulary_; }
  FeatureMode mode() const { return mode_; }
  bool bigrams() const { return bigrams_; }
  const std::optional<std::vector<bool>> &selected() const { return selected_; }

  // Number of active features: the vocabulary size, or the selected count
  // once a mask is applied.
  std::size_t dimension() const { return active_.size(); }

  // Active index of a vocabulary entry, if it is active.
  std::optional<std::size_t> ActiveIndex(const FeatureKey &key) const;
  // Vocabulary position of an active feature.
  std::size_t VocabularyIndex(std::size_t active) const { return active_[active]; }

  // Restricts the space to the marked vocabulary entries. The mask length
  // must equal the vocabulary size. Passing nullopt clears the selection.
  void Select(std::optional<std::vector<bool>> mask);

  nlohmann::json ToJson() const;
  static FeatureSpace FromJson(const nlohmann::json &record);

  bool operator==(const FeatureSpace &other) const;

 private:
  void Reindex();

  std::vector<FeatureKey> vocabulary_;
  FeatureMode mode_ = FeatureMode::kBinary;
  bool bigrams_ = false;
  std::optional<std::vector<bool>> selected_;
  std::map<std::string, std::size_t> position_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> vocab_to_active_;
};

struct VocabularyOptions {
  std::size_t min_freq = 1;
  FeatureMode mode = FeatureMode::kBinary;
  bool bigrams = false;
};

// Vocabulary of every key occurring at least min_freq times across the
// non-CantJudge instances, in canonical pair order. Throws EmptyVocabulary.
FeatureSpace BuildVocabulary(const Dataset &train,
                             const VocabularyOptions &options = {});

// Bag-of-pairs vector. Order within the sequence is discarded; unknown pairs
// are ignored.
SparseVector Featurize(const SentiPairSequence &sequence,
                       const FeatureSpace &space);

// Zeroes the entries whose key a representation does not keep.
SparseVector MaskRepresentation(const SparseVector &vector,
                                const FeatureSpace &space,
                                Representation representation);

// Non-CantJudge instances as a feature matrix with class indices 0..2
// (positive, negative, neutral). `rows` maps back to dataset.instances.
struct LabeledMatrix {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::size_t> rows;
};

LabeledMatrix FeaturizeDataset(const Dataset &dataset,
                               const FeatureSpace &space);

int ClassIndex(SentimentLabel label);

// 2 I(a;b) / (H(a) + H(b)), zero when either column is constant. Throws
// LengthMismatch.
double SymmetricUncertainty(std::span<const int> a, std::span<const int> b);

struct CfsStep {
  std::vector<std::size_t> subset;
  double merit = 0.0;
};

struct CfsResult {
  // Sorted feature indices.
  std::vector<std::size_t> selected;
  double merit = 0.0;
  std::size_t expansions = 0;
  std::size_t evaluated = 0;
  // Every subset evaluated, with the incrementally computed merit.
  std::vector<CfsStep> trace;
};

struct CfsOptions {
  int stall_limit = 5;
  bool keep_trace = false;
};

// Feature/class and feature/feature correlations for one binarized matrix.
// Feature pairs are computed on demand and cached.
class CorrelationTable {
 public:
  CorrelationTable(const FeatureMatrix &features, std::span<const int> labels);

  std::size_t dimension() const { return presence_.size(); }
  double FeatureClass(std::size_t f) const { return feature_class_[f]; }
  double FeatureFeature(std::size_t f, std::size_t g);

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<std::size_t>> presence_;
  std::vector<double> feature_entropy_;
  std::vector<double> feature_class_;
  std::map<std::pair<std::size_t, std::size_t>, double> cache_;
};

// merit(S) = sum r_cf / sqrt(k + 2 sum_{f<g} r_fg), computed from scratch.
double CfsMerit(std::span<const std::size_t> subset, CorrelationTable &table);

// Best-first forward search from the empty set. Features count as present
// when their value is non-zero. Throws DegenerateInput for a single class or
// an empty feature set.
CfsResult CfsSelect(const FeatureMatrix &features, std::span<const int> labels,
                    const CfsOptions &options = {});

}  // namespace gso

#endif  // GSO_FEATURES_H_
