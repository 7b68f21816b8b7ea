#include "gso/features.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace gso {

using json = nlohmann::json;

namespace {

std::string KeyString(const PairRef &first, const std::optional<PairRef> &second) {
  std::string key = first.modifier + '\x1f' + first.noun;
  if (second) key += '\x1e' + second->modifier + '\x1f' + second->noun;
  return key;
}

std::string KeyString(const FeatureKey &key) {
  return KeyString(key.first, key.second);
}

json PairJson(const PairRef &ref, PairKind kind) {
  return {{"modifier", ref.modifier}, {"noun", ref.noun},
          {"kind", PairKindName(kind)}};
}

PairRef PairFromJson(const json &record, PairKind &kind) {
  kind = record.at("kind").get<std::string>() == "VNP" ? PairKind::kVnp
                                                       : PairKind::kAnp;
  return {record.at("modifier").get<std::string>(),
          record.at("noun").get<std::string>()};
}

double Entropy(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

// SU from a joint count table given as rows of the first variable.
double SuFromJoint(const std::vector<std::vector<double>> &joint) {
  const std::size_t rows = joint.size();
  const std::size_t cols = rows > 0 ? joint[0].size() : 0;
  std::vector<double> row_totals(rows, 0.0), col_totals(cols, 0.0), cells;
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      row_totals[i] += joint[i][j];
      col_totals[j] += joint[i][j];
      cells.push_back(joint[i][j]);
      total += joint[i][j];
    }
  }
  if (total <= 0.0) return 0.0;
  const double ha = Entropy(row_totals, total);
  const double hb = Entropy(col_totals, total);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  const double hab = Entropy(cells, total);
  const double su = 2.0 * (ha + hb - hab) / (ha + hb);
  return std::clamp(su, 0.0, 1.0);
}

}  // namespace

std::string_view FeatureModeName(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kBinary: return "binary";
    case FeatureMode::kCount: return "count";
    case FeatureMode::kWeighted: return "weighted";
  }
  return "binary";
}

std::optional<FeatureMode> ParseFeatureMode(std::string_view name) {
  if (name == "binary") return FeatureMode::kBinary;
  if (name == "count") return FeatureMode::kCount;
  if (name == "weighted") return FeatureMode::kWeighted;
  return std::nullopt;
}

std::string_view RepresentationName(Representation representation) {
  switch (representation) {
    case Representation::kSentiPair: return "sentipair";
    case Representation::kAnpOnly: return "anp";
    case Representation::kVnpOnly: return "vnp";
  }
  return "sentipair";
}

std::optional<Representation> ParseRepresentation(std::string_view name) {
  if (name == "sentipair" || name == "all") return Representation::kSentiPair;
  if (name == "anp" || name == "anp-only") return Representation::kAnpOnly;
  if (name == "vnp" || name == "vnp-only") return Representation::kVnpOnly;
  return std::nullopt;
}

bool Keeps(Representation representation, PairKind kind) {
  switch (representation) {
    case Representation::kSentiPair: return true;
    case Representation::kAnpOnly: return kind == PairKind::kAnp;
    case Representation::kVnpOnly: return kind == PairKind::kVnp;
  }
  return true;
}

SentiPairSequence FilterSequence(const SentiPairSequence &sequence,
                                 Representation representation) {
  SentiPairSequence kept;
  for (const SentiPair &pair : sequence.pairs) {
    if (Keeps(representation, pair.kind)) kept.pairs.push_back(pair);
  }
  return kept;
}

Dataset FilterDataset(const Dataset &dataset, Representation representation) {
  Dataset filtered = dataset;
  for (AnnotatedInstance &instance : filtered.instances) {
    instance.sequence = FilterSequence(instance.sequence, representation);
  }
  return filtered;
}

Dataset SubsetDataset(const Dataset &dataset, std::span<const std::size_t> rows) {
  Dataset subset;
  subset.forest = dataset.forest;
  subset.instances.reserve(rows.size());
  for (std::size_t row : rows) subset.instances.push_back(dataset.instances.at(row));
  return subset;
}

double SparseVector::Get(std::size_t index) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), index,
      [](const SparseEntry &e, std::size_t i) { return e.index < i; });
  return it != entries.end() && it->index == index ? it->value : 0.0;
}

double SparseVector::Dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (const SparseEntry &e : entries) sum += e.value * dense[e.index];
  return sum;
}

SparseVector MakeSparse(std::size_t dimension,
                        std::vector<SparseEntry> contributions) {
  std::stable_sort(contributions.begin(), contributions.end(),
                   [](const SparseEntry &a, const SparseEntry &b) {
                     return a.index < b.index;
                   });
  SparseVector v;
  v.dimension = dimension;
  for (const SparseEntry &e : contributions) {
    if (!v.entries.empty() && v.entries.back().index == e.index) {
      v.entries.back().value += e.value;
    } else {
      v.entries.push_back(e);
    }
  }
  std::erase_if(v.entries, [](const SparseEntry &e) { return e.value == 0.0; });
  return v;
}

FeatureSpace::FeatureSpace(std::vector<FeatureKey> vocabulary, FeatureMode mode,
                           bool bigrams)
    : vocabulary_(std::move(vocabulary)), mode_(mode), bigrams_(bigrams) {
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!position_.emplace(KeyString(vocabulary_[i]), i).second) {
      throw Error(ErrorCode::kInvalidParameter, "duplicate vocabulary key");
    }
  }
  Reindex();
}

void FeatureSpace::Reindex() {
  active_.clear();
  vocab_to_active_.assign(vocabulary_.size(), SynsetForest::kNone);
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!selected_ || (*selected_)[i]) {
      vocab_to_active_[i] = active_.size();
      active_.push_back(i);
    }
  }
}

void FeatureSpace::Select(std::optional<std::vector<bool>> mask) {
  if (mask && mask->size() != vocabulary_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "selection mask length differs from vocabulary size");
  }
  selected_ = std::move(mask);
  Reindex();
}

std::optional<std::size_t> FeatureSpace::ActiveIndex(const FeatureKey &key) const {
  auto it = position_.find(KeyString(key));
  if (it == position_.end()) return std::nullopt;
  const std::size_t active = vocab_to_active_[it->second];
  if (active == SynsetForest::kNone) return std::nullopt;
  return active;
}

json FeatureSpace::ToJson() const {
  json record = json::object();
  record["format"] = "gso-feature-space";
  record["version"] = 1;
  record["mode"] = FeatureModeName(mode_);
  record["bigrams"] = bigrams_;
  json vocabulary = json::array();
  for (const FeatureKey &key : vocabulary_) {
    if (key.second) {
      vocabulary.push_back({{"bigram",
                             {PairJson(key.first, key.first_kind),
                              PairJson(*key.second, key.second_kind)}}});
    } else {
      vocabulary.push_back(PairJson(key.first, key.first_kind));
    }
  }
  record["vocabulary"] = std::move(vocabulary);
  if (selected_) {
    json mask = json::array();
    for (bool bit : *selected_) mask.push_back(bit ? 1 : 0);
    record["selected"] = std::move(mask);
  } else {
    record["selected"] = nullptr;
  }
  return record;
}

FeatureSpace FeatureSpace::FromJson(const json &record) {
  try {
    if (record.at("format").get<std::string>() != "gso-feature-space") {
      throw Error(ErrorCode::kParseError, "not a feature space file");
    }
    if (record.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kVersionMismatch, "unsupported feature space version");
    }
    auto mode = ParseFeatureMode(record.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::kParseError, "unknown feature mode");
    std::vector<FeatureKey> vocabulary;
    for (const json &entry : record.at("vocabulary")) {
      FeatureKey key;
      if (entry.contains("bigram")) {
        key.first = PairFromJson(entry["bigram"].at(0), key.first_kind);
        key.second = PairFromJson(entry["bigram"].at(1), key.second_kind);
      } else {
        key.first = PairFromJson(entry, key.first_kind);
      }
      vocabulary.push_back(std::move(key));
    }
    FeatureSpace space(std::move(vocabulary), *mode,
                       record.value("bigrams", false));
    if (!record.at("selected").is_null()) {
      std::vector<bool> mask;
      for (const json &bit : record["selected"]) mask.push_back(bit.get<int>() != 0);
      space.Select(std::move(mask));
    }
    return space;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("feature space: ") + e.what());
  }
}

bool FeatureSpace::operator==(const FeatureSpace &other) const {
  return vocabulary_ == other.vocabulary_ && mode_ == other.mode_ &&
         bigrams_ == other.bigrams_ && selected_ == other.selected_;
}

FeatureSpace BuildVocabulary(const Dataset &train,
                             const VocabularyOptions &options) {
  std::map<std::string, std::pair<FeatureKey, std::size_t>> counts;
  auto add = [&](FeatureKey key) {
    auto [it, fresh] = counts.try_emplace(KeyString(key), std::move(key), 0);
    ++it->second.second;
  };
  for (const AnnotatedInstance &instance : train.instances) {
    if (instance.label == SentimentLabel::kCantJudge) continue;
    const auto &pairs = instance.sequence.pairs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      add({pairs[i].ref(), pairs[i].kind, std::nullopt, PairKind::kAnp});
      if (options.bigrams && i + 1 < pairs.size()) {
        add({pairs[i].ref(), pairs[i].kind, pairs[i + 1].ref(), pairs[i + 1].kind});
      }
    }
  }

  std::vector<FeatureKey> vocabulary;
  for (auto &[text, entry] : counts) {
    if (entry.second >= options.min_freq) vocabulary.push_back(entry.first);
  }
  if (vocabulary.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary,
                "no pair occurs at least " + std::to_string(options.min_freq) +
                    " times");
  }
  const SynsetForest &forest = *train.forest;
  std::sort(vocabulary.begin(), vocabulary.end(),
            [&](const FeatureKey &a, const FeatureKey &b) {
              if (a.is_bigram() != b.is_bigram()) return !a.is_bigram();
              if (a.first != b.first) return CanonicalPairLess(forest, a.first, b.first);
              if (!a.is_bigram()) return false;
              return CanonicalPairLess(forest, *a.second, *b.second);
            });
  return FeatureSpace(std::move(vocabulary), options.mode, options.bigrams);
}

SparseVector Featurize(const SentiPairSequence &sequence,
                       const FeatureSpace &space) {
  std::vector<SparseEntry> contributions;
  const auto &pairs = sequence.pairs;
  auto contribute = [&](const FeatureKey &key, double weight) {
    if (auto index = space.ActiveIndex(key)) {
      const double value = space.mode() == FeatureMode::kWeighted ? weight : 1.0;
      contributions.push_back({*index, value});
    }
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    contribute({pairs[i].ref(), pairs[i].kind, std::nullopt, PairKind::kAnp},
               pairs[i].weight);
    if (space.bigrams() && i + 1 < pairs.size()) {
      contribute({pairs[i].ref(), pairs[i].kind, pairs[i + 1].ref(), pairs[i + 1].kind},
                 0.5 * (pairs[i].weight + pairs[i + 1].weight));
    }
  }
  SparseVector v = MakeSparse(space.dimension(), std::move(contributions));
  if (space.mode() == FeatureMode::kBinary) {
    for (SparseEntry &e : v.entries) e.value = 1.0;
  }
  return v;
}

SparseVector MaskRepresentation(const SparseVector &vector,
                                const FeatureSpace &space,
                                Representation representation) {
  SparseVector masked;
  masked.dimension = vector.dimension;
  for (const SparseEntry &e : vector.entries) {
    const FeatureKey &key = space.vocabulary()[space.VocabularyIndex(e.index)];
    bool keep = Keeps(representation, key.first_kind);
    if (key.is_bigram()) keep = keep && Keeps(representation, key.second_kind);
    if (keep) masked.entries.push_back(e);
  }
  return masked;
}

int ClassIndex(SentimentLabel label) { return static_cast<int>(label); }

LabeledMatrix FeaturizeDataset(const Dataset &dataset, const FeatureSpace &space) {
  LabeledMatrix out;
  out.features.dimension = space.dimension();
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const AnnotatedInstance &instance = dataset.instances[i];
    if (instance.label == SentimentLabel::kCantJudge) continue;
    out.features.rows.push_back(Featurize(instance.sequence, space));
    out.labels.push_back(ClassIndex(instance.label));
    out.rows.push_back(i);
  }
  return out;
}

double SymmetricUncertainty(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "columns differ in length");
  }
  if (a.empty()) {
    throw Error(ErrorCode::kLengthMismatch, "columns are empty");
  }
  std::map<int, std::size_t> a_values, b_values;
  for (int v : a) a_values.try_emplace(v, a_values.size());
  for (int v : b) b_values.try_emplace(v, b_values.size());
  std::vector<std::vector<double>> joint(a_values.size(),
                                         std::vector<double>(b_values.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[a_values[a[i]]][b_values[b[i]]] += 1.0;
  }
  return SuFromJoint(joint);
}

CorrelationTable::CorrelationTable(const FeatureMatrix &features,
                                   std::span<const int> labels)
    : rows_(features.rows.size()), presence_(features.dimension) {
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    for (const SparseEntry &e : features.rows[r].entries) {
      presence_[e.index].push_back(r);
    }
  }
  int classes = 0;
  for (int y : labels) classes = std::max(classes, y + 1);
  std::vector<double> class_totals(classes, 0.0);
  for (int y : labels) class_totals[y] += 1.0;

  feature_entropy_.resize(presence_.size());
  feature_class_.resize(presence_.size());
  const double n = static_cast<double>(rows_);
  for (std::size_t f = 0; f < presence_.size(); ++f) {
    std::vector<std::vector<double>> joint(2, std::vector<double>(classes, 0.0));
    for (std::size_t r : presence_[f]) joint[1][labels[r]] += 1.0;
    for (int c = 0; c < classes; ++c) joint[0][c] = class_totals[c] - joint[1][c];
    const double present = static_cast<double>(presence_[f].size());
    const double marginal[2] = {n - present, present};
    feature_entropy_[f] = Entropy(marginal, n);
    feature_class_[f] = SuFromJoint(joint);
  }
}

double CorrelationTable::FeatureFeature(std::size_t f, std::size_t g) {
  if (f == g) return feature_entropy_[f] > 0.0 ? 1.0 : 0.0;
  const auto key = std::minmax(f, g);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  double su = 0.0;
  if (feature_entropy_[f] > 0.0 && feature_entropy_[g] > 0.0) {
    const auto &a = presence_[f];
    const auto &b = presence_[g];
    std::size_t both = 0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
      if (a[i] < b[j]) {
        ++i;
      } else if (b[j] < a[i]) {
        ++j;
      } else {
        ++both, ++i, ++j;
      }
    }
    const double n11 = static_cast<double>(both);
    const double n10 = static_cast<double>(a.size()) - n11;
    const double n01 = static_cast<double>(b.size()) - n11;
    const double n00 = static_cast<double>(rows_) - n11 - n10 - n01;
    su = SuFromJoint({{n00, n01}, {n10, n11}});
  }
  cache_.emplace(key, su);
  return su;
}

double CfsMerit(std::span<const std::size_t> subset, CorrelationTable &table) {
  if (subset.empty()) return 0.0;
  double cf = 0.0, ff = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    cf += table.FeatureClass(subset[i]);
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      ff += table.FeatureFeature(subset[i], subset[j]);
    }
  }
  const double k = static_cast<double>(subset.size());
  const double denominator = std::sqrt(k + 2.0 * ff);
  return denominator > 0.0 ? cf / denominator : 0.0;
}

namespace {

struct SearchNode {
  std::vector<std::size_t> subset;  // sorted
  double sum_cf = 0.0;
  double sum_ff = 0.0;
  double merit = 0.0;
};

// Higher merit first; ties go to the lexicographically smaller subset.
struct WorseNode {
  bool operator()(const SearchNode &a, const SearchNode &b) const {
    if (a.merit != b.merit) return a.merit < b.merit;
    return a.subset > b.subset;
  }
};

}  // namespace

CfsResult CfsSelect(const FeatureMatrix &features, std::span<const int> labels,
                    const CfsOptions &options) {
  if (features.rows.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "row count differs from label count");
  }
  if (features.dimension == 0) {
    throw Error(ErrorCode::kDegenerateInput, "no features to select from");
  }
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) {
    throw Error(ErrorCode::kDegenerateInput, "need at least two classes");
  }

  CorrelationTable table(features, labels);
  const std::size_t d = features.dimension;

  CfsResult result;
  std::priority_queue<SearchNode, std::vector<SearchNode>, WorseNode> open;
  std::set<std::vector<std::size_t>> visited;
  open.push(SearchNode{});
  visited.insert({});
  SearchNode best;
  int stale = 0;

  constexpr double kImprovement = 1e-12;
  while (!open.empty() && stale < options.stall_limit) {
    SearchNode node = open.top();
    open.pop();
    ++result.expansions;

    bool improved = false;
    std::vector<char> member(d, 0);
    for (std::size_t f : node.subset) member[f] = 1;
    for (std::size_t f = 0; f < d; ++f) {
      if (member[f]) continue;
      SearchNode child;
      child.subset = node.subset;
      child.subset.insert(
          std::lower_bound(child.subset.begin(), child.subset.end(), f), f);
      if (!visited.insert(child.subset).second) continue;
      child.sum_cf = node.sum_cf + table.FeatureClass(f);
      child.sum_ff = node.sum_ff;
      for (std::size_t g : node.subset) child.sum_ff += table.FeatureFeature(f, g);
      const double k = static_cast<double>(child.subset.size());
      const double denominator = std::sqrt(k + 2.0 * child.sum_ff);
      child.merit = denominator > 0.0 ? child.sum_cf / denominator : 0.0;
      ++result.evaluated;
      if (options.keep_trace) result.trace.push_back({child.subset, child.merit});
      if (child.merit > best.merit + kImprovement) {
        best = child;
        improved = true;
      }
      open.push(std::move(child));
    }
    stale = improved ? 0 : stale + 1;
  }

  result.selected = best.subset;
  result.merit = best.merit;
  return result;
}

}  // namespace gso
