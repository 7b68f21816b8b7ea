#include "gso/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "gso/rng.h"

namespace gso {

using json = nlohmann::json;

namespace {

std::string Normalize(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '\'') continue;
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

AnnotatedInstance ParseInstance(const std::string &text, std::size_t line,
                                const SynsetForest &forest, LoadMode mode,
                                std::vector<DroppedPair> &dropped) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParseError, e.what(), line);
  }
  if (!record.is_object()) {
    throw Error(ErrorCode::kParseError, "record is not an object", line);
  }

  AnnotatedInstance instance;
  auto gif_id = record.find("gif_id");
  if (gif_id == record.end() || !gif_id->is_string()) {
    throw Error(ErrorCode::kParseError, "gif_id must be a string", line);
  }
  instance.gif_id = gif_id->get<std::string>();

  auto label = record.find("label");
  if (label == record.end() || !label->is_string()) {
    throw Error(ErrorCode::kParseError, "label must be a string", line);
  }
  auto parsed_label = ParseLabel(label->get<std::string>());
  if (!parsed_label) {
    throw Error(ErrorCode::kParseError,
                "unknown label '" + label->get<std::string>() + "'", line);
  }
  instance.label = *parsed_label;

  auto pairs = record.find("pairs");
  if (pairs == record.end() || !pairs->is_array()) {
    throw Error(ErrorCode::kParseError, "pairs must be an array", line);
  }
  for (std::size_t i = 0; i < pairs->size(); ++i) {
    const json &entry = (*pairs)[i];
    if (!entry.is_object() || !entry.contains("modifier") ||
        !entry.contains("noun") || !entry["modifier"].is_string() ||
        !entry["noun"].is_string()) {
      throw Error(ErrorCode::kParseError,
                  "pair " + std::to_string(i) + " needs string modifier/noun",
                  line);
    }
    PairRef ref{entry["modifier"].get<std::string>(),
                entry["noun"].get<std::string>()};
    try {
      instance.sequence.pairs.push_back(MakePair(ref.modifier, ref.noun, forest));
    } catch (const Error &e) {
      if (mode == LoadMode::kStrict) {
        throw Error(ErrorCode::kUnresolvedPair,
                    "pair " + std::to_string(i) + " (" + ref.modifier + ", " +
                        ref.noun + "): " + e.what(),
                    line);
      }
      dropped.push_back({line, i, ref, e.code()});
    }
  }

  if (auto duration = record.find("duration_s");
      duration != record.end() && !duration->is_null()) {
    if (!duration->is_number() || duration->get<double>() < 0.0) {
      throw Error(ErrorCode::kParseError,
                  "duration_s must be a non-negative number", line);
    }
    instance.duration_s = duration->get<double>();
  }
  if (auto flags = record.find("noise_flags");
      flags != record.end() && !flags->is_null()) {
    if (!flags->is_array()) {
      throw Error(ErrorCode::kParseError, "noise_flags must be an array", line);
    }
    std::vector<NoiseFlag> parsed;
    for (const json &flag : *flags) {
      auto value = flag.is_string() ? ParseNoiseFlag(flag.get<std::string>())
                                    : std::nullopt;
      if (!value) {
        throw Error(ErrorCode::kParseError, "unknown noise flag " + flag.dump(),
                    line);
      }
      parsed.push_back(*value);
    }
    std::sort(parsed.begin(), parsed.end());
    parsed.erase(std::unique(parsed.begin(), parsed.end()), parsed.end());
    instance.noise_flags = std::move(parsed);
  }
  return instance;
}

}  // namespace

std::string_view LabelName(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::kPositive: return "positive";
    case SentimentLabel::kNegative: return "negative";
    case SentimentLabel::kNeutral: return "neutral";
    case SentimentLabel::kCantJudge: return "cant_judge";
  }
  return "cant_judge";
}

std::string_view LabelDisplayName(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::kPositive: return "Positive";
    case SentimentLabel::kNegative: return "Negative";
    case SentimentLabel::kNeutral: return "Neutral";
    case SentimentLabel::kCantJudge: return "Can't Judge";
  }
  return "Can't Judge";
}

std::optional<SentimentLabel> ParseLabel(std::string_view name) {
  const std::string key = Normalize(name);
  for (SentimentLabel label : kAllLabels) {
    if (key == LabelName(label)) return label;
  }
  if (key == "cantjudge" || key == "cant") return SentimentLabel::kCantJudge;
  return std::nullopt;
}

std::string_view NoiseFlagName(NoiseFlag flag) {
  switch (flag) {
    case NoiseFlag::kMixedContent: return "mixed_content";
    case NoiseFlag::kExplanativeText: return "explanative_text";
    case NoiseFlag::kMotionBlur: return "motion_blur";
    case NoiseFlag::kIlluminationChange: return "illumination_change";
  }
  return "mixed_content";
}

std::optional<NoiseFlag> ParseNoiseFlag(std::string_view name) {
  const std::string key = Normalize(name);
  for (NoiseFlag flag : kAllNoiseFlags) {
    if (key == NoiseFlagName(flag)) return flag;
  }
  return std::nullopt;
}

Dataset ParseDataset(std::istream &in,
                     std::shared_ptr<const SynsetForest> forest,
                     LoadMode mode) {
  Dataset dataset;
  dataset.forest = std::move(forest);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    dataset.instances.push_back(
        ParseInstance(text, line, *dataset.forest, mode, dataset.dropped));
  }
  return dataset;
}

Dataset LoadDataset(const std::string &path,
                    std::shared_ptr<const SynsetForest> forest, LoadMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open dataset " + path);
  return ParseDataset(in, std::move(forest), mode);
}

json InstanceToJson(const AnnotatedInstance &instance) {
  json record = json::object();
  record["gif_id"] = instance.gif_id;
  json pairs = json::array();
  for (const SentiPair &pair : instance.sequence.pairs) {
    pairs.push_back({{"modifier", pair.modifier}, {"noun", pair.noun}});
  }
  record["pairs"] = std::move(pairs);
  record["label"] = LabelName(instance.label);
  if (instance.duration_s) record["duration_s"] = *instance.duration_s;
  if (instance.noise_flags) {
    json flags = json::array();
    for (NoiseFlag flag : *instance.noise_flags) flags.push_back(NoiseFlagName(flag));
    record["noise_flags"] = std::move(flags);
  }
  return record;
}

void WriteDataset(std::ostream &out, const Dataset &dataset) {
  for (const AnnotatedInstance &instance : dataset.instances) {
    out << InstanceToJson(instance).dump() << '\n';
  }
}

void SaveDataset(const std::string &path, const Dataset &dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  WriteDataset(out, dataset);
}

DatasetStats ComputeStats(const Dataset &dataset) {
  DatasetStats stats;
  stats.total = dataset.instances.size();
  std::array<std::size_t, 4> flag_counts{};
  double duration_sum = 0.0;
  for (const AnnotatedInstance &instance : dataset.instances) {
    ++stats.label_counts[static_cast<int>(instance.label)];
    ++stats.length_histogram[instance.sequence.size()];
    for (const SentiPair &pair : instance.sequence.pairs) {
      (pair.kind == PairKind::kAnp ? stats.anp_pairs : stats.vnp_pairs)++;
    }
    if (instance.duration_s) {
      const double d = *instance.duration_s;
      duration_sum += d;
      stats.duration_min = stats.with_duration == 0 ? d : std::min(*stats.duration_min, d);
      stats.duration_max = stats.with_duration == 0 ? d : std::max(*stats.duration_max, d);
      ++stats.with_duration;
    }
    if (instance.noise_flags) {
      for (NoiseFlag flag : *instance.noise_flags) {
        ++flag_counts[static_cast<int>(flag)];
      }
    }
  }
  const std::size_t labeled = stats.label_counts[0] + stats.label_counts[1] +
                              stats.label_counts[2];
  if (labeled > 0) {
    std::array<double, 3> shares{};
    for (int c = 0; c < 3; ++c) {
      shares[c] = static_cast<double>(stats.label_counts[c]) /
                  static_cast<double>(labeled);
    }
    stats.class_proportions = shares;
  }
  if (stats.with_duration > 0) {
    stats.duration_mean = duration_sum / static_cast<double>(stats.with_duration);
  }
  if (stats.total > 0) {
    std::array<double, 4> shares{};
    for (int f = 0; f < 4; ++f) {
      shares[f] = static_cast<double>(flag_counts[f]) /
                  static_cast<double>(stats.total);
    }
    stats.noise_proportions = shares;
  }
  return stats;
}

std::string FormatPercent(double share) {
  return fmt::format("{:.1f}%", share * 100.0);
}

std::string RenderStatsTable(const DatasetStats &stats) {
  std::ostringstream out;
  out << fmt::format("instances: {}\n\n", stats.total);
  out << fmt::format("{:<12} {:>8} {:>8}\n", "label", "count", "share");
  for (SentimentLabel label : kAllLabels) {
    const int c = static_cast<int>(label);
    std::string share = "-";
    if (label != SentimentLabel::kCantJudge && stats.class_proportions) {
      share = FormatPercent((*stats.class_proportions)[c]);
    }
    out << fmt::format("{:<12} {:>8} {:>8}\n", LabelDisplayName(label),
                       stats.label_counts[c], share);
  }
  out << '\n';
  if (stats.duration_mean) {
    out << fmt::format("duration: mean {:.2f} s, min {:.2f} s, max {:.2f} s ({} timed)\n",
                       *stats.duration_mean, *stats.duration_min,
                       *stats.duration_max, stats.with_duration);
  } else {
    out << "duration: n/a\n";
  }
  if (stats.noise_proportions) {
    out << "noise:";
    for (NoiseFlag flag : kAllNoiseFlags) {
      out << fmt::format(" {} {}", NoiseFlagName(flag),
                         FormatPercent((*stats.noise_proportions)[static_cast<int>(flag)]));
    }
    out << '\n';
  }
  out << fmt::format("pairs: {} ANP, {} VNP\n", stats.anp_pairs, stats.vnp_pairs);
  out << "sequence lengths:";
  for (const auto &[length, count] : stats.length_histogram) {
    out << fmt::format(" {}:{}", length, count);
  }
  out << '\n';
  return out.str();
}

json StatsToJson(const DatasetStats &stats) {
  json out = json::object();
  out["total"] = stats.total;
  json labels = json::object();
  for (SentimentLabel label : kAllLabels) {
    labels[std::string(LabelName(label))] = stats.label_counts[static_cast<int>(label)];
  }
  out["label_counts"] = labels;
  if (stats.class_proportions) {
    json shares = json::object();
    for (SentimentLabel label : kSentimentClasses) {
      shares[std::string(LabelName(label))] =
          (*stats.class_proportions)[static_cast<int>(label)];
    }
    out["class_proportions"] = shares;
  } else {
    out["class_proportions"] = nullptr;
  }
  json duration = json::object();
  duration["count"] = stats.with_duration;
  duration["mean"] = stats.duration_mean ? json(*stats.duration_mean) : json(nullptr);
  duration["min"] = stats.duration_min ? json(*stats.duration_min) : json(nullptr);
  duration["max"] = stats.duration_max ? json(*stats.duration_max) : json(nullptr);
  out["duration_s"] = duration;
  if (stats.noise_proportions) {
    json noise = json::object();
    for (NoiseFlag flag : kAllNoiseFlags) {
      noise[std::string(NoiseFlagName(flag))] =
          (*stats.noise_proportions)[static_cast<int>(flag)];
    }
    out["noise_proportions"] = noise;
  } else {
    out["noise_proportions"] = nullptr;
  }
  json lengths = json::object();
  for (const auto &[length, count] : stats.length_histogram) {
    lengths[std::to_string(length)] = count;
  }
  out["sequence_lengths"] = lengths;
  out["anp_pairs"] = stats.anp_pairs;
  out["vnp_pairs"] = stats.vnp_pairs;
  return out;
}

std::vector<Fold> StratifiedKFold(const Dataset &dataset, int k,
                                  std::uint64_t seed) {
  if (k < 2) {
    throw Error(ErrorCode::kInvalidParameter, "k must be at least 2");
  }
  std::array<std::vector<std::size_t>, 3> members;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const SentimentLabel label = dataset.instances[i].label;
    if (label == SentimentLabel::kCantJudge) continue;
    members[static_cast<int>(label)].push_back(i);
  }
  for (SentimentLabel label : kSentimentClasses) {
    const auto &group = members[static_cast<int>(label)];
    if (!group.empty() && group.size() < static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::kClassTooSmall,
                  fmt::format("class {} has {} instances, fewer than k = {}",
                              LabelName(label), group.size(), k));
    }
  }

  // Deal each shuffled class round-robin, carrying the position across
  // classes so fold sizes differ by at most one.
  Rng rng(seed);
  std::vector<Fold> folds(k);
  std::size_t slot = 0;
  for (auto &group : members) {
    rng.Shuffle(group);
    for (std::size_t index : group) {
      folds[slot % k].test.push_back(index);
      ++slot;
    }
  }
  for (Fold &fold : folds) {
    std::sort(fold.test.begin(), fold.test.end());
  }
  for (int f = 0; f < k; ++f) {
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(),
                            folds[g].test.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

SentimentLabel PlantedLabel(double planted_sum, double band) {
  if (planted_sum >= band) return SentimentLabel::kPositive;
  if (planted_sum <= -band) return SentimentLabel::kNegative;
  return SentimentLabel::kNeutral;
}

std::array<std::size_t, 3> AllocateClassCounts(
    std::size_t n, const std::array<double, 3> &ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::kInvalidRatio, "class ratios must be non-negative");
    }
    sum += r;
  }
  // Ratios quoted to three decimals may miss 1 by a rounding step.
  if (std::abs(sum - 1.0) > 1e-2) {
    throw Error(ErrorCode::kInvalidRatio,
                fmt::format("class ratios sum to {}, not 1", sum));
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int c = 0; c < 3; ++c) {
    const double exact = static_cast<double>(n) * ratios[c] / sum;
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    remainders[c] = exact - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    ++counts[order[i % 3]];
  }
  return counts;
}

SyntheticDataset GenerateSynthetic(std::shared_ptr<const SynsetForest> forest,
                                   const SyntheticConfig &config) {
  if (!(config.noise_rate >= 0.0 && config.noise_rate <= 1.0) ||
      !(config.vnp_signal_share >= 0.0 && config.vnp_signal_share <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "noise_rate and vnp_signal_share must lie in [0, 1]");
  }
  if (!(config.margin >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "margin must be >= 0");
  }
  if (config.min_length < 1 || config.max_length < config.min_length) {
    throw Error(ErrorCode::kInvalidParameter, "invalid sequence length range");
  }
  const std::array<std::size_t, 3> counts =
      AllocateClassCounts(config.n, config.class_ratios);

  Rng rng(config.seed);

  // Planted signal and the pool instances draw from.
  std::map<PairRef, double> signal = config.signal;
  if (signal.empty()) {
    std::vector<SentiPair> anps, vnps;
    for (SentiPair &pair : EnumeratePairs(*forest, SIZE_MAX)) {
      (pair.kind == PairKind::kAnp ? anps : vnps).push_back(std::move(pair));
    }
    auto take = [&](std::vector<SentiPair> &pool, std::size_t count) {
      rng.Shuffle(pool);
      pool.resize(std::min(count, pool.size()));
      for (const SentiPair &pair : pool) signal[pair.ref()] = pair.weight;
    };
    take(anps, config.anp_pool);
    take(vnps, config.vnp_pool);
  }

  std::vector<SentiPair> pool;
  double anp_mass = 0.0, vnp_mass = 0.0;
  for (const auto &[ref, weight] : signal) {
    SentiPair pair = MakePair(ref.modifier, ref.noun, *forest);
    (pair.kind == PairKind::kAnp ? anp_mass : vnp_mass) += std::abs(weight);
    pool.push_back(std::move(pair));
  }
  if (pool.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "empty synthetic pair pool");
  }
  const double total_mass = anp_mass + vnp_mass;
  const double share = config.vnp_signal_share;
  if ((share > 0.0 && vnp_mass == 0.0) || (share < 1.0 && anp_mass == 0.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "planted signal cannot carry the requested VNP share");
  }
  const double anp_scale = anp_mass > 0.0 ? total_mass * (1.0 - share) / anp_mass : 0.0;
  const double vnp_scale = vnp_mass > 0.0 ? total_mass * share / vnp_mass : 0.0;
  for (auto &[ref, weight] : signal) {
    const Synset *modifier = forest->Find(ref.modifier);
    weight *= modifier->pos == Pos::kAdjective ? anp_scale : vnp_scale;
  }

  std::vector<SentimentLabel> targets;
  for (int c = 0; c < 3; ++c) {
    targets.insert(targets.end(), counts[c], kSentimentClasses[c]);
  }
  rng.Shuffle(targets);

  SyntheticDataset result;
  result.dataset.forest = forest;
  result.dataset.instances.reserve(config.n);
  constexpr int kMaxAttempts = 100000;
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < config.n; ++i) {
    const SentimentLabel target = targets[i];
    AnnotatedInstance instance;
    bool found = false;
    for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
      const int length = std::min<int>(
          rng.Between(config.min_length, config.max_length),
          static_cast<int>(pool.size()));
      std::iota(order.begin(), order.end(), 0);
      // Partial Fisher-Yates: distinct pairs within one sequence.
      double sum = 0.0;
      instance.sequence.pairs.clear();
      for (int j = 0; j < length; ++j) {
        const std::size_t pick = j + rng.Below(order.size() - j);
        std::swap(order[j], order[pick]);
        const SentiPair &pair = pool[order[j]];
        sum += signal.at(pair.ref());
        instance.sequence.pairs.push_back(pair);
      }
      const double edge = std::min(std::abs(sum - config.neutral_band),
                                   std::abs(sum + config.neutral_band));
      found = edge >= config.margin && PlantedLabel(sum, config.neutral_band) == target;
    }
    if (!found) {
      throw Error(ErrorCode::kInvalidParameter,
                  fmt::format("class {} is unreachable with this signal",
                              LabelName(target)));
    }
    result.clean_labels.push_back(target);

    instance.gif_id = fmt::format("synth-{:06d}", i + 1);
    instance.label = target;
    if (rng.Bernoulli(config.noise_rate)) {
      const int shift = 1 + static_cast<int>(rng.Below(2));
      instance.label =
          kSentimentClasses[(static_cast<int>(target) + shift) % 3];
    }
    // Metadata only; no influence on labels.
    instance.duration_s = std::round((0.3 + 35.0 * rng.Uniform()) * 100.0) / 100.0;
    std::vector<NoiseFlag> flags;
    if (rng.Bernoulli(0.7155)) {
      flags.push_back(NoiseFlag::kMixedContent);
      if (rng.Bernoulli(0.3449 / 0.7155)) flags.push_back(NoiseFlag::kExplanativeText);
    }
    if (rng.Bernoulli(0.05)) flags.push_back(NoiseFlag::kMotionBlur);
    if (rng.Bernoulli(0.03)) flags.push_back(NoiseFlag::kIlluminationChange);
    instance.noise_flags = std::move(flags);
    result.dataset.instances.push_back(std::move(instance));
  }
  result.signal = std::move(signal);
  return result;
}

}  // namespace gso
