#include <algorithm>
#include <cmath>
#include <map>

#include "gso/classifiers.h"

namespace gso {

namespace {

int ArgMax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

struct Columns {
  // Non-zero (row, value) entries per feature.
  std::vector<std::vector<SparseEntry>> entries;
};

Columns BuildColumns(const FeatureMatrix &features) {
  Columns columns;
  columns.entries.resize(features.dimension);
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    for (const SparseEntry &e : features.rows[r].entries) {
      columns.entries[e.index].push_back({r, e.value});
    }
  }
  return columns;
}

// Weighted-error-minimizing stump. Starts from the constant majority stump.
Stump BestStump(const FeatureMatrix &features, const Columns &columns,
                std::span<const int> labels, int classes,
                std::span<const double> weights, double &error) {
  std::vector<double> totals(classes, 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) totals[labels[r]] += weights[r];
  double total = 0.0;
  for (double t : totals) total += t;

  Stump best;
  best.left_class = best.right_class = ArgMax(totals);
  error = total - totals[best.left_class];

  for (std::size_t f = 0; f < features.dimension; ++f) {
    // Group rows by value; the implicit zeros form one group.
    std::map<double, std::vector<double>> groups;
    std::vector<double> zero = totals;
    for (const SparseEntry &e : columns.entries[f]) {
      auto [it, fresh] = groups.try_emplace(e.value, std::vector<double>(classes, 0.0));
      it->second[labels[e.index]] += weights[e.index];
      zero[labels[e.index]] -= weights[e.index];
    }
    if (columns.entries[f].size() < labels.size()) {
      auto [it, fresh] = groups.try_emplace(0.0, std::vector<double>(classes, 0.0));
      for (int c = 0; c < classes; ++c) it->second[c] += zero[c];
    }
    if (groups.size() < 2) continue;

    std::vector<double> left(classes, 0.0);
    for (auto it = groups.begin(); std::next(it) != groups.end(); ++it) {
      for (int c = 0; c < classes; ++c) left[c] += it->second[c];
      std::vector<double> right(classes);
      for (int c = 0; c < classes; ++c) right[c] = totals[c] - left[c];
      const int left_class = ArgMax(left);
      const int right_class = ArgMax(right);
      const double split_error = total - left[left_class] - right[right_class];
      if (split_error < error) {
        error = split_error;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (it->first + std::next(it)->first);
        best.left_class = left_class;
        best.right_class = right_class;
      }
    }
  }
  error = total > 0.0 ? std::max(0.0, error / total) : 0.0;
  return best;
}

int StumpPredict(const Stump &stump, const SparseVector &x) {
  if (stump.feature < 0) return stump.left_class;
  return x.Get(static_cast<std::size_t>(stump.feature)) <= stump.threshold
             ? stump.left_class
             : stump.right_class;
}

}  // namespace

AdaBoostModel TrainAdaBoost(const FeatureMatrix &features,
                            std::span<const int> labels, int classes,
                            const AdaBoostParams &params,
                            std::vector<double> *weight_sums) {
  const std::size_t n = features.rows.size();
  const Columns columns = BuildColumns(features);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  const double class_term = std::log(static_cast<double>(classes) - 1.0);
  // Weight given to a stump with no training error.
  constexpr double kPerfectError = 1e-10;

  AdaBoostModel model;
  for (int round = 0; round < params.rounds; ++round) {
    double error = 0.0;
    Stump stump = BestStump(features, columns, labels, classes, weights, error);
    if (error >= 1.0 - 1.0 / classes) {
      // No better than chance under the current weights.
      if (model.stumps.empty()) {
        stump.alpha = 1.0;
        model.stumps.push_back(stump);
      }
      break;
    }
    const bool perfect = error <= 0.0;
    const double e = perfect ? kPerfectError : error;
    stump.alpha = std::log((1.0 - e) / e) + class_term;
    model.stumps.push_back(stump);
    if (perfect) break;

    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (StumpPredict(stump, features.rows[r]) != labels[r]) {
        weights[r] *= std::exp(stump.alpha);
      }
      total += weights[r];
    }
    double normalized = 0.0;
    for (double &w : weights) {
      w /= total;
      normalized += w;
    }
    if (weight_sums) weight_sums->push_back(normalized);
  }
  return model;
}

int PredictAdaBoost(const AdaBoostModel &model, const SparseVector &x,
                    int classes, std::span<const std::size_t> class_counts) {
  std::vector<double> votes(classes, 0.0);
  for (const Stump &stump : model.stumps) votes[StumpPredict(stump, x)] += stump.alpha;
  return BreakTie(votes, class_counts);
}

}  // namespace gso
