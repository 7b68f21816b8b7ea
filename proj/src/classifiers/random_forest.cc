#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "gso/classifiers.h"
#include "gso/rng.h"

namespace gso {

namespace {

constexpr double kMinGain = 1e-12;

Matrix Densify(const FeatureMatrix &features) {
  Matrix dense(features.rows.size(), features.dimension, 0.0);
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    for (const SparseEntry &e : features.rows[r].entries) dense(r, e.index) = e.value;
  }
  return dense;
}

double SumSquaresOverSize(std::span<const double> counts, double size) {
  if (size <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return s / size;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeGrower {
 public:
  TreeGrower(const Matrix &dense, std::span<const int> labels, int classes,
             int features_per_split, std::uint64_t seed,
             std::span<const std::size_t> class_counts)
      : dense_(dense),
        labels_(labels),
        classes_(classes),
        features_per_split_(std::max(1, features_per_split)),
        rng_(seed),
        class_counts_(class_counts) {}

  DecisionTree Grow(std::vector<std::size_t> rows) {
    DecisionTree tree;
    rows_ = std::move(rows);
    struct Pending {
      int node;
      std::size_t begin, end;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack = {{0, 0, rows_.size()}};
    while (!stack.empty()) {
      const Pending item = stack.back();
      stack.pop_back();

      std::vector<double> counts(classes_, 0.0);
      for (std::size_t i = item.begin; i < item.end; ++i) counts[labels_[rows_[i]]] += 1.0;
      tree.nodes[item.node].label = BreakTie(counts, class_counts_);

      int distinct = 0;
      for (double c : counts) distinct += c > 0.0;
      if (distinct <= 1) continue;

      const Split split = FindSplit(item.begin, item.end, counts);
      if (split.feature < 0) continue;

      auto middle = std::partition(
          rows_.begin() + item.begin, rows_.begin() + item.end,
          [&](std::size_t r) { return dense_(r, split.feature) <= split.threshold; });
      const std::size_t mid = static_cast<std::size_t>(middle - rows_.begin());

      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode &node = tree.nodes[item.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = right;
      // Right first so the left subtree is grown first.
      stack.push_back({right, mid, item.end});
      stack.push_back({left, item.begin, mid});
    }
    return tree;
  }

 private:
  Split FindSplit(std::size_t begin, std::size_t end,
                  const std::vector<double> &parent_counts) {
    const std::size_t d = dense_.cols;
    std::vector<std::size_t> order(d);
    for (std::size_t f = 0; f < d; ++f) order[f] = f;
    const double m = static_cast<double>(end - begin);
    const double parent_score = SumSquaresOverSize(parent_counts, m);

    Split best;
    std::vector<std::pair<double, int>> values(end - begin);
    for (std::size_t k = 0; k < d; ++k) {
      if (static_cast<int>(k) >= features_per_split_ && best.feature >= 0) break;
      const std::size_t pick = k + rng_.Below(d - k);
      std::swap(order[k], order[pick]);
      const std::size_t f = order[k];

      for (std::size_t i = begin; i < end; ++i) {
        values[i - begin] = {dense_(rows_[i], f), labels_[rows_[i]]};
      }
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;

      std::vector<double> left(classes_, 0.0);
      std::vector<double> right = parent_counts;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left[values[i].second] += 1.0;
        right[values[i].second] -= 1.0;
        if (values[i].first == values[i + 1].first) continue;
        const double left_size = static_cast<double>(i + 1);
        const double score = SumSquaresOverSize(left, left_size) +
                             SumSquaresOverSize(right, m - left_size);
        const double gain = (score - parent_score) / m;
        if (gain <= kMinGain) continue;
        const bool better =
            best.feature < 0 || gain > best.gain ||
            (gain == best.gain && static_cast<int>(f) < best.feature);
        if (better) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (values[i].first + values[i + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Matrix &dense_;
  std::span<const int> labels_;
  int classes_;
  int features_per_split_;
  Rng rng_;
  std::span<const std::size_t> class_counts_;
  std::vector<std::size_t> rows_;
};

}  // namespace

int DecisionTree::Predict(const SparseVector &x) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    const TreeNode &n = nodes[node];
    node = x.Get(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
  }
  return nodes[node].label;
}

DecisionTree GrowTree(const FeatureMatrix &features, std::span<const int> labels,
                      int classes, std::span<const std::size_t> rows,
                      int features_per_split, std::uint64_t seed,
                      std::span<const std::size_t> class_counts) {
  const Matrix dense = Densify(features);
  TreeGrower grower(dense, labels, classes, features_per_split, seed, class_counts);
  return grower.Grow({rows.begin(), rows.end()});
}

RandomForestModel TrainRandomForest(const FeatureMatrix &features,
                                    std::span<const int> labels, int classes,
                                    const RandomForestParams &params,
                                    std::uint64_t seed,
                                    std::span<const std::size_t> class_counts) {
  const Matrix dense = Densify(features);
  const std::size_t n = features.rows.size();
  const int per_split =
      params.features_per_split > 0
          ? params.features_per_split
          : std::max(1, static_cast<int>(std::ceil(
                            std::sqrt(static_cast<double>(features.dimension)))));

  RandomForestModel model;
  model.trees.resize(params.trees);
  // Each tree owns an independent stream, so scheduling cannot change it.
  auto grow = [&](std::size_t t) {
    const std::uint64_t tree_seed = MixSeed(seed, t);
    Rng sampler(MixSeed(tree_seed, 0));
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = params.bootstrap ? sampler.Below(n) : i;
    TreeGrower grower(dense, labels, classes, per_split, tree_seed, class_counts);
    model.trees[t] = grower.Grow(std::move(rows));
  };

  unsigned workers = params.threads > 0 ? static_cast<unsigned>(params.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(params.trees));
  if (workers <= 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) grow(t);
    return model;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < model.trees.size(); t = next++) grow(t);
    });
  }
  for (std::thread &thread : pool) thread.join();
  return model;
}

int PredictRandomForest(const RandomForestModel &model, const SparseVector &x,
                        int classes, std::span<const std::size_t> class_counts) {
  std::vector<double> votes(classes, 0.0);
  for (const DecisionTree &tree : model.trees) votes[tree.Predict(x)] += 1.0;
  return BreakTie(votes, class_counts);
}

}  // namespace gso
