#include <algorithm>
#include <cmath>

#include "gso/classifiers.h"

namespace gso {

namespace {

// Softmax probabilities of one row, in place over `scores`.
void Softmax(std::vector<double> &scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double &s : scores) {
    s = std::exp(s - top);
    total += s;
  }
  for (double &s : scores) s /= total;
}

void Scores(const Matrix &weights, const SparseVector &x,
            std::vector<double> &out) {
  out.assign(weights.rows, 0.0);
  for (std::size_t k = 0; k < weights.rows; ++k) out[k] = x.Dot(weights.row(k));
}

double SquaredNorm(const std::vector<double> &v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return sum;
}

FeatureMatrix WithBiasColumn(const FeatureMatrix &features) {
  FeatureMatrix augmented;
  augmented.dimension = features.dimension + 1;
  augmented.rows.reserve(features.rows.size());
  for (const SparseVector &row : features.rows) {
    SparseVector extended = row;
    extended.dimension = augmented.dimension;
    extended.entries.push_back({features.dimension, 1.0});
    augmented.rows.push_back(std::move(extended));
  }
  return augmented;
}

}  // namespace

double CrossEntropyLoss(const Matrix &weights, const FeatureMatrix &features,
                        std::span<const int> labels, double l2) {
  double loss = 0.0;
  std::vector<double> scores;
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    Scores(weights, features.rows[r], scores);
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (double s : scores) total += std::exp(s - top);
    loss += top + std::log(total) - scores[labels[r]];
  }
  if (!features.rows.empty()) loss /= static_cast<double>(features.rows.size());
  return loss + 0.5 * l2 * SquaredNorm(weights.data);
}

Matrix CrossEntropyGradient(const Matrix &weights, const FeatureMatrix &features,
                            std::span<const int> labels, double l2) {
  if (weights.cols != features.dimension || labels.size() != features.rows.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights, features and labels disagree");
  }
  Matrix gradient(weights.rows, weights.cols, 0.0);
  const double scale =
      features.rows.empty() ? 0.0 : 1.0 / static_cast<double>(features.rows.size());
  std::vector<double> p;
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    Scores(weights, features.rows[r], p);
    Softmax(p);
    p[labels[r]] -= 1.0;
    for (std::size_t k = 0; k < weights.rows; ++k) {
      if (p[k] == 0.0) continue;
      for (const SparseEntry &e : features.rows[r].entries) {
        gradient(k, e.index) += scale * p[k] * e.value;
      }
    }
  }
  for (std::size_t i = 0; i < gradient.data.size(); ++i) {
    gradient.data[i] += l2 * weights.data[i];
  }
  return gradient;
}

LogisticModel TrainLogistic(const FeatureMatrix &features,
                            std::span<const int> labels, int classes,
                            const LogisticParams &params,
                            std::vector<double> *loss_trace) {
  const FeatureMatrix augmented = WithBiasColumn(features);
  Matrix w(classes, augmented.dimension, 0.0);
  double loss = CrossEntropyLoss(w, augmented, labels, params.l2);
  if (loss_trace) loss_trace->push_back(loss);

  Matrix previous_w, previous_g;
  double step = 1.0;
  constexpr double kArmijo = 1e-4;
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    Matrix g = CrossEntropyGradient(w, augmented, labels, params.l2);
    const double g_norm2 = SquaredNorm(g.data);
    if (std::sqrt(g_norm2) < params.gradient_tol) break;

    if (epoch > 0) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double s = w.data[i] - previous_w.data[i];
        const double y = g.data[i] - previous_g.data[i];
        ss += s * s;
        sy += s * y;
      }
      if (sy > 0.0) step = ss / sy;
    }

    Matrix candidate(w.rows, w.cols);
    double candidate_loss = loss;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        candidate.data[i] = w.data[i] - step * g.data[i];
      }
      candidate_loss = CrossEntropyLoss(candidate, augmented, labels, params.l2);
      if (candidate_loss <= loss - kArmijo * step * g_norm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    previous_w = std::move(w);
    previous_g = std::move(g);
    w = std::move(candidate);
    loss = candidate_loss;
    if (loss_trace) loss_trace->push_back(loss);
  }

  LogisticModel model;
  model.weights = std::move(w);
  return model;
}

int PredictLogistic(const LogisticModel &model, const SparseVector &x,
                    std::span<const std::size_t> class_counts) {
  const Matrix &w = model.weights;
  const std::size_t bias = w.cols - 1;
  std::vector<double> scores(w.rows, 0.0);
  for (std::size_t k = 0; k < w.rows; ++k) {
    double s = w(k, bias);
    for (const SparseEntry &e : x.entries) s += w(k, e.index) * e.value;
    scores[k] = s;
  }
  return BreakTie(scores, class_counts);
}

}  // namespace gso
