#include <algorithm>
#include <cmath>
#include <limits>

#include "gso/classifiers.h"

namespace gso {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear-kernel Gram rows, computed on first use.
class KernelRows {
 public:
  explicit KernelRows(const FeatureMatrix &features)
      : features_(features),
        rows_(features.rows.size()),
        diagonal_(features.rows.size()),
        dense_(features.dimension, 0.0) {
    for (std::size_t i = 0; i < features.rows.size(); ++i) {
      double sum = 0.0;
      for (const SparseEntry &e : features.rows[i].entries) sum += e.value * e.value;
      diagonal_[i] = sum;
    }
  }

  double diagonal(std::size_t i) const { return diagonal_[i]; }

  const std::vector<double> &row(std::size_t i) {
    std::vector<double> &cached = rows_[i];
    if (!cached.empty() || features_.rows.empty()) return cached;
    for (const SparseEntry &e : features_.rows[i].entries) dense_[e.index] = e.value;
    cached.resize(features_.rows.size());
    for (std::size_t t = 0; t < features_.rows.size(); ++t) {
      cached[t] = features_.rows[t].Dot(dense_);
    }
    for (const SparseEntry &e : features_.rows[i].entries) dense_[e.index] = 0.0;
    return cached;
  }

 private:
  const FeatureMatrix &features_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> diagonal_;
  std::vector<double> dense_;
};

}  // namespace

SmoResult SmoSolve(const FeatureMatrix &features, std::span<const int> targets,
                   const SmoParams &params) {
  const std::size_t n = features.rows.size();
  if (targets.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "target count differs from rows");
  }
  for (int y : targets) {
    if (y != 1 && y != -1) {
      throw Error(ErrorCode::kInvalidParameter, "SMO targets must be +1 or -1");
    }
  }
  if (!(params.c > 0.0) || !(params.tol > 0.0) || params.max_passes < 1) {
    throw Error(ErrorCode::kInvalidParameter, "SMO needs C > 0, tol > 0, max_passes >= 1");
  }

  const double c = params.c;
  std::vector<double> alpha(n, 0.0);
  // Dual gradient Q alpha - 1 with Q_ij = y_i y_j <x_i, x_j>.
  std::vector<double> gradient(n, -1.0);
  KernelRows kernel(features);

  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  SmoResult result;
  const std::size_t max_iterations =
      static_cast<std::size_t>(params.max_passes) * std::max<std::size_t>(n, 1);
  while (true) {
    // Maximal violating first index, second-order choice of the partner.
    double gmax = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (targets[t] == 1) {
        if (!upper(t) && -gradient[t] >= gmax) gmax = -gradient[t], i = t;
      } else {
        if (!lower(t) && gradient[t] >= gmax) gmax = gradient[t], i = t;
      }
    }
    double gmax2 = -kInf;
    std::size_t j = n;
    double best_decrease = kInf;
    if (i < n) {
      const std::vector<double> &ki = kernel.row(i);
      const double yi = targets[i];
      for (std::size_t t = 0; t < n; ++t) {
        // K_it expressed through Q_it = y_i y_t K_it.
        const double qit = yi * targets[t] * ki[t];
        double grad_diff;
        double quad;
        if (targets[t] == 1) {
          if (lower(t)) continue;
          gmax2 = std::max(gmax2, gradient[t]);
          grad_diff = gmax + gradient[t];
          quad = kernel.diagonal(i) + kernel.diagonal(t) - 2.0 * yi * qit;
        } else {
          if (upper(t)) continue;
          gmax2 = std::max(gmax2, -gradient[t]);
          grad_diff = gmax - gradient[t];
          quad = kernel.diagonal(i) + kernel.diagonal(t) + 2.0 * yi * qit;
        }
        if (grad_diff > 0.0) {
          const double decrease = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (decrease <= best_decrease) {
            best_decrease = decrease;
            j = t;
          }
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < params.tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= max_iterations) break;
    ++result.iterations;

    const std::vector<double> &ki = kernel.row(i);
    const std::vector<double> &kj = kernel.row(j);
    const double yi = targets[i], yj = targets[j];
    const double qij = yi * yj * ki[j];
    const double old_i = alpha[i], old_j = alpha[j];

    if (yi != yj) {
      double quad = kernel.diagonal(i) + kernel.diagonal(j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-gradient[i] - gradient[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0.0) alpha[i] = 0.0, alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = c - diff;
      } else {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = c + diff;
      }
    } else {
      double quad = kernel.diagonal(i) + kernel.diagonal(j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (gradient[i] - gradient[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = sum - c;
      } else {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = sum - c;
      } else {
        if (alpha[i] < 0.0) alpha[i] = 0.0, alpha[j] = sum;
      }
    }

    const double delta_i = alpha[i] - old_i;
    const double delta_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      gradient[t] += targets[t] * (yi * ki[t] * delta_i + yj * kj[t] * delta_j);
    }
  }

  // Bias: mean over free vectors, else the middle of the feasible interval.
  double upper_bound = kInf, lower_bound = -kInf, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = targets[t] * gradient[t];
    if (upper(t)) {
      if (targets[t] == -1) upper_bound = std::min(upper_bound, yg);
      else lower_bound = std::max(lower_bound, yg);
    } else if (lower(t)) {
      if (targets[t] == 1) upper_bound = std::min(upper_bound, yg);
      else lower_bound = std::max(lower_bound, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  double rho;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(upper_bound) && std::isfinite(lower_bound)) {
    rho = 0.5 * (upper_bound + lower_bound);
  } else {
    rho = std::isfinite(upper_bound) ? upper_bound
                                     : (std::isfinite(lower_bound) ? lower_bound : 0.0);
  }
  result.bias = -rho;
  result.alphas = std::move(alpha);
  return result;
}

double SvmDualObjective(const FeatureMatrix &features,
                        std::span<const int> targets,
                        std::span<const double> alphas) {
  const std::vector<double> w = SvmWeights(features, targets, alphas);
  double sum = 0.0, norm = 0.0;
  for (double a : alphas) sum += a;
  for (double v : w) norm += v * v;
  return sum - 0.5 * norm;
}

std::vector<double> SvmWeights(const FeatureMatrix &features,
                               std::span<const int> targets,
                               std::span<const double> alphas) {
  std::vector<double> w(features.dimension, 0.0);
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    if (alphas[i] == 0.0) continue;
    for (const SparseEntry &e : features.rows[i].entries) {
      w[e.index] += alphas[i] * targets[i] * e.value;
    }
  }
  return w;
}

double KktViolation(const FeatureMatrix &features, std::span<const int> targets,
                    std::span<const double> alphas, double bias, double c) {
  const std::vector<double> w = SvmWeights(features, targets, alphas);
  double worst = 0.0;
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    const double margin = targets[i] * (features.rows[i].Dot(w) + bias);
    double violation;
    if (alphas[i] <= 0.0) {
      violation = 1.0 - margin;
    } else if (alphas[i] >= c) {
      violation = margin - 1.0;
    } else {
      violation = std::abs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

SmoModel TrainSmo(const FeatureMatrix &features, std::span<const int> labels,
                  int classes, const SmoParams &params) {
  SmoModel model;
  for (int a = 0; a < classes; ++a) {
    for (int b = a + 1; b < classes; ++b) {
      FeatureMatrix subset;
      subset.dimension = features.dimension;
      std::vector<int> targets;
      for (std::size_t r = 0; r < features.rows.size(); ++r) {
        if (labels[r] == a || labels[r] == b) {
          subset.rows.push_back(features.rows[r]);
          targets.push_back(labels[r] == a ? 1 : -1);
        }
      }
      BinarySvm machine;
      machine.positive = a;
      machine.negative = b;
      const SmoResult solved = SmoSolve(subset, targets, params);
      machine.weights = SvmWeights(subset, targets, solved.alphas);
      machine.bias = solved.bias;
      machine.converged = solved.converged;
      for (double alpha : solved.alphas) machine.support_vectors += alpha > 0.0;
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

int PredictSmo(const SmoModel &model, const SparseVector &x, int classes,
               std::span<const std::size_t> class_counts) {
  std::vector<double> votes(classes, 0.0);
  for (const BinarySvm &machine : model.machines) {
    const double decision = x.Dot(machine.weights) + machine.bias;
    votes[decision >= 0.0 ? machine.positive : machine.negative] += 1.0;
  }
  return BreakTie(votes, class_counts);
}

}  // namespace gso
