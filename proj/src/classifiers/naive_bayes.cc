#include <cmath>

#include "gso/classifiers.h"

namespace gso {

// Multinomial event model over feature magnitudes with Laplace smoothing.
NaiveBayesModel TrainNaiveBayes(const FeatureMatrix &features,
                                std::span<const int> labels, int classes,
                                const NaiveBayesParams &params) {
  const std::size_t d = features.dimension;
  Matrix counts(classes, d, 0.0);
  std::vector<double> class_rows(classes, 0.0);
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    const int c = labels[r];
    class_rows[c] += 1.0;
    for (const SparseEntry &e : features.rows[r].entries) {
      counts(c, e.index) += std::abs(e.value);
    }
  }

  NaiveBayesModel model;
  model.log_prior.resize(classes);
  model.log_likelihood = Matrix(classes, d, 0.0);
  const double n = static_cast<double>(features.rows.size());
  for (int c = 0; c < classes; ++c) {
    model.log_prior[c] = std::log(class_rows[c] / n);
    double total = 0.0;
    for (std::size_t f = 0; f < d; ++f) total += counts(c, f);
    const double denominator = total + params.alpha * static_cast<double>(d);
    for (std::size_t f = 0; f < d; ++f) {
      model.log_likelihood(c, f) =
          std::log((counts(c, f) + params.alpha) / denominator);
    }
  }
  return model;
}

int PredictNaiveBayes(const NaiveBayesModel &model, const SparseVector &x,
                      std::span<const std::size_t> class_counts) {
  std::vector<double> scores = model.log_prior;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    for (const SparseEntry &e : x.entries) {
      scores[c] += std::abs(e.value) * model.log_likelihood(c, e.index);
    }
  }
  return BreakTie(scores, class_counts);
}

}  // namespace gso
