#ifndef GSO_TESTS_CFS_ORACLE_H_
#define GSO_TESTS_CFS_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gso/features.h"
#include "gso/rng.h"

namespace gso::testing {

// Dense binary columns plus a 3-class label, with some features tied to the
// label, some copies of others and the rest noise.
struct CfsInstance {
  std::vector<std::vector<int>> columns;
  std::vector<int> labels;
  FeatureMatrix matrix;
};

inline CfsInstance RandomCfsInstance(std::uint64_t seed, std::size_t rows = 60,
                                     std::size_t features = 10) {
  Rng rng(seed);
  CfsInstance inst;
  for (std::size_t r = 0; r < rows; ++r) inst.labels.push_back(static_cast<int>(rng.Below(3)));
  for (std::size_t f = 0; f < features; ++f) {
    std::vector<int> column(rows);
    const double kind = rng.Uniform();
    const int target = static_cast<int>(rng.Below(3));
    const double flip = 0.05 + 0.4 * rng.Uniform();
    const std::size_t source = f > 0 ? rng.Below(f) : 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (kind < 0.5) {
        column[r] = (inst.labels[r] == target) != rng.Bernoulli(flip);
      } else if (kind < 0.7 && f > 0) {
        column[r] = inst.columns[source][r] != rng.Bernoulli(flip / 2);
      } else {
        column[r] = rng.Bernoulli(0.3 + 0.4 * rng.Uniform());
      }
    }
    inst.columns.push_back(std::move(column));
  }
  inst.matrix.dimension = features;
  for (std::size_t r = 0; r < rows; ++r) {
    SparseVector v;
    v.dimension = features;
    for (std::size_t f = 0; f < features; ++f) {
      if (inst.columns[f][r]) v.entries.push_back({f, 1.0});
    }
    inst.matrix.rows.push_back(std::move(v));
  }
  return inst;
}

inline double EntropyBits(const std::map<std::vector<int>, double> &counts, double total) {
  double h = 0.0;
  for (const auto &[key, c] : counts) {
    if (c > 0) h -= (c / total) * std::log2(c / total);
  }
  return h;
}

// 2 * I(a;b) / (H(a) + H(b)), zero when both entropies vanish.
inline double OracleSu(const std::vector<int> &a, const std::vector<int> &b) {
  std::map<std::vector<int>, double> ca, cb, cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[{a[i]}] += 1;
    cb[{b[i]}] += 1;
    cab[{a[i], b[i]}] += 1;
  }
  const double n = static_cast<double>(a.size());
  const double ha = EntropyBits(ca, n), hb = EntropyBits(cb, n), hab = EntropyBits(cab, n);
  if (ha + hb <= 0.0) return 0.0;
  return 2.0 * (ha + hb - hab) / (ha + hb);
}

inline double OracleMerit(const CfsInstance &inst, const std::vector<std::size_t> &subset) {
  if (subset.empty()) return 0.0;
  const double k = static_cast<double>(subset.size());
  double rcf = 0.0, rff = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    rcf += OracleSu(inst.columns[subset[i]], inst.labels);
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      rff += OracleSu(inst.columns[subset[i]], inst.columns[subset[j]]);
    }
  }
  rcf /= k;
  if (subset.size() > 1) rff /= k * (k - 1) / 2.0;
  const double denominator = std::sqrt(k + k * (k - 1) * rff);
  return denominator > 0.0 ? k * rcf / denominator : 0.0;
}

// Best merit over all 2^d subsets.
inline double ExhaustiveOptimum(const CfsInstance &inst) {
  const std::size_t d = inst.columns.size();
  std::vector<double> su_class(d);
  std::vector<std::vector<double>> su_ff(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    su_class[i] = OracleSu(inst.columns[i], inst.labels);
    for (std::size_t j = i + 1; j < d; ++j) {
      su_ff[i][j] = su_ff[j][i] = OracleSu(inst.columns[i], inst.columns[j]);
    }
  }
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    double cf = 0.0, ff = 0.0, k = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (!(mask >> i & 1u)) continue;
      k += 1;
      cf += su_class[i];
      for (std::size_t j = i + 1; j < d; ++j) {
        if (mask >> j & 1u) ff += su_ff[i][j];
      }
    }
    const double denominator = std::sqrt(k + 2.0 * ff);
    if (denominator > 0.0) best = std::max(best, cf / denominator);
  }
  return best;
}

}  // namespace gso::testing

#endif  // GSO_TESTS_CFS_ORACLE_H_
