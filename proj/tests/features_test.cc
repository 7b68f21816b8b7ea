#include <algorithm>
#include <cmath>
#include <set>

#include "cfs_oracle.h"
#include "doctest.h"
#include "fixtures.h"
#include "gso/features.h"
#include "gso/rng.h"

using namespace gso;

namespace {

FeatureKey Key(const SynsetForest &forest, const std::string &m, const std::string &n) {
  const SentiPair p = MakePair(m, n, forest);
  return {p.ref(), p.kind, std::nullopt, PairKind::kAnp};
}

SentiPairSequence Seq(const SynsetForest &forest, std::vector<PairRef> refs) {
  SentiPairSequence seq;
  for (const auto &r : refs) seq.pairs.push_back(MakePair(r.modifier, r.noun, forest));
  return seq;
}

Dataset TwoInstances(std::shared_ptr<const SynsetForest> forest) {
  Dataset ds;
  ds.forest = forest;
  ds.instances.push_back(testing::Instance(*forest, "a", {{"cute", "dog"}, {"sad", "cup"}},
                                           SentimentLabel::kPositive));
  ds.instances.push_back(testing::Instance(*forest, "b", {{"cute", "dog"}, {"fall", "cup"}},
                                           SentimentLabel::kNegative));
  return ds;
}

}  // namespace

TEST_CASE("vocabulary thresholds") {
  const auto forest = testing::TwelveForest();
  const Dataset ds = TwoInstances(forest);
  VocabularyOptions options;
  CHECK(BuildVocabulary(ds, options).dimension() == 3);
  options.min_freq = 2;
  const FeatureSpace shared = BuildVocabulary(ds, options);
  REQUIRE(shared.dimension() == 1);
  CHECK(shared.vocabulary()[0] == Key(*forest, "cute", "dog"));
  options.min_freq = 3;
  try {
    BuildVocabulary(ds, options);
    FAIL("empty vocabulary accepted");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmptyVocabulary);
  }
}

TEST_CASE("vocabulary over 300 distinct pairs") {
  const auto forest = testing::BundledForest();
  const auto pairs = EnumeratePairs(*forest, 300);
  REQUIRE(pairs.size() == 300);
  Dataset ds;
  ds.forest = forest;
  for (std::size_t i = 0; i < pairs.size(); i += 3) {
    AnnotatedInstance inst;
    inst.gif_id = "g" + std::to_string(i);
    for (std::size_t j = i; j < std::min(i + 3, pairs.size()); ++j) {
      inst.sequence.pairs.push_back(pairs[j]);
    }
    inst.label = kSentimentClasses[i % 3];
    ds.instances.push_back(inst);
  }
  const FeatureSpace space = BuildVocabulary(ds);
  CHECK(space.dimension() == 300);
  // canonical order carries over
  for (std::size_t i = 0; i < 300; ++i) CHECK(space.vocabulary()[i].first == pairs[i].ref());
}

TEST_CASE("cant_judge instances do not contribute vocabulary") {
  const auto forest = testing::TwelveForest();
  Dataset ds = TwoInstances(forest);
  ds.instances.push_back(testing::Instance(*forest, "c", {{"smile", "girl"}},
                                           SentimentLabel::kCantJudge));
  CHECK(BuildVocabulary(ds).dimension() == 3);
  CHECK(FeaturizeDataset(ds, BuildVocabulary(ds)).labels.size() == 2);
}

TEST_CASE("featurize modes") {
  const auto forest = testing::TwelveForest();
  const std::vector<FeatureKey> vocab = {Key(*forest, "cute", "dog"), Key(*forest, "fall", "dog")};
  const FeatureSpace binary(vocab, FeatureMode::kBinary, false);
  const FeatureSpace count(vocab, FeatureMode::kCount, false);
  const FeatureSpace weighted(vocab, FeatureMode::kWeighted, false);

  CHECK(Featurize({}, binary).entries.empty());
  CHECK(Featurize({}, binary).dimension == 2);

  const auto twice = Seq(*forest, {{"cute", "dog"}, {"cute", "dog"}});
  const std::size_t cute = *binary.ActiveIndex(vocab[0]);
  CHECK(Featurize(twice, count).entries == std::vector<SparseEntry>{{cute, 2.0}});
  CHECK(Featurize(twice, binary).entries == std::vector<SparseEntry>{{cute, 1.0}});

  // fall (-0.4) + dog (0.0), three occurrences
  const auto falls = Seq(*forest, {{"fall", "dog"}, {"fall", "dog"}, {"fall", "dog"}});
  const SparseVector v = Featurize(falls, weighted);
  REQUIRE(v.entries.size() == 1);
  CHECK(v.entries[0].value == doctest::Approx(-1.2).epsilon(1e-12));

  // pairs outside the vocabulary are ignored
  CHECK(Featurize(Seq(*forest, {{"smile", "cup"}}), count).entries.empty());
}

TEST_CASE("sparse vectors are sorted and free of zeros") {
  const SparseVector v = MakeSparse(5, {{3, 1.0}, {1, 2.0}, {3, -1.0}, {4, 0.5}});
  REQUIRE(v.entries.size() == 2);
  CHECK(v.entries[0] == SparseEntry{1, 2.0});
  CHECK(v.entries[1] == SparseEntry{4, 0.5});
  CHECK(v.Get(3) == 0.0);
  const std::vector<double> dense = {1, 1, 1, 1, 2};
  CHECK(v.Dot(dense) == 3.0);
}

TEST_CASE("featurize ignores pair order") {
  const auto forest = testing::BundledForest();
  const auto pairs = EnumeratePairs(*forest, 2000);
  Dataset ds;
  ds.forest = forest;
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    AnnotatedInstance inst;
    inst.gif_id = std::to_string(i);
    for (int j = rng.Between(0, 8); j > 0; --j) inst.sequence.pairs.push_back(pairs[rng.Below(pairs.size())]);
    inst.label = kSentimentClasses[i % 3];
    ds.instances.push_back(inst);
  }
  for (FeatureMode mode : {FeatureMode::kBinary, FeatureMode::kCount, FeatureMode::kWeighted}) {
    VocabularyOptions options;
    options.mode = mode;
    const FeatureSpace space = BuildVocabulary(ds, options);
    for (const auto &inst : ds.instances) {
      SentiPairSequence shuffled = inst.sequence;
      rng.Shuffle(shuffled.pairs);
      CHECK(Featurize(shuffled, space) == Featurize(inst.sequence, space));
    }
  }
}

TEST_CASE("representation filter commutes with binary featurization") {
  const auto forest = testing::BundledForest();
  const auto pairs = EnumeratePairs(*forest, 100000);
  Dataset ds;
  ds.forest = forest;
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    AnnotatedInstance inst;
    inst.gif_id = std::to_string(i);
    for (int j = rng.Between(1, 6); j > 0; --j) inst.sequence.pairs.push_back(pairs[rng.Below(pairs.size())]);
    inst.label = kSentimentClasses[i % 3];
    ds.instances.push_back(inst);
  }
  const FeatureSpace space = BuildVocabulary(ds);
  for (Representation r : {Representation::kAnpOnly, Representation::kVnpOnly,
                           Representation::kSentiPair}) {
    for (const auto &inst : ds.instances) {
      CHECK(Featurize(FilterSequence(inst.sequence, r), space) ==
            MaskRepresentation(Featurize(inst.sequence, space), space, r));
    }
  }
  const Dataset anp = FilterDataset(ds, Representation::kAnpOnly);
  for (const auto &inst : anp.instances) {
    for (const auto &p : inst.sequence.pairs) CHECK(p.kind == PairKind::kAnp);
  }
}

TEST_CASE("feature space serialization round-trips") {
  const auto forest = testing::TwelveForest();
  VocabularyOptions options;
  options.mode = FeatureMode::kWeighted;
  options.bigrams = true;
  FeatureSpace space = BuildVocabulary(TwoInstances(forest), options);
  space.Select(std::vector<bool>(space.vocabulary().size(), true));
  std::vector<bool> mask(space.vocabulary().size(), false);
  mask[0] = mask[2] = true;
  space.Select(mask);
  CHECK(space.dimension() == 2);
  const FeatureSpace again = FeatureSpace::FromJson(space.ToJson());
  CHECK(again == space);
  CHECK(again.ToJson().dump() == space.ToJson().dump());
}

TEST_CASE("symmetric uncertainty") {
  const std::vector<int> x = {0, 1, 1, 0, 2, 2, 1};
  CHECK(SymmetricUncertainty(x, x) == doctest::Approx(1.0).epsilon(1e-12));

  // independent: every (a, b) combination once
  const std::vector<int> a = {0, 0, 1, 1};
  const std::vector<int> b = {0, 1, 0, 1};
  CHECK(std::abs(SymmetricUncertainty(a, b)) < 1e-12);

  // joint {(0,0):4, (0,1):1, (1,0):1, (1,1):4}
  std::vector<int> p, q;
  auto add = [&](int u, int v, int times) {
    for (int i = 0; i < times; ++i) p.push_back(u), q.push_back(v);
  };
  add(0, 0, 4);
  add(0, 1, 1);
  add(1, 0, 1);
  add(1, 1, 4);
  // H(a) = H(b) = 1 bit; H(a,b) = -2(0.4 log 0.4) - 2(0.1 log 0.1)
  const double hab = -2 * 0.4 * std::log2(0.4) - 2 * 0.1 * std::log2(0.1);
  const double expected = 2.0 * (2.0 - hab) / 2.0;
  CHECK(SymmetricUncertainty(p, q) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.2780719).epsilon(1e-6));

  const std::vector<int> constant(4, 1);
  CHECK(SymmetricUncertainty(constant, constant) == 0.0);
  CHECK_THROWS_AS(SymmetricUncertainty(a, std::vector<int>{1}), Error);
}

TEST_CASE("cfs picks the feature that copies the label") {
  Rng rng(21);
  FeatureMatrix m;
  m.dimension = 6;
  std::vector<int> labels;
  for (int r = 0; r < 90; ++r) {
    const int y = r % 3 == 0 ? 1 : 0;
    labels.push_back(y);
    SparseVector v;
    v.dimension = 6;
    for (std::size_t f = 0; f < 6; ++f) {
      const bool on = f == 2 ? y == 1 : rng.Bernoulli(0.5);
      if (on) v.entries.push_back({f, 1.0});
    }
    m.rows.push_back(v);
  }
  const CfsResult result = CfsSelect(m, labels);
  CHECK(result.selected == std::vector<std::size_t>{2});
  CHECK(result.merit == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cfs on constant features selects nothing") {
  FeatureMatrix m;
  m.dimension = 3;
  std::vector<int> labels;
  for (int r = 0; r < 10; ++r) {
    SparseVector v;
    v.dimension = 3;
    v.entries.push_back({1, 1.0});
    m.rows.push_back(v);
    labels.push_back(r % 2);
  }
  const CfsResult result = CfsSelect(m, labels);
  CHECK(result.selected.empty());
  CHECK(result.merit == 0.0);
  labels.assign(10, 0);
  CHECK_THROWS_AS(CfsSelect(m, labels), Error);
}

TEST_CASE("cfs against exhaustive search") {
  int optimal = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = testing::RandomCfsInstance(MixSeed(500, seed));
    const CfsResult result = CfsSelect(inst.matrix, inst.labels);
    const double optimum = testing::ExhaustiveOptimum(inst);
    // the reported merit matches a from-scratch recomputation
    CHECK(result.merit == doctest::Approx(testing::OracleMerit(inst, result.selected)).epsilon(1e-12));
    CHECK(result.merit <= optimum + 1e-12);
    if (result.merit >= optimum - 1e-9) ++optimal;
  }
  CHECK(optimal >= 90);
}

TEST_CASE("cfs merit ignores feature order and is reproducible") {
  const auto inst = testing::RandomCfsInstance(77);
  const CfsResult first = CfsSelect(inst.matrix, inst.labels);
  CHECK(CfsSelect(inst.matrix, inst.labels).selected == first.selected);

  // reverse the columns
  const std::size_t d = inst.matrix.dimension;
  FeatureMatrix reversed;
  reversed.dimension = d;
  for (const auto &row : inst.matrix.rows) {
    std::vector<SparseEntry> entries;
    for (const auto &e : row.entries) entries.push_back({d - 1 - e.index, e.value});
    reversed.rows.push_back(MakeSparse(d, entries));
  }
  const CfsResult flipped = CfsSelect(reversed, inst.labels);
  CHECK(flipped.merit == doctest::Approx(first.merit).epsilon(1e-12));

  CorrelationTable table(inst.matrix, inst.labels);
  std::vector<std::size_t> subset = first.selected;
  std::reverse(subset.begin(), subset.end());
  CHECK(CfsMerit(subset, table) == doctest::Approx(first.merit).epsilon(1e-12));
}

TEST_CASE("incremental merits during search match recomputation") {
  const auto inst = testing::RandomCfsInstance(31);
  CfsOptions options;
  options.keep_trace = true;
  const CfsResult result = CfsSelect(inst.matrix, inst.labels, options);
  REQUIRE_FALSE(result.trace.empty());
  CorrelationTable table(inst.matrix, inst.labels);
  for (const CfsStep &step : result.trace) {
    CHECK(std::abs(step.merit - CfsMerit(step.subset, table)) <= 1e-12);
  }
}
