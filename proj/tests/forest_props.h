#ifndef GSO_TESTS_FOREST_PROPS_H_
#define GSO_TESTS_FOREST_PROPS_H_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gso/error.h"
#include "gso/ontology.h"
#include "gso/rng.h"

namespace gso::testing {

// Lexicons mostly valid, with occasional faults mixed in: bad scores,
// duplicate senses, dangling or cross-pos parents, extra roots, cycles.
inline std::vector<Synset> RandomLexicon(std::uint64_t seed) {
  Rng rng(seed);
  static const char *kLemmas[] = {"red", "run", "cat", "dog", "sky", "old", "fly",
                                  "sad", "cup", "joy", "sit", "big"};
  std::vector<Synset> out;
  std::vector<std::vector<std::size_t>> by_pos(3);
  const bool faulty = rng.Bernoulli(0.35);
  for (Pos pos : kAllPos) {
    Synset root;
    root.id = "root." + std::string(PosName(pos));
    root.lemma = "root" + std::to_string(static_cast<int>(pos));
    root.pos = pos;
    root.score = rng.Bernoulli(0.95) ? std::optional<double>(rng.Uniform() * 2 - 1)
                                     : std::nullopt;
    by_pos[static_cast<int>(pos)].push_back(out.size());
    out.push_back(root);
  }
  const int extra = rng.Between(0, 30);
  for (int i = 0; i < extra; ++i) {
    Synset s;
    const Pos pos = kAllPos[rng.Below(3)];
    s.id = "s" + std::to_string(i);
    s.lemma = kLemmas[rng.Below(std::size(kLemmas))];
    s.sense = rng.Between(1, 6);
    s.pos = pos;
    if (rng.Bernoulli(0.6)) s.score = rng.Uniform() * 2 - 1;
    const auto &pool = by_pos[static_cast<int>(pos)];
    s.parent = out[pool[rng.Below(pool.size())]].id;
    by_pos[static_cast<int>(pos)].push_back(out.size());
    out.push_back(s);
  }
  if (faulty && out.size() > 3) {
    const std::size_t victim = 3 + rng.Below(out.size() - 3);
    switch (rng.Below(6)) {
      case 0: out[victim].score = rng.Bernoulli(0.5) ? 1.5 : -1.01; break;
      case 1: out[victim].parent = "missing.id"; break;
      case 2: out[victim].parent = std::nullopt; break;  // second root
      case 3: {
        Synset copy = out[victim];
        copy.id += ".dup";
        out.push_back(copy);
        break;
      }
      case 4: {
        const Pos other = kAllPos[(static_cast<int>(out[victim].pos) + 1) % 3];
        out[victim].parent = out[static_cast<int>(other)].id;
        break;
      }
      default: {
        // point an ancestor at its descendant
        const std::string parent = *out[victim].parent;
        for (Synset &s : out) {
          if (s.id == parent && s.parent) s.parent = out[victim].id;
        }
        break;
      }
    }
  }
  // file order should not matter
  rng.Shuffle(out);
  return out;
}

inline bool IsBuildError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateId:
    case ErrorCode::kDiscrepancyViolation:
    case ErrorCode::kScoreOutOfRange:
    case ErrorCode::kDanglingParent:
    case ErrorCode::kCrossPosParent:
    case ErrorCode::kMultipleRoots:
    case ErrorCode::kMissingRoot:
    case ErrorCode::kCycle:
      return true;
    default:
      return false;
  }
}

// Empty string when every forest invariant holds, otherwise what broke.
inline std::string CheckForest(const SynsetForest &forest) {
  std::set<std::pair<int, std::pair<std::string, int>>> senses;
  for (Pos pos : kAllPos) {
    const std::size_t root = forest.root(pos);
    if (root == SynsetForest::kNone) return "missing root";
    if (forest.at(root).pos != pos) return "root in wrong tree";
    if (forest.at(root).parent) return "root has a parent";
  }
  for (std::size_t i = 0; i < forest.size(); ++i) {
    const Synset &s = forest.at(i);
    if (s.score && (*s.score < -1.0 || *s.score > 1.0)) return "score out of range: " + s.id;
    if (!senses.insert({static_cast<int>(s.pos), {s.lemma, s.sense}}).second) {
      return "duplicate lemma/sense: " + s.id;
    }
    std::size_t at = i;
    std::size_t steps = 0;
    while (!forest.is_root(at)) {
      const std::size_t up = forest.parent(at);
      if (up == SynsetForest::kNone) return "orphan: " + s.id;
      if (forest.at(up).pos != s.pos) return "cross-pos link: " + s.id;
      if (++steps > forest.size()) return "cycle through " + s.id;
      at = up;
    }
    if (at != forest.root(s.pos)) return "path ends at foreign root: " + s.id;
    if (forest.depth(i) != steps + 1) return "depth mismatch: " + s.id;
  }
  return {};
}

struct ForestPropertyOutcome {
  std::size_t built = 0;
  std::size_t rejected = 0;
  std::size_t propagated = 0;
  std::vector<std::string> failures;
};

inline ForestPropertyOutcome RunForestProperties(std::size_t lexicons, std::uint64_t seed) {
  ForestPropertyOutcome outcome;
  for (std::size_t trial = 0; trial < lexicons; ++trial) {
    const std::string tag = "lexicon " + std::to_string(trial) + ": ";
    std::optional<SynsetForest> forest;
    try {
      forest.emplace(BuildForest(RandomLexicon(MixSeed(seed, trial))));
    } catch (const Error &e) {
      if (!IsBuildError(e.code()) || e.code_name().empty()) {
        outcome.failures.push_back(tag + "unexpected error " + std::string(e.code_name()));
      }
      ++outcome.rejected;
      continue;
    }
    ++outcome.built;
    if (std::string broken = CheckForest(*forest); !broken.empty()) {
      outcome.failures.push_back(tag + broken);
      continue;
    }
    bool roots_scored = true;
    for (Pos pos : kAllPos) roots_scored &= forest->at(forest->root(pos)).score.has_value();
    try {
      const SynsetForest once = PropagateScores(*forest);
      const SynsetForest twice = PropagateScores(once);
      if (!roots_scored) outcome.failures.push_back(tag + "unscored root accepted");
      if (!once.fully_scored()) outcome.failures.push_back(tag + "scores left missing");
      if (!std::ranges::equal(once.synsets(), twice.synsets())) {
        outcome.failures.push_back(tag + "propagation not idempotent");
      }
      for (std::size_t i = 0; i < forest->size(); ++i) {
        if (forest->at(i).score && forest->at(i).score != once.at(i).score) {
          outcome.failures.push_back(tag + "present score changed");
        }
      }
      if (std::string broken = CheckForest(once); !broken.empty()) {
        outcome.failures.push_back(tag + "after propagation: " + broken);
      }
      ++outcome.propagated;
    } catch (const Error &e) {
      if (roots_scored || e.code() != ErrorCode::kUnscoredRoot) {
        outcome.failures.push_back(tag + "propagation failed with " +
                                   std::string(e.code_name()));
      }
    }
  }
  return outcome;
}

}  // namespace gso::testing

#endif  // GSO_TESTS_FOREST_PROPS_H_
