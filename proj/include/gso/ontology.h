#ifndef GSO_ONTOLOGY_H_
#define GSO_ONTOLOGY_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "gso/error.h"

namespace gso {

enum class Pos { kAdjective = 0, kVerb = 1, kNoun = 2 };

inline constexpr std::array<Pos, 3> kAllPos = {Pos::kAdjective, Pos::kVerb,
                                               Pos::kNoun};

std::string_view PosName(Pos pos);
std::optional<Pos> ParsePos(std::string_view name);

// A word in one specific sense. Scores are optional on input and filled in by
// PropagateScores().
struct Synset {
  std::string id;
  std::string lemma;
  int sense = 1;
  Pos pos = Pos::kNoun;
  std::string gloss;
  std::optional<double> score;
  std::optional<std::string> parent;

  bool operator==(const Synset &other) const = default;
};

// Lexicon files hold one JSON object per line:
//   {"id", "lemma", "sense", "pos", "gloss", "score": number|null,
//    "parent": string|null}
// Lemmas are lowercased on read. Blank lines are skipped.
std::vector<Synset> ParseLexicon(std::istream &in);
std::vector<Synset> LoadLexicon(const std::string &path);
void WriteSynsetRecord(std::ostream &out, const Synset &synset);

// Shape summary for one tree. Depth counts levels, so a lone root has depth 1.
struct TreeStats {
  Pos pos = Pos::kNoun;
  std::size_t nodes = 0;
  std::size_t max_depth = 0;
  std::size_t leaves = 0;
  std::size_t internal = 0;
  std::size_t max_branching = 0;
  double mean_branching = 0.0;
};

// Three rooted synset trees (adjective, verb, noun). Immutable once built and
// safe to share between threads.
class SynsetForest {
 public:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Validates the records and links them into trees. Throws Error with one of
  // DuplicateId, DiscrepancyViolation, ScoreOutOfRange, DanglingParent,
  // CrossPosParent, MultipleRoots, MissingRoot or Cycle.
  static SynsetForest Build(std::vector<Synset> synsets);

  std::size_t size() const { return nodes_.size(); }
  std::span<const Synset> synsets() const { return nodes_; }
  const Synset &at(std::size_t index) const { return nodes_[index]; }

  // Index of the synset with this id, or kNone.
  std::size_t IndexOf(std::string_view id) const;
  const Synset *Find(std::string_view id) const;

  std::size_t root(Pos pos) const { return roots_[static_cast<int>(pos)]; }
  bool is_root(std::size_t index) const;
  std::size_t parent(std::size_t index) const { return parents_[index]; }
  const std::vector<std::size_t> &children(std::size_t index) const {
    return children_[index];
  }
  std::size_t depth(std::size_t index) const { return depths_[index]; }

  // All senses of `lemma` within one tree, ordered by sense.
  std::vector<std::size_t> Lookup(Pos pos, std::string_view lemma) const;

  TreeStats Stats(Pos pos) const;

  // Non-fatal findings from Build (same lemma under several senses).
  const std::vector<std::string> &warnings() const { return warnings_; }

  // True when every synset carries a score.
  bool fully_scored() const;

 private:
  SynsetForest() = default;

  std::vector<Synset> nodes_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::array<std::unordered_map<std::string, std::vector<std::size_t>>, 3>
      by_lemma_;
  std::array<std::size_t, 3> roots_{kNone, kNone, kNone};
  std::vector<std::size_t> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> depths_;
  std::vector<std::string> warnings_;
};

inline SynsetForest BuildForest(std::vector<Synset> synsets) {
  return SynsetForest::Build(std::move(synsets));
}

// Replaces each missing score with the nearest scored ancestor's score.
// Throws UnscoredRoot if a root has no score.
SynsetForest PropagateScores(const SynsetForest &forest);

// Writes the forest back out in lexicon format, trees in adjective, verb,
// noun order and each tree in pre-order.
void WriteLexicon(std::ostream &out, const SynsetForest &forest);

enum class PairKind { kAnp = 0, kVnp = 1 };

std::string_view PairKindName(PairKind kind);

// The raw (modifier, noun) reference as stored in datasets and annotations.
struct PairRef {
  std::string modifier;
  std::string noun;

  auto operator<=>(const PairRef &other) const = default;
  bool operator==(const PairRef &other) const = default;
};

struct SentiPair {
  std::string modifier;
  std::string noun;
  PairKind kind = PairKind::kAnp;
  double weight = 0.0;

  PairRef ref() const { return {modifier, noun}; }
  bool operator==(const SentiPair &other) const = default;
};

// Pairs in order of occurrence. Duplicates are allowed.
struct SentiPairSequence {
  std::vector<SentiPair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  bool operator==(const SentiPairSequence &other) const = default;
};

// Combined sentiment of a pair: clamp(modifier + noun, -1, +1).
double PairWeight(double modifier_score, double noun_score);

// Throws UnknownSynset, NotANoun, NotAModifier or MissingScore.
SentiPair MakePair(std::string_view modifier_id, std::string_view noun_id,
                   const SynsetForest &forest);

// Strict weak order on pairs: (kind, modifier lemma, noun lemma), then senses
// and ids. Both pairs must resolve in `forest`.
bool CanonicalPairLess(const SynsetForest &forest, const PairRef &a,
                       const PairRef &b);

// Every (modifier, noun) combination over the non-root synsets, in canonical
// order, truncated to max_pairs.
std::vector<SentiPair> EnumeratePairs(const SynsetForest &forest,
                                      std::size_t max_pairs);

struct ValidationIssue {
  std::size_t position = 0;
  ErrorCode code = ErrorCode::kUnknownSynset;
  std::string message;

  bool operator==(const ValidationIssue &other) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
};

// Either every position validates and the sequence keeps input order, or a
// report lists each offending position.
std::variant<SentiPairSequence, ValidationReport> ValidateSequence(
    std::span<const PairRef> raw, const SynsetForest &forest);

std::vector<PairRef> ToRefs(const SentiPairSequence &sequence);

// Case-insensitive lemma prefix search ordered by (lemma, sense, id).
std::vector<Synset> SearchSynsets(const SynsetForest &forest,
                                  std::string_view prefix,
                                  std::optional<Pos> pos = std::nullopt);

}  // namespace gso

#endif  // GSO_ONTOLOGY_H_
