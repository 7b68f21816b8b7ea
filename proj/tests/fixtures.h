#ifndef GSO_TESTS_FIXTURES_H_
#define GSO_TESTS_FIXTURES_H_

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gso/dataset.h"
#include "gso/ontology.h"

namespace gso::testing {

inline Synset MakeSynset(const std::string &id, Pos pos, std::optional<double> score,
                         std::optional<std::string> parent, int sense = 1,
                         std::optional<std::string> lemma = std::nullopt) {
  Synset s;
  s.id = id;
  s.lemma = lemma.value_or(id);
  s.sense = sense;
  s.pos = pos;
  s.gloss = "gloss of " + id;
  s.score = score;
  s.parent = std::move(parent);
  return s;
}

// Four synsets per tree: a root and three children.
inline std::vector<Synset> TwelveSynsets() {
  return {
      MakeSynset("quality", Pos::kAdjective, 0.0, std::nullopt),
      MakeSynset("cute", Pos::kAdjective, 0.8, "quality"),
      MakeSynset("sad", Pos::kAdjective, -0.7, "quality"),
      MakeSynset("old", Pos::kAdjective, std::nullopt, "quality"),
      MakeSynset("act", Pos::kVerb, 0.0, std::nullopt),
      MakeSynset("fall", Pos::kVerb, -0.4, "act"),
      MakeSynset("smile", Pos::kVerb, 0.7, "act"),
      MakeSynset("run", Pos::kVerb, std::nullopt, "act"),
      MakeSynset("entity", Pos::kNoun, 0.0, std::nullopt),
      MakeSynset("dog", Pos::kNoun, 0.0, "entity"),
      MakeSynset("cup", Pos::kNoun, -0.7, "entity"),
      MakeSynset("girl", Pos::kNoun, std::nullopt, "entity"),
  };
}

inline std::shared_ptr<const SynsetForest> TwelveForest() {
  return std::make_shared<const SynsetForest>(
      PropagateScores(BuildForest(TwelveSynsets())));
}

inline std::string DataPath(const std::string &name) {
  return std::string(GSO_TEST_DATA_DIR) + "/" + name;
}

inline std::shared_ptr<const SynsetForest> BundledForest() {
  return std::make_shared<const SynsetForest>(
      PropagateScores(BuildForest(LoadLexicon(DataPath("lexicon.jsonl")))));
}

inline Dataset ParseText(const std::string &text, std::shared_ptr<const SynsetForest> forest,
                         LoadMode mode = LoadMode::kStrict) {
  std::istringstream in(text);
  return ParseDataset(in, std::move(forest), mode);
}

inline AnnotatedInstance Instance(const SynsetForest &forest, const std::string &gif_id,
                                  std::vector<PairRef> refs, SentimentLabel label) {
  AnnotatedInstance instance;
  instance.gif_id = gif_id;
  for (const PairRef &ref : refs) {
    instance.sequence.pairs.push_back(MakePair(ref.modifier, ref.noun, forest));
  }
  instance.label = label;
  return instance;
}

}  // namespace gso::testing

#endif  // GSO_TESTS_FIXTURES_H_
