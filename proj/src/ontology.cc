#include "gso/ontology.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "json.hpp"

namespace gso {

using json = nlohmann::json;

namespace {

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

const json *Field(const json &record, const char *name) {
  auto it = record.find(name);
  if (it == record.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string RequireString(const json &record, const char *name,
                          std::size_t line) {
  const json *value = Field(record, name);
  if (value == nullptr || !value->is_string()) {
    throw Error(ErrorCode::kParseError,
                std::string("field '") + name + "' must be a string", line);
  }
  return value->get<std::string>();
}

Synset ParseRecord(const std::string &text, std::size_t line) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParseError, e.what(), line);
  }
  if (!record.is_object()) {
    throw Error(ErrorCode::kParseError, "record is not an object", line);
  }

  Synset synset;
  synset.id = RequireString(record, "id", line);
  synset.lemma = ToLower(RequireString(record, "lemma", line));
  if (synset.id.empty() || synset.lemma.empty()) {
    throw Error(ErrorCode::kParseError, "empty id or lemma", line);
  }

  const std::string pos = RequireString(record, "pos", line);
  auto parsed_pos = ParsePos(pos);
  if (!parsed_pos) {
    throw Error(ErrorCode::kInvalidPos, "unknown pos '" + pos + "'", line);
  }
  synset.pos = *parsed_pos;

  if (const json *sense = Field(record, "sense")) {
    if (!sense->is_number_integer() || sense->get<long long>() < 1) {
      throw Error(ErrorCode::kParseError, "sense must be an integer >= 1",
                  line);
    }
    synset.sense = sense->get<int>();
  }
  if (const json *gloss = Field(record, "gloss")) {
    if (!gloss->is_string()) {
      throw Error(ErrorCode::kParseError, "gloss must be a string", line);
    }
    synset.gloss = gloss->get<std::string>();
  }
  if (const json *score = Field(record, "score")) {
    if (!score->is_number()) {
      throw Error(ErrorCode::kParseError, "score must be a number or null",
                  line);
    }
    synset.score = score->get<double>();
  }
  if (const json *parent = Field(record, "parent")) {
    if (!parent->is_string()) {
      throw Error(ErrorCode::kParseError, "parent must be a string or null",
                  line);
    }
    synset.parent = parent->get<std::string>();
  }
  return synset;
}

}  // namespace

std::string_view PosName(Pos pos) {
  switch (pos) {
    case Pos::kAdjective: return "adjective";
    case Pos::kVerb: return "verb";
    case Pos::kNoun: return "noun";
  }
  return "noun";
}

std::optional<Pos> ParsePos(std::string_view name) {
  const std::string lower = ToLower(name);
  if (lower == "adjective" || lower == "adj") return Pos::kAdjective;
  if (lower == "verb") return Pos::kVerb;
  if (lower == "noun") return Pos::kNoun;
  return std::nullopt;
}

std::vector<Synset> ParseLexicon(std::istream &in) {
  std::vector<Synset> synsets;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    synsets.push_back(ParseRecord(text, line));
  }
  return synsets;
}

std::vector<Synset> LoadLexicon(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open lexicon " + path);
  return ParseLexicon(in);
}

void WriteSynsetRecord(std::ostream &out, const Synset &synset) {
  json record = json::object();
  record["id"] = synset.id;
  record["lemma"] = synset.lemma;
  record["sense"] = synset.sense;
  record["pos"] = PosName(synset.pos);
  record["gloss"] = synset.gloss;
  record["score"] = synset.score ? json(*synset.score) : json(nullptr);
  record["parent"] = synset.parent ? json(*synset.parent) : json(nullptr);
  out << record.dump() << '\n';
}

SynsetForest SynsetForest::Build(std::vector<Synset> synsets) {
  SynsetForest forest;
  forest.nodes_ = std::move(synsets);
  const std::size_t n = forest.nodes_.size();

  // Per-record checks.
  std::array<std::map<std::pair<std::string, int>, std::string>, 3> senses;
  for (std::size_t i = 0; i < n; ++i) {
    const Synset &s = forest.nodes_[i];
    if (s.score && !(*s.score >= -1.0 && *s.score <= 1.0)) {
      throw Error(ErrorCode::kScoreOutOfRange,
                  "synset '" + s.id + "' has score outside [-1, 1]");
    }
    if (!forest.by_id_.emplace(s.id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate synset id '" + s.id + "'");
    }
    const int tree = static_cast<int>(s.pos);
    auto [it, fresh] = senses[tree].emplace(std::pair(s.lemma, s.sense), s.id);
    if (!fresh) {
      throw Error(ErrorCode::kDiscrepancyViolation,
                  "'" + s.lemma + "#" + std::to_string(s.sense) +
                      "' appears twice in the " + std::string(PosName(s.pos)) +
                      " tree ('" + it->second + "' and '" + s.id + "')");
    }
    forest.by_lemma_[tree][s.lemma].push_back(i);
  }

  // Link parents.
  forest.parents_.assign(n, kNone);
  forest.children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const Synset &s = forest.nodes_[i];
    const int tree = static_cast<int>(s.pos);
    if (!s.parent) {
      if (forest.roots_[tree] != kNone) {
        throw Error(ErrorCode::kMultipleRoots,
                    std::string(PosName(s.pos)) + " tree has roots '" +
                        forest.nodes_[forest.roots_[tree]].id + "' and '" +
                        s.id + "'");
      }
      forest.roots_[tree] = i;
      continue;
    }
    auto it = forest.by_id_.find(*s.parent);
    if (it == forest.by_id_.end()) {
      throw Error(ErrorCode::kDanglingParent,
                  "synset '" + s.id + "' names unknown parent '" + *s.parent +
                      "'");
    }
    if (forest.nodes_[it->second].pos != s.pos) {
      throw Error(ErrorCode::kCrossPosParent,
                  "synset '" + s.id + "' (" + std::string(PosName(s.pos)) +
                      ") has parent '" + *s.parent + "' of another pos");
    }
    forest.parents_[i] = it->second;
    forest.children_[it->second].push_back(i);
  }
  for (Pos pos : kAllPos) {
    if (forest.roots_[static_cast<int>(pos)] == kNone) {
      throw Error(ErrorCode::kMissingRoot,
                  std::string(PosName(pos)) + " tree has no root");
    }
  }

  // Depths by breadth-first walk from each root; anything unreached sits on a
  // parent cycle.
  forest.depths_.assign(n, 0);
  std::vector<std::size_t> queue;
  for (std::size_t root : forest.roots_) {
    forest.depths_[root] = 1;
    queue.push_back(root);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t node = queue[head];
    for (std::size_t child : forest.children_[node]) {
      forest.depths_[child] = forest.depths_[node] + 1;
      queue.push_back(child);
    }
  }
  if (queue.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (forest.depths_[i] == 0) {
        throw Error(ErrorCode::kCycle, "synset '" + forest.nodes_[i].id +
                                           "' is not reachable from its root");
      }
    }
  }

  for (int tree = 0; tree < 3; ++tree) {
    for (auto &[lemma, indices] : forest.by_lemma_[tree]) {
      std::sort(indices.begin(), indices.end(),
                [&](std::size_t a, std::size_t b) {
                  return forest.nodes_[a].sense < forest.nodes_[b].sense;
                });
      if (indices.size() > 1) {
        forest.warnings_.push_back(
            "lemma '" + lemma + "' has " + std::to_string(indices.size()) +
            " senses in the " + std::string(PosName(kAllPos[tree])) + " tree");
      }
    }
  }
  std::sort(forest.warnings_.begin(), forest.warnings_.end());
  return forest;
}

std::size_t SynsetForest::IndexOf(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? kNone : it->second;
}

const Synset *SynsetForest::Find(std::string_view id) const {
  const std::size_t index = IndexOf(id);
  return index == kNone ? nullptr : &nodes_[index];
}

bool SynsetForest::is_root(std::size_t index) const {
  return parents_[index] == kNone;
}

std::vector<std::size_t> SynsetForest::Lookup(Pos pos,
                                              std::string_view lemma) const {
  const auto &index = by_lemma_[static_cast<int>(pos)];
  auto it = index.find(ToLower(lemma));
  return it == index.end() ? std::vector<std::size_t>{} : it->second;
}

TreeStats SynsetForest::Stats(Pos pos) const {
  TreeStats stats;
  stats.pos = pos;
  std::size_t child_total = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].pos != pos) continue;
    ++stats.nodes;
    stats.max_depth = std::max(stats.max_depth, depths_[i]);
    const std::size_t fanout = children_[i].size();
    if (fanout == 0) {
      ++stats.leaves;
    } else {
      ++stats.internal;
      child_total += fanout;
      stats.max_branching = std::max(stats.max_branching, fanout);
    }
  }
  if (stats.internal > 0) {
    stats.mean_branching =
        static_cast<double>(child_total) / static_cast<double>(stats.internal);
  }
  return stats;
}

bool SynsetForest::fully_scored() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const Synset &s) { return s.score.has_value(); });
}

SynsetForest PropagateScores(const SynsetForest &forest) {
  std::vector<Synset> synsets(forest.synsets().begin(),
                              forest.synsets().end());
  for (Pos pos : kAllPos) {
    const std::size_t root = forest.root(pos);
    if (!synsets[root].score) {
      throw Error(ErrorCode::kUnscoredRoot,
                  "root '" + synsets[root].id + "' has no score");
    }
    std::vector<std::size_t> stack = {root};
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t child : forest.children(node)) {
        if (!synsets[child].score) synsets[child].score = synsets[node].score;
        stack.push_back(child);
      }
    }
  }
  return SynsetForest::Build(std::move(synsets));
}

void WriteLexicon(std::ostream &out, const SynsetForest &forest) {
  for (Pos pos : kAllPos) {
    std::vector<std::size_t> stack = {forest.root(pos)};
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      WriteSynsetRecord(out, forest.at(node));
      const auto &children = forest.children(node);
      for (auto it = children.rbegin(); it != children.rend(); ++it) {
        stack.push_back(*it);
      }
    }
  }
}

std::string_view PairKindName(PairKind kind) {
  return kind == PairKind::kAnp ? "ANP" : "VNP";
}

double PairWeight(double modifier_score, double noun_score) {
  return std::clamp(modifier_score + noun_score, -1.0, 1.0);
}

SentiPair MakePair(std::string_view modifier_id, std::string_view noun_id,
                   const SynsetForest &forest) {
  const Synset *modifier = forest.Find(modifier_id);
  if (modifier == nullptr) {
    throw Error(ErrorCode::kUnknownSynset,
                "unknown synset '" + std::string(modifier_id) + "'");
  }
  const Synset *noun = forest.Find(noun_id);
  if (noun == nullptr) {
    throw Error(ErrorCode::kUnknownSynset,
                "unknown synset '" + std::string(noun_id) + "'");
  }
  if (modifier->pos == Pos::kNoun) {
    throw Error(ErrorCode::kNotAModifier,
                "'" + modifier->id + "' is a noun, not an adjective or verb");
  }
  if (noun->pos != Pos::kNoun) {
    throw Error(ErrorCode::kNotANoun, "'" + noun->id + "' is a " +
                                          std::string(PosName(noun->pos)) +
                                          ", not a noun");
  }
  if (!modifier->score || !noun->score) {
    throw Error(ErrorCode::kMissingScore,
                "pair '" + modifier->id + " " + noun->id +
                    "' has an unscored member");
  }
  SentiPair pair;
  pair.modifier = modifier->id;
  pair.noun = noun->id;
  pair.kind = modifier->pos == Pos::kAdjective ? PairKind::kAnp : PairKind::kVnp;
  pair.weight = PairWeight(*modifier->score, *noun->score);
  return pair;
}

bool CanonicalPairLess(const SynsetForest &forest, const PairRef &a,
                       const PairRef &b) {
  auto key = [&](const PairRef &ref) {
    const Synset &m = *forest.Find(ref.modifier);
    const Synset &n = *forest.Find(ref.noun);
    return std::tie(m.pos, m.lemma, n.lemma, m.sense, n.sense, m.id, n.id);
  };
  return key(a) < key(b);
}

std::vector<SentiPair> EnumeratePairs(const SynsetForest &forest,
                                      std::size_t max_pairs) {
  auto sorted_members = [&](Pos pos) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < forest.size(); ++i) {
      if (forest.at(i).pos == pos && !forest.is_root(i)) members.push_back(i);
    }
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) {
                const Synset &x = forest.at(a);
                const Synset &y = forest.at(b);
                return std::tie(x.lemma, x.sense, x.id) <
                       std::tie(y.lemma, y.sense, y.id);
              });
    return members;
  };
  const std::vector<std::size_t> nouns = sorted_members(Pos::kNoun);

  std::vector<SentiPair> pairs;
  for (Pos modifier_pos : {Pos::kAdjective, Pos::kVerb}) {
    for (std::size_t m : sorted_members(modifier_pos)) {
      for (std::size_t n : nouns) {
        if (pairs.size() >= max_pairs) return pairs;
        pairs.push_back(MakePair(forest.at(m).id, forest.at(n).id, forest));
      }
    }
  }
  return pairs;
}

std::variant<SentiPairSequence, ValidationReport> ValidateSequence(
    std::span<const PairRef> raw, const SynsetForest &forest) {
  SentiPairSequence sequence;
  ValidationReport report;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    try {
      sequence.pairs.push_back(MakePair(raw[i].modifier, raw[i].noun, forest));
    } catch (const Error &e) {
      report.issues.push_back({i, e.code(), e.what()});
    }
  }
  if (!report.issues.empty()) return report;
  return sequence;
}

std::vector<PairRef> ToRefs(const SentiPairSequence &sequence) {
  std::vector<PairRef> refs;
  refs.reserve(sequence.pairs.size());
  for (const SentiPair &pair : sequence.pairs) refs.push_back(pair.ref());
  return refs;
}

std::vector<Synset> SearchSynsets(const SynsetForest &forest,
                                  std::string_view prefix,
                                  std::optional<Pos> pos) {
  const std::string needle = ToLower(prefix);
  std::vector<Synset> matches;
  for (const Synset &s : forest.synsets()) {
    if (pos && s.pos != *pos) continue;
    if (s.lemma.compare(0, needle.size(), needle) == 0) matches.push_back(s);
  }
  std::sort(matches.begin(), matches.end(), [](const Synset &a, const Synset &b) {
    return std::tie(a.lemma, a.sense, a.id) < std::tie(b.lemma, b.sense, b.id);
  });
  return matches;
}

}  // namespace gso
