#include "gso/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "gso/annotation.h"
#include "gso/annotation_http.h"
#include "gso/classifiers.h"
#include "gso/dataset.h"
#include "gso/eval.h"
#include "gso/features.h"
#include "gso/ontology.h"

namespace gso {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string DefaultDataDir() {
  if (const char *env = std::getenv("GSO_DATA_DIR"); env && *env) return env;
  return "data";
}

std::shared_ptr<const SynsetForest> LoadForest(const std::string &path) {
  return std::make_shared<const SynsetForest>(
      PropagateScores(BuildForest(LoadLexicon(path))));
}

json ReadJsonFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

std::array<double, 3> ParseRatios(const std::string &text) {
  std::array<double, 3> ratios{};
  std::stringstream in(text);
  std::string part;
  int i = 0;
  while (std::getline(in, part, ',')) {
    if (i == 3) throw Error(ErrorCode::kInvalidRatio, "expected three ratios");
    try {
      ratios[i++] = std::stod(part);
    } catch (const std::exception &) {
      throw Error(ErrorCode::kInvalidRatio, "bad ratio '" + part + "'");
    }
  }
  if (i != 3) throw Error(ErrorCode::kInvalidRatio, "expected three ratios");
  return ratios;
}

struct Common {
  bool json_output = false;
  std::string data_dir = DefaultDataDir();
  std::string lexicon;

  std::string LexiconPath() const {
    return lexicon.empty() ? (fs::path(data_dir) / "lexicon.jsonl").string() : lexicon;
  }
};

struct ModelOptions {
  std::string algorithm = "smo";
  std::uint64_t seed = 1;
  double alpha = 1.0;
  double c = 1.0;
  double l2 = 1e-4;
  int epochs = 500;
  int rounds = 10;
  int trees = 100;
  int mtry = 0;

  TrainParams Params() const {
    TrainParams params;
    auto parsed = ParseAlgorithm(algorithm);
    if (!parsed) throw Error(ErrorCode::kInvalidParameter, "unknown algorithm '" + algorithm + "'");
    params.algorithm = *parsed;
    params.seed = seed;
    params.naive_bayes.alpha = alpha;
    params.smo.c = c;
    params.logistic.l2 = l2;
    params.logistic.max_epochs = epochs;
    params.adaboost.rounds = rounds;
    params.random_forest.trees = trees;
    params.random_forest.features_per_split = mtry;
    params.Validate();
    return params;
  }
};

void AddModelOptions(CLI::App *cmd, ModelOptions &m, bool with_algorithm = true) {
  if (with_algorithm) {
    cmd->add_option("--algorithm", m.algorithm,
                    "naive_bayes | smo | logistic | adaboost | random_forest")
        ->capture_default_str();
  }
  cmd->add_option("--alpha", m.alpha, "naive Bayes smoothing")->capture_default_str();
  cmd->add_option("--c", m.c, "SMO box constraint")->capture_default_str();
  cmd->add_option("--l2", m.l2, "logistic L2 penalty")->capture_default_str();
  cmd->add_option("--epochs", m.epochs, "logistic epoch cap")->capture_default_str();
  cmd->add_option("--rounds", m.rounds, "AdaBoost rounds")->capture_default_str();
  cmd->add_option("--trees", m.trees, "random forest size")->capture_default_str();
  cmd->add_option("--mtry", m.mtry, "features per split (0 = ceil(sqrt(d)))")
      ->capture_default_str();
}

struct VocabularyFlags {
  std::string mode = "binary";
  std::size_t min_freq = 1;
  bool bigrams = false;
  std::string representation = "sentipair";

  VocabularyOptions Options() const {
    VocabularyOptions options;
    auto parsed = ParseFeatureMode(mode);
    if (!parsed) throw Error(ErrorCode::kInvalidParameter, "unknown feature mode '" + mode + "'");
    options.mode = *parsed;
    options.min_freq = min_freq;
    options.bigrams = bigrams;
    return options;
  }

  Representation Filter() const {
    auto parsed = ParseRepresentation(representation);
    if (!parsed) {
      throw Error(ErrorCode::kInvalidParameter,
                  "unknown representation '" + representation + "'");
    }
    return *parsed;
  }
};

void AddVocabularyOptions(CLI::App *cmd, VocabularyFlags &v) {
  cmd->add_option("--mode", v.mode, "binary | count | weighted")->capture_default_str();
  cmd->add_option("--min-freq", v.min_freq, "minimum pair frequency")->capture_default_str();
  cmd->add_flag("--bigrams", v.bigrams, "add consecutive-pair features");
  cmd->add_option("--representation", v.representation, "sentipair | anp | vnp")
      ->capture_default_str();
}

std::string TreeStatsText(const SynsetForest &forest) {
  std::string out = fmt::format("{:<10} {:>6} {:>6} {:>7} {:>9} {:>8} {:>8}\n", "tree",
                                "nodes", "depth", "leaves", "internal", "max-fan",
                                "mean-fan");
  for (Pos pos : kAllPos) {
    const TreeStats s = forest.Stats(pos);
    out += fmt::format("{:<10} {:>6} {:>6} {:>7} {:>9} {:>8} {:>8.2f}\n", PosName(pos),
                       s.nodes, s.max_depth, s.leaves, s.internal, s.max_branching,
                       s.mean_branching);
  }
  return out;
}

json TreeStatsJson(const SynsetForest &forest) {
  json trees = json::object();
  for (Pos pos : kAllPos) {
    const TreeStats s = forest.Stats(pos);
    trees[std::string(PosName(pos))] = {{"nodes", s.nodes},
                                        {"max_depth", s.max_depth},
                                        {"leaves", s.leaves},
                                        {"internal", s.internal},
                                        {"max_branching", s.max_branching},
                                        {"mean_branching", s.mean_branching}};
  }
  return trees;
}

json SynsetJson(const Synset &s) {
  return {{"id", s.id},
          {"lemma", s.lemma},
          {"sense", s.sense},
          {"pos", PosName(s.pos)},
          {"gloss", s.gloss},
          {"score", s.score ? json(*s.score) : json(nullptr)},
          {"parent", s.parent ? json(*s.parent) : json(nullptr)}};
}

json SpaceFileJson(const FeatureSpace &space, Representation representation) {
  json out = space.ToJson();
  out["representation"] = RepresentationName(representation);
  return out;
}

Representation RepresentationOf(const json &record) {
  if (!record.contains("representation")) return Representation::kSentiPair;
  auto parsed = ParseRepresentation(record.at("representation").get<std::string>());
  if (!parsed) throw Error(ErrorCode::kParseError, "unknown representation in file");
  return *parsed;
}

FeatureSpace LoadSpace(const json &record) {
  try {
    return FeatureSpace::FromJson(record);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("feature space: ") + e.what());
  }
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"GIF sentiment ontology toolkit", "gso"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  Common common;
  app.add_flag("--json", common.json_output, "machine-readable output");
  app.add_option("--data-dir", common.data_dir,
                 "default data directory (env GSO_DATA_DIR)")
      ->capture_default_str();
  app.add_option("--lexicon", common.lexicon,
                 "lexicon file (default <data-dir>/lexicon.jsonl)");

  std::function<void()> action;
  auto emit = [&](const json &record, const std::string &text) {
    if (common.json_output) {
      out << record.dump(2) << '\n';
    } else {
      out << text;
    }
  };

  // ---- forest
  auto *forest_cmd = app.add_subcommand("forest", "synset forest tools");
  forest_cmd->require_subcommand(1);

  std::string forest_out;
  auto *forest_build = forest_cmd->add_subcommand("build", "validate a lexicon and write the scored forest");
  forest_build->add_option("--out", forest_out, "output lexicon file (scores propagated)");
  forest_build->callback([&] {
    action = [&] {
      auto forest = LoadForest(common.LexiconPath());
      if (!forest_out.empty()) {
        std::ofstream file(forest_out, std::ios::binary);
        if (!file) throw Error(ErrorCode::kIoError, "cannot write " + forest_out);
        WriteLexicon(file, *forest);
      }
      std::string text;
      for (Pos pos : kAllPos) {
        text += fmt::format("{}: {} synsets\n", PosName(pos), forest->Stats(pos).nodes);
      }
      for (const std::string &w : forest->warnings()) text += "warning: " + w + "\n";
      emit({{"trees", TreeStatsJson(*forest)}, {"warnings", forest->warnings()},
            {"out", forest_out.empty() ? json(nullptr) : json(forest_out)}},
           text);
    };
  });

  auto *forest_stats = forest_cmd->add_subcommand("stats", "per-tree shape statistics");
  forest_stats->callback([&] {
    action = [&] {
      auto forest = LoadForest(common.LexiconPath());
      emit({{"trees", TreeStatsJson(*forest)}}, TreeStatsText(*forest));
    };
  });

  std::string search_query, search_pos;
  auto *forest_search = forest_cmd->add_subcommand("search", "lemma prefix search");
  forest_search->add_option("query", search_query, "lemma prefix")->required();
  forest_search->add_option("--pos", search_pos, "adjective | verb | noun");
  forest_search->callback([&] {
    action = [&] {
      auto forest = LoadForest(common.LexiconPath());
      std::optional<Pos> pos;
      if (!search_pos.empty()) {
        pos = ParsePos(search_pos);
        if (!pos) throw Error(ErrorCode::kInvalidPos, "unknown part of speech '" + search_pos + "'");
      }
      json results = json::array();
      std::string text;
      for (const Synset &s : SearchSynsets(*forest, search_query, pos)) {
        results.push_back(SynsetJson(s));
        text += fmt::format("{:<16} {:<10} {:>6.2f}  {}\n", s.id, PosName(s.pos),
                            s.score.value_or(0.0), s.gloss);
      }
      emit({{"results", results}}, text);
    };
  });

  // ---- pairs
  auto *pairs_cmd = app.add_subcommand("pairs", "SentiPair tools");
  pairs_cmd->require_subcommand(1);
  std::size_t max_pairs = 1000;
  auto *pairs_enum = pairs_cmd->add_subcommand("enumerate", "list candidate pairs in canonical order");
  pairs_enum->add_option("--max", max_pairs, "maximum number of pairs")->capture_default_str();
  pairs_enum->callback([&] {
    action = [&] {
      auto forest = LoadForest(common.LexiconPath());
      json pairs = json::array();
      std::string text;
      for (const SentiPair &p : EnumeratePairs(*forest, max_pairs)) {
        pairs.push_back({{"modifier", p.modifier}, {"noun", p.noun},
                         {"kind", PairKindName(p.kind)}, {"weight", p.weight}});
        text += fmt::format("{} {} {} {:+.2f}\n", PairKindName(p.kind), p.modifier, p.noun,
                            p.weight);
      }
      emit({{"pairs", pairs}}, text);
    };
  });

  // ---- dataset
  auto *dataset_cmd = app.add_subcommand("dataset", "dataset tools");
  dataset_cmd->require_subcommand(1);
  std::string dataset_in;
  bool lenient = false;
  auto add_input = [&](CLI::App *cmd, const char *flag) {
    cmd->add_option(flag, dataset_in, "dataset file (.gso.jsonl)")->required();
    cmd->add_flag("--lenient", lenient, "drop unresolved pairs instead of failing");
  };
  auto load_input = [&] {
    return LoadDataset(dataset_in, LoadForest(common.LexiconPath()),
                       lenient ? LoadMode::kLenient : LoadMode::kStrict);
  };

  auto *dataset_validate = dataset_cmd->add_subcommand("validate", "check every record against the forest");
  add_input(dataset_validate, "--in");
  dataset_validate->callback([&] {
    action = [&] {
      const Dataset ds = load_input();
      json dropped = json::array();
      std::string text = fmt::format("{} instances, {} dropped pairs\n", ds.size(),
                                     ds.dropped_pairs());
      for (const DroppedPair &d : ds.dropped) {
        dropped.push_back({{"line", d.line}, {"position", d.position},
                           {"modifier", d.ref.modifier}, {"noun", d.ref.noun},
                           {"code", ErrorCodeName(d.code)}});
        text += fmt::format("  line {} position {}: {} {} ({})\n", d.line, d.position,
                            d.ref.modifier, d.ref.noun, ErrorCodeName(d.code));
      }
      emit({{"instances", ds.size()}, {"dropped", dropped}}, text);
    };
  });

  auto *dataset_stats = dataset_cmd->add_subcommand("stats", "class, duration and noise statistics");
  add_input(dataset_stats, "--in");
  dataset_stats->callback([&] {
    action = [&] {
      const DatasetStats stats = ComputeStats(load_input());
      emit(StatsToJson(stats), RenderStatsTable(stats));
    };
  });

  SyntheticConfig synth;
  std::string synth_out, synth_ratios = "0.333333,0.333333,0.333334", signal_out;
  auto *dataset_gen = dataset_cmd->add_subcommand("gen-synthetic", "generate a dataset with planted labels");
  dataset_gen->add_option("--out", synth_out, "output dataset file")->required();
  dataset_gen->add_option("--n", synth.n, "instances")->capture_default_str();
  dataset_gen->add_option("--ratios", synth_ratios, "positive,negative,neutral shares")
      ->capture_default_str();
  dataset_gen->add_option("--noise", synth.noise_rate, "label flip probability")
      ->capture_default_str();
  dataset_gen->add_option("--vnp-share", synth.vnp_signal_share, "VNP share of planted weight")
      ->capture_default_str();
  dataset_gen->add_option("--seed", synth.seed, "random seed")->capture_default_str();
  dataset_gen->add_option("--anp-pool", synth.anp_pool, "ANPs carrying signal")
      ->capture_default_str();
  dataset_gen->add_option("--vnp-pool", synth.vnp_pool, "VNPs carrying signal")
      ->capture_default_str();
  dataset_gen->add_option("--margin", synth.margin, "rejection margin around the neutral band")
      ->capture_default_str();
  dataset_gen->add_option("--signal-out", signal_out, "write the planted weights here");
  dataset_gen->callback([&] {
    action = [&] {
      synth.class_ratios = ParseRatios(synth_ratios);
      const SyntheticDataset generated =
          GenerateSynthetic(LoadForest(common.LexiconPath()), synth);
      SaveDataset(synth_out, generated.dataset);
      if (!signal_out.empty()) {
        std::string lines;
        for (const auto &[ref, weight] : generated.signal) {
          lines += json{{"modifier", ref.modifier}, {"noun", ref.noun}, {"weight", weight}}.dump() + "\n";
        }
        WriteTextFile(signal_out, lines);
      }
      const DatasetStats stats = ComputeStats(generated.dataset);
      emit({{"out", synth_out}, {"stats", StatsToJson(stats)}},
           fmt::format("wrote {} instances to {}\n", generated.dataset.size(), synth_out) +
               RenderStatsTable(stats));
    };
  });

  int split_k = 10;
  std::uint64_t split_seed = 1;
  std::string split_dir;
  auto *dataset_split = dataset_cmd->add_subcommand("split", "write stratified k-fold partitions");
  add_input(dataset_split, "--in");
  dataset_split->add_option("--k", split_k, "folds")->capture_default_str();
  dataset_split->add_option("--seed", split_seed, "random seed")->capture_default_str();
  dataset_split->add_option("--out-dir", split_dir, "directory for fold files")->required();
  dataset_split->callback([&] {
    action = [&] {
      const Dataset ds = load_input();
      const auto folds = StratifiedKFold(ds, split_k, split_seed);
      fs::create_directories(split_dir);
      json summary = json::array();
      std::string text;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::string base = (fs::path(split_dir) / fmt::format("fold{:02d}", f)).string();
        SaveDataset(base + ".train.gso.jsonl", SubsetDataset(ds, folds[f].train));
        SaveDataset(base + ".test.gso.jsonl", SubsetDataset(ds, folds[f].test));
        summary.push_back({{"fold", f}, {"train", folds[f].train.size()},
                           {"test", folds[f].test.size()}});
        text += fmt::format("fold {}: {} train, {} test\n", f, folds[f].train.size(),
                            folds[f].test.size());
      }
      emit({{"folds", summary}}, text);
    };
  });

  // ---- features
  auto *features_cmd = app.add_subcommand("features", "feature space tools");
  features_cmd->require_subcommand(1);
  VocabularyFlags vocab;
  std::string space_out, space_in;
  auto *features_build = features_cmd->add_subcommand("build", "build a vocabulary from a dataset");
  add_input(features_build, "--in");
  AddVocabularyOptions(features_build, vocab);
  features_build->add_option("--out", space_out, "feature space file")->required();
  features_build->callback([&] {
    action = [&] {
      const Representation representation = vocab.Filter();
      const FeatureSpace space =
          BuildVocabulary(FilterDataset(load_input(), representation), vocab.Options());
      WriteTextFile(space_out, SpaceFileJson(space, representation).dump(2) + "\n");
      emit({{"out", space_out}, {"dimension", space.dimension()}},
           fmt::format("{} features written to {}\n", space.dimension(), space_out));
    };
  });

  auto *features_select = features_cmd->add_subcommand("select", "CFS subset selection over a feature space");
  add_input(features_select, "--in");
  features_select->add_option("--space", space_in, "feature space file")->required();
  features_select->add_option("--out", space_out, "selected feature space file")->required();
  features_select->callback([&] {
    action = [&] {
      const json record = ReadJsonFile(space_in);
      const Representation representation = RepresentationOf(record);
      FeatureSpace space = LoadSpace(record);
      space.Select(std::nullopt);
      const LabeledMatrix matrix =
          FeaturizeDataset(FilterDataset(load_input(), representation), space);
      const CfsResult chosen = CfsSelect(matrix.features, matrix.labels);
      std::vector<bool> mask(space.vocabulary().size(), false);
      for (std::size_t f : chosen.selected) mask[space.VocabularyIndex(f)] = true;
      space.Select(std::move(mask));
      WriteTextFile(space_out, SpaceFileJson(space, representation).dump(2) + "\n");
      emit({{"out", space_out}, {"selected", space.dimension()},
            {"vocabulary", space.vocabulary().size()}, {"merit", chosen.merit},
            {"evaluated", chosen.evaluated}},
           fmt::format("selected {} of {} features (merit {:.4f}), written to {}\n",
                       space.dimension(), space.vocabulary().size(), chosen.merit, space_out));
    };
  });

  // ---- model
  auto *model_cmd = app.add_subcommand("model", "train and apply classifiers");
  model_cmd->require_subcommand(1);
  ModelOptions model_opts;
  std::string model_out, model_in;
  auto *model_train = model_cmd->add_subcommand("train", "fit a classifier");
  add_input(model_train, "--in");
  AddModelOptions(model_train, model_opts);
  AddVocabularyOptions(model_train, vocab);
  model_train->add_option("--seed", model_opts.seed, "random seed")->capture_default_str();
  model_train->add_option("--space", space_in, "feature space file (default: build from --in)");
  model_train->add_option("--out", model_out, "model file")->required();
  model_train->callback([&] {
    action = [&] {
      const TrainParams params = model_opts.Params();
      Representation representation = vocab.Filter();
      FeatureSpace space;
      const Dataset raw = load_input();
      if (!space_in.empty()) {
        const json record = ReadJsonFile(space_in);
        representation = RepresentationOf(record);
        space = LoadSpace(record);
      } else {
        space = BuildVocabulary(FilterDataset(raw, representation), vocab.Options());
      }
      const LabeledMatrix matrix = FeaturizeDataset(FilterDataset(raw, representation), space);
      const TrainedModel model = Train(matrix.features, matrix.labels, params);
      json record = ModelToJson(model);
      record["feature_space"] = SpaceFileJson(space, representation);
      WriteTextFile(model_out, record.dump(2) + "\n");
      emit({{"out", model_out}, {"algorithm", AlgorithmName(params.algorithm)},
            {"rows", matrix.labels.size()}, {"dimension", space.dimension()}},
           fmt::format("{} trained on {} instances x {} features, written to {}\n",
                       AlgorithmName(params.algorithm), matrix.labels.size(),
                       space.dimension(), model_out));
    };
  });

  auto *model_predict = model_cmd->add_subcommand("predict", "label the instances of a dataset");
  add_input(model_predict, "--in");
  model_predict->add_option("--model", model_in, "model file")->required();
  model_predict->callback([&] {
    action = [&] {
      const json record = ReadJsonFile(model_in);
      const TrainedModel model = ModelFromJson(record);
      if (!record.contains("feature_space")) {
        throw Error(ErrorCode::kParseError, "model file carries no feature space");
      }
      const Representation representation = RepresentationOf(record.at("feature_space"));
      const FeatureSpace space = LoadSpace(record.at("feature_space"));
      const Dataset ds = load_input();
      json predictions = json::array();
      std::string text;
      ConfusionMatrix cm;
      for (const AnnotatedInstance &instance : ds.instances) {
        const int predicted =
            Predict(model, Featurize(FilterSequence(instance.sequence, representation), space));
        const SentimentLabel label = kSentimentClasses[predicted];
        predictions.push_back({{"gif_id", instance.gif_id}, {"predicted", LabelName(label)},
                               {"label", LabelName(instance.label)}});
        text += fmt::format("{}\t{}\n", instance.gif_id, LabelName(label));
        if (instance.label != SentimentLabel::kCantJudge) {
          cm.Add(ClassIndex(instance.label), predicted);
        }
      }
      json result = {{"predictions", predictions}};
      if (cm.total() > 0) {
        const Metrics m = ComputeMetrics(cm);
        result["accuracy"] = m.accuracy;
        text += fmt::format("accuracy {} over {} labeled instances\n", FormatPercent(m.accuracy),
                            m.total);
      }
      emit(result, text);
    };
  });

  // ---- eval
  auto *eval_cmd = app.add_subcommand("eval", "cross-validated experiments");
  eval_cmd->require_subcommand(1);
  int eval_k = 10;
  std::uint64_t eval_seed = 1;
  bool eval_cfs = false;
  std::string report_out;
  auto *eval_run = eval_cmd->add_subcommand("run", "cross-validate one configuration");
  add_input(eval_run, "--dataset");
  AddModelOptions(eval_run, model_opts);
  AddVocabularyOptions(eval_run, vocab);
  eval_run->add_option("--k", eval_k, "folds")->capture_default_str();
  eval_run->add_option("--seed", eval_seed, "random seed")->capture_default_str();
  eval_run->add_flag("--cfs", eval_cfs, "CFS selection inside each fold");
  eval_run->add_option("--out", report_out, "write the machine-readable report here");
  eval_run->callback([&] {
    action = [&] {
      PipelineConfig config;
      model_opts.seed = eval_seed;
      config.params = model_opts.Params();
      config.representation = vocab.Filter();
      config.vocabulary = vocab.Options();
      config.cfs = eval_cfs;
      const EvalReport report = CrossValidate(load_input(), config, eval_k, eval_seed);
      const json record = ReportToJson(report);
      if (!report_out.empty()) WriteTextFile(report_out, record.dump(2) + "\n");
      emit(record, RenderReport(report));
    };
  });

  bool paper_format = false;
  int suite_threads = 0;
  std::vector<std::string> suite_algorithms;
  auto *eval_suite = eval_cmd->add_subcommand("suite", "algorithm x selection x representation grid");
  add_input(eval_suite, "--dataset");
  AddModelOptions(eval_suite, model_opts, false);
  eval_suite->add_option("--algorithms", suite_algorithms, "subset of algorithms")
      ->delimiter(',');
  eval_suite->add_option("--mode", vocab.mode, "binary | count | weighted")->capture_default_str();
  eval_suite->add_option("--min-freq", vocab.min_freq, "minimum pair frequency")
      ->capture_default_str();
  eval_suite->add_option("--k", eval_k, "folds")->capture_default_str();
  eval_suite->add_option("--seed", eval_seed, "random seed")->capture_default_str();
  eval_suite->add_option("--threads", suite_threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  eval_suite->add_flag("--paper-format", paper_format, "three-decimal publication tables");
  eval_suite->add_option("--out", report_out, "write the machine-readable report here");
  eval_suite->callback([&] {
    action = [&] {
      SuiteConfig config;
      if (!suite_algorithms.empty()) {
        config.algorithms.clear();
        for (const std::string &name : suite_algorithms) {
          auto parsed = ParseAlgorithm(name);
          if (!parsed) throw Error(ErrorCode::kInvalidParameter, "unknown algorithm '" + name + "'");
          config.algorithms.push_back(*parsed);
        }
      }
      model_opts.seed = eval_seed;
      config.params = model_opts.Params();
      config.vocabulary = vocab.Options();
      config.k = eval_k;
      config.seed = eval_seed;
      config.threads = suite_threads;
      const SuiteReport report = RunSuite(load_input(), config);
      const json record = SuiteToJson(report);
      if (!report_out.empty()) WriteTextFile(report_out, record.dump(2) + "\n");
      emit(record, paper_format ? RenderPaperTables(report) : RenderSuiteTable(report));
    };
  });

  // ---- serve
  std::string host = "127.0.0.1", state_dir, tasks_file, worker_list;
  int port = 8080, required_workers = 7, lease_minutes = 10;
  auto *serve = app.add_subcommand("serve", "run the annotation service");
  serve->add_option("--host", host, "bind address")->capture_default_str();
  serve->add_option("--port", port, "port (0 picks a free one)")->capture_default_str();
  serve->add_option("--state-dir", state_dir, "submission log and snapshot directory");
  serve->add_option("--tasks", tasks_file, "task manifest, one {gif_id, gif_uri} per line");
  serve->add_option("--workers", worker_list, "comma-separated worker ids to register");
  serve->add_option("--required-workers", required_workers, "annotations per GIF")
      ->capture_default_str();
  serve->add_option("--lease-minutes", lease_minutes, "task lease length")->capture_default_str();
  serve->callback([&] {
    action = [&] {
      ServiceOptions options;
      options.state_dir = state_dir;
      options.required_workers = required_workers;
      options.lease_ms = static_cast<std::int64_t>(lease_minutes) * 60 * 1000;
      AnnotationService service(LoadForest(common.LexiconPath()), options);
      if (!worker_list.empty()) {
        std::stringstream in(worker_list);
        std::string worker;
        while (std::getline(in, worker, ',')) {
          if (!worker.empty()) service.RegisterWorker(worker);
        }
      }
      if (!tasks_file.empty()) {
        std::ifstream in(tasks_file);
        if (!in) throw Error(ErrorCode::kIoError, "cannot open " + tasks_file);
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
          ++number;
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          try {
            const json t = json::parse(line);
            std::optional<int> required;
            if (t.contains("required_workers")) required = t.at("required_workers").get<int>();
            service.AddTask(t.at("gif_id").get<std::string>(),
                            t.value("gif_uri", std::string()), required);
          } catch (const json::exception &e) {
            throw Error(ErrorCode::kParseError, e.what(), number);
          }
        }
      }
      httplib::Server server;
      RegisterRoutes(server, service);
      const int bound = port == 0 ? server.bind_to_any_port(host) : port;
      if (port != 0 && !server.bind_to_port(host, port)) {
        throw Error(ErrorCode::kIoError, fmt::format("cannot bind {}:{}", host, port));
      }
      if (bound < 0) throw Error(ErrorCode::kIoError, "cannot bind " + host);
      emit({{"host", host}, {"port", bound}},
           fmt::format("listening on http://{}:{}\n", host, bound));
      out.flush();
      server.listen_after_bind();
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (!action) return kExitUsage;
  try {
    action();
    return kExitOk;
  } catch (const Error &e) {
    if (common.json_output) {
      out << json{{"error", {{"code", e.code_name()}, {"message", e.what()}}}}.dump(2) << '\n';
    }
    err << "error: " << e.code_name() << ": " << e.what() << '\n';
    return kExitDomainError;
  } catch (const fs::filesystem_error &e) {
    err << "error: IoError: " << e.what() << '\n';
    return kExitDomainError;
  }
}

}  // namespace gso
