// Acceptance checks. One PASS/FAIL line per criterion; exits non-zero if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <string>

#include "cfs_oracle.h"
#include "fixtures.h"
#include "forest_props.h"
#include "oracles.h"

using namespace gso;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void Report(bool ok, const std::string &name, const std::string &detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ConfusionMatrix FromOutcomes(const std::vector<std::pair<int, int>> &outcomes) {
  ConfusionMatrix cm;
  for (const auto &[t, p] : outcomes) cm.Add(t, p);
  return cm;
}

void MetricsOracle() {
  const auto start = std::chrono::steady_clock::now();
  int exact = 0;
  double worst_identity = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto outcomes = testing::RandomOutcomes(MixSeed(2024, s));
    const Metrics actual = ComputeMetrics(FromOutcomes(outcomes));
    exact += actual == testing::BruteForceMetrics(outcomes);
    worst_identity = std::max(worst_identity, std::abs(actual.recall - actual.accuracy));
  }
  const double elapsed = Seconds(start);
  Report(exact == 50 && worst_identity <= 1e-12 && elapsed < 1.0, "metrics oracle",
         fmt::format("{}/50 exact, max |recall-accuracy| {:.3g}, {:.3f} s", exact,
                     worst_identity, elapsed));
}

void CfsOracle() {
  const auto start = std::chrono::steady_clock::now();
  int optimal = 0, exceeded = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = testing::RandomCfsInstance(MixSeed(9001, seed));
    const CfsResult result = CfsSelect(inst.matrix, inst.labels);
    const double optimum = testing::ExhaustiveOptimum(inst);
    if (result.merit > optimum + 1e-12) ++exceeded;
    if (result.merit >= optimum - 1e-9) ++optimal;
  }
  const double elapsed = Seconds(start);
  Report(optimal >= 90 && exceeded == 0 && elapsed < 30.0, "CFS oracle",
         fmt::format("{}/100 optimal, {} above optimum, {:.2f} s", optimal, exceeded, elapsed));
}

void GradientCheck() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    worst = std::max(worst, testing::GradientRelativeError(testing::RandomGradientDraw(MixSeed(77, s))));
  }
  Report(worst < 1e-4, "logistic gradient", fmt::format("max relative error {:.3g}", worst));
}

void SmoCheck() {
  const auto [x, y] = testing::SixPointProblem();
  SmoParams params;
  params.tol = 1e-3;
  const SmoResult r = SmoSolve(x, y, params);
  const double kkt = KktViolation(x, y, r.alphas, r.bias, params.c);
  const double dual = SvmDualObjective(x, y, r.alphas);
  const double grid = testing::GridDualOptimum(x, y, params.c);
  double balance = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) balance += r.alphas[i] * y[i];
  Report(kkt <= 1e-3 && std::abs(dual - grid) <= 1e-3 && std::abs(balance) <= 1e-9, "SMO",
         fmt::format("KKT violation {:.3g}, dual {:.6f} vs grid {:.6f}, |sum alpha*y| {:.3g}", kkt,
                     dual, grid, std::abs(balance)));
}

void SyntheticRun() {
  const auto start = std::chrono::steady_clock::now();
  SyntheticConfig config;
  config.n = 1869;
  config.class_ratios = {0.603, 0.078, 0.321};
  config.noise_rate = 0.10;
  config.vnp_signal_share = 0.4;
  config.seed = 1;
  const Dataset ds = GenerateSynthetic(testing::BundledForest(), config).dataset;

  std::array<std::array<double, 3>, 2> acc{};  // [smo, logistic][anp, vnp, sentipair]
  const std::array<Algorithm, 2> algorithms = {Algorithm::kSmo, Algorithm::kLogistic};
  const std::array<Representation, 3> representations = {
      Representation::kAnpOnly, Representation::kVnpOnly, Representation::kSentiPair};
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t r = 0; r < 3; ++r) {
      PipelineConfig pipeline;
      pipeline.params.algorithm = algorithms[a];
      pipeline.representation = representations[r];
      acc[a][r] = CrossValidate(ds, pipeline, 10, 1).metrics.accuracy;
    }
  }
  const double elapsed = Seconds(start);
  bool all = elapsed < 120.0;
  std::string detail;
  for (std::size_t a = 0; a < 2; ++a) {
    const double full = acc[a][2], anp = acc[a][0], vnp = acc[a][1];
    const bool ok = full >= 0.85 && full - anp >= 0.05 && full > anp && anp > vnp;
    all = all && ok;
    detail += fmt::format("{} sentipair {:.3f} anp {:.3f} vnp {:.3f} gap {:.3f}; ",
                          AlgorithmName(algorithms[a]), full, anp, vnp, full - anp);
  }
  Report(all, "synthetic 1869-instance run", detail + fmt::format("{:.1f} s", elapsed));
}

std::string Slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int Shell(const std::string &args) {
  const std::string command = std::string(GSO_CLI_PATH) + " --data-dir " GSO_TEST_DATA_DIR " " +
                              args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void Determinism() {
  std::string pattern = (fs::temp_directory_path() / "gso-acceptance-XXXXXX").string();
  const fs::path dir = mkdtemp(pattern.data());
  const std::string data = (dir / "synth.gso.jsonl").string();
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  const int gen = Shell("dataset gen-synthetic --n 600 --ratios 0.603,0.078,0.321 --noise 0.1 "
                        "--vnp-share 0.4 --seed 11 --out " + data);
  const int first = Shell("eval suite --seed 5 --dataset " + data + " --out " + a);
  const int second = Shell("eval suite --seed 5 --dataset " + data + " --out " + b);
  const std::string left = Slurp(a), right = Slurp(b);
  Report(gen == 0 && first == 0 && second == 0 && !left.empty() && left == right,
         "suite determinism",
         fmt::format("exit codes {}/{}/{}, reports {} and {} bytes, {}", gen, first, second,
                     left.size(), right.size(), left == right ? "identical" : "different"));
  fs::remove_all(dir);
}

void DatasetFixtures() {
  const Dataset ratio = LoadDataset(testing::DataPath("paper_ratio.gso.jsonl"),
                                    testing::BundledForest(), LoadMode::kStrict);
  const std::string table = RenderStatsTable(ComputeStats(ratio));
  const auto &p = *ComputeStats(ratio).class_proportions;
  const bool shares = table.find("60.3%") != std::string::npos &&
                      table.find("7.8%") != std::string::npos &&
                      table.find("32.1%") != std::string::npos;
  Report(shares, "class proportions fixture",
         fmt::format("rendered {} / {} / {} (expected 60.3% / 7.8% / 32.1%)", FormatPercent(p[0]),
                     FormatPercent(p[1]), FormatPercent(p[2])));

  const Dataset timed = LoadDataset(testing::DataPath("constant_duration.gso.jsonl"),
                                    testing::BundledForest(), LoadMode::kStrict);
  const std::string durations = RenderStatsTable(ComputeStats(timed));
  Report(durations.find("mean 17.82 s") != std::string::npos, "duration fixture",
         fmt::format("mean {:.2f} s", ComputeStats(timed).duration_mean.value_or(-1.0)));
}

void ForestProperties() {
  const auto outcome = testing::RunForestProperties(1000, 31337);
  // Built forests whose roots lack a score must refuse propagation with
  // UnscoredRoot; the property runner records anything else as a failure.
  Report(outcome.failures.empty() && outcome.built + outcome.rejected == 1000 &&
             outcome.propagated > 0,
         "forest properties",
         fmt::format("{} built, {} rejected with named errors, {} propagated idempotently, "
                     "{} refused with UnscoredRoot, {} failures",
                     outcome.built, outcome.rejected, outcome.propagated,
                     outcome.built - outcome.propagated, outcome.failures.size()));
  for (const std::string &f : outcome.failures) std::cout << "  " << f << '\n';
}

}  // namespace

int main() {
  MetricsOracle();
  CfsOracle();
  GradientCheck();
  SmoCheck();
  SyntheticRun();
  Determinism();
  DatasetFixtures();
  ForestProperties();
  std::cout << failures << " failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
