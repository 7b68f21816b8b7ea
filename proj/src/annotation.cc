#include "gso/annotation.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gso {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char *kLogName = "log.jsonl";
constexpr const char *kSnapshotName = "snapshot.json";

json RefsToJson(const std::vector<PairRef> &refs) {
  json pairs = json::array();
  for (const PairRef &ref : refs) {
    pairs.push_back({{"modifier", ref.modifier}, {"noun", ref.noun}});
  }
  return pairs;
}

std::vector<PairRef> RefsFromJson(const json &pairs) {
  std::vector<PairRef> refs;
  for (const json &p : pairs) {
    refs.push_back({p.at("modifier").get<std::string>(), p.at("noun").get<std::string>()});
  }
  return refs;
}

WorkerAnnotation AnnotationFromJson(const json &record) {
  WorkerAnnotation a;
  a.worker_id = record.at("worker_id").get<std::string>();
  a.gif_id = record.at("gif_id").get<std::string>();
  a.sequence = RefsFromJson(record.at("pairs"));
  auto label = ParseLabel(record.at("judgment").get<std::string>());
  if (!label) throw Error(ErrorCode::kParseError, "unknown judgment in log");
  a.judgment = *label;
  a.submitted_at = record.value("submitted_at", std::int64_t{0});
  return a;
}

void SyncFile(std::FILE *file) {
  std::fflush(file);
  ::fsync(::fileno(file));
}

void SyncDirectory(const fs::path &dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

}  // namespace

std::string_view TaskStatusName(TaskStatus status) {
  switch (status) {
    case TaskStatus::kOpen: return "open";
    case TaskStatus::kInProgress: return "in_progress";
    case TaskStatus::kDone: return "done";
  }
  return "open";
}

SequenceError::SequenceError(ValidationReport report)
    : Error(ErrorCode::kInvalidSequence,
            [&] {
              std::string message = "sequence rejected at position";
              message += report.issues.size() > 1 ? "s" : "";
              for (std::size_t i = 0; i < report.issues.size(); ++i) {
                message += (i ? ", " : " ") + std::to_string(report.issues[i].position);
              }
              return message;
            }()),
      report_(std::move(report)) {}

AnnotationService::AnnotationService(std::shared_ptr<const SynsetForest> forest,
                                     ServiceOptions options)
    : forest_(std::move(forest)), options_(std::move(options)) {
  if (options_.required_workers < 1) {
    throw Error(ErrorCode::kInvalidParameter, "required_workers must be >= 1");
  }
  if (!options_.clock) {
    options_.clock = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  if (!options_.state_dir.empty()) Recover();
}

AnnotationService::~AnnotationService() {
  if (log_) std::fclose(log_);
}

std::int64_t AnnotationService::Now() const { return options_.clock(); }

void AnnotationService::Recover() {
  const fs::path dir(options_.state_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());

  std::size_t covered = 0;
  const fs::path snapshot = dir / kSnapshotName;
  if (fs::exists(snapshot)) {
    std::ifstream in(snapshot);
    json state;
    try {
      in >> state;
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError, "snapshot: " + std::string(e.what()));
    }
    covered = state.at("log_records").get<std::size_t>();
    for (const json &w : state.at("workers")) workers_.insert(w.get<std::string>());
    for (const json &t : state.at("tasks")) {
      TaskState &task = tasks_[t.at("gif_id").get<std::string>()];
      task.gif_uri = t.at("gif_uri").get<std::string>();
      task.required_workers = t.at("required_workers").get<int>();
      for (const json &a : t.at("annotations")) {
        WorkerAnnotation annotation = AnnotationFromJson(a);
        task.annotations[annotation.worker_id] = std::move(annotation);
      }
    }
  }

  const fs::path log_path = dir / kLogName;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    std::string line;
    std::size_t good_bytes = 0;
    std::size_t index = 0;
    while (std::getline(in, line)) {
      const bool complete = !in.eof();
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception &) {
        // A torn tail from a crash mid-write was never acknowledged.
        if (!complete || in.peek() == EOF) break;
        throw Error(ErrorCode::kParseError, "corrupt log record", index + 1);
      }
      if (!complete) break;
      if (index >= covered) Apply(record);
      ++index;
      good_bytes += line.size() + 1;
    }
    in.close();
    if (good_bytes != fs::file_size(log_path)) fs::resize_file(log_path, good_bytes);
    log_records_ = index;
  }
  log_ = std::fopen(log_path.c_str(), "ab");
  if (!log_) throw Error(ErrorCode::kIoError, "cannot open " + log_path.string());
}

void AnnotationService::Apply(const json &record) {
  const std::string op = record.at("op").get<std::string>();
  if (op == "worker") {
    workers_.insert(record.at("worker_id").get<std::string>());
  } else if (op == "task") {
    TaskState &task = tasks_[record.at("gif_id").get<std::string>()];
    task.gif_uri = record.at("gif_uri").get<std::string>();
    task.required_workers = record.at("required_workers").get<int>();
  } else if (op == "annotation") {
    WorkerAnnotation annotation = AnnotationFromJson(record.at("annotation"));
    TaskState &task = tasks_[annotation.gif_id];
    task.annotations[annotation.worker_id] = std::move(annotation);
  } else {
    throw Error(ErrorCode::kParseError, "unknown log operation '" + op + "'");
  }
}

void AnnotationService::Append(const json &record) {
  if (!log_) return;
  const std::string line = record.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size()) {
    throw Error(ErrorCode::kIoError, "log write failed");
  }
  SyncFile(log_);
  ++log_records_;
}

// Called once the appended record is applied, so the snapshot covers it.
void AnnotationService::MaybeSnapshotLocked() {
  if (options_.snapshot_every > 0 && ++since_snapshot_ >= options_.snapshot_every) {
    WriteSnapshotLocked();
  }
}

json AnnotationService::SnapshotJsonLocked() const {
  json tasks = json::array();
  for (const auto &[gif_id, task] : tasks_) {
    json annotations = json::array();
    for (const auto &[worker, a] : task.annotations) annotations.push_back(AnnotationToJson(a));
    tasks.push_back({{"gif_id", gif_id},
                     {"gif_uri", task.gif_uri},
                     {"required_workers", task.required_workers},
                     {"annotations", annotations}});
  }
  return {{"log_records", log_records_}, {"workers", workers_}, {"tasks", tasks}};
}

void AnnotationService::WriteSnapshotLocked() {
  since_snapshot_ = 0;
  if (options_.state_dir.empty()) return;
  const fs::path dir(options_.state_dir);
  const fs::path tmp = dir / "snapshot.json.tmp";
  std::FILE *out = std::fopen(tmp.c_str(), "wb");
  if (!out) throw Error(ErrorCode::kIoError, "cannot write snapshot");
  const std::string body = SnapshotJsonLocked().dump();
  std::fwrite(body.data(), 1, body.size(), out);
  SyncFile(out);
  std::fclose(out);
  fs::rename(tmp, dir / kSnapshotName);
  SyncDirectory(dir);
}

void AnnotationService::Snapshot() {
  std::lock_guard lock(mutex_);
  WriteSnapshotLocked();
}

void AnnotationService::RegisterWorker(const std::string &worker_id) {
  if (worker_id.empty()) throw Error(ErrorCode::kInvalidParameter, "empty worker id");
  std::lock_guard lock(mutex_);
  if (workers_.count(worker_id)) return;
  Append({{"op", "worker"}, {"worker_id", worker_id}});
  workers_.insert(worker_id);
  MaybeSnapshotLocked();
}

void AnnotationService::AddTask(const std::string &gif_id, const std::string &gif_uri,
                                std::optional<int> required_workers) {
  if (gif_id.empty()) throw Error(ErrorCode::kInvalidParameter, "empty gif id");
  const int required = required_workers.value_or(options_.required_workers);
  if (required < 1) throw Error(ErrorCode::kInvalidParameter, "required_workers must be >= 1");
  std::lock_guard lock(mutex_);
  if (tasks_.count(gif_id)) return;
  Append({{"op", "task"},
          {"gif_id", gif_id},
          {"gif_uri", gif_uri},
          {"required_workers", required}});
  TaskState &task = tasks_[gif_id];
  task.gif_uri = gif_uri;
  task.required_workers = required;
  MaybeSnapshotLocked();
}

bool AnnotationService::HasWorker(const std::string &worker_id) const {
  std::lock_guard lock(mutex_);
  return workers_.count(worker_id) > 0;
}

TaskStatus AnnotationService::StatusLocked(const TaskState &task, std::int64_t now) const {
  if (static_cast<int>(task.annotations.size()) >= task.required_workers) {
    return TaskStatus::kDone;
  }
  for (const auto &[worker, expiry] : task.leases) {
    if (expiry > now && !task.annotations.count(worker)) return TaskStatus::kInProgress;
  }
  return TaskStatus::kOpen;
}

AnnotationTask AnnotationService::DescribeLocked(const std::string &gif_id,
                                                 const TaskState &task,
                                                 std::int64_t now) const {
  AnnotationTask out;
  out.gif_id = gif_id;
  out.gif_uri = task.gif_uri;
  out.status = StatusLocked(task, now);
  out.required_workers = task.required_workers;
  for (const auto &[worker, a] : task.annotations) out.completed_worker_ids.push_back(worker);
  return out;
}

const AnnotationService::TaskState &AnnotationService::FindTaskLocked(
    const std::string &gif_id) const {
  auto it = tasks_.find(gif_id);
  if (it == tasks_.end()) throw Error(ErrorCode::kUnknownTask, "no task for gif '" + gif_id + "'");
  return it->second;
}

std::optional<AnnotationTask> AnnotationService::NextTask(const std::string &worker_id) {
  std::lock_guard lock(mutex_);
  if (!workers_.count(worker_id)) {
    throw Error(ErrorCode::kUnknownWorker, "worker '" + worker_id + "' is not registered");
  }
  const std::int64_t now = Now();

  TaskState *chosen = nullptr;
  const std::string *chosen_id = nullptr;
  std::size_t chosen_done = 0;
  for (auto &[gif_id, task] : tasks_) {
    std::erase_if(task.leases, [&](const auto &lease) { return lease.second <= now; });
    if (StatusLocked(task, now) == TaskStatus::kDone) continue;
    if (task.annotations.count(worker_id)) continue;
    if (task.leases.count(worker_id)) {
      // Hand back the worker's own live lease before anything new.
      chosen = &task;
      chosen_id = &gif_id;
      break;
    }
    std::size_t reserved = task.annotations.size();
    for (const auto &[worker, expiry] : task.leases) reserved += !task.annotations.count(worker);
    if (static_cast<int>(reserved) >= task.required_workers) continue;
    if (!chosen || task.annotations.size() < chosen_done) {
      chosen = &task;
      chosen_id = &gif_id;
      chosen_done = task.annotations.size();
    }
  }
  if (!chosen) return std::nullopt;
  chosen->leases[worker_id] = now + options_.lease_ms;
  return DescribeLocked(*chosen_id, *chosen, now);
}

SubmitResult AnnotationService::Submit(const WorkerAnnotation &annotation) {
  std::lock_guard lock(mutex_);
  if (!workers_.count(annotation.worker_id)) {
    throw Error(ErrorCode::kUnknownWorker,
                "worker '" + annotation.worker_id + "' is not registered");
  }
  auto it = tasks_.find(annotation.gif_id);
  if (it == tasks_.end()) {
    throw Error(ErrorCode::kUnknownTask, "no task for gif '" + annotation.gif_id + "'");
  }
  TaskState &task = it->second;
  auto validated = ValidateSequence(annotation.sequence, *forest_);
  if (auto *report = std::get_if<ValidationReport>(&validated)) {
    throw SequenceError(std::move(*report));
  }

  const std::int64_t now = Now();
  SubmitResult result;
  auto previous = task.annotations.find(annotation.worker_id);
  if (previous != task.annotations.end()) {
    if (previous->second.sequence == annotation.sequence &&
        previous->second.judgment == annotation.judgment) {
      result.unchanged = true;
      result.status = StatusLocked(task, now);
      return result;
    }
    result.replaced = true;
  }

  WorkerAnnotation stored = annotation;
  stored.submitted_at = now;
  // Durable before it becomes visible or acknowledged.
  Append({{"op", "annotation"}, {"annotation", AnnotationToJson(stored)}});
  task.annotations[stored.worker_id] = std::move(stored);
  task.leases.erase(annotation.worker_id);
  MaybeSnapshotLocked();
  result.status = StatusLocked(task, now);
  return result;
}

ConsolidatedLabel AnnotationService::ConsolidateLocked(const std::string &gif_id,
                                                       const TaskState &task) const {
  if (task.annotations.empty()) {
    throw Error(ErrorCode::kNoAnnotations, "gif '" + gif_id + "' has no annotations");
  }
  ConsolidatedLabel out;
  out.gif_id = gif_id;
  for (const auto &[worker, a] : task.annotations) ++out.votes[static_cast<int>(a.judgment)];

  const std::size_t top = *std::max_element(out.votes.begin(), out.votes.end());
  int winners = 0;
  for (int label = 0; label < 4; ++label) {
    if (out.votes[label] == top) {
      ++winners;
      out.label = static_cast<SentimentLabel>(label);
    }
  }
  if (winners > 1) out.label = SentimentLabel::kCantJudge;

  // Median-length sequence among the voters for the result; on a tie nobody
  // voted for it, so all annotators are considered.
  std::vector<const WorkerAnnotation *> voters;
  for (const auto &[worker, a] : task.annotations) {
    if (a.judgment == out.label) voters.push_back(&a);
  }
  if (voters.empty()) {
    for (const auto &[worker, a] : task.annotations) voters.push_back(&a);
  }
  std::stable_sort(voters.begin(), voters.end(), [](const auto *a, const auto *b) {
    return a->sequence.size() < b->sequence.size();
  });
  out.sequence = voters[(voters.size() - 1) / 2]->sequence;
  return out;
}

ConsolidatedLabel AnnotationService::Consolidate(const std::string &gif_id) const {
  std::lock_guard lock(mutex_);
  return ConsolidateLocked(gif_id, FindTaskLocked(gif_id));
}

AnnotationTask AnnotationService::Task(const std::string &gif_id) const {
  std::lock_guard lock(mutex_);
  return DescribeLocked(gif_id, FindTaskLocked(gif_id), Now());
}

std::vector<AnnotationTask> AnnotationService::Tasks() const {
  std::lock_guard lock(mutex_);
  const std::int64_t now = Now();
  std::vector<AnnotationTask> out;
  for (const auto &[gif_id, task] : tasks_) out.push_back(DescribeLocked(gif_id, task, now));
  return out;
}

std::vector<WorkerAnnotation> AnnotationService::Annotations(const std::string &gif_id) const {
  std::lock_guard lock(mutex_);
  std::vector<WorkerAnnotation> out;
  for (const auto &[worker, a] : FindTaskLocked(gif_id).annotations) out.push_back(a);
  return out;
}

Dataset AnnotationService::ExportDataset() const {
  std::lock_guard lock(mutex_);
  const std::int64_t now = Now();
  Dataset dataset;
  dataset.forest = forest_;
  for (const auto &[gif_id, task] : tasks_) {
    if (StatusLocked(task, now) != TaskStatus::kDone) continue;
    const ConsolidatedLabel label = ConsolidateLocked(gif_id, task);
    AnnotatedInstance instance;
    instance.gif_id = gif_id;
    instance.label = label.label;
    instance.sequence = std::get<SentiPairSequence>(ValidateSequence(label.sequence, *forest_));
    dataset.instances.push_back(std::move(instance));
  }
  return dataset;
}

std::string AnnotationService::ExportJsonl() const {
  std::ostringstream out;
  WriteDataset(out, ExportDataset());
  return out.str();
}

ServiceStats AnnotationService::Stats() const {
  std::lock_guard lock(mutex_);
  const std::int64_t now = Now();
  ServiceStats stats;
  stats.tasks = tasks_.size();
  stats.workers = workers_.size();
  for (const auto &[gif_id, task] : tasks_) {
    stats.annotations += task.annotations.size();
    switch (StatusLocked(task, now)) {
      case TaskStatus::kOpen: ++stats.open; break;
      case TaskStatus::kInProgress: ++stats.in_progress; break;
      case TaskStatus::kDone: ++stats.done; break;
    }
  }
  return stats;
}

json TaskToJson(const AnnotationTask &task) {
  return {{"gif_id", task.gif_id},
          {"gif_uri", task.gif_uri},
          {"status", TaskStatusName(task.status)},
          {"required_workers", task.required_workers},
          {"completed_worker_ids", task.completed_worker_ids}};
}

json AnnotationToJson(const WorkerAnnotation &annotation) {
  return {{"worker_id", annotation.worker_id},
          {"gif_id", annotation.gif_id},
          {"pairs", RefsToJson(annotation.sequence)},
          {"judgment", LabelName(annotation.judgment)},
          {"submitted_at", annotation.submitted_at}};
}

json ConsolidatedToJson(const ConsolidatedLabel &label) {
  json votes = json::object();
  for (SentimentLabel l : kAllLabels) votes[std::string(LabelName(l))] = label.votes[static_cast<int>(l)];
  return {{"gif_id", label.gif_id},
          {"label", LabelName(label.label)},
          {"votes", votes},
          {"pairs", RefsToJson(label.sequence)}};
}

json ServiceStatsToJson(const ServiceStats &stats) {
  return {{"tasks", stats.tasks},
          {"open", stats.open},
          {"in_progress", stats.in_progress},
          {"done", stats.done},
          {"workers", stats.workers},
          {"annotations", stats.annotations}};
}

}  // namespace gso
