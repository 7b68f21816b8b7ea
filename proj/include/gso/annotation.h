#ifndef GSO_ANNOTATION_H_
#define GSO_ANNOTATION_H_

#include <array>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gso/dataset.h"
#include "gso/ontology.h"
#include "json.hpp"

namespace gso {

enum class TaskStatus { kOpen, kInProgress, kDone };

std::string_view TaskStatusName(TaskStatus status);

struct AnnotationTask {
  std::string gif_id;
  std::string gif_uri;
  TaskStatus status = TaskStatus::kOpen;
  int required_workers = 7;
  std::vector<std::string> completed_worker_ids;  // sorted
};

struct WorkerAnnotation {
  std::string worker_id;
  std::string gif_id;
  std::vector<PairRef> sequence;
  SentimentLabel judgment = SentimentLabel::kNeutral;
  std::int64_t submitted_at = 0;  // milliseconds since the epoch
};

struct ConsolidatedLabel {
  std::string gif_id;
  SentimentLabel label = SentimentLabel::kCantJudge;
  // Vote counts in positive, negative, neutral, cant_judge order.
  std::array<std::size_t, 4> votes{};
  std::vector<PairRef> sequence;
};

// Submission rejected by sequence validation; carries every bad position.
class SequenceError : public Error {
 public:
  explicit SequenceError(ValidationReport report);
  const ValidationReport &report() const { return report_; }

 private:
  ValidationReport report_;
};

struct SubmitResult {
  TaskStatus status = TaskStatus::kOpen;
  bool replaced = false;   // an earlier annotation by this worker was replaced
  bool unchanged = false;  // identical to the stored annotation; nothing written
};

struct ServiceStats {
  std::size_t tasks = 0;
  std::size_t open = 0;
  std::size_t in_progress = 0;
  std::size_t done = 0;
  std::size_t workers = 0;
  std::size_t annotations = 0;
};

struct ServiceOptions {
  // Directory for the submission log and snapshot. Empty keeps state in
  // memory only.
  std::string state_dir;
  int required_workers = 7;
  std::int64_t lease_ms = 10 * 60 * 1000;
  // Snapshot after this many logged records; 0 disables periodic snapshots.
  std::size_t snapshot_every = 200;
  // Milliseconds since the epoch. Defaults to the system clock.
  std::function<std::int64_t()> clock;
};

// Task queue and annotation store. All methods are safe to call concurrently.
// Every mutation is appended to the log and flushed to disk before the call
// returns.
class AnnotationService {
 public:
  AnnotationService(std::shared_ptr<const SynsetForest> forest,
                    ServiceOptions options);
  ~AnnotationService();
  AnnotationService(const AnnotationService &) = delete;
  AnnotationService &operator=(const AnnotationService &) = delete;

  const SynsetForest &forest() const { return *forest_; }
  const ServiceOptions &options() const { return options_; }

  // Both are no-ops for ids already present.
  void RegisterWorker(const std::string &worker_id);
  void AddTask(const std::string &gif_id, const std::string &gif_uri,
               std::optional<int> required_workers = std::nullopt);

  bool HasWorker(const std::string &worker_id) const;

  // Leases the least-completed open task this worker has not annotated. A
  // worker's live lease is returned again (and renewed). Throws UnknownWorker.
  std::optional<AnnotationTask> NextTask(const std::string &worker_id);

  // Throws UnknownWorker, UnknownTask or SequenceError. The stored
  // submitted_at is taken from the service clock.
  SubmitResult Submit(const WorkerAnnotation &annotation);

  // Throws UnknownTask or NoAnnotations.
  ConsolidatedLabel Consolidate(const std::string &gif_id) const;

  // Throws UnknownTask.
  AnnotationTask Task(const std::string &gif_id) const;
  std::vector<AnnotationTask> Tasks() const;
  std::vector<WorkerAnnotation> Annotations(const std::string &gif_id) const;

  // Dataset records for the done tasks, ordered by gif_id.
  Dataset ExportDataset() const;
  std::string ExportJsonl() const;

  ServiceStats Stats() const;

  // Writes a snapshot of the current state.
  void Snapshot();

 private:
  struct TaskState {
    std::string gif_uri;
    int required_workers = 7;
    std::map<std::string, WorkerAnnotation> annotations;  // by worker
    std::map<std::string, std::int64_t> leases;           // worker -> expiry
  };

  std::int64_t Now() const;
  TaskStatus StatusLocked(const TaskState &task, std::int64_t now) const;
  AnnotationTask DescribeLocked(const std::string &gif_id, const TaskState &task,
                                std::int64_t now) const;
  ConsolidatedLabel ConsolidateLocked(const std::string &gif_id,
                                      const TaskState &task) const;
  const TaskState &FindTaskLocked(const std::string &gif_id) const;

  void Apply(const nlohmann::json &record);
  void Append(const nlohmann::json &record);
  void Recover();
  nlohmann::json SnapshotJsonLocked() const;
  void WriteSnapshotLocked();
  void MaybeSnapshotLocked();

  std::shared_ptr<const SynsetForest> forest_;
  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::set<std::string> workers_;
  std::map<std::string, TaskState> tasks_;
  std::FILE *log_ = nullptr;
  std::size_t log_records_ = 0;
  std::size_t since_snapshot_ = 0;
};

nlohmann::json TaskToJson(const AnnotationTask &task);
nlohmann::json AnnotationToJson(const WorkerAnnotation &annotation);
nlohmann::json ConsolidatedToJson(const ConsolidatedLabel &label);
nlohmann::json ServiceStatsToJson(const ServiceStats &stats);

}  // namespace gso

#endif  // GSO_ANNOTATION_H_
