#include "gso/annotation_http.h"

#include <httplib.h>

namespace gso {

using json = nlohmann::json;

namespace {

constexpr const char *kJson = "application/json";

void SendJson(httplib::Response &res, const json &body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void SendError(httplib::Response &res, ErrorCode code, const std::string &message,
               const json &positions = json::array()) {
  json error = {{"code", ErrorCodeName(code)}, {"message", message}, {"positions", positions}};
  SendJson(res, {{"error", error}}, HttpStatusFor(code));
}

// Runs a handler, mapping failures onto the error body.
template <typename Handler>
httplib::Server::Handler Guard(Handler handler) {
  return [handler](const httplib::Request &req, httplib::Response &res) {
    try {
      handler(req, res);
    } catch (const SequenceError &e) {
      json positions = json::array();
      json issues = json::array();
      for (const ValidationIssue &issue : e.report().issues) {
        positions.push_back(issue.position);
        issues.push_back({{"position", issue.position},
                          {"code", ErrorCodeName(issue.code)},
                          {"message", issue.message}});
      }
      json error = {{"code", ErrorCodeName(e.code())},
                    {"message", e.what()},
                    {"positions", positions},
                    {"issues", issues}};
      SendJson(res, {{"error", error}}, HttpStatusFor(e.code()));
    } catch (const Error &e) {
      SendError(res, e.code(), e.what());
    } catch (const json::exception &e) {
      SendError(res, ErrorCode::kParseError, e.what());
    }
  };
}

json ParseBody(const httplib::Request &req) {
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::kParseError, "body must be an object");
    return body;
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParseError, std::string("malformed body: ") + e.what());
  }
}

std::string WorkerFrom(const httplib::Request &req, const json *body) {
  if (body && body->contains("worker_id")) return body->at("worker_id").get<std::string>();
  if (req.has_param("worker")) return req.get_param_value("worker");
  if (req.has_header("X-Worker-Id")) return req.get_header_value("X-Worker-Id");
  throw Error(ErrorCode::kUnknownWorker, "no worker id given");
}

json SynsetJson(const SynsetForest &forest, std::size_t index) {
  const Synset &s = forest.at(index);
  json children = json::array();
  for (std::size_t c : forest.children(index)) children.push_back(forest.at(c).id);
  return {{"id", s.id},
          {"lemma", s.lemma},
          {"sense", s.sense},
          {"pos", PosName(s.pos)},
          {"gloss", s.gloss},
          {"score", s.score ? json(*s.score) : json(nullptr)},
          {"parent", s.parent ? json(*s.parent) : json(nullptr)},
          {"depth", forest.depth(index)},
          {"children", children}};
}

json ForestJson(const SynsetForest &forest) {
  json trees = json::array();
  for (Pos pos : kAllPos) {
    json nodes = json::array();
    std::vector<std::size_t> stack = {forest.root(pos)};
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      nodes.push_back(SynsetJson(forest, node));
      const auto &children = forest.children(node);
      for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
    }
    trees.push_back({{"pos", PosName(pos)},
                     {"root", forest.at(forest.root(pos)).id},
                     {"nodes", nodes}});
  }
  return {{"trees", trees}};
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownWorker:
    case ErrorCode::kUnknownTask:
    case ErrorCode::kNoAnnotations:
      return 404;
    case ErrorCode::kInvalidSequence:
      return 422;
    case ErrorCode::kIoError:
      return 500;
    default:
      return 400;
  }
}

void RegisterRoutes(httplib::Server &server, AnnotationService &service) {
  // The forest never changes while serving.
  const std::string forest_body = ForestJson(service.forest()).dump();

  server.Get("/forest", [forest_body](const httplib::Request &, httplib::Response &res) {
    res.set_content(forest_body, kJson);
  });

  server.Get("/synsets", Guard([&service](const httplib::Request &req, httplib::Response &res) {
    std::optional<Pos> pos;
    if (req.has_param("pos") && !req.get_param_value("pos").empty()) {
      pos = ParsePos(req.get_param_value("pos"));
      if (!pos) {
        throw Error(ErrorCode::kInvalidPos,
                    "unknown part of speech '" + req.get_param_value("pos") + "'");
      }
    }
    const SynsetForest &forest = service.forest();
    json results = json::array();
    for (const Synset &s : SearchSynsets(forest, req.get_param_value("q"), pos)) {
      results.push_back(SynsetJson(forest, forest.IndexOf(s.id)));
    }
    SendJson(res, {{"results", results}});
  }));

  server.Get("/tasks/next", Guard([&service](const httplib::Request &req, httplib::Response &res) {
    const auto task = service.NextTask(WorkerFrom(req, nullptr));
    SendJson(res, {{"task", task ? TaskToJson(*task) : json(nullptr)}});
  }));

  server.Post("/annotations", Guard([&service](const httplib::Request &req, httplib::Response &res) {
    const json body = ParseBody(req);
    WorkerAnnotation annotation;
    annotation.worker_id = WorkerFrom(req, &body);
    annotation.gif_id = body.at("gif_id").get<std::string>();
    for (const json &p : body.at("pairs")) {
      annotation.sequence.push_back(
          {p.at("modifier").get<std::string>(), p.at("noun").get<std::string>()});
    }
    const auto judgment = ParseLabel(body.at("judgment").get<std::string>());
    if (!judgment) throw Error(ErrorCode::kParseError, "unknown judgment");
    annotation.judgment = *judgment;
    const SubmitResult result = service.Submit(annotation);
    SendJson(res, {{"ack", true},
                   {"gif_id", annotation.gif_id},
                   {"worker_id", annotation.worker_id},
                   {"status", TaskStatusName(result.status)},
                   {"replaced", result.replaced},
                   {"unchanged", result.unchanged}});
  }));

  server.Get(R"(/gifs/([^/]+)/consolidated)",
             Guard([&service](const httplib::Request &req, httplib::Response &res) {
               SendJson(res, ConsolidatedToJson(service.Consolidate(req.matches[1])));
             }));

  server.Get("/export", Guard([&service](const httplib::Request &, httplib::Response &res) {
    res.set_content(service.ExportJsonl(), "application/x-ndjson");
  }));

  server.Get("/stats", Guard([&service](const httplib::Request &, httplib::Response &res) {
    SendJson(res, ServiceStatsToJson(service.Stats()));
  }));

  server.Post("/workers", Guard([&service](const httplib::Request &req, httplib::Response &res) {
    const json body = ParseBody(req);
    const std::string worker = body.at("worker_id").get<std::string>();
    service.RegisterWorker(worker);
    SendJson(res, {{"worker_id", worker}}, 201);
  }));

  server.Post("/tasks", Guard([&service](const httplib::Request &req, httplib::Response &res) {
    const json body = ParseBody(req);
    std::optional<int> required;
    if (body.contains("required_workers")) required = body.at("required_workers").get<int>();
    const std::string gif_id = body.at("gif_id").get<std::string>();
    service.AddTask(gif_id, body.value("gif_uri", std::string()), required);
    SendJson(res, TaskToJson(service.Task(gif_id)), 201);
  }));
}

}  // namespace gso
