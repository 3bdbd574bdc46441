#include "s2p/api.hpp"

#include <cstdlib>

#include <httplib.h>

#include "s2p/error.hpp"
#include "s2p/image_io.hpp"
#include "s2p/util.hpp"

namespace s2p {

using nlohmann::json;

void RunMonitor::begin(std::string episode_id) {
  std::lock_guard lock(mutex_);
  attached_ = true;
  active_ = true;
  episode_id_ = std::move(episode_id);
  last_.reset();
  result_.reset();
  abort_ = false;
}

void RunMonitor::update(const StepTelemetry& t) {
  std::lock_guard lock(mutex_);
  last_ = t;
}

void RunMonitor::end(const EpisodeResult& result) {
  std::lock_guard lock(mutex_);
  active_ = false;
  result_ = json(result);
}

bool RunMonitor::active() const {
  std::lock_guard lock(mutex_);
  return active_;
}

bool RunMonitor::attached() const {
  std::lock_guard lock(mutex_);
  return attached_;
}

json RunMonitor::status() const {
  std::lock_guard lock(mutex_);
  json j{{"active", active_}, {"episode_id", episode_id_}};
  if (last_) {
    json labels = json::array();
    for (const auto& l : last_->labels) labels.push_back(l);
    json tail = json::array();
    for (const auto& s : last_->trace_tail)
      tail.push_back({{"t", s.t}, {"x", s.pose.x}, {"y", s.pose.y}, {"theta", s.pose.theta}});
    j["step"] = last_->step;
    j["setup"] = to_string(last_->setup);
    j["plan"] = last_->plan;
    j["explanation"] = last_->explanation;
    j["labels"] = labels;
    j["frame_png"] = last_->frame.empty() ? std::string() : base64_encode(encode_png(last_->frame));
    j["trace_tail"] = tail;
  } else {
    j["step"] = nullptr;
  }
  if (result_) j["result"] = *result_;
  return j;
}

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownLabel:
    case ErrorCode::EmptyEpisode:
      return 422;
    case ErrorCode::NoActiveSession:
      return 409;
    case ErrorCode::Locked:
      return 423;
    case ErrorCode::InvalidArgument:
    case ErrorCode::SchemaViolation:
    case ErrorCode::Range:
      return 400;
    default:
      return 500;
  }
}

int api_port_from_env() {
  const char* p = std::getenv("S2P_API_PORT");
  if (p == nullptr || *p == '\0') return 8787;
  char* end = nullptr;
  const long v = std::strtol(p, &end, 10);
  if (*end != '\0' || v <= 0 || v > 65535) throw Error(ErrorCode::Range, "S2P_API_PORT");
  return static_cast<int>(v);
}

namespace {

ApiResponse error_response(int status, std::string_view code, const std::string& detail) {
  return {status, json{{"error", code}, {"detail", detail}}};
}

ApiResponse error_response(const Error& e) {
  return error_response(http_status_for(e.code()), to_string(e.code()), e.detail());
}

}  // namespace

ApiService::ApiService(ApiOptions options) : options_(std::move(options)) {}

void ApiService::start_demo(DemoSession session) {
  std::lock_guard lock(mutex_);
  session_ = std::move(session);
}

bool ApiService::has_session() const {
  std::lock_guard lock(mutex_);
  return session_.has_value();
}

ApiResponse ApiService::handle(const ApiRequest& req) {
  if (!options_.token.empty() && req.authorization != "Bearer " + options_.token)
    return error_response(401, "UNAUTHORIZED", "missing or wrong bearer token");
  try {
    struct Route {
      const char* method;
      const char* path;
    };
    const std::string& m = req.method;
    const std::string& p = req.path;
    if (p == "/state") return m == "GET" ? get_state() : error_response(405, "METHOD_NOT_ALLOWED", p);
    if (p == "/demo/step") return m == "POST" ? post_step(req.body) : error_response(405, "METHOD_NOT_ALLOWED", p);
    if (p == "/demo/finish")
      return m == "POST" ? post_finish(req.body) : error_response(405, "METHOD_NOT_ALLOWED", p);
    if (p == "/memory") return m == "GET" ? get_memory() : error_response(405, "METHOD_NOT_ALLOWED", p);
    if (p == "/run/status") {
      if (m != "GET") return error_response(405, "METHOD_NOT_ALLOWED", p);
      if (!monitor_.attached()) return error_response(409, "NO_ACTIVE_SESSION", "no run");
      return {200, monitor_.status()};
    }
    if (p == "/run/abort") {
      if (m != "POST") return error_response(405, "METHOD_NOT_ALLOWED", p);
      if (!monitor_.active()) return error_response(409, "NO_ACTIVE_SESSION", "no active run");
      monitor_.request_abort();
      return {200, json{{"aborting", true}}};
    }
    return error_response(404, "NOT_FOUND", p);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "INTERNAL", e.what());
  }
}

ApiResponse ApiService::get_state() {
  std::lock_guard lock(mutex_);
  if (!session_) return error_response(409, "NO_ACTIVE_SESSION", "no demo session");
  return {200, session_->state()};
}

ApiResponse ApiService::post_step(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return error_response(400, "INVALID_ARGUMENT", "body must be a JSON object");
  if (!j.contains("action") || !j["action"].is_number_integer())
    return error_response(400, "INVALID_ARGUMENT", "action must be an integer");
  std::lock_guard lock(mutex_);
  if (!session_) return error_response(409, "NO_ACTIVE_SESSION", "no demo session");
  const auto action64 = j["action"].get<std::int64_t>();
  const auto ids = session_->annotated().valid_ids();
  if (action64 < INT32_MIN || action64 > INT32_MAX ||
      std::find(ids.begin(), ids.end(), static_cast<int>(action64)) == ids.end())
    return error_response(422, "UNKNOWN_LABEL", std::to_string(action64));
  if (!j.contains("explanation") || !j["explanation"].is_string())
    return error_response(400, "INVALID_ARGUMENT", "explanation must be a string");
  if (session_->finished()) return error_response(409, "NO_ACTIVE_SESSION", "episode ended; finish it");
  session_->step(static_cast<int>(action64), j["explanation"].get<std::string>());
  return {200, session_->state()};
}

ApiResponse ApiService::post_finish(const std::string& body) {
  const json j = json::parse(body.empty() ? std::string("{}") : body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return error_response(400, "INVALID_ARGUMENT", "body must be a JSON object");
  if (j.contains("target_object") && !j["target_object"].is_string())
    return error_response(400, "INVALID_ARGUMENT", "target_object must be a string");
  std::lock_guard lock(mutex_);
  if (!session_) return error_response(409, "NO_ACTIVE_SESSION", "no demo session");
  const std::string target = j.value("target_object", std::string());
  if (session_->setup() == Setup::Fpv && target.empty())
    return error_response(400, "INVALID_ARGUMENT", "target_object is required");
  Scenario scenario = Scenario::A;
  if (j.contains("scenario")) {
    if (!j["scenario"].is_string()) return error_response(400, "INVALID_ARGUMENT", "scenario must be a string");
    scenario = scenario_from_string(j["scenario"].get<std::string>());
  }
  if (!options_.embedder) return error_response(500, "INTERNAL", "no embedder configured");
  auto steps = session_->finish(target, *options_.embedder, scenario);
  MemoryStore store = MemoryStore::open(options_.memory_root, *options_.embedder);
  const auto delta = store.append_episode(options_.embedder->id(), std::move(steps));
  session_.reset();
  return {200, json{{"episode_id", delta.episode_id},
                    {"samples", delta.added},
                    {"count", delta.total_episodes},
                    {"total_samples", delta.total_samples}}};
}

ApiResponse ApiService::get_memory() {
  if (options_.memory_root.empty() || !std::filesystem::exists(options_.memory_root / "manifest.json"))
    return {200, json{{"count", 0}, {"samples", 0}, {"episodes", json::array()}}};
  const MemoryStore store = MemoryStore::load(options_.memory_root);
  json episodes = json::array();
  for (const auto& e : store.episodes()) episodes.push_back({{"id", e.episode_id}, {"samples", e.count}});
  return {200, json{{"count", store.episodes().size()},
                    {"samples", store.size()},
                    {"embedder", store.embedder_id()},
                    {"dim", store.dim()},
                    {"episodes", episodes}}};
}

struct ApiServer::Impl {
  ApiService* service;
  httplib::Server server;
  std::thread thread;
};

ApiServer::ApiServer(ApiService& service) : impl_(std::make_unique<Impl>()) {
  impl_->service = &service;
  auto handler = [svc = &service](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r{req.method, req.path, req.body, req.get_header_value("Authorization")};
    const ApiResponse out = svc->handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  for (const char* path : {"/state", "/memory", "/run/status"}) impl_->server.Get(path, handler);
  for (const char* path : {"/demo/step", "/demo/finish", "/run/abort"}) impl_->server.Post(path, handler);
  impl_->server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(json{{"error", res.status == 404 ? "NOT_FOUND" : "HTTP_ERROR"}, {"detail", req.path}}.dump(),
                    "application/json");
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port))
    throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace s2p
