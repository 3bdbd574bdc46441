#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "s2p/demo_session.hpp"
#include "s2p/embedder.hpp"
#include "s2p/episode.hpp"
#include "s2p/error.hpp"
#include "s2p/memory_store.hpp"

namespace s2p {

/// Latest telemetry of a running episode, written by the runner and polled
/// by the API.
class RunMonitor {
 public:
  void begin(std::string episode_id);
  void update(const StepTelemetry& t);
  void end(const EpisodeResult& result);
  bool active() const;
  bool attached() const;
  void request_abort() { abort_ = true; }
  const std::atomic<bool>* abort_flag() const noexcept { return &abort_; }
  /// {active, episode_id, step, plan, explanation, labels, frame_png,
  /// trace_tail, result?}
  nlohmann::json status() const;

 private:
  mutable std::mutex mutex_;
  bool attached_ = false;
  bool active_ = false;
  std::string episode_id_;
  std::optional<StepTelemetry> last_;
  std::optional<nlohmann::json> result_;
  std::atomic<bool> abort_{false};
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::string authorization;  // raw Authorization header
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ApiOptions {
  std::string token;  // S2P_API_TOKEN; empty disables authentication
  std::filesystem::path memory_root;
  std::shared_ptr<const Embedder> embedder;
};

/// Transport-independent request handling for the operator API. Mutations
/// are serialized; one demo session at a time.
class ApiService {
 public:
  explicit ApiService(ApiOptions options);

  ApiResponse handle(const ApiRequest& request);

  void start_demo(DemoSession session);
  bool has_session() const;
  RunMonitor& monitor() noexcept { return monitor_; }

 private:
  ApiResponse get_state();
  ApiResponse post_step(const std::string& body);
  ApiResponse post_finish(const std::string& body);
  ApiResponse get_memory();

  ApiOptions options_;
  mutable std::mutex mutex_;
  std::optional<DemoSession> session_;
  RunMonitor monitor_;
};

/// Status code for an error raised while handling a request.
int http_status_for(ErrorCode code) noexcept;

/// Port from S2P_API_PORT, default 8787.
int api_port_from_env();

/// HTTP transport for ApiService (JSON over HTTP/1.1).
class ApiServer {
 public:
  explicit ApiServer(ApiService& service);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace s2p
