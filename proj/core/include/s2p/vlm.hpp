#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "s2p/episodic.hpp"
#include "s2p/fpv_world.hpp"
#include "s2p/oracle.hpp"
#include "s2p/prompt.hpp"
#include "s2p/tpv_world.hpp"

namespace s2p {

struct Capabilities {
  std::size_t max_images = 64;
  std::size_t max_turns = 64;
};

/// Chat-vision model boundary. complete() checks the conversation against
/// the capabilities and never modifies it.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual Capabilities capabilities() const { return {}; }
  std::string complete(const Conversation& conv);

 protected:
  virtual std::string do_complete(const Conversation& conv) = 0;
};

/// SHA-256 over roles, texts and image fingerprints of every turn.
std::string request_digest(const Conversation& conv);

/// Wire body {turns:[{role, text, images:[base64 PNG]}]}.
nlohmann::json conversation_to_wire(const Conversation& conv);

/// Uniformly random valid answers. The draw is seeded by the backend seed
/// and a digest of the live query, so identical conversations give identical
/// answers. TPV: 1 to 4 label ids other than 0; FPV: two commands 0..9.
class RandomBackend final : public Backend {
 public:
  explicit RandomBackend(std::uint64_t seed) : seed_(seed) {}
  std::string id() const override { return "random"; }

 protected:
  std::string do_complete(const Conversation& conv) override;

 private:
  std::uint64_t seed_;
};

/// Live simulator state an oracle answers from; the episode runner keeps the
/// pointees current.
struct OracleContext {
  const FpvScene* fpv_scene = nullptr;
  const FpvOracle* fpv_oracle = nullptr;
  const TpvScene* tpv_scene = nullptr;
  const TpvOracle* tpv_oracle = nullptr;
};

class OracleBackend final : public Backend {
 public:
  explicit OracleBackend(OracleContext ctx) : ctx_(ctx) {}
  std::string id() const override { return "oracle"; }

 protected:
  std::string do_complete(const Conversation& conv) override;

 private:
  OracleContext ctx_;
};

/// One exchange with a live backend, for the request log.
struct Exchange {
  std::string episode_id;
  std::string request_digest;
  nlohmann::json request;
  int status = 0;
  std::string response;
};

struct HttpBackendOptions {
  std::string url;        // S2P_VLM_URL
  std::string api_key;    // S2P_VLM_KEY, sent as a bearer token when set
  int attempts = 3;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds base_backoff{500};
  Capabilities capabilities;
  std::function<void(const Exchange&)> log;
  std::string episode_id;
};

/// POSTs the wire body and expects {"text": ...}. Non-2xx replies are
/// retried, then reported as HttpStatus(code); connection failures end in
/// Timeout.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  /// Options from S2P_VLM_URL / S2P_VLM_KEY; throws InvalidArgument when the
  /// URL is unset.
  static HttpBackendOptions options_from_env();
  std::string id() const override { return "http"; }
  Capabilities capabilities() const override { return options_.capabilities; }
  void set_episode(std::string episode_id) { options_.episode_id = std::move(episode_id); }

 protected:
  std::string do_complete(const Conversation& conv) override;

 private:
  HttpBackendOptions options_;
};

/// Forwards to `inner` and appends {"request": digest, "response": text} to
/// a JSON-lines cassette.
class CassetteRecorder final : public Backend {
 public:
  CassetteRecorder(std::shared_ptr<Backend> inner, std::filesystem::path path);
  std::string id() const override { return inner_->id(); }
  Capabilities capabilities() const override { return inner_->capabilities(); }

 protected:
  std::string do_complete(const Conversation& conv) override;

 private:
  std::shared_ptr<Backend> inner_;
  std::filesystem::path path_;
};

/// Answers from a cassette; an unknown request raises CassetteMiss.
class CassettePlayer final : public Backend {
 public:
  explicit CassettePlayer(const std::filesystem::path& path);
  std::string id() const override { return "cassette"; }
  std::size_t size() const noexcept { return responses_.size(); }

 protected:
  std::string do_complete(const Conversation& conv) override;

 private:
  std::map<std::string, std::string> responses_;
};

}  // namespace s2p
