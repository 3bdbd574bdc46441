#include "s2p/vlm.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "s2p/error.hpp"
#include "s2p/net.hpp"
#include "s2p/rng.hpp"
#include "s2p/util.hpp"

namespace s2p {

using nlohmann::json;

std::string Backend::complete(const Conversation& conv) {
  const auto caps = capabilities();
  if (conv.turns.size() > caps.max_turns)
    throw Error(ErrorCode::CapabilityExceeded,
                "turns " + std::to_string(conv.turns.size()) + " > " + std::to_string(caps.max_turns));
  std::size_t images = 0;
  for (const auto& t : conv.turns) images += t.images.size();
  if (images > caps.max_images)
    throw Error(ErrorCode::CapabilityExceeded,
                "images " + std::to_string(images) + " > " + std::to_string(caps.max_images));
  return do_complete(conv);
}

namespace {

void hash_turn(Sha256& h, const ChatTurn& t) {
  h.update(to_string(t.role));
  h.update("\n");
  h.update(std::to_string(t.text.size()));
  h.update(":");
  h.update(t.text);
  for (const auto& img : t.images) {
    h.update("\nimage:");
    h.update(img.fingerprint());
  }
  h.update("\n--\n");
}

void hash_query(Sha256& h, const Conversation& conv) {
  h.update(to_string(conv.setup));
  for (int id : conv.valid_ids) h.update("," + std::to_string(id));
  h.update("\n");
}

}  // namespace

std::string request_digest(const Conversation& conv) {
  Sha256 h;
  hash_query(h, conv);
  for (const auto& t : conv.turns) hash_turn(h, t);
  return h.hex_digest();
}

json conversation_to_wire(const Conversation& conv) {
  json turns = json::array();
  for (const auto& t : conv.turns) {
    json images = json::array();
    for (const auto& img : t.images) images.push_back(base64_encode(img.png()));
    turns.push_back({{"role", to_string(t.role)}, {"text", t.text}, {"images", images}});
  }
  return json{{"turns", turns}};
}

std::string RandomBackend::do_complete(const Conversation& conv) {
  if (conv.turns.empty()) throw Error(ErrorCode::InvalidArgument, "empty conversation");
  Sha256 h;
  h.update(std::to_string(seed_));
  hash_query(h, conv);
  hash_turn(h, conv.turns.back());
  const std::string digest = h.hex_digest();
  Rng rng(std::stoull(digest.substr(0, 16), nullptr, 16));

  PlanAnswer a;
  a.explanation = "Random choice.";
  if (conv.setup == Setup::Fpv) {
    a.commands = {static_cast<int>(rng.uniform_int(kMinCommand, kMaxCommand)),
                  static_cast<int>(rng.uniform_int(kMinCommand, kMaxCommand))};
    return serialize_answer(a);
  }
  std::vector<int> ids;
  for (int id : conv.valid_ids)
    if (id != 0) ids.push_back(id);
  if (ids.empty()) throw Error(ErrorCode::NoCandidates, "no label besides the robot");
  const auto len = static_cast<std::size_t>(
      rng.uniform_int(1, static_cast<std::int64_t>(std::min<std::size_t>(kMaxTpvSequence, ids.size()))));
  for (std::size_t i = 0; i < len; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(ids.size()) - 1));
    std::swap(ids[i], ids[j]);
    a.commands.push_back(ids[i]);
  }
  return serialize_answer(a);
}

std::string OracleBackend::do_complete(const Conversation& conv) {
  if (conv.setup == Setup::Fpv) {
    if (!ctx_.fpv_scene || !ctx_.fpv_oracle)
      throw Error(ErrorCode::InvalidArgument, "oracle backend has no FPV scene");
    return serialize_answer(ctx_.fpv_oracle->answer(*ctx_.fpv_scene));
  }
  if (!ctx_.tpv_scene || !ctx_.tpv_oracle)
    throw Error(ErrorCode::InvalidArgument, "oracle backend has no TPV scene");
  return serialize_answer(ctx_.tpv_oracle->plan(ctx_.tpv_scene->robot, conv.live_labels));
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  if (options_.url.empty()) throw Error(ErrorCode::InvalidArgument, "backend url");
  if (options_.attempts < 1) throw Error(ErrorCode::Range, "attempts");
}

HttpBackendOptions HttpBackend::options_from_env() {
  HttpBackendOptions o;
  const char* url = std::getenv("S2P_VLM_URL");
  if (url == nullptr || *url == '\0') throw Error(ErrorCode::InvalidArgument, "S2P_VLM_URL is not set");
  o.url = url;
  if (const char* key = std::getenv("S2P_VLM_KEY")) o.api_key = key;
  return o;
}

std::string HttpBackend::do_complete(const Conversation& conv) {
  const json wire = conversation_to_wire(conv);
  const std::string body = wire.dump();
  const std::string digest = request_digest(conv);
  const auto target = split_url(options_.url);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt < options_.attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.base_backoff * (1 << (attempt - 1)));
    httplib::Client cli(target.base);
    cli.set_connection_timeout(options_.timeout);
    cli.set_read_timeout(options_.timeout);
    cli.set_write_timeout(options_.timeout);
    auto res = cli.Post(target.path, headers, body, "application/json");
    Exchange ex{options_.episode_id, digest, wire, res ? res->status : 0, res ? res->body : std::string()};
    if (options_.log) options_.log(ex);
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      auto j = json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string())
        throw Error(ErrorCode::BackendUnavailable, "response body lacks a text field");
      return j["text"].get<std::string>();
    }
    last_status = res->status;
    if (res->status != 429 && res->status < 500) break;
  }
  if (last_status != 0) throw Error(ErrorCode::HttpStatus, std::to_string(last_status));
  throw Error(ErrorCode::Timeout, options_.url + ": " + last_error);
}

CassetteRecorder::CassetteRecorder(std::shared_ptr<Backend> inner, std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path)) {
  if (!inner_) throw Error(ErrorCode::InvalidArgument, "cassette needs a backend");
}

std::string CassetteRecorder::do_complete(const Conversation& conv) {
  std::string text = inner_->complete(conv);
  const json line{{"request", request_digest(conv)}, {"response", text}};
  // Recorders sharing a cassette file may live on different worker threads.
  static std::mutex file_mutex;
  std::lock_guard lock(file_mutex);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, path_.string());
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, path_.string());
  return text;
}

CassettePlayer::CassettePlayer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("request") || !j.contains("response"))
      throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(n));
    responses_.emplace(j["request"].get<std::string>(), j["response"].get<std::string>());
  }
}

std::string CassettePlayer::do_complete(const Conversation& conv) {
  const auto digest = request_digest(conv);
  const auto it = responses_.find(digest);
  if (it == responses_.end()) throw Error(ErrorCode::CassetteMiss, digest);
  return it->second;
}

}  // namespace s2p
