#include "s2p/embedder.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "s2p/error.hpp"
#include "s2p/image_io.hpp"
#include "s2p/net.hpp"

namespace s2p {

void normalize(Embedding& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (!(sq > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero embedding");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

std::vector<float> to_f32(const Embedding& v) { return {v.begin(), v.end()}; }

Embedding HistogramEmbedder::embed(const Frame& frame) const {
  Embedding v(dim(), 0.0);
  const auto px = frame.data();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    v[px[i] >> 3] += 1.0;
    v[kBins + (px[i + 1] >> 3)] += 1.0;
    v[2 * kBins + (px[i + 2] >> 3)] += 1.0;
  }
  normalize(v);
  return v;
}

RemoteEmbedder::RemoteEmbedder(std::string url, std::size_t dim, RetryPolicy policy, std::string id)
    : url_(std::move(url)), dim_(dim), policy_(policy), id_(std::move(id)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "embedder dim");
}

Embedding RemoteEmbedder::embed(const Frame& frame) const {
  const auto png = encode_png(frame);
  const std::string body(png.begin(), png.end());
  const auto target = split_url(url_);
  std::string last_error;
  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(policy_.base_backoff * (1 << (attempt - 1)));
    httplib::Client cli(target.base);
    cli.set_connection_timeout(policy_.timeout);
    cli.set_read_timeout(policy_.timeout);
    auto res = cli.Post(target.path, body, "image/png");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    try {
      auto v = nlohmann::json::parse(res->body).get<Embedding>();
      if (v.size() != dim_)
        throw Error(ErrorCode::DimMismatch,
                    "remote returned " + std::to_string(v.size()) + ", expected " + std::to_string(dim_));
      normalize(v);
      return v;
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("bad response: ") + e.what();
    }
  }
  throw Error(ErrorCode::BackendUnavailable, url_ + ": " + last_error);
}

std::unique_ptr<Embedder> make_embedder(std::string_view id) {
  if (id == HistogramEmbedder::kId) return std::make_unique<HistogramEmbedder>();
  if (id == "remote-vit") {
    const char* url = std::getenv("S2P_EMBED_URL");
    if (!url || !*url) throw Error(ErrorCode::BackendUnavailable, "S2P_EMBED_URL not set");
    std::size_t dim = 1024;
    if (const char* d = std::getenv("S2P_EMBED_DIM")) dim = std::strtoull(d, nullptr, 10);
    return std::make_unique<RemoteEmbedder>(url, dim);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown embedder '" + std::string(id) + "'");
}

}  // namespace s2p
