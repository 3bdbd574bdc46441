#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "s2p/types.hpp"

namespace s2p {

using Embedding = std::vector<double>;

/// Maps a frame to a unit-norm feature vector. Implementations must be
/// deterministic: the same frame always yields the same vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Embedding embed(const Frame& frame) const = 0;
};

/// Offline stand-in for a vision transformer: 32-bin histogram per colour
/// channel, concatenated and L2-normalized (d = 96).
class HistogramEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kBins = 32;
  static constexpr std::string_view kId = "hist96";

  std::string id() const override { return std::string(kId); }
  std::size_t dim() const override { return 3 * kBins; }
  Embedding embed(const Frame& frame) const override;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds timeout{10000};
};

/// POSTs the frame as image/png to `url`; the response body is a JSON array
/// of reals. Failures are retried with exponential backoff, then reported as
/// BackendUnavailable.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string url, std::size_t dim, RetryPolicy policy = {},
                 std::string id = "remote-vit");

  std::string id() const override { return id_; }
  std::size_t dim() const override { return dim_; }
  Embedding embed(const Frame& frame) const override;

 private:
  std::string url_;
  std::size_t dim_;
  RetryPolicy policy_;
  std::string id_;
};

/// "hist96", or "remote-vit" configured from S2P_EMBED_URL (and optionally
/// S2P_EMBED_DIM, default 1024).
std::unique_ptr<Embedder> make_embedder(std::string_view id);

/// Scales `v` to unit L2 norm; throws InvalidArgument for a zero vector.
void normalize(Embedding& v);
std::vector<float> to_f32(const Embedding& v);

}  // namespace s2p
