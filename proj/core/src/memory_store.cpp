#include "s2p/memory_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <set>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"
#include "s2p/image_io.hpp"
#include "s2p/rng.hpp"
#include "s2p/util.hpp"

namespace fs = std::filesystem;

namespace s2p {

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kSidecar = "embeddings.f32";
constexpr const char* kLock = ".lock";
constexpr int kFormatVersion = 1;

// Exclusive writer lock held for the lifetime of the object.
class WriterLock {
 public:
  explicit WriterLock(const fs::path& root) {
    const auto path = root / kLock;
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::Io, path.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::Locked, root.string());
    }
  }
  ~WriterLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  WriterLock(const WriterLock&) = delete;
  WriterLock& operator=(const WriterLock&) = delete;

 private:
  int fd_ = -1;
};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> encode_sidecar(std::size_t dim, const std::vector<float>& rows) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + rows.size() * 4);
  put_u64(out, dim);
  put_u64(out, dim == 0 ? 0 : rows.size() / dim);
  for (float f : rows) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

std::vector<float> decode_sidecar(const std::vector<std::uint8_t>& bytes, std::size_t dim,
                                  std::size_t need_rows, const fs::path& path) {
  if (bytes.size() < 16) throw Error(ErrorCode::CorruptManifest, path.string() + ": short header");
  const auto file_dim = get_u64(bytes.data());
  const auto file_count = get_u64(bytes.data() + 8);
  if (file_dim != dim)
    throw Error(ErrorCode::CorruptManifest, path.string() + ": sidecar dim " +
                                                std::to_string(file_dim) + " != manifest dim " +
                                                std::to_string(dim));
  if (file_count < need_rows)
    throw Error(ErrorCode::CorruptManifest, path.string() + ": sidecar holds " +
                                                std::to_string(file_count) + " rows, manifest needs " +
                                                std::to_string(need_rows));
  if (bytes.size() < 16 + file_count * dim * 4)
    throw Error(ErrorCode::CorruptManifest, path.string() + ": truncated sidecar");
  std::vector<float> rows(need_rows * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto* p = bytes.data() + 16 + i * 4;
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    std::memcpy(&rows[i], &bits, 4);
  }
  return rows;
}

nlohmann::json manifest_json(const std::string& embedder, std::size_t dim,
                             const std::vector<EpisodeEntry>& episodes, std::size_t count) {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : episodes)
    eps.push_back({{"id", e.episode_id}, {"dir", e.dir}, {"count", e.count}, {"offset", e.offset}});
  return {{"format", kFormatVersion},
          {"embedder", embedder},
          {"dim", dim},
          {"count", count},
          {"episodes", eps}};
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

void rename_or_throw(const fs::path& from, const fs::path& to) {
  if (std::rename(from.c_str(), to.c_str()) != 0)
    throw Error(ErrorCode::Io, from.string() + " -> " + to.string() + ": " + std::strerror(errno));
}

// Sidecar first, manifest last: the manifest rename is the commit point.
void commit(const fs::path& root, const nlohmann::json& manifest, std::size_t dim,
            const std::vector<float>& rows, const AppendHook& hook) {
  const auto sidecar_tmp = root / (std::string(kSidecar) + ".tmp");
  const auto manifest_tmp = root / (std::string(kManifest) + ".tmp");
  write_file(sidecar_tmp, encode_sidecar(dim, rows));
  write_text_file(manifest_tmp, manifest.dump(2));
  if (hook) hook("temp-written");
  rename_or_throw(sidecar_tmp, root / kSidecar);
  if (hook) hook("sidecar-renamed");
  rename_or_throw(manifest_tmp, root / kManifest);
  sync_dir(root);
  if (hook) hook("committed");
}

std::string indexed(const char* stem, int i, const char* ext) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%04d.%s", stem, i, ext);
  return buf;
}

}  // namespace

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::D: return "D";
    case Scenario::H: return "H";
    case Scenario::O: return "O";
    case Scenario::Custom: return "CUSTOM";
  }
  return "CUSTOM";
}

Scenario scenario_from_string(std::string_view text) {
  if (text == "A") return Scenario::A;
  if (text == "D") return Scenario::D;
  if (text == "H") return Scenario::H;
  if (text == "O") return Scenario::O;
  if (text == "CUSTOM") return Scenario::Custom;
  throw Error(ErrorCode::InvalidArgument, "scenario '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const ExperienceSample& s) {
  j = nlohmann::json{{"id", s.id},
                     {"episode_id", s.episode_id},
                     {"step", s.step},
                     {"frame_ref", s.frame_ref},
                     {"prompt", s.prompt},
                     {"answer", s.answer},
                     {"setup", to_string(s.setup)},
                     {"scenario", to_string(s.scenario)}};
  if (s.target_object) j["target_object"] = *s.target_object;
  if (s.room_id) j["room_id"] = *s.room_id;
}

void from_json(const nlohmann::json& j, ExperienceSample& s) {
  s.id = j.at("id").get<std::string>();
  s.episode_id = j.at("episode_id").get<std::string>();
  s.step = j.at("step").get<int>();
  s.frame_ref = j.at("frame_ref").get<std::string>();
  s.prompt = j.at("prompt").get<std::string>();
  s.answer = j.at("answer").get<PlanAnswer>();
  s.setup = setup_from_string(j.at("setup").get<std::string>());
  s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  s.target_object.reset();
  s.room_id.reset();
  if (j.contains("target_object")) s.target_object = j.at("target_object").get<std::string>();
  if (j.contains("room_id")) s.room_id = j.at("room_id").get<std::string>();
}

MemoryStore MemoryStore::create(const fs::path& root, std::string embedder_id, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim");
  std::error_code ec;
  fs::create_directories(root / "episodes", ec);
  if (ec) throw Error(ErrorCode::Io, root.string() + ": " + ec.message());
  if (fs::exists(root / kManifest)) throw Error(ErrorCode::Io, root.string() + " already holds a store");
  WriterLock lock(root);
  MemoryStore store;
  store.root_ = root;
  store.embedder_id_ = std::move(embedder_id);
  store.dim_ = dim;
  commit(root, manifest_json(store.embedder_id_, dim, {}, 0), dim, {}, {});
  return store;
}

MemoryStore MemoryStore::open(const fs::path& root, const Embedder& embedder) {
  if (fs::exists(root / kManifest)) {
    auto store = load(root, embedder.id());
    if (store.dim() != embedder.dim())
      throw Error(ErrorCode::DimMismatch, "store dim " + std::to_string(store.dim()) +
                                              ", embedder dim " + std::to_string(embedder.dim()));
    return store;
  }
  return create(root, embedder.id(), embedder.dim());
}

MemoryStore MemoryStore::load(const fs::path& root, std::optional<std::string_view> expected_embedder) {
  const auto manifest_path = root / kManifest;
  if (!fs::exists(manifest_path)) throw Error(ErrorCode::Io, "no manifest at " + manifest_path.string());

  MemoryStore store;
  store.root_ = root;
  std::size_t count = 0;
  try {
    const auto m = nlohmann::json::parse(read_text_file(manifest_path));
    if (m.at("format").get<int>() != kFormatVersion)
      throw Error(ErrorCode::CorruptManifest, "unsupported format");
    store.embedder_id_ = m.at("embedder").get<std::string>();
    store.dim_ = m.at("dim").get<std::size_t>();
    count = m.at("count").get<std::size_t>();
    for (const auto& e : m.at("episodes")) {
      store.episodes_.push_back({e.at("id").get<std::string>(), e.at("dir").get<std::string>(),
                                 e.at("count").get<std::size_t>(), e.at("offset").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptManifest, manifest_path.string() + ": " + e.what());
  }

  if (expected_embedder && *expected_embedder != store.embedder_id_)
    throw Error(ErrorCode::EmbedderMismatch, "store embedder '" + store.embedder_id_ +
                                                 "', requested '" + std::string(*expected_embedder) + "'");

  std::size_t expected_offset = 0;
  for (const auto& e : store.episodes_) {
    if (e.offset != expected_offset || e.count == 0)
      throw Error(ErrorCode::CorruptManifest, "episode " + e.episode_id + " offsets");
    expected_offset += e.count;
  }
  if (expected_offset != count)
    throw Error(ErrorCode::CorruptManifest, "manifest count " + std::to_string(count) +
                                                " != episode total " + std::to_string(expected_offset));

  const auto rows = decode_sidecar(read_file(root / kSidecar), store.dim_, count, root / kSidecar);

  store.samples_.reserve(count);
  for (const auto& e : store.episodes_) {
    for (std::size_t i = 0; i < e.count; ++i) {
      const auto rel_sample = fs::path(e.dir) / indexed("sample", static_cast<int>(i), "json");
      const auto rel_frame = fs::path(e.dir) / indexed("frame", static_cast<int>(i), "png");
      if (!fs::exists(root / rel_sample))
        throw Error(ErrorCode::MissingFrame, "episode " + e.episode_id + " step " + std::to_string(i) +
                                                 ": missing " + rel_sample.string());
      if (!fs::exists(root / rel_frame))
        throw Error(ErrorCode::MissingFrame, "episode " + e.episode_id + " step " + std::to_string(i) +
                                                 ": missing " + rel_frame.string());
      ExperienceSample s;
      try {
        s = nlohmann::json::parse(read_text_file(root / rel_sample)).get<ExperienceSample>();
      } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptSample, rel_sample.string() + ": " + ex.what());
      } catch (const Error& ex) {
        throw Error(ErrorCode::CorruptSample, rel_sample.string() + ": " + ex.what());
      }
      const auto row = e.offset + i;
      s.embedding.assign(rows.begin() + static_cast<std::ptrdiff_t>(row * store.dim_),
                         rows.begin() + static_cast<std::ptrdiff_t>((row + 1) * store.dim_));
      store.samples_.push_back(std::move(s));
    }
  }
  return store;
}

ManifestDelta MemoryStore::append_episode(std::string_view embedder_id, std::vector<DemoStep> episode,
                                          const AppendHook& hook) {
  if (episode.empty()) throw Error(ErrorCode::EmptyEpisode, root_.string());
  if (embedder_id != embedder_id_)
    throw Error(ErrorCode::EmbedderMismatch,
                "store embedder '" + embedder_id_ + "', got '" + std::string(embedder_id) + "'");
  for (const auto& step : episode) {
    if (step.sample.embedding.size() != dim_)
      throw Error(ErrorCode::DimMismatch, "sample embedding " + std::to_string(step.sample.embedding.size()) +
                                              " != store dim " + std::to_string(dim_));
    if (step.sample.answer.commands.empty())
      throw Error(ErrorCode::InvalidArgument, "sample answer has no commands");
  }

  WriterLock lock(root_);

  // Ids derive from store content so that identical appends are reproducible.
  Rng rng(std::hash<std::string>{}(root_.string()) ^ splitmix64(samples_.size() + 1));
  std::string episode_id = episode.front().sample.episode_id;
  if (episode_id.empty()) episode_id = make_uuid(rng);
  for (const auto& e : episodes_)
    if (e.episode_id == episode_id) throw Error(ErrorCode::InvalidArgument, "duplicate episode " + episode_id);

  const std::string dir = "episodes/" + episode_id;
  std::error_code ec;
  fs::create_directories(root_ / dir, ec);
  if (ec) throw Error(ErrorCode::Io, (root_ / dir).string() + ": " + ec.message());

  std::vector<ExperienceSample> added;
  for (std::size_t i = 0; i < episode.size(); ++i) {
    auto s = std::move(episode[i].sample);
    s.episode_id = episode_id;
    s.step = static_cast<int>(i);
    if (s.id.empty()) s.id = make_uuid(rng);
    s.frame_ref = dir + "/" + indexed("frame", static_cast<int>(i), "png");
    write_png(root_ / s.frame_ref, episode[i].frame);
    write_text_file(root_ / dir / indexed("sample", static_cast<int>(i), "json"),
                    nlohmann::json(s).dump(2));
    added.push_back(std::move(s));
  }
  if (hook) hook("files-written");

  auto episodes = episodes_;
  episodes.push_back({episode_id, dir, added.size(), samples_.size()});
  std::vector<float> rows;
  rows.reserve((samples_.size() + added.size()) * dim_);
  for (const auto& s : samples_) rows.insert(rows.end(), s.embedding.begin(), s.embedding.end());
  for (const auto& s : added) rows.insert(rows.end(), s.embedding.begin(), s.embedding.end());
  const auto total = samples_.size() + added.size();
  commit(root_, manifest_json(embedder_id_, dim_, episodes, total), dim_, rows, hook);

  episodes_ = std::move(episodes);
  for (auto& s : added) samples_.push_back(std::move(s));
  return {episode_id, episode.size(), samples_.size(), episodes_.size()};
}

void MemoryStore::rebuild_embeddings(const Embedder& embedder) {
  WriterLock lock(root_);
  std::vector<float> rows;
  rows.reserve(samples_.size() * embedder.dim());
  auto updated = samples_;
  for (auto& s : updated) {
    const auto v = embedder.embed(load_frame(s));
    if (v.size() != embedder.dim()) throw Error(ErrorCode::DimMismatch, embedder.id());
    s.embedding = to_f32(v);
    rows.insert(rows.end(), s.embedding.begin(), s.embedding.end());
  }
  commit(root_, manifest_json(embedder.id(), embedder.dim(), episodes_, samples_.size()), embedder.dim(),
         rows, {});
  embedder_id_ = embedder.id();
  dim_ = embedder.dim();
  samples_ = std::move(updated);
}

Frame MemoryStore::load_frame(const ExperienceSample& s) const {
  const auto path = frame_path(s);
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFrame, path.string());
  return read_png(path);
}

}  // namespace s2p
