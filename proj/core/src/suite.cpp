#include "s2p/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "s2p/episode.hpp"
#include "s2p/error.hpp"
#include "s2p/pipeline.hpp"
#include "s2p/sampler.hpp"
#include "s2p/tpv_world.hpp"

namespace s2p {

using nlohmann::json;

SuiteSpec suite_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "suite must be an object");
  static const std::set<std::string> kKeys{"name",   "setup", "scenario", "backend", "k_icl", "n_episodes",
                                           "seed",   "repeats", "rooms",  "run",     "workers"};
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key)) throw Error(ErrorCode::InvalidArgument, "unknown suite key '" + key + "'");
  SuiteSpec s;
  s.name = j.value("name", std::string());
  if (j.contains("setup")) s.setup = setup_from_string(j["setup"].get<std::string>());
  if (j.contains("scenario")) s.scenario = scenario_from_string(j["scenario"].get<std::string>());
  s.backend = j.value("backend", s.backend);
  s.k_icl = j.value("k_icl", s.k_icl);
  s.n_episodes = j.value("n_episodes", s.n_episodes);
  s.seed = j.value("seed", s.seed);
  s.repeats = j.value("repeats", s.repeats);
  s.workers = j.value("workers", s.workers);
  if (j.contains("rooms")) {
    s.rooms.clear();
    for (const auto& r : j["rooms"]) s.rooms.push_back(room_type_from_string(r.get<std::string>()));
  }
  if (j.contains("run")) s.run = config_from_json(j["run"]);
  s.run.k_icl = s.k_icl;
  s.run.backend = s.backend;
  if (s.n_episodes < 0) throw Error(ErrorCode::Range, "n_episodes");
  if (s.repeats < 1) throw Error(ErrorCode::Range, "repeats");
  if (s.k_icl < 0) throw Error(ErrorCode::Range, "k_icl");
  return s;
}

json suite_to_json(const SuiteSpec& s) {
  json rooms = json::array();
  for (auto r : s.rooms) rooms.push_back(to_string(r));
  return json{{"name", s.name},         {"setup", to_string(s.setup)}, {"scenario", to_string(s.scenario)},
              {"backend", s.backend},   {"k_icl", s.k_icl},            {"n_episodes", s.n_episodes},
              {"seed", s.seed},         {"repeats", s.repeats},        {"rooms", rooms},
              {"run", config_to_json(s.run)}, {"workers", s.workers}};
}

namespace {

struct Job {
  std::size_t run = 0;
  std::size_t index = 0;
};

template <typename F>
void parallel_for(std::size_t n, int workers, F&& body) {
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t count = std::min<std::size_t>(n, workers > 0 ? static_cast<std::size_t>(workers) : hw);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  if (count <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

std::string mode_label(const SuiteSpec& s) {
  return s.backend + (s.k_icl > 0 ? " ICL" : " zero-shot");
}

}  // namespace

SuiteReport run_suite(const SuiteSpec& spec, const MemoryStore* memory, const Embedder* embedder) {
  SuiteReport report;
  report.spec = spec;
  RunConfig cfg = spec.run;
  cfg.k_icl = spec.k_icl;
  cfg.backend = spec.backend;
  if (cfg.k_icl > 0 && (memory == nullptr || embedder == nullptr))
    throw Error(ErrorCode::EmptyMemory, "in-context suite without a memory");

  const std::size_t per_run =
      spec.setup == Setup::Tpv ? static_cast<std::size_t>(spec.n_episodes)
                               : static_cast<std::size_t>(spec.n_episodes) * spec.rooms.size();
  report.n = per_run;
  report.runs.resize(static_cast<std::size_t>(spec.repeats));
  for (std::size_t r = 0; r < report.runs.size(); ++r) {
    report.runs[r].seed = spec.seed + r;
    report.runs[r].episodes.resize(per_run);
  }
  if (per_run == 0) return report;

  const Rng scene_root(spec.seed);
  auto episode = [&](std::size_t job) {
    const std::size_t run = job / per_run;
    const std::size_t i = job % per_run;
    const std::uint64_t run_seed = spec.seed + run;
    RunConfig run_cfg = cfg;
    run_cfg.seed = run_seed;
    EpisodeOptions opts;
    opts.cfg = run_cfg;
    char id[64];
    std::snprintf(id, sizeof id, "%s-s%llu-%04zu", to_string(spec.setup).data(),
                  static_cast<unsigned long long>(run_seed), i);
    opts.episode_id = id;

    EpisodeResult result;
    std::string room_id;
    try {
      if (spec.setup == Setup::Tpv) {
        Rng room_rng = scene_root.split(i);
        TpvScene scene = generate_tpv_scene({}, room_rng);
        Rng heading_rng = Rng(run_seed).split(0x7e0000 + i);
        scene = perturb_heading(std::move(scene), heading_rng);
        room_id = scene.room_id;
        Planner planner(memory, embedder, run_cfg,
                        memory ? scenario_filter(spec.scenario, room_id) : SampleFilter{});
        const PlanFn plan = vlm_plan_fn(planner, make_backend_factory(spec.backend, run_seed));
        result = tpv_replan_loop(std::move(scene), plan, opts);
      } else {
        const std::size_t per_room = static_cast<std::size_t>(spec.n_episodes);
        const RoomType room = spec.rooms[i / per_room];
        Rng rng = Rng(run_seed).split(0xf0000 + i);
        FpvScene scene = generate_fpv_scene(FpvSceneSpec{.room = room, .target = std::nullopt}, rng);
        room_id = scene.room_id;
        Planner planner(memory, embedder, run_cfg,
                        memory ? scenario_filter(spec.scenario, room_id) : SampleFilter{});
        const PlanFn plan = vlm_plan_fn(planner, make_backend_factory(spec.backend, run_seed));
        result = run_fpv_episode(std::move(scene), plan, opts);
      }
    } catch (const std::exception& e) {
      result = EpisodeResult{};
      result.episode_id = opts.episode_id;
      result.setup = spec.setup;
      result.room_id = room_id;
      result.seed = run_seed;
      result.failure = e.what();
    }
    result.trace.clear();
    report.runs[run].episodes[i] = std::move(result);
  };
  parallel_for(per_run * report.runs.size(), spec.workers, episode);

  for (auto& run : report.runs) {
    run.ts = trajectory_score(run.episodes);
    run.d = danger_count(run.episodes);
    try {
      run.sr_spl = sr_spl(run.episodes);
    } catch (const Error&) {
      run.sr_spl = {};
    }
    report.ts += run.ts;
    report.d += run.d;
    report.sr_spl.sr += run.sr_spl.sr;
    report.sr_spl.spl += run.sr_spl.spl;
  }
  const double runs = static_cast<double>(report.runs.size());
  report.ts /= runs;
  report.d /= runs;
  report.sr_spl.sr /= runs;
  report.sr_spl.spl /= runs;
  return report;
}

json report_to_json(const SuiteReport& report) {
  json runs = json::array();
  for (const auto& r : report.runs) {
    json episodes = json::array();
    for (const auto& e : r.episodes) episodes.push_back(e);
    runs.push_back({{"seed", r.seed},
                    {"ts", r.ts},
                    {"d", r.d},
                    {"sr", r.sr_spl.sr},
                    {"spl", r.sr_spl.spl},
                    {"episodes", episodes}});
  }
  return json{{"suite", suite_to_json(report.spec)},
              {"mode", mode_label(report.spec)},
              {"n", report.n},
              {"ts", report.ts},
              {"d", report.d},
              {"sr", report.sr_spl.sr},
              {"spl", report.sr_spl.spl},
              {"runs", runs}};
}

std::string format_table(std::span<const SuiteReport> reports) {
  std::vector<std::vector<std::string>> rows{{"Mode", "CL", "Scenario", "TS(/N)", "D(/N)", "SR", "SPL"}};
  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  for (const auto& r : reports) {
    const std::string n = std::to_string(r.n);
    rows.push_back({mode_label(r.spec), std::to_string(r.spec.k_icl), std::string(to_string(r.spec.scenario)),
                    fixed(r.ts, 2) + " (/" + n + ")", fixed(r.d, 2) + " (/" + n + ")",
                    fixed(r.sr_spl.sr, 1) + "%", fixed(r.sr_spl.spl, 1) + "%"});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out << "  ";
      out << std::left << std::setw(static_cast<int>(width[c])) << rows[r][c];
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) out << (c ? "  " : "") << std::string(width[c], '-');
      out << '\n';
    }
  }
  return out.str();
}

void write_episodes_csv(std::ostream& out, const SuiteReport& report) {
  out << "run_seed,episode_id,room_id,room_type,target,success,steps,path_length,shortest_length,ts_term,"
         "dangerous,collided,failure\n";
  for (const auto& run : report.runs)
    for (const auto& e : run.episodes) {
      std::string failure = e.failure;
      std::replace(failure.begin(), failure.end(), ',', ';');
      std::replace(failure.begin(), failure.end(), '\n', ' ');
      out << run.seed << ',' << e.episode_id << ',' << e.room_id << ',' << e.room_type << ',' << e.target << ','
          << (e.success ? 1 : 0) << ',' << e.steps << ',' << (e.path_length ? std::to_string(*e.path_length) : "")
          << ',' << (e.shortest_length ? std::to_string(*e.shortest_length) : "") << ',' << episode_term(e) << ','
          << (e.dangerous_hit ? 1 : 0) << ',' << (e.collided ? 1 : 0) << ',' << failure << '\n';
    }
}

}  // namespace s2p
