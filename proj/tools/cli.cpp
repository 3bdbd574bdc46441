#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "s2p/api.hpp"
#include "s2p/config.hpp"
#include "s2p/demo_session.hpp"
#include "s2p/embedder.hpp"
#include "s2p/episode.hpp"
#include "s2p/error.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/rng.hpp"
#include "s2p/sampler.hpp"
#include "s2p/suite.hpp"
#include "s2p/util.hpp"

namespace s2p {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
};

struct EpisodeArgs {
  std::string setup = "tpv";
  std::string room = "kitchen";
  std::string target;
  std::string memory;
  std::string scenario = "A";
  std::optional<int> k;
  std::string trace;
  std::string record;
  std::optional<int> serve_port;
};

struct MemoryArgs {
  std::string root;
  std::string from;
  std::string embedder;
  std::string setup = "tpv";
  std::string scenario = "A";
  int episodes = 10;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  std::optional<int> port;
  std::string memory;
  std::string setup = "tpv";
  std::string room = "kitchen";
  std::string target;
};

RunConfig run_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.backend) cfg.backend = *g.backend;
  return validate_config(cfg);
}

std::unique_ptr<Embedder> embedder_for(const std::string& id) {
  auto e = make_embedder(id);
  if (!e) throw Error(ErrorCode::Usage, "unknown embedder '" + id + "'");
  return e;
}

std::optional<MemoryStore> load_memory(const std::string& root, const std::string& embedder_id) {
  if (root.empty()) return std::nullopt;
  return MemoryStore::load(root, embedder_id);
}

FpvSceneSpec fpv_spec(const std::string& room, const std::string& target) {
  FpvSceneSpec spec;
  spec.room = room_type_from_string(room);
  if (!target.empty()) spec.target = target;
  return spec;
}

int run_episode(const Globals& g, const EpisodeArgs& a, std::ostream& out) {
  RunConfig cfg = run_config(g);
  if (a.k) cfg.k_icl = *a.k;
  cfg = validate_config(cfg);
  const Setup setup = setup_from_string(a.setup);
  const auto embedder = embedder_for(cfg.embedder);
  const auto memory = load_memory(a.memory, embedder->id());

  Rng rng(cfg.seed);
  std::optional<FpvScene> fpv;
  std::optional<TpvScene> tpv;
  std::string room_id;
  if (setup == Setup::Fpv) {
    fpv = generate_fpv_scene(fpv_spec(a.room, a.target), rng);
    room_id = fpv->room_id;
  } else {
    tpv = generate_tpv_scene(TpvSceneSpec{}, rng);
    room_id = tpv->room_id;
  }

  const MemoryStore* mem = memory ? &*memory : nullptr;
  const Planner planner(mem, embedder.get(), cfg,
                        mem ? scenario_filter(scenario_from_string(a.scenario), room_id) : SampleFilter{});
  const PlanFn plan = vlm_plan_fn(planner, make_backend_factory(cfg.backend, cfg.seed, a.record));

  EpisodeOptions opts;
  opts.cfg = cfg;
  opts.episode_id = "run-" + std::to_string(cfg.seed);

  std::unique_ptr<ApiService> service;
  std::unique_ptr<ApiServer> server;
  if (a.serve_port) {
    ApiOptions api;
    if (const char* t = std::getenv("S2P_API_TOKEN")) api.token = t;
    service = std::make_unique<ApiService>(std::move(api));
    server = std::make_unique<ApiServer>(*service);
    RunMonitor& monitor = service->monitor();
    monitor.begin(opts.episode_id);
    opts.on_step = [&monitor](const StepTelemetry& t) { monitor.update(t); };
    opts.abort = monitor.abort_flag();
    server->start("127.0.0.1", *a.serve_port);
  }

  const EpisodeResult result =
      fpv ? run_fpv_episode(std::move(*fpv), plan, opts) : tpv_replan_loop(std::move(*tpv), plan, opts);
  if (service) service->monitor().end(result);
  if (server) server->stop();

  if (!a.trace.empty()) {
    std::ofstream f(a.trace);
    if (!f) throw Error(ErrorCode::Io, a.trace);
    write_trace_csv(f, result.trace);
  }
  out << json(result).dump() << '\n';
  return 0;
}

int run_eval(const Globals& g, const std::string& out_dir, const std::string& memory_root, std::ostream& out) {
  if (g.config.empty()) throw Error(ErrorCode::Usage, "eval requires --config suite.json");
  SuiteSpec spec = suite_from_json(json::parse(read_text_file(g.config)));
  if (g.seed) spec.seed = *g.seed;
  if (g.backend) spec.backend = *g.backend;
  const auto embedder = embedder_for(spec.run.embedder);
  const auto memory = load_memory(memory_root, embedder->id());

  const SuiteReport report = run_suite(spec, memory ? &*memory : nullptr, embedder.get());
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  const std::string table = format_table(std::span<const SuiteReport>(&report, 1));
  write_text_file(dir / "table.txt", table);
  std::ofstream csv(dir / "episodes.csv");
  if (!csv) throw Error(ErrorCode::Io, (dir / "episodes.csv").string());
  write_episodes_csv(csv, report);
  out << table;
  return 0;
}

json memory_summary(const MemoryStore& store) {
  json episodes = json::array();
  for (const auto& e : store.episodes()) episodes.push_back({{"id", e.episode_id}, {"samples", e.count}});
  return {{"root", store.root().string()},
          {"embedder", store.embedder_id()},
          {"dim", store.dim()},
          {"count", store.episodes().size()},
          {"samples", store.size()},
          {"episodes", episodes}};
}

int memory_ls(const MemoryArgs& a, std::ostream& out) {
  out << memory_summary(MemoryStore::load(a.root)).dump(2) << '\n';
  return 0;
}

/// Copies every episode of another store, re-embedding its frames with this
/// store's embedder and tagging the samples with `scenario`.
int memory_import(const Globals& g, const MemoryArgs& a, std::ostream& out) {
  if (a.from.empty()) throw Error(ErrorCode::Usage, "memory import requires --from");
  const RunConfig cfg = run_config(g);
  const MemoryStore source = MemoryStore::load(a.from);
  const auto default_embedder = embedder_for(a.embedder.empty() ? cfg.embedder : a.embedder);
  MemoryStore dest = MemoryStore::open(a.root, *default_embedder);
  const auto embedder = embedder_for(dest.embedder_id());
  const Scenario scenario = scenario_from_string(a.scenario);

  std::size_t row = 0;
  for (const auto& entry : source.episodes()) {
    std::vector<DemoStep> steps;
    for (std::size_t i = 0; i < entry.count; ++i, ++row) {
      const ExperienceSample& s = source.samples()[row];
      DemoStep step{s, source.load_frame(s)};
      step.sample.id.clear();
      step.sample.episode_id.clear();
      step.sample.frame_ref.clear();
      step.sample.scenario = scenario;
      step.sample.embedding = to_f32(embedder->embed(step.frame));
      steps.push_back(std::move(step));
    }
    dest.append_episode(embedder->id(), std::move(steps));
  }
  out << memory_summary(dest).dump(2) << '\n';
  return 0;
}

int memory_embed(const MemoryArgs& a, std::ostream& out) {
  if (a.embedder.empty()) throw Error(ErrorCode::Usage, "memory embed requires --embedder");
  MemoryStore store = MemoryStore::load(a.root);
  store.rebuild_embeddings(*embedder_for(a.embedder));
  out << memory_summary(store).dump(2) << '\n';
  return 0;
}

int memory_synth(const Globals& g, const MemoryArgs& a, std::ostream& out) {
  const RunConfig cfg = run_config(g);
  const auto embedder = embedder_for(a.embedder.empty() ? cfg.embedder : a.embedder);
  MemoryStore store = MemoryStore::open(a.root, *embedder);
  synthesize_memory(store, setup_from_string(a.setup), a.episodes, cfg.seed, *embedder, cfg,
                    scenario_from_string(a.scenario));
  out << memory_summary(store).dump(2) << '\n';
  return 0;
}

int serve(const Globals& g, const ServeArgs& a, bool with_demo, std::ostream& out) {
  const RunConfig cfg = run_config(g);
  ApiOptions api;
  if (const char* t = std::getenv("S2P_API_TOKEN")) api.token = t;
  api.memory_root = a.memory;
  api.embedder = embedder_for(cfg.embedder);
  if (with_demo && a.memory.empty()) throw Error(ErrorCode::Usage, "record requires --memory");
  ApiService service(std::move(api));
  if (with_demo) {
    Rng rng(cfg.seed);
    if (setup_from_string(a.setup) == Setup::Fpv)
      service.start_demo(DemoSession::fpv(generate_fpv_scene(fpv_spec(a.room, a.target), rng), cfg));
    else
      service.start_demo(DemoSession::tpv(generate_tpv_scene(TpvSceneSpec{}, rng), cfg));
  }
  const int port = a.port ? *a.port : api_port_from_env();
  ApiServer server(service);
  out << "listening on " << a.host << ':' << port << std::endl;
  server.listen(a.host, port);
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Experiential-memory prompting for robot navigation planners", "s2p"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  std::string backend;
  app.add_option("--config", g.config, "JSON config (RunConfig, or a suite for eval)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed");
  auto* backend_opt = app.add_option("--backend", backend, "oracle | random | http | cassette:<path>");

  EpisodeArgs ep;
  auto add_episode_options = [&ep](CLI::App* sub) {
    sub->add_option("--setup", ep.setup, "fpv | tpv")->check(CLI::IsMember({"fpv", "tpv"}));
    sub->add_option("--room", ep.room, "FPV room archetype");
    sub->add_option("--target", ep.target, "FPV target object");
    sub->add_option("--memory", ep.memory, "Experiential memory root");
    sub->add_option("--scenario", ep.scenario, "Memory scenario filter A|D|H|O");
    sub->add_option("--k", ep.k, "In-context examples");
    sub->add_option("--trace", ep.trace, "Write the robot trace as CSV");
    sub->add_option("--record", ep.record, "Append every model exchange to this cassette");
    sub->add_option("--serve", ep.serve_port, "Expose /run/status on this port while running");
  };

  auto* run = app.add_subcommand("run", "Run one episode and print its result as JSON");
  add_episode_options(run);

  std::string cassette;
  auto* replay = app.add_subcommand("replay", "Run one episode against a recorded cassette");
  add_episode_options(replay);
  replay->add_option("--cassette", cassette, "Cassette file")->required();

  std::string out_dir = "report";
  std::string eval_memory;
  auto* eval = app.add_subcommand("eval", "Run an evaluation suite and write report files");
  eval->add_option("--out", out_dir, "Output directory");
  eval->add_option("--memory", eval_memory, "Experiential memory root");

  MemoryArgs mem;
  auto* memory = app.add_subcommand("memory", "Inspect and build experiential memory");
  memory->require_subcommand(1);
  auto* ls = memory->add_subcommand("ls", "Summarize a store");
  auto* import = memory->add_subcommand("import", "Import the episodes of another store");
  auto* embed = memory->add_subcommand("embed", "Recompute embeddings with another embedder");
  auto* synth = memory->add_subcommand("synth", "Record simulated ground-truth demonstrations");
  for (auto* sub : {ls, import, embed, synth}) sub->add_option("--root", mem.root, "Store root")->required();
  import->add_option("--from", mem.from, "Source store root")->required();
  import->add_option("--scenario", mem.scenario, "Scenario tag for the imported samples");
  import->add_option("--embedder", mem.embedder, "Embedder when creating the store");
  embed->add_option("--embedder", mem.embedder, "Embedder id")->required();
  synth->add_option("--setup", mem.setup, "fpv | tpv")->check(CLI::IsMember({"fpv", "tpv"}));
  synth->add_option("--episodes", mem.episodes, "Episodes to record")->check(CLI::PositiveNumber);
  synth->add_option("--scenario", mem.scenario, "Scenario tag");
  synth->add_option("--embedder", mem.embedder, "Embedder when creating the store");

  ServeArgs sv;
  auto add_serve_options = [&sv](CLI::App* sub) {
    sub->add_option("--host", sv.host, "Bind address");
    sub->add_option("--port", sv.port, "Port (default S2P_API_PORT or 8787)");
    sub->add_option("--memory", sv.memory, "Experiential memory root");
  };
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  add_serve_options(serve_cmd);
  auto* record = app.add_subcommand("record", "Start a demonstration session and serve the HTTP API");
  add_serve_options(record);
  record->add_option("--setup", sv.setup, "fpv | tpv")->check(CLI::IsMember({"fpv", "tpv"}));
  record->add_option("--room", sv.room, "FPV room archetype");
  record->add_option("--target", sv.target, "FPV target object");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  if (seed_opt->count() > 0) g.seed = seed;
  if (backend_opt->count() > 0) g.backend = backend;

  try {
    if (*run) return run_episode(g, ep, out);
    if (*replay) {
      g.backend = "cassette:" + cassette;
      return run_episode(g, ep, out);
    }
    if (*eval) return run_eval(g, out_dir, eval_memory, out);
    if (*ls) return memory_ls(mem, out);
    if (*import) return memory_import(g, mem, out);
    if (*embed) return memory_embed(mem, out);
    if (*synth) return memory_synth(g, mem, out);
    if (*serve_cmd) return serve(g, sv, false, out);
    if (*record) return serve(g, sv, true, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::Usage) {
      err << app.help();
      return 2;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace s2p
