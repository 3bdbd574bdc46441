#include "s2p/episode.hpp"

#include <algorithm>
#include <cmath>

#include "s2p/annotator.hpp"
#include "s2p/controller.hpp"
#include "s2p/episodic.hpp"
#include "s2p/error.hpp"
#include "s2p/oracle.hpp"

namespace s2p {

PlanFn vlm_plan_fn(const Planner& planner, BackendFactory factory) {
  return [&planner, factory = std::move(factory)](const PlanRequest& r) {
    auto backend = factory(r.oracle);
    return planner.plan(r.frame, r.episodic, r.task, *backend).answer;
  };
}

namespace {

bool aborted(const EpisodeOptions& o) { return o.abort && o.abort->load(); }

DemoStep make_demo_step(const AnnotatedFrame& af, const std::optional<std::string>& episodic,
                        const TaskSpec& task, const PlanAnswer& answer, const Embedder& embedder,
                        Scenario scenario) {
  DemoStep d;
  d.frame = draw(af);
  d.sample.prompt = live_query_text(af, episodic, task);
  d.sample.answer = answer;
  d.sample.embedding = to_f32(embedder.embed(d.frame));
  d.sample.setup = af.setup;
  d.sample.scenario = scenario;
  return d;
}

struct DemoSink {
  std::vector<DemoStep>* steps = nullptr;
  const Embedder* embedder = nullptr;
  Scenario scenario = Scenario::A;
};

EpisodeResult fpv_loop(FpvScene scene, const PlanFn& plan, const EpisodeOptions& o, const DemoSink& sink) {
  const FpvOracle oracle(scene);
  EpisodeResult r;
  r.episode_id = o.episode_id;
  r.setup = Setup::Fpv;
  r.room_id = scene.room_id;
  r.room_type = std::string(to_string(scene.room));
  r.target = scene.target;
  r.seed = o.cfg.seed;
  r.shortest_length = oracle.shortest_path();
  double travelled = 0.0;

  const TaskSpec task{Setup::Fpv, scene.target};
  EpisodicState state;
  const OracleContext ctx{&scene, &oracle, nullptr, nullptr};
  for (int step = 0; step < o.cfg.max_steps; ++step) {
    if (aborted(o)) {
      r.failure = "aborted";
      break;
    }
    const FpvView view = fpv_render(scene, static_cast<std::uint64_t>(step));
    std::vector<SeenObject> seen;
    for (const auto& s : view.seen) seen.push_back({s.object_class, s.bearing});
    state = observe(std::move(state), seen);
    const AnnotatedFrame af = fpv_overlay(view.frame);
    const std::optional<std::string> episodic = to_prompt_text(state);

    PlanAnswer answer;
    try {
      answer = plan(PlanRequest{af, episodic, task, ctx});
    } catch (const Error& e) {
      r.failure = e.what();
      break;
    }
    if (answer.commands.size() != 2) {
      r.failure = "planner returned " + std::to_string(answer.commands.size()) + " commands";
      break;
    }
    if (sink.steps) sink.steps->push_back(make_demo_step(af, episodic, task, answer, *sink.embedder, sink.scenario));

    const int cmd = answer.commands[0];
    const FpvStepResult res = fpv_step(scene, cmd);
    ++r.steps;
    travelled += res.moved;
    if (res.event == FpvEvent::Rotated) state = rotate(std::move(state), meaning_of(cmd).rotation_degrees);
    state.pitch = res.scene.agent.pitch;
    state = record_action(std::move(state), cmd, answer.commands[1], static_cast<std::size_t>(o.cfg.max_steps));
    scene = res.scene;
    r.sequences.push_back({answer.commands, {}, true});

    if (o.on_step) {
      StepTelemetry t;
      t.episode_id = o.episode_id;
      t.step = step;
      t.setup = Setup::Fpv;
      t.plan = answer.commands;
      t.explanation = answer.explanation;
      t.labels = af.labels;
      t.frame = draw(af);
      o.on_step(t);
    }
    if (res.event == FpvEvent::Success) {
      r.success = true;
      break;
    }
    if (res.event == FpvEvent::Failure) break;
  }
  r.path_length = travelled;
  return r;
}

EpisodeResult tpv_loop(TpvScene scene, const PlanFn& plan, const EpisodeOptions& o, const DemoSink& sink) {
  const TpvOracle oracle(scene, PdController{o.cfg.controller, o.cfg.waypoint_tolerance});
  const FloorMask mask = capture_floor_mask(scene);
  const TpvRenderer renderer(scene);
  const ObstacleMap obstacles = scene.obstacle_map();

  EpisodeResult r;
  r.episode_id = o.episode_id;
  r.setup = Setup::Tpv;
  r.room_id = scene.room_id;
  r.seed = o.cfg.seed;
  r.shortest_length = std::max(0.0, oracle.field().at(scene.robot.position()) - scene.goal_radius);
  double travelled = 0.0;
  r.trace.push_back({0.0, scene.robot, 0});

  const TaskSpec task{Setup::Tpv, ""};
  const std::optional<std::string> no_episodic;
  const OracleContext ctx{nullptr, nullptr, &scene, &oracle};
  const PdController ctrl{o.cfg.controller, o.cfg.waypoint_tolerance};
  double clock = 0.0;

  auto at_goal = [&scene](const RobotPose& p) { return distance(p.position(), scene.goal) <= scene.goal_radius; };
  if (at_goal(scene.robot)) r.success = true;

  for (int it = 0; it < o.cfg.max_steps && !r.success; ++it) {
    if (aborted(o)) {
      r.failure = "aborted";
      break;
    }
    AnnotatedFrame af;
    try {
      af = tpv_annotate(scene, renderer.render(scene.robot, static_cast<std::uint64_t>(it)), mask, o.cfg.ring,
                        o.crop_margin);
    } catch (const Error& e) {
      r.failure = e.what();
      break;
    }
    const PlanAnswer truth = oracle.plan(scene.robot, af.labels);
    PlanAnswer answer;
    try {
      answer = plan(PlanRequest{af, no_episodic, task, ctx});
    } catch (const Error& e) {
      r.failure = e.what();
      break;
    }
    if (sink.steps) sink.steps->push_back(make_demo_step(af, no_episodic, task, answer, *sink.embedder, sink.scenario));

    SequenceRecord rec{answer.commands, truth.commands, true};
    std::vector<WorldPoint> waypoints;
    for (int id : answer.commands) {
      const Label* l = af.find(id);
      if (l == nullptr) {
        r.failure = "planner referenced unknown label " + std::to_string(id);
        break;
      }
      if (l->dangerous) rec.safe = false;
      if (l->kind != LabelKind::RobotOrigin && l->world && waypoints.size() < 2) waypoints.push_back(*l->world);
    }
    if (!r.failure.empty()) break;
    ++r.steps;

    std::vector<TraceSample> tail;
    if (!waypoints.empty()) {
      TrackOptions topt;
      topt.obstacles = &obstacles;
      topt.max_ticks = o.max_track_ticks;
      topt.stop = at_goal;
      TrackResult tr = pd_track(scene.robot, waypoints, ctrl, topt);
      if (tr.min_clearance < kDangerInflation) rec.safe = false;
      for (std::size_t i = 1; i < tr.trace.size(); ++i) {
        travelled += distance(tr.trace[i - 1].pose.position(), tr.trace[i].pose.position());
        auto s = tr.trace[i];
        s.t += clock;
        r.trace.push_back(s);
      }
      clock += tr.trace.back().t;
      scene.robot = tr.final_pose();
      if (tr.collided) r.collided = true;
      if (at_goal(scene.robot)) r.success = true;
      tail.assign(tr.trace.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(tr.trace.size(), 40)),
                  tr.trace.end());
    }
    if (!rec.safe) r.dangerous_hit = true;
    r.sequences.push_back(std::move(rec));

    if (o.on_step) {
      StepTelemetry t;
      t.episode_id = o.episode_id;
      t.step = it;
      t.setup = Setup::Tpv;
      t.plan = answer.commands;
      t.explanation = answer.explanation;
      t.labels = af.labels;
      t.frame = draw(af);
      t.trace_tail = std::move(tail);
      o.on_step(t);
    }
    if (r.collided) break;
  }
  r.safe = !r.dangerous_hit;
  r.path_length = travelled;
  return r;
}

}  // namespace

EpisodeResult run_fpv_episode(FpvScene scene, const PlanFn& plan, const EpisodeOptions& options) {
  return fpv_loop(std::move(scene), plan, options, {});
}

EpisodeResult tpv_replan_loop(TpvScene scene, const PlanFn& plan, const EpisodeOptions& options) {
  return tpv_loop(std::move(scene), plan, options, {});
}

namespace {

PlanFn oracle_plan_fn() {
  return [](const PlanRequest& r) {
    OracleBackend backend(r.oracle);
    Conversation conv;
    conv.setup = r.frame.setup;
    conv.valid_ids = r.frame.valid_ids();
    conv.live_labels = r.frame.labels;
    conv.turns.push_back({Role::User, "", {}});
    return parse_answer(backend.complete(conv), conv.setup, conv.valid_ids);
  };
}

}  // namespace

std::vector<DemoStep> record_fpv_demo(FpvScene scene, const Embedder& embedder, const RunConfig& cfg,
                                      Scenario scenario) {
  std::vector<DemoStep> steps;
  EpisodeOptions o;
  o.cfg = cfg;
  const std::string target = scene.target;
  const std::string room = scene.room_id;
  fpv_loop(std::move(scene), oracle_plan_fn(), o, {&steps, &embedder, scenario});
  for (auto& s : steps) {
    s.sample.target_object = target;
    s.sample.room_id = room;
  }
  return steps;
}

std::vector<DemoStep> record_tpv_demo(TpvScene scene, const Embedder& embedder, const RunConfig& cfg,
                                      Scenario scenario, int crop_margin) {
  std::vector<DemoStep> steps;
  EpisodeOptions o;
  o.cfg = cfg;
  o.crop_margin = crop_margin;
  const std::string room = scene.room_id;
  tpv_loop(std::move(scene), oracle_plan_fn(), o, {&steps, &embedder, scenario});
  for (auto& s : steps) s.sample.room_id = room;
  return steps;
}

const std::vector<std::string>& fpv_training_objects() {
  static const std::vector<std::string> kObjects{
      "HousePlant", "Sink",  "TableTop", "Knife", "Fridge",      "Bowl",    "Cabinet",
      "Cloth",      "KeyChain", "WateringCan", "Bed", "Lamp", "Book", "Chair",
      "LightSwitch", "Candle", "Painting", "Watch", "Toilet", "SprayBottle"};
  return kObjects;
}

const std::vector<std::string>& fpv_test_objects() {
  static const std::vector<std::string> kObjects{"Toaster", "Microwave", "Television", "LapTop",
                                                 "RemoteControl", "CellPhone", "Mirror", "AlarmClock",
                                                 "Toiletpaper", "SoapBottle"};
  return kObjects;
}

void synthesize_memory(MemoryStore& store, Setup setup, int episodes, std::uint64_t seed, const Embedder& embedder,
                       const RunConfig& cfg, Scenario scenario) {
  const Rng root(seed);
  for (int i = 0; i < episodes; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    std::vector<DemoStep> steps;
    if (setup == Setup::Fpv) {
      const auto& objects = fpv_training_objects();
      const std::string& target = objects[static_cast<std::size_t>(i) % objects.size()];
      std::vector<RoomType> rooms;
      for (auto room : kAllRoomTypes) {
        const auto& list = room_objects(room);
        if (std::find(list.begin(), list.end(), target) != list.end()) rooms.push_back(room);
      }
      const RoomType room = rooms[(static_cast<std::size_t>(i) / objects.size()) % rooms.size()];
      steps = record_fpv_demo(generate_fpv_scene({room, target}, rng), embedder, cfg, scenario);
    } else {
      steps = record_tpv_demo(generate_tpv_scene({}, rng), embedder, cfg, scenario);
    }
    if (!steps.empty()) store.append_episode(embedder.id(), std::move(steps));
  }
}

}  // namespace s2p
