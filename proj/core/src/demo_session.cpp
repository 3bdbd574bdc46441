#include "s2p/demo_session.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "s2p/controller.hpp"
#include "s2p/error.hpp"
#include "s2p/image_io.hpp"
#include "s2p/prompt.hpp"
#include "s2p/util.hpp"

namespace s2p {

using nlohmann::json;

DemoSession DemoSession::fpv(FpvScene scene, RunConfig cfg) {
  DemoSession s;
  s.setup_ = Setup::Fpv;
  s.cfg_ = validate_config(std::move(cfg));
  s.fpv_ = std::move(scene);
  s.refresh();
  return s;
}

DemoSession DemoSession::tpv(TpvScene scene, RunConfig cfg, int crop_margin) {
  DemoSession s;
  s.setup_ = Setup::Tpv;
  s.cfg_ = validate_config(std::move(cfg));
  s.crop_margin_ = crop_margin;
  s.mask_ = capture_floor_mask(scene);
  s.renderer_.emplace(scene);
  s.tpv_ = std::move(scene);
  s.refresh();
  return s;
}

void DemoSession::refresh() {
  const auto tick = static_cast<std::uint64_t>(steps_.size());
  if (setup_ == Setup::Fpv) {
    const FpvView view = fpv_render(*fpv_, tick);
    std::vector<SeenObject> seen;
    for (const auto& o : view.seen) seen.push_back({o.object_class, o.bearing});
    episodic_ = observe(std::move(episodic_), seen);
    live_ = fpv_overlay(view.frame);
  } else {
    live_ = tpv_annotate(*tpv_, renderer_->render(tpv_->robot, tick), *mask_, cfg_.ring, crop_margin_);
  }
}

std::optional<std::string> DemoSession::episodic_text() const {
  if (setup_ != Setup::Fpv) return std::nullopt;
  return to_prompt_text(episodic_);
}

json DemoSession::state() const {
  const Frame drawn = draw(live_);
  json labels = json::array();
  for (const auto& l : live_.labels) labels.push_back(l);
  json j{{"setup", to_string(setup_)},
         {"step", step_index()},
         {"frame_png", base64_encode(encode_png(drawn))},
         {"width", drawn.width()},
         {"height", drawn.height()},
         {"labels", labels},
         {"valid_ids", live_.valid_ids()},
         {"finished", finished_}};
  const auto text = episodic_text();
  j["episodic"] = text ? json(*text) : json(nullptr);
  if (fpv_) j["target"] = fpv_->target;
  return j;
}

void DemoSession::step(int action, std::string explanation) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "episode already ended");
  const auto ids = live_.valid_ids();
  if (std::find(ids.begin(), ids.end(), action) == ids.end())
    throw Error(ErrorCode::UnknownLabel, std::to_string(action));
  steps_.push_back({live_, episodic_text(), action, std::move(explanation)});

  if (setup_ == Setup::Fpv) {
    const FpvStepResult res = fpv_step(*fpv_, action);
    if (res.event == FpvEvent::Rotated) episodic_ = rotate(std::move(episodic_), meaning_of(action).rotation_degrees);
    episodic_.pitch = res.scene.agent.pitch;
    episodic_ = record_action(std::move(episodic_), action, std::nullopt, static_cast<std::size_t>(cfg_.max_steps));
    *fpv_ = res.scene;
    if (res.event == FpvEvent::Success || res.event == FpvEvent::Failure) finished_ = true;
  } else {
    const Label* l = live_.find(action);
    if (l->kind != LabelKind::RobotOrigin && l->world) {
      const ObstacleMap obstacles = tpv_->obstacle_map();
      TrackOptions topt;
      topt.obstacles = &obstacles;
      const WorldPoint wp = *l->world;
      const TrackResult tr = pd_track(tpv_->robot, std::span<const WorldPoint>(&wp, 1),
                                      PdController{cfg_.controller, cfg_.waypoint_tolerance}, topt);
      tpv_->robot = tr.final_pose();
      if (tr.collided || distance(tpv_->robot.position(), tpv_->goal) <= tpv_->goal_radius) finished_ = true;
    }
  }
  if (static_cast<int>(steps_.size()) >= cfg_.max_steps) finished_ = true;
  if (!finished_) refresh();
}

std::vector<DemoStep> DemoSession::finish(const std::string& target_object, const Embedder& embedder,
                                          Scenario scenario) const {
  if (steps_.empty()) throw Error(ErrorCode::EmptyEpisode, "no steps recorded");
  const TaskSpec task{setup_, setup_ == Setup::Fpv ? target_object : std::string()};
  std::vector<DemoStep> out;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& r = steps_[i];
    DemoStep d;
    d.frame = draw(r.frame);
    d.sample.prompt = live_query_text(r.frame, r.episodic, task);
    d.sample.answer.explanation = r.explanation;
    if (setup_ == Setup::Fpv) {
      const int next = i + 1 < steps_.size() ? steps_[i + 1].action : 0;
      d.sample.answer.commands = {r.action, next};
    } else {
      d.sample.answer.commands = {r.action};
    }
    d.sample.embedding = to_f32(embedder.embed(d.frame));
    d.sample.setup = setup_;
    d.sample.scenario = scenario;
    if (!target_object.empty()) d.sample.target_object = target_object;
    if (fpv_) d.sample.room_id = fpv_->room_id;
    if (tpv_) d.sample.room_id = tpv_->room_id;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace s2p
