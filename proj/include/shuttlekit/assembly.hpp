// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Fills the 12 attribute columns of a partial rally from ingested player
// boxes, ball points, track points, pose keypoints and classifier
// probabilities, using the rule-based heuristics of the pipeline.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shuttlekit/rally.hpp"
#include "shuttlekit/util.hpp"

namespace shuttlekit {

inline constexpr int kPoseKeypointCount = 17;  // COCO order

struct PlayerBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double conf = 1.0;

  Point2 center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
  Point2 bottom_center() const { return {(x1 + x2) / 2.0, y2}; }
};

struct PoseKeypoint {
  double x = 0, y = 0, conf = 0;
};

struct PlayerPose {
  PlayerBox box;
  std::array<PoseKeypoint, kPoseKeypointCount> kp{};
};

struct FrameDetections {
  std::vector<PlayerBox> players;
  std::optional<Point2> ball;   // raw detector point
  std::optional<Point2> track;  // trajectory-model point, preferred over ball
  std::vector<PlayerPose> poses;
};

// Per-frame detections for one clip. frame_count is one past the largest
// frame any loader saw; frames without an entry simply had no detections.
struct DetectionBundle {
  std::map<long long, FrameDetections> frames;
  long long frame_count = 0;

  FrameDetections& frame(long long f) {
    frame_count = std::max(frame_count, f + 1);
    return frames[f];
  }
  const FrameDetections* find(long long f) const {
    auto it = frames.find(f);
    return it == frames.end() ? nullptr : &it->second;
  }
};

// Classifier probability vectors, several per (shot, attribute) when
// multiple folds contributed.
struct ClassProbs {
  std::map<std::pair<int, std::string>, std::vector<std::vector<double>>> entries;

  const std::vector<std::vector<double>>* find(int shot_seq, std::string_view attribute) const {
    auto it = entries.find({shot_seq, std::string(attribute)});
    return it == entries.end() ? nullptr : &it->second;
  }
};

enum class CourtSide { top, bottom };
enum class LocationMode { bbox_vertex, pose_feet };
enum class LandingYSource { box, ball };

struct AssemblyConfig {
  CourtSide side_of_a = CourtSide::bottom;  // court half that player A occupies
  LocationMode location_mode = LocationMode::bbox_vertex;
  std::array<int, 2> ankle_indices{15, 16};  // COCO left/right ankle
  double keypoint_conf_floor = 0.1;
  LandingYSource landing_y_source = LandingYSource::box;
  // Rewrite hitters as a strict A/B alternation seeded by the first shot's
  // prediction. Off keeps the raw per-shot classifier outputs.
  bool alternate = true;
};

// --- label fusion ----------------------------------------------------------

// Strictly alternating hitter sequence of length n starting at `first`.
inline std::vector<std::string> alternate_hitters(const std::string& first, std::size_t n) {
  if (first != "A" && first != "B") throw DataError("hitter label must be A or B");
  std::vector<std::string> out;
  out.reserve(n);
  const std::string other = first == "A" ? "B" : "A";
  for (std::size_t i = 0; i < n; ++i) out.push_back(i % 2 == 0 ? first : other);
  return out;
}

// Majority vote; ties break to the smallest label.
inline int vote_ensemble(const std::vector<int>& labels) {
  if (labels.empty()) throw DataError("vote over zero labels");
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  int best = labels.front();
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts)  // ascending labels: first max wins ties
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  return best;
}

// Argmax of the element-wise mean, as a 1-based category; ties break to the
// smallest index.
inline int mean_ensemble(const std::vector<std::vector<double>>& prob_vectors) {
  if (prob_vectors.empty()) throw DataError("mean ensemble over zero vectors");
  const std::size_t n = prob_vectors.front().size();
  if (n == 0) throw DataError("empty probability vector");
  for (const auto& v : prob_vectors)
    if (v.size() != n) throw DataError("probability vector length mismatch");

  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& v : prob_vectors) sum += v[i];
    const double m = sum / static_cast<double>(prob_vectors.size());
    if (m > best_mean) {
      best_mean = m;
      best = i;
    }
  }
  return static_cast<int>(best) + 1;
}

// --- geometry rules --------------------------------------------------------

// Box corner closest to `point`. Ties resolve top-left first, then clockwise
// (TL, TR, BR, BL).
inline Point2 nearest_vertex(const PlayerBox& box, Point2 point) {
  const Point2 corners[4] = {
      {box.x1, box.y1}, {box.x2, box.y1}, {box.x2, box.y2}, {box.x1, box.y2}};
  Point2 best = corners[0];
  double best_d2 = -1.0;
  for (const Point2& c : corners) {
    const double dx = c.x - point.x, dy = c.y - point.y;
    const double d2 = dx * dx + dy * dy;
    if (best_d2 < 0.0 || d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

// Midpoint of the two ankle keypoints; one low-confidence ankle defers to
// the other, both low fall back to the bottom-center of the pose box.
inline Point2 foot_position(const PlayerPose& pose, const AssemblyConfig& cfg) {
  const auto [ia, ib] = cfg.ankle_indices;
  if (ia < 0 || ia >= kPoseKeypointCount || ib < 0 || ib >= kPoseKeypointCount)
    throw DataError("ankle keypoint index out of range");
  const PoseKeypoint& a = pose.kp[static_cast<std::size_t>(ia)];
  const PoseKeypoint& b = pose.kp[static_cast<std::size_t>(ib)];
  const bool a_ok = a.conf >= cfg.keypoint_conf_floor;
  const bool b_ok = b.conf >= cfg.keypoint_conf_floor;
  if (a_ok && b_ok) return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
  if (a_ok) return {a.x, a.y};
  if (b_ok) return {b.x, b.y};
  return pose.box.bottom_center();
}

// Landing point at a hit frame. X comes from the trajectory track if
// present, else from the raw ball detection; with no ball evidence at all
// the landing is (0,0). Y is taken from the hitter box's bottom-right corner
// (or from the ball point itself, per config, or when no box is available).
inline Point2 resolve_landing(long long hit_frame, const DetectionBundle& bundle,
                              const PlayerBox* hitter_box, const AssemblyConfig& cfg) {
  const FrameDetections* fd = bundle.find(hit_frame);
  if (fd == nullptr) return {0.0, 0.0};
  std::optional<Point2> ball = fd->track ? fd->track : fd->ball;
  if (!ball) return {0.0, 0.0};
  if (cfg.landing_y_source == LandingYSource::ball || hitter_box == nullptr)
    return {ball->x, ball->y};
  return {ball->x, hitter_box->y2};
}

struct RoleLocations {
  Point2 hitter_location{0.0, 0.0};
  Point2 defender_location{0.0, 0.0};
  std::optional<PlayerBox> hitter_box;
  std::optional<PlayerBox> defender_box;
  bool ok = false;
  std::string note;  // set when falling back
};

namespace detail {

inline const PlayerPose* pose_for_box(const std::vector<PlayerPose>& poses,
                                      const PlayerBox& box) {
  const PlayerPose* best = nullptr;
  double best_d2 = 0.0;
  for (const PlayerPose& p : poses) {
    const Point2 a = p.box.center(), b = box.center();
    const double dx = a.x - b.x, dy = a.y - b.y;
    const double d2 = dx * dx + dy * dy;
    if (best == nullptr || d2 < best_d2) {
      best = &p;
      best_d2 = d2;
    }
  }
  return best;
}

inline Point2 player_location(const PlayerBox& box, const FrameDetections& fd,
                              std::optional<Point2> ball, const AssemblyConfig& cfg) {
  if (cfg.location_mode == LocationMode::pose_feet) {
    if (const PlayerPose* pose = detail::pose_for_box(fd.poses, box))
      return foot_position(*pose, cfg);
    return box.bottom_center();  // no pose for this player
  }
  if (!ball) return box.bottom_center();  // no ball to aim a vertex at
  return nearest_vertex(box, *ball);
}

}  // namespace detail

// Splits the (exactly two) player boxes at a frame into hitter and defender
// by court half: the box whose center sits in the half mapped to the
// predicted hitter label is the hitter's. Anything but two boxes reports a
// fallback with both locations (0,0).
inline RoleLocations assign_roles_and_locations(const std::string& shot_hitter,
                                                const DetectionBundle& bundle,
                                                long long hit_frame,
                                                std::optional<Point2> ball,
                                                const AssemblyConfig& cfg) {
  RoleLocations out;
  const FrameDetections* fd = bundle.find(hit_frame);
  if (fd == nullptr || fd->players.size() != 2) {
    out.note = "frame " + std::to_string(hit_frame) + ": expected 2 player boxes, got " +
               std::to_string(fd == nullptr ? 0 : fd->players.size());
    return out;
  }

  const PlayerBox& first = fd->players[0];
  const PlayerBox& second = fd->players[1];
  const bool first_is_top = first.center().y <= second.center().y;
  const PlayerBox& top = first_is_top ? first : second;
  const PlayerBox& bottom = first_is_top ? second : first;

  const bool hitter_is_a = shot_hitter == "A";
  const bool a_is_top = cfg.side_of_a == CourtSide::top;
  const PlayerBox& hitter_box = (hitter_is_a == a_is_top) ? top : bottom;
  const PlayerBox& defender_box = (hitter_is_a == a_is_top) ? bottom : top;

  out.hitter_box = hitter_box;
  out.defender_box = defender_box;
  out.hitter_location = detail::player_location(hitter_box, *fd, ball, cfg);
  out.defender_location = detail::player_location(defender_box, *fd, ball, cfg);
  out.ok = true;
  return out;
}

// --- submission assembly ---------------------------------------------------

namespace attr {
inline constexpr std::string_view kHitter = "hitter";
inline constexpr std::string_view kRoundHead = "round_head";
inline constexpr std::string_view kBackhand = "backhand";
inline constexpr std::string_view kBallHeight = "ball_height";
inline constexpr std::string_view kBallType = "ball_type";
inline constexpr std::string_view kWinner = "winner";
}  // namespace attr

namespace detail {

template <class T>
inline T category_value(const std::vector<T>& domain, int category, std::string_view attribute) {
  if (category < 1 || static_cast<std::size_t>(category) > domain.size())
    throw DataError("category " + std::to_string(category) + " out of range for " +
                    std::string(attribute));
  return domain[static_cast<std::size_t>(category) - 1];
}

inline int fused_category(const ClassProbs& probs, int shot_seq, std::string_view attribute,
                          std::size_t domain_size) {
  const auto* vectors = probs.find(shot_seq, attribute);
  if (vectors == nullptr || vectors->empty())
    throw DataError("no class probabilities for shot " + std::to_string(shot_seq) + " attribute " +
                    std::string(attribute));
  for (const auto& v : *vectors)
    if (v.size() != domain_size)
      throw DataError("probability vector for " + std::string(attribute) + " has " +
                      std::to_string(v.size()) + " entries, domain has " +
                      std::to_string(domain_size));
  return mean_ensemble(*vectors);
}

}  // namespace detail

// Builds the full submission rally from hit events plus ingested evidence.
// Attribute columns fuse per-shot probability vectors with the mean
// ensemble; hitters are then rewritten as a strict alternation seeded by the
// first shot (unless cfg.alternate is off). Winner is filled on the last
// shot only. Coordinates follow the landing and role rules, falling back to
// (0,0) when evidence is missing; fallbacks land in `warnings`.
inline Rally assemble_submission(const Rally& events, const ClassProbs& probs,
                                 const DetectionBundle& bundle, const AssemblyConfig& cfg,
                                 std::vector<std::string>* warnings = nullptr,
                                 const CategoryDomains& domains = default_domains()) {
  Rally out;
  out.rally_id = events.rally_id;
  out.shots = events.shots;
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  for (Shot& s : out.shots) {
    if (s.hit_frame >= bundle.frame_count)
      throw DataError("hit_frame " + std::to_string(s.hit_frame) +
                      " outside detection range (frame_count " +
                      std::to_string(bundle.frame_count) + ")");

    s.hitter = detail::category_value(domains.hitter,
                                      detail::fused_category(probs, s.shot_seq, attr::kHitter,
                                                             domains.hitter.size()),
                                      attr::kHitter);
    s.round_head = detail::category_value(
        domains.round_head,
        detail::fused_category(probs, s.shot_seq, attr::kRoundHead, domains.round_head.size()),
        attr::kRoundHead);
    s.backhand = detail::category_value(
        domains.backhand,
        detail::fused_category(probs, s.shot_seq, attr::kBackhand, domains.backhand.size()),
        attr::kBackhand);
    s.ball_height = detail::category_value(
        domains.ball_height,
        detail::fused_category(probs, s.shot_seq, attr::kBallHeight, domains.ball_height.size()),
        attr::kBallHeight);
    s.ball_type = detail::category_value(
        domains.ball_type,
        detail::fused_category(probs, s.shot_seq, attr::kBallType, domains.ball_type.size()),
        attr::kBallType);
    s.winner.clear();
  }

  if (!out.shots.empty()) {
    Shot& last = out.shots.back();
    last.winner = detail::category_value(
        domains.winner,
        detail::fused_category(probs, last.shot_seq, attr::kWinner, domains.winner.size()),
        attr::kWinner);

    if (cfg.alternate) {
      const auto order = alternate_hitters(out.shots.front().hitter, out.shots.size());
      for (std::size_t i = 0; i < out.shots.size(); ++i) out.shots[i].hitter = order[i];
    }
  }

  for (Shot& s : out.shots) {
    const FrameDetections* fd = bundle.find(s.hit_frame);
    std::optional<Point2> ball;
    if (fd != nullptr) ball = fd->track ? fd->track : fd->ball;

    const RoleLocations roles =
        assign_roles_and_locations(s.hitter, bundle, s.hit_frame, ball, cfg);
    if (!roles.ok) warn(out.rally_id + ": " + roles.note);
    s.hitter_location = roles.hitter_location;
    s.defender_location = roles.defender_location;

    const PlayerBox* hitter_box = roles.hitter_box ? &*roles.hitter_box : nullptr;
    if (!ball && fd != nullptr)
      warn(out.rally_id + ": no ball evidence at frame " + std::to_string(s.hit_frame));
    s.landing = resolve_landing(s.hit_frame, bundle, hitter_box, cfg);

    // detector coordinates can poke past the image edge; the submission
    // format wants non-negative pixels
    for (Point2* p : {&s.landing, &s.hitter_location, &s.defender_location}) {
      p->x = std::max(0.0, p->x);
      p->y = std::max(0.0, p->y);
    }
  }

  return out;
}

// --- ingestion: JSON-lines and CSV sidecar formats --------------------------

namespace detail {

inline nlohmann::json parse_json_line(std::string_view line, std::size_t line_no) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("malformed JSON object", line_no);
  return j;
}

inline double json_number(const nlohmann::json& j, const char* key, std::size_t line_no) {
  if (!j.contains(key) || !j[key].is_number())
    throw ParseError(std::string("missing numeric field '") + key + "'", line_no);
  return j[key].get<double>();
}

template <class Fn>
inline void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = strip_cr(
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace detail

// JSONL, one detection per line:
//   {"frame":12,"kind":"player","x1":..,"y1":..,"x2":..,"y2":..,"conf":..}
// Ball detections are points carried in (x1,y1).
inline void load_detections_jsonl(DetectionBundle& bundle, std::string_view text) {
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const nlohmann::json j = detail::parse_json_line(line, line_no);
    const auto frame = static_cast<long long>(detail::json_number(j, "frame", line_no));
    if (frame < 0) throw ParseError("negative frame index", line_no);
    const std::string kind = j.value("kind", "");
    if (kind == "player") {
      PlayerBox box;
      box.x1 = detail::json_number(j, "x1", line_no);
      box.y1 = detail::json_number(j, "y1", line_no);
      box.x2 = detail::json_number(j, "x2", line_no);
      box.y2 = detail::json_number(j, "y2", line_no);
      box.conf = j.value("conf", 1.0);
      if (box.x1 > box.x2 || box.y1 > box.y2)
        throw ParseError("box corners out of order", line_no);
      bundle.frame(frame).players.push_back(box);
    } else if (kind == "ball") {
      bundle.frame(frame).ball = Point2{detail::json_number(j, "x1", line_no),
                                        detail::json_number(j, "y1", line_no)};
    } else {
      throw ParseError("kind must be 'player' or 'ball'", line_no);
    }
  });
}

// CSV "frame,x,y,visible"; rows with visible=0 contribute no point but still
// extend the covered frame range.
inline void load_track_csv(DetectionBundle& bundle, std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  bool saw_header = false;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    line_no = no;
    if (!saw_header) {
      if (line != "frame,x,y,visible") throw ParseError("expected header 'frame,x,y,visible'", no);
      saw_header = true;
      return;
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 4) throw ParseError("track row needs 4 fields", no);
    long long frame = 0, visible = 0;
    double x = 0, y = 0;
    if (!detail::parse_int(cells[0], frame) || !detail::parse_double(cells[1], x) ||
        !detail::parse_double(cells[2], y) || !detail::parse_int(cells[3], visible))
      throw ParseError("non-numeric track row", no);
    if (frame < 0) throw ParseError("negative frame index", no);
    if (visible != 0 && visible != 1) throw ParseError("visible must be 0 or 1", no);
    FrameDetections& fd = bundle.frame(frame);
    if (visible == 1) fd.track = Point2{x, y};
  });
  (void)pos;
  if (!saw_header) throw ParseError("empty track file", std::max<std::size_t>(line_no, 1));
}

// JSONL, one pose per line: {"frame":n,"box":[x1,y1,x2,y2],"kp":[[x,y,c]x17]}
inline void load_poses_jsonl(DetectionBundle& bundle, std::string_view text) {
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const nlohmann::json j = detail::parse_json_line(line, line_no);
    const auto frame = static_cast<long long>(detail::json_number(j, "frame", line_no));
    if (frame < 0) throw ParseError("negative frame index", line_no);
    if (!j.contains("box") || !j["box"].is_array() || j["box"].size() != 4)
      throw ParseError("pose needs box:[x1,y1,x2,y2]", line_no);
    if (!j.contains("kp") || !j["kp"].is_array() ||
        j["kp"].size() != static_cast<std::size_t>(kPoseKeypointCount))
      throw ParseError("pose needs exactly 17 keypoints", line_no);

    PlayerPose pose;
    pose.box.x1 = j["box"][0].get<double>();
    pose.box.y1 = j["box"][1].get<double>();
    pose.box.x2 = j["box"][2].get<double>();
    pose.box.y2 = j["box"][3].get<double>();
    if (pose.box.x1 > pose.box.x2 || pose.box.y1 > pose.box.y2)
      throw ParseError("box corners out of order", line_no);
    for (std::size_t k = 0; k < kPoseKeypointCount; ++k) {
      const auto& kp = j["kp"][k];
      if (!kp.is_array() || kp.size() != 3) throw ParseError("keypoint needs [x,y,conf]", line_no);
      pose.kp[k] = {kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()};
    }
    bundle.frame(frame).poses.push_back(std::move(pose));
  });
}

// JSONL, one vector per line: {"shot_seq":n,"attribute":"ball_type","probs":[...]}
// Entries must be non-negative and sum to 1 within 1e-6.
inline ClassProbs load_class_probs_jsonl(std::string_view text) {
  ClassProbs probs;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const nlohmann::json j = detail::parse_json_line(line, line_no);
    const auto seq = static_cast<long long>(detail::json_number(j, "shot_seq", line_no));
    if (seq < 1) throw ParseError("shot_seq must be >= 1", line_no);
    if (!j.contains("attribute") || !j["attribute"].is_string())
      throw ParseError("missing 'attribute'", line_no);
    if (!j.contains("probs") || !j["probs"].is_array() || j["probs"].empty())
      throw ParseError("missing 'probs' array", line_no);

    std::vector<double> vec;
    double sum = 0.0;
    for (const auto& p : j["probs"]) {
      if (!p.is_number()) throw ParseError("probs must be numeric", line_no);
      const double v = p.get<double>();
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ParseError("probabilities must be finite and >= 0", line_no);
      vec.push_back(v);
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
      throw ParseError("probabilities sum to " + detail::format_double(sum) + ", expected 1",
                       line_no);
    probs.entries[{static_cast<int>(seq), j["attribute"].get<std::string>()}].push_back(
        std::move(vec));
  });
  return probs;
}

}  // namespace shuttlekit
