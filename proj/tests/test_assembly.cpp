// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "shuttlekit/assembly.hpp"
#include "shuttlekit/events.hpp"
#include "shuttlekit/prng.hpp"

using namespace shuttlekit;

namespace {

PlayerBox box(double x1, double y1, double x2, double y2) {
  PlayerBox b;
  b.x1 = x1;
  b.y1 = y1;
  b.x2 = x2;
  b.y2 = y2;
  return b;
}

// Brute-force corner oracle used to freeze nearest_vertex expectations.
Point2 nearest_corner_oracle(const PlayerBox& b, Point2 p) {
  const Point2 corners[4] = {{b.x1, b.y1}, {b.x2, b.y1}, {b.x2, b.y2}, {b.x1, b.y2}};
  Point2 best = corners[0];
  double best_d = 1e300;
  for (const Point2& c : corners) {
    const double d = std::hypot(c.x - p.x, c.y - p.y);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

PlayerPose pose_with_ankles(Point2 left, double left_conf, Point2 right, double right_conf) {
  PlayerPose p;
  p.box = box(0, 0, 40, 120);
  for (auto& kp : p.kp) kp = {20.0, 60.0, 0.9};
  p.kp[15] = {left.x, left.y, left_conf};
  p.kp[16] = {right.x, right.y, right_conf};
  return p;
}

// Two players (top and bottom court half), a track point, and full class
// probabilities for n shots at the given frames.
struct Fixture {
  DetectionBundle bundle;
  ClassProbs probs;
  Rally events;
};

Fixture make_fixture(const std::vector<long long>& frames, bool with_ball = true) {
  Fixture f;
  for (long long frame : frames) {
    FrameDetections& fd = f.bundle.frame(frame);
    fd.players.push_back(box(600, 100, 700, 300));  // top half
    fd.players.push_back(box(500, 500, 640, 700));  // bottom half
    if (with_ball) fd.track = Point2{512.0, 420.0};
  }
  f.bundle.frame(frames.back() + 10);  // range extends past the last hit

  f.events = to_shot_rows(
      [&frames] {
        std::vector<HitEvent> ev;
        for (long long fr : frames) ev.push_back({fr, 1.0});
        return ev;
      }(),
      "fixture");

  for (std::size_t j = 1; j <= frames.size(); ++j) {
    const int seq = static_cast<int>(j);
    f.probs.entries[{seq, "hitter"}].push_back(j % 2 ? std::vector<double>{0.9, 0.1}
                                                     : std::vector<double>{0.1, 0.9});
    f.probs.entries[{seq, "round_head"}].push_back({0.2, 0.8});
    f.probs.entries[{seq, "backhand"}].push_back({0.7, 0.3});
    f.probs.entries[{seq, "ball_height"}].push_back({0.4, 0.6});
    f.probs.entries[{seq, "ball_type"}].push_back({0.01, 0.02, 0.9, 0.01, 0.01, 0.01, 0.02, 0.01, 0.01});
    f.probs.entries[{seq, "winner"}].push_back({0.1, 0.85, 0.05});
  }
  return f;
}

}  // namespace

TEST_CASE("alternate_hitters", "[assembly]") {
  CHECK(alternate_hitters("A", 4) == std::vector<std::string>{"A", "B", "A", "B"});
  CHECK(alternate_hitters("B", 1) == std::vector<std::string>{"B"});
  CHECK(alternate_hitters("A", 0).empty());
  CHECK_THROWS_AS(alternate_hitters("C", 2), DataError);
}

TEST_CASE("vote_ensemble", "[assembly]") {
  CHECK(vote_ensemble({2, 2, 1, 2, 3}) == 2);
  CHECK(vote_ensemble({1, 2}) == 1);  // tie breaks to the smaller label
  CHECK(vote_ensemble({7, 7, 7, 7}) == 7);
  CHECK_THROWS_AS(vote_ensemble({}), DataError);
}

TEST_CASE("mean_ensemble", "[assembly]") {
  CHECK(mean_ensemble({{0.0255, 0.9745}}) == 2);
  CHECK(mean_ensemble({{0.0255, 0.9745}, {0.0255, 0.9745}}) == 2);
  CHECK(mean_ensemble({{1.0, 0.0}, {0.0, 1.0}}) == 1);  // uniform mean: smallest index
  CHECK_THROWS_AS(mean_ensemble({}), DataError);
  CHECK_THROWS_AS(mean_ensemble({{0.5, 0.5}, {1.0}}), DataError);
}

TEST_CASE("mean and vote agree on unanimous inputs", "[assembly][property]") {
  Xorshift64Star rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 9));
    const int winner_idx = static_cast<int>(rng.uniform_int(0, n - 1));
    const auto k = rng.uniform_int(1, 6);
    std::vector<std::vector<double>> vectors;
    std::vector<int> labels;
    for (long long i = 0; i < k; ++i) {
      std::vector<double> v(static_cast<std::size_t>(n));
      double rest = 0.4 * rng.uniform();  // winner keeps a clear majority
      for (int j = 0; j < n; ++j)
        v[static_cast<std::size_t>(j)] = j == winner_idx ? 0.0 : rest / n;
      double sum = 0.0;
      for (double x : v) sum += x;
      v[static_cast<std::size_t>(winner_idx)] = 1.0 - sum;
      vectors.push_back(std::move(v));
      labels.push_back(winner_idx + 1);
    }
    REQUIRE(mean_ensemble(vectors) == winner_idx + 1);
    REQUIRE(vote_ensemble(labels) == winner_idx + 1);
  }
}

TEST_CASE("mean_ensemble: scaling all vectors by one constant is argmax-invariant",
          "[assembly][property]") {
  // scaled vectors no longer sum to 1, but the op is pure argmax-of-mean
  Xorshift64Star rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> vectors;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> v(5);
      for (double& x : v) x = rng.uniform();
      vectors.push_back(std::move(v));
    }
    const int base = mean_ensemble(vectors);
    for (double c : {0.5, 2.0, 10.0}) {
      auto scaled = vectors;
      for (auto& v : scaled)
        for (double& x : v) x *= c;
      REQUIRE(mean_ensemble(scaled) == base);
    }
  }
}

TEST_CASE("nearest_vertex", "[assembly]") {
  const PlayerBox b = box(0, 0, 10, 10);
  CHECK(nearest_vertex(b, {100, 100}) == Point2{10, 10});
  CHECK(nearest_vertex(b, {5, 5}) == Point2{0, 0});  // 4-way tie: top-left
  CHECK(nearest_vertex(b, {-5, 3}) == nearest_corner_oracle(b, {-5, 3}));

  Xorshift64Star rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const PlayerBox rb = box(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100),
                             rng.uniform(51, 100));
    const Point2 p{rng.uniform(-20, 120), rng.uniform(-20, 120)};
    REQUIRE(nearest_vertex(rb, p) == nearest_corner_oracle(rb, p));
  }
}

TEST_CASE("foot_position", "[assembly]") {
  const AssemblyConfig cfg;
  SECTION("confident ankles average") {
    const auto p = pose_with_ankles({10, 100}, 0.9, {20, 100}, 0.9);
    CHECK(foot_position(p, cfg) == Point2{15, 100});
  }
  SECTION("one low-confidence ankle defers to the other") {
    const auto p = pose_with_ankles({10, 100}, 0.0, {20, 104}, 0.9);
    CHECK(foot_position(p, cfg) == Point2{20, 104});
  }
  SECTION("both low fall back to the box bottom-center") {
    const auto p = pose_with_ankles({10, 100}, 0.05, {20, 104}, 0.09);
    CHECK(foot_position(p, cfg) == Point2{20, 120});
  }
  SECTION("ankle indices come from config") {
    AssemblyConfig alt = cfg;
    alt.ankle_indices = {0, 1};
    PlayerPose p = pose_with_ankles({10, 100}, 0.9, {20, 100}, 0.9);
    p.kp[0] = {2, 4, 0.9};
    p.kp[1] = {4, 8, 0.9};
    CHECK(foot_position(p, alt) == Point2{3, 6});
  }
}

TEST_CASE("resolve_landing", "[assembly]") {
  const AssemblyConfig cfg;
  const PlayerBox hitter = box(400, 500, 560, 603);

  SECTION("track point x with hitter-box bottom y") {
    DetectionBundle bundle;
    bundle.frame(30).track = Point2{512, 420};
    CHECK(resolve_landing(30, bundle, &hitter, cfg) == Point2{512, 603});
  }
  SECTION("no track falls back to the ball detection") {
    DetectionBundle bundle;
    PlayerBox hb = box(300, 300, 500, 650);
    bundle.frame(30).ball = Point2{400, 380};
    CHECK(resolve_landing(30, bundle, &hb, cfg) == Point2{400, 650});
  }
  SECTION("track preferred over detection") {
    DetectionBundle bundle;
    bundle.frame(30).track = Point2{512, 420};
    bundle.frame(30).ball = Point2{90, 90};
    CHECK(resolve_landing(30, bundle, &hitter, cfg).x == 512);
  }
  SECTION("no ball evidence at the frame gives (0,0)") {
    DetectionBundle bundle;
    bundle.frame(30);
    CHECK(resolve_landing(30, bundle, &hitter, cfg) == Point2{0, 0});
    CHECK(resolve_landing(31, bundle, &hitter, cfg) == Point2{0, 0});  // empty frame
  }
  SECTION("landing_y_source=ball keeps the ball's own y") {
    AssemblyConfig ball_y = cfg;
    ball_y.landing_y_source = LandingYSource::ball;
    DetectionBundle bundle;
    bundle.frame(30).track = Point2{512, 420};
    CHECK(resolve_landing(30, bundle, &hitter, ball_y) == Point2{512, 420});
  }
  SECTION("missing hitter box keeps the ball's own y") {
    DetectionBundle bundle;
    bundle.frame(30).track = Point2{512, 420};
    CHECK(resolve_landing(30, bundle, nullptr, cfg) == Point2{512, 420});
  }
}

TEST_CASE("assign_roles_and_locations: side mapping", "[assembly]") {
  DetectionBundle bundle;
  FrameDetections& fd = bundle.frame(10);
  fd.players.push_back(box(600, 100, 700, 300));  // top
  fd.players.push_back(box(500, 500, 640, 700));  // bottom

  AssemblyConfig cfg;
  cfg.side_of_a = CourtSide::bottom;
  const Point2 ball{512, 420};

  const auto a = assign_roles_and_locations("A", bundle, 10, ball, cfg);
  REQUIRE(a.ok);
  REQUIRE(a.hitter_box.has_value());
  CHECK(a.hitter_box->y1 == 500);  // A sits on the bottom half

  const auto b = assign_roles_and_locations("B", bundle, 10, ball, cfg);
  REQUIRE(b.ok);
  CHECK(b.hitter_box->y1 == 100);

  cfg.side_of_a = CourtSide::top;
  const auto a_top = assign_roles_and_locations("A", bundle, 10, ball, cfg);
  CHECK(a_top.hitter_box->y1 == 100);

  // bbox-vertex locations: corner closest to the ball
  CHECK(a.hitter_location == nearest_corner_oracle(*a.hitter_box, ball));
  CHECK(a.defender_location == nearest_corner_oracle(*a.defender_box, ball));
}

TEST_CASE("assign_roles_and_locations: pose feet", "[assembly]") {
  DetectionBundle bundle;
  FrameDetections& fd = bundle.frame(10);
  fd.players.push_back(box(600, 100, 700, 300));
  fd.players.push_back(box(500, 500, 640, 700));
  PlayerPose top_pose = pose_with_ankles({620, 290}, 0.9, {680, 292}, 0.9);
  top_pose.box = box(600, 100, 700, 300);
  PlayerPose bottom_pose = pose_with_ankles({520, 690}, 0.9, {560, 694}, 0.9);
  bottom_pose.box = box(500, 500, 640, 700);
  fd.poses.push_back(top_pose);
  fd.poses.push_back(bottom_pose);

  AssemblyConfig cfg;
  cfg.location_mode = LocationMode::pose_feet;
  const auto r = assign_roles_and_locations("A", bundle, 10, Point2{512, 420}, cfg);
  REQUIRE(r.ok);
  CHECK(r.hitter_location == Point2{540, 692});    // bottom ankle midpoint
  CHECK(r.defender_location == Point2{650, 291});  // top ankle midpoint
}

TEST_CASE("assign_roles_and_locations: missing player box falls back", "[assembly]") {
  DetectionBundle bundle;
  bundle.frame(10).players.push_back(box(600, 100, 700, 300));
  const auto r = assign_roles_and_locations("A", bundle, 10, Point2{0, 0}, AssemblyConfig{});
  CHECK_FALSE(r.ok);
  CHECK(r.hitter_location == Point2{0, 0});
  CHECK(r.defender_location == Point2{0, 0});
  CHECK_FALSE(r.hitter_box.has_value());
}

TEST_CASE("assemble_submission: full synthetic inputs pass validate", "[assembly]") {
  const Fixture f = make_fixture({12, 50, 88});
  std::vector<std::string> warnings;
  const Rally r = assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{}, &warnings);
  CHECK(warnings.empty());
  CHECK(validate(r).ok());
  REQUIRE(r.shots.size() == 3);
  CHECK(r.shots[0].round_head == 2);
  CHECK(r.shots[0].backhand == 1);
  CHECK(r.shots[0].ball_height == 2);
  CHECK(r.shots[0].ball_type == 3);
  CHECK(r.shots[0].winner.empty());
  CHECK(r.shots[1].winner.empty());
  CHECK(r.shots[2].winner == "B");
  CHECK(r.shots[0].landing == Point2{512, 700});  // track x, bottom box y2
}

TEST_CASE("assemble_submission: alternation is seeded by the first shot", "[assembly]") {
  Fixture f = make_fixture({12, 50, 88});
  // first shot predicts B; later predictions say B too but must be overridden
  f.probs.entries[{1, "hitter"}] = {{0.1, 0.9}};
  f.probs.entries[{2, "hitter"}] = {{0.1, 0.9}};
  f.probs.entries[{3, "hitter"}] = {{0.1, 0.9}};
  const Rally r = assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{});
  REQUIRE(r.shots.size() == 3);
  CHECK(r.shots[0].hitter == "B");
  CHECK(r.shots[1].hitter == "A");
  CHECK(r.shots[2].hitter == "B");

  AssemblyConfig raw;
  raw.alternate = false;
  const Rally u = assemble_submission(f.events, f.probs, f.bundle, raw);
  CHECK(u.shots[1].hitter == "B");  // ablation mode keeps per-shot outputs
}

TEST_CASE("assemble_submission: no consecutive equal hitters on random fixtures",
          "[assembly][property]") {
  Xorshift64Star rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 9));
    std::vector<long long> frames;
    long long fr = rng.uniform_int(0, 20);
    for (int i = 0; i < n; ++i) {
      frames.push_back(fr);
      fr += rng.uniform_int(5, 40);
    }
    Fixture f = make_fixture(frames);
    for (int j = 1; j <= n; ++j) {
      const double pa = rng.uniform();
      f.probs.entries[{j, "hitter"}] = {{pa, 1.0 - pa}};
    }
    const Rally r = assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{});
    REQUIRE(validate(r).ok());
    for (std::size_t j = 1; j < r.shots.size(); ++j)
      REQUIRE(r.shots[j].hitter != r.shots[j - 1].hitter);
    for (std::size_t j = 0; j + 1 < r.shots.size(); ++j) REQUIRE(r.shots[j].winner.empty());
  }
}

TEST_CASE("assemble_submission: missing ball evidence lands at (0,0)", "[assembly]") {
  const Fixture f = make_fixture({12, 50}, /*with_ball=*/false);
  std::vector<std::string> warnings;
  const Rally r = assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{}, &warnings);
  CHECK(validate(r).ok());
  for (const Shot& s : r.shots) CHECK(s.landing == Point2{0, 0});
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("assemble_submission: errors", "[assembly]") {
  Fixture f = make_fixture({12, 50});
  SECTION("probability coverage gap") {
    f.probs.entries.erase({2, "ball_type"});
    CHECK_THROWS_WITH(assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{}),
                      Catch::Matchers::ContainsSubstring("ball_type"));
  }
  SECTION("hit frame outside detection range") {
    f.events.shots[1].hit_frame = 10000;
    CHECK_THROWS_WITH(assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{}),
                      Catch::Matchers::ContainsSubstring("outside detection range"));
  }
  SECTION("probability vector sized against the wrong domain") {
    f.probs.entries[{1, "ball_type"}] = {{0.5, 0.5}};
    CHECK_THROWS_AS(assemble_submission(f.events, f.probs, f.bundle, AssemblyConfig{}),
                    DataError);
  }
}

TEST_CASE("loaders: detections, track, poses, probs", "[assembly]") {
  DetectionBundle bundle;
  load_detections_jsonl(bundle,
                        R"({"frame":3,"kind":"player","x1":10,"y1":20,"x2":30,"y2":40,"conf":0.8}
{"frame":3,"kind":"ball","x1":100,"y1":150})");
  load_track_csv(bundle, "frame,x,y,visible\n3,101,151,1\n4,0,0,0\n");
  load_poses_jsonl(
      bundle,
      R"({"frame":3,"box":[10,20,30,40],"kp":[[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[1,2,0.9],[5,6,0.9],[7,8,0.9]]})");

  CHECK(bundle.frame_count == 5);
  const FrameDetections* fd = bundle.find(3);
  REQUIRE(fd != nullptr);
  REQUIRE(fd->players.size() == 1);
  CHECK(fd->players[0].conf == 0.8);
  CHECK(fd->ball == Point2{100, 150});
  CHECK(fd->track == Point2{101, 151});
  REQUIRE(fd->poses.size() == 1);
  CHECK(fd->poses[0].kp[15].x == 5);
  CHECK_FALSE(bundle.find(4)->track.has_value());  // visible=0

  const ClassProbs probs =
      load_class_probs_jsonl(R"({"shot_seq":1,"attribute":"hitter","probs":[0.0255,0.9745]})");
  REQUIRE(probs.find(1, "hitter") != nullptr);
  CHECK(mean_ensemble(*probs.find(1, "hitter")) == 2);
}

TEST_CASE("loaders: malformed inputs", "[assembly]") {
  DetectionBundle bundle;
  CHECK_THROWS_AS(load_detections_jsonl(bundle, "not json"), ParseError);
  CHECK_THROWS_AS(load_detections_jsonl(bundle, R"({"frame":1,"kind":"car","x1":0,"y1":0})"),
                  ParseError);
  CHECK_THROWS_AS(
      load_detections_jsonl(bundle, R"({"frame":1,"kind":"player","x1":9,"y1":0,"x2":1,"y2":5})"),
      ParseError);
  CHECK_THROWS_AS(load_track_csv(bundle, "frame,x,y\n"), ParseError);
  CHECK_THROWS_AS(load_poses_jsonl(bundle, R"({"frame":1,"box":[0,0,1,1],"kp":[[1,2,3]]})"),
                  ParseError);
  CHECK_THROWS_AS(
      load_class_probs_jsonl(R"({"shot_seq":1,"attribute":"hitter","probs":[0.9,0.9]})"),
      ParseError);  // does not sum to 1
}
