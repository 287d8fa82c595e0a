// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic fixtures: random rallies, perturbed predictions with
// known-by-construction per-column correctness, probability streams with
// planted peaks, translating textures with known flow. Also hosts the
// brute-force scoring oracle used to cross-check the scoring engine.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shuttlekit/events.hpp"
#include "shuttlekit/optical_flow.hpp"
#include "shuttlekit/prng.hpp"
#include "shuttlekit/rally.hpp"
#include "shuttlekit/scoring.hpp"
#include "shuttlekit/util.hpp"

namespace shuttlekit::synth {

// --- scoring oracle ---------------------------------------------------------

// Rally total by literal transcription of the scoring rules: plain loops,
// sqrt distances, running double sums. Deliberately shares no code with
// scoring.hpp so that agreement between the two is evidence.
inline double oracle_score(const Rally& gt, const Rally& pred, const ScoringConfig& cfg) {
  if (gt.shots.size() != pred.shots.size()) return 0.0;
  if (gt.shots.empty()) return 0.1;

  double shot_sum = 0.0;
  for (std::size_t j = 0; j < gt.shots.size(); ++j) {
    const Shot& a = gt.shots[j];
    const Shot& b = pred.shots[j];

    long long frame_err = a.hit_frame - b.hit_frame;
    if (frame_err < 0) frame_err = -frame_err;
    if (frame_err > cfg.hit_frame_tolerance) continue;

    auto within = [&cfg](Point2 p, Point2 q, double thr) {
      const double d = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
      return cfg.inclusive_distance ? d <= thr : d < thr;
    };

    double ss = 0.1;
    if (a.hitter == b.hitter) ss += 0.1;
    if (a.ball_height == b.ball_height) ss += 0.1;
    if (within(a.landing, b.landing, cfg.landing_threshold)) ss += 0.1;
    if (within(a.hitter_location, b.hitter_location, cfg.location_threshold)) ss += 0.05;
    if (within(a.defender_location, b.defender_location, cfg.location_threshold)) ss += 0.05;
    if (a.backhand == b.backhand) ss += 0.05;
    if (a.round_head == b.round_head) ss += 0.05;
    if (a.ball_type == b.ball_type) ss += 0.2;
    const bool last = j + 1 == gt.shots.size();
    if (last ? a.winner == b.winner : b.winner.empty()) ss += 0.1;
    shot_sum += ss;
  }
  return 0.1 + shot_sum / static_cast<double>(gt.shots.size());
}

// --- rally generation -------------------------------------------------------

struct SynthParams {
  int min_shots = 2;
  int max_shots = 12;
  long long min_frame_gap = 5;
  long long max_frame_gap = 40;
  double max_x = 1280.0;
  double max_y = 720.0;
  CategoryDomains domains;
  std::uint64_t seed = 1;
};

// Deterministic valid rally: ShotSeq 1..n, strictly increasing frames,
// alternating hitters, integer pixel coordinates, winner on the last shot
// only.
inline Rally gen_rally(const SynthParams& p, std::string rally_id = "rally") {
  if (p.min_shots < 0 || p.max_shots < p.min_shots) throw DataError("bad shot count range");
  if (p.min_frame_gap < 1 || p.max_frame_gap < p.min_frame_gap)
    throw DataError("bad frame gap range");
  if (p.max_x < 0 || p.max_y < 0) throw DataError("bad coordinate range");

  Xorshift64Star rng(p.seed);
  Rally rally;
  rally.rally_id = std::move(rally_id);

  const int n = static_cast<int>(rng.uniform_int(p.min_shots, p.max_shots));
  long long frame = rng.uniform_int(0, p.max_frame_gap);
  std::string hitter = rng.chance(0.5) ? "A" : "B";

  auto point = [&rng, &p]() -> Point2 {
    return {static_cast<double>(rng.uniform_int(0, static_cast<long long>(p.max_x))),
            static_cast<double>(rng.uniform_int(0, static_cast<long long>(p.max_y)))};
  };

  for (int i = 0; i < n; ++i) {
    Shot s;
    s.shot_seq = i + 1;
    s.hit_frame = frame;
    frame += rng.uniform_int(p.min_frame_gap, p.max_frame_gap);
    s.hitter = hitter;
    hitter = hitter == "A" ? "B" : "A";
    s.round_head = rng.pick(p.domains.round_head);
    s.backhand = rng.pick(p.domains.backhand);
    s.ball_height = rng.pick(p.domains.ball_height);
    s.ball_type = rng.pick(p.domains.ball_type);
    s.landing = point();
    s.hitter_location = point();
    s.defender_location = point();
    if (i + 1 == n) s.winner = rng.pick(p.domains.winner);
    rally.shots.push_back(std::move(s));
  }
  return rally;
}

// --- perturbation with known correctness -------------------------------------

enum class FieldAction { keep, corrupt };

// Column-wise perturbation plan. Coordinate offsets are exact displacement
// distances in pixels (0 keeps the point); hit_frame_jitter shifts every hit
// frame by that many frames.
struct PerturbSpec {
  FieldAction hitter = FieldAction::keep;
  FieldAction round_head = FieldAction::keep;
  FieldAction backhand = FieldAction::keep;
  FieldAction ball_height = FieldAction::keep;
  FieldAction ball_type = FieldAction::keep;
  FieldAction winner = FieldAction::keep;
  double landing_offset = 0.0;
  double hitter_location_offset = 0.0;
  double defender_location_offset = 0.0;
  long long hit_frame_jitter = 0;
};

// What is true, by construction, of one perturbed shot. Distances are stored
// squared, computed from the emitted coordinates exactly as the engine
// computes them.
struct ShotFacts {
  long long hit_frame_error = 0;
  bool hitter_equal = true;
  bool ball_height_equal = true;
  bool backhand_equal = true;
  bool round_head_equal = true;
  bool ball_type_equal = true;
  double landing_dist2 = 0.0;
  double hitter_location_dist2 = 0.0;
  double defender_location_dist2 = 0.0;
  bool winner_pred_empty = true;  // non-last shots
  bool winner_equal = true;       // last shot
  bool is_last = false;
};

struct PerturbResult {
  Rally pred;
  std::vector<ShotFacts> facts;
};

namespace detail_synth {

template <class T>
inline T next_in_domain(const std::vector<T>& domain, const T& value) {
  if (domain.size() < 2) throw DataError("cannot corrupt a single-value domain");
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == value) return domain[(i + 1) % domain.size()];
  return domain.front();  // value was already outside; any member differs
}

inline double sq_dist(Point2 a, Point2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline Point2 offset_point(Point2 p, double dist, Xorshift64Star& rng) {
  if (dist <= 0.0) return p;
  // push along +x or +y so the point stays in the valid quadrant and the
  // displacement distance stays exact for dyadic dist
  if (rng.chance(0.5)) return {p.x + dist, p.y};
  return {p.x, p.y + dist};
}

}  // namespace detail_synth

// Applies `spec` to every shot of a valid rally and records the resulting
// per-column truth, enabling closed-form expected scores.
inline PerturbResult perturb(const Rally& gt, const PerturbSpec& spec, std::uint64_t seed,
                             const CategoryDomains& domains = default_domains()) {
  if (spec.landing_offset < 0 || spec.hitter_location_offset < 0 ||
      spec.defender_location_offset < 0)
    throw DataError("perturbation offsets must be >= 0");
  Xorshift64Star rng(seed);
  PerturbResult result;
  result.pred = gt;

  for (std::size_t j = 0; j < result.pred.shots.size(); ++j) {
    Shot& s = result.pred.shots[j];
    const Shot& g = gt.shots[j];
    ShotFacts f;
    f.is_last = j + 1 == result.pred.shots.size();

    s.hit_frame = std::max<long long>(0, g.hit_frame + spec.hit_frame_jitter);
    f.hit_frame_error = std::llabs(g.hit_frame - s.hit_frame);

    if (spec.hitter == FieldAction::corrupt)
      s.hitter = detail_synth::next_in_domain(domains.hitter, g.hitter);
    f.hitter_equal = s.hitter == g.hitter;

    if (spec.round_head == FieldAction::corrupt)
      s.round_head = detail_synth::next_in_domain(domains.round_head, g.round_head);
    f.round_head_equal = s.round_head == g.round_head;

    if (spec.backhand == FieldAction::corrupt)
      s.backhand = detail_synth::next_in_domain(domains.backhand, g.backhand);
    f.backhand_equal = s.backhand == g.backhand;

    if (spec.ball_height == FieldAction::corrupt)
      s.ball_height = detail_synth::next_in_domain(domains.ball_height, g.ball_height);
    f.ball_height_equal = s.ball_height == g.ball_height;

    if (spec.ball_type == FieldAction::corrupt)
      s.ball_type = detail_synth::next_in_domain(domains.ball_type, g.ball_type);
    f.ball_type_equal = s.ball_type == g.ball_type;

    if (spec.winner == FieldAction::corrupt) {
      // corrupting a blank cell means filling it in; corrupting a filled
      // one swaps it for a different label
      s.winner = g.winner.empty() ? domains.winner.front()
                                  : detail_synth::next_in_domain(domains.winner, g.winner);
    }
    f.winner_pred_empty = s.winner.empty();
    f.winner_equal = s.winner == g.winner;

    s.landing = detail_synth::offset_point(g.landing, spec.landing_offset, rng);
    s.hitter_location = detail_synth::offset_point(g.hitter_location,
                                                   spec.hitter_location_offset, rng);
    s.defender_location = detail_synth::offset_point(g.defender_location,
                                                     spec.defender_location_offset, rng);
    f.landing_dist2 = detail_synth::sq_dist(g.landing, s.landing);
    f.hitter_location_dist2 = detail_synth::sq_dist(g.hitter_location, s.hitter_location);
    f.defender_location_dist2 = detail_synth::sq_dist(g.defender_location, s.defender_location);

    result.facts.push_back(f);
  }
  return result;
}

inline long long expected_shot_units(const ShotFacts& f, const ScoringConfig& cfg) {
  if (f.hit_frame_error > cfg.hit_frame_tolerance) return 0;
  auto within = [&cfg](double d2, double thr) {
    return cfg.inclusive_distance ? d2 <= thr * thr : d2 < thr * thr;
  };
  long long u = score_units::kBase;
  if (f.hitter_equal) u += score_units::kHitter;
  if (f.ball_height_equal) u += score_units::kBallHeight;
  if (within(f.landing_dist2, cfg.landing_threshold)) u += score_units::kLanding;
  if (within(f.hitter_location_dist2, cfg.location_threshold)) u += score_units::kHitterLocation;
  if (within(f.defender_location_dist2, cfg.location_threshold))
    u += score_units::kDefenderLocation;
  if (f.backhand_equal) u += score_units::kBackhand;
  if (f.round_head_equal) u += score_units::kRoundHead;
  if (f.ball_type_equal) u += score_units::kBallType;
  if (f.is_last ? f.winner_equal : f.winner_pred_empty) u += score_units::kWinner;
  return u;
}

// Closed-form rally total implied by the facts; matches rally_score exactly
// because both round through the same integer-unit mean.
inline double expected_rally_total(const std::vector<ShotFacts>& facts,
                                   const ScoringConfig& cfg) {
  if (facts.empty()) return 0.1;
  long long unit_sum = 0;
  for (const ShotFacts& f : facts) unit_sum += expected_shot_units(f, cfg);
  return 0.1 + (static_cast<double>(unit_sum) / static_cast<double>(facts.size())) *
                   score_units::kUnit;
}

// --- probability streams ------------------------------------------------------

// Baseline uniform noise plus unimodal Gaussian-shaped peaks (height 1-noise,
// width sigma = peak_width) centered at the given frames.
inline ProbabilityStream gen_probability_stream(const std::vector<long long>& hit_frames,
                                                long long length, double peak_width,
                                                double noise, std::uint64_t seed,
                                                std::string rally_id = "stream") {
  if (length < 1) throw DataError("stream length must be >= 1");
  if (peak_width <= 0.0) throw DataError("peak_width must be > 0");
  if (noise < 0.0 || noise >= 1.0) throw DataError("noise must lie in [0,1)");

  std::vector<long long> centers = hit_frames;
  std::sort(centers.begin(), centers.end());
  for (long long c : centers)
    if (c < 0 || c >= length) throw DataError("hit frame outside stream");
  for (std::size_t i = 1; i < centers.size(); ++i)
    if (static_cast<double>(centers[i] - centers[i - 1]) <= 2.0 * peak_width)
      throw DataError("overlapping peaks: frames " + std::to_string(centers[i - 1]) + " and " +
                      std::to_string(centers[i]));

  Xorshift64Star rng(seed);
  ProbabilityStream stream;
  stream.rally_id = std::move(rally_id);
  stream.probs.resize(static_cast<std::size_t>(length));

  const double amp = 1.0 - noise;
  for (long long f = 0; f < length; ++f) {
    double bump = 0.0;
    for (long long c : centers) {
      const double d = static_cast<double>(f - c);
      bump = std::max(bump, amp * std::exp(-d * d / (2.0 * peak_width * peak_width)));
    }
    const double p = bump + noise * rng.uniform();
    stream.probs[static_cast<std::size_t>(f)] = std::clamp(p, 0.0, 1.0);
  }
  return stream;
}

// --- motion sequences -----------------------------------------------------------

// Band-limited random texture (integer spatial frequencies of at most one
// cycle per axis, so shifts up to 2 px stay well inside the linear range of
// differential flow) translated by (dx,dy) per frame with periodic wrap.
// Ground-truth flow is (dx,dy) everywhere.
inline std::vector<GrayFrame> gen_motion_sequence(int width, int height, double dx, double dy,
                                                  int n_frames, std::uint64_t seed) {
  if (width < 8 || height < 8) throw DataError("texture too small");
  if (n_frames < 1) throw DataError("need at least 1 frame");
  if (std::fabs(dx) > 2.0 || std::fabs(dy) > 2.0)
    throw DataError("per-frame shift must satisfy |d| <= 2");

  struct Mode {
    double fx, fy, amp, phase;
  };
  Xorshift64Star rng(seed);
  std::vector<Mode> modes;
  double amp_sum = 0.0;
  auto add_mode = [&](double fx, double fy) {
    const double amp = rng.uniform(0.5, 1.0);
    modes.push_back({fx, fy, amp, rng.uniform(0.0, 2.0 * 3.14159265358979323846)});
    amp_sum += amp;
  };
  // fixed modes span both axes so the texture never degenerates into
  // stripes the aperture problem would make unreadable
  add_mode(1, 0);
  add_mode(0, 1);
  add_mode(1, 1);
  while (modes.size() < 6) {
    const double fx = static_cast<double>(rng.uniform_int(-1, 1));
    const double fy = static_cast<double>(rng.uniform_int(-1, 1));
    if (fx == 0.0 && fy == 0.0) continue;
    add_mode(fx, fy);
  }

  std::vector<GrayFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (int t = 0; t < n_frames; ++t) {
    GrayFrame g(width, height);
    const double ox = t * dx, oy = t * dy;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const Mode& m : modes)
          v += m.amp * std::cos(two_pi * (m.fx * (x - ox) / width + m.fy * (y - oy) / height) +
                                m.phase);
        g.at(x, y) = static_cast<float>(0.5 + 0.5 * v / amp_sum);
      }
    frames.push_back(std::move(g));
  }
  return frames;
}

}  // namespace shuttlekit::synth
