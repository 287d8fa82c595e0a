// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Competition scoring: per-shot content score with a hit-frame gate, rally
// score with a shot-count gate, dataset mean.

#pragma once

#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "shuttlekit/rally.hpp"
#include "shuttlekit/util.hpp"

namespace shuttlekit {

struct ScoringConfig {
  int hit_frame_tolerance = 2;       // frames; |gt - pred| beyond this zeroes the shot
  double landing_threshold = 6.0;    // pixels, Landing column
  double location_threshold = 10.0;  // pixels, Hitter/DefenderLocation columns
  // Distance gates default to strict '<'; true switches every distance gate
  // to '<='.
  bool inclusive_distance = false;
};

// Column weights in units of 0.05 points. Integer bookkeeping keeps shot and
// rally totals exact: a full shot is 18 units = 0.9 and a full rally
// 0.1 + 0.9 = 1.0, bit for bit.
namespace score_units {
inline constexpr int kBase = 2;
inline constexpr int kHitter = 2;
inline constexpr int kBallHeight = 2;
inline constexpr int kLanding = 2;
inline constexpr int kHitterLocation = 1;
inline constexpr int kDefenderLocation = 1;
inline constexpr int kBackhand = 1;
inline constexpr int kRoundHead = 1;
inline constexpr int kBallType = 4;
inline constexpr int kWinner = 2;
inline constexpr int kFullShot = kBase + kHitter + kBallHeight + kLanding + kHitterLocation +
                                 kDefenderLocation + kBackhand + kRoundHead + kBallType + kWinner;
inline constexpr double kUnit = 0.05;
}  // namespace score_units

struct ShotScore {
  bool gated = false;                  // hit-frame gate passed
  std::map<std::string, double> terms; // column -> earned weight; empty when ungated
  int units = 0;                       // earned weight in 0.05 units; total == units * 0.05
  double total = 0.0;
};

struct RallyScore {
  bool count_gate = false;           // predicted shot count matches
  double ass = 0.0;                  // average shot score
  double total = 0.0;                // 0 if gate fails, else 0.1 + ass
  std::vector<ShotScore> per_shot;
};

struct ScoreReport {
  std::map<std::string, RallyScore> per_rally;
  double total = 0.0;
  std::vector<std::string> warnings;
};

// True iff the Euclidean distance clears the threshold. Compares squared
// quantities, which is exact for pixel-scale inputs.
inline bool dist_within(Point2 p, Point2 q, double threshold, bool inclusive) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double d2 = dx * dx + dy * dy;
  const double t2 = threshold * threshold;
  return inclusive ? d2 <= t2 : d2 < t2;
}

// Content score of the j-th predicted shot against the j-th true shot.
// Ungated shots (hit-frame error beyond tolerance) score 0 with no terms.
// The winner column earns its weight on the last shot by label equality and
// on any other shot only when the prediction left it blank.
inline ShotScore shot_score(const Shot& gt, const Shot& pred, bool is_last,
                            const ScoringConfig& cfg) {
  ShotScore s;
  long long dframe = gt.hit_frame - pred.hit_frame;
  if (dframe < 0) dframe = -dframe;
  if (dframe > cfg.hit_frame_tolerance) return s;

  s.gated = true;
  auto earn = [&s](const char* column, int units, bool correct) {
    if (correct) s.units += units;
    s.terms[column] = correct ? units * score_units::kUnit : 0.0;
  };

  earn("base", score_units::kBase, true);
  earn("hitter", score_units::kHitter, gt.hitter == pred.hitter);
  earn("ball_height", score_units::kBallHeight, gt.ball_height == pred.ball_height);
  earn("landing", score_units::kLanding,
       dist_within(gt.landing, pred.landing, cfg.landing_threshold, cfg.inclusive_distance));
  earn("hitter_location", score_units::kHitterLocation,
       dist_within(gt.hitter_location, pred.hitter_location, cfg.location_threshold,
                   cfg.inclusive_distance));
  earn("defender_location", score_units::kDefenderLocation,
       dist_within(gt.defender_location, pred.defender_location, cfg.location_threshold,
                   cfg.inclusive_distance));
  earn("backhand", score_units::kBackhand, gt.backhand == pred.backhand);
  earn("round_head", score_units::kRoundHead, gt.round_head == pred.round_head);
  earn("ball_type", score_units::kBallType, gt.ball_type == pred.ball_type);
  earn("winner", score_units::kWinner,
       is_last ? gt.winner == pred.winner : pred.winner.empty());

  s.total = s.units * score_units::kUnit;
  return s;
}

// Rally score: 0 when the shot counts differ, else 0.1 plus the mean shot
// score with shots paired by position. A rally where both sides have zero
// shots passes the gate and scores the bare 0.1.
inline RallyScore rally_score(const Rally& gt, const Rally& pred, const ScoringConfig& cfg) {
  RallyScore r;
  r.count_gate = gt.shots.size() == pred.shots.size();
  if (!r.count_gate) return r;

  long long unit_sum = 0;
  r.per_shot.reserve(gt.shots.size());
  for (std::size_t j = 0; j < gt.shots.size(); ++j) {
    ShotScore s =
        shot_score(gt.shots[j], pred.shots[j], j + 1 == gt.shots.size(), cfg);
    unit_sum += s.units;
    r.per_shot.push_back(std::move(s));
  }

  // Mean in integer units first; the single rounding keeps identity cases
  // (all shots perfect) landing exactly on 0.9.
  if (!gt.shots.empty())
    r.ass = (static_cast<double>(unit_sum) / static_cast<double>(gt.shots.size())) *
            score_units::kUnit;
  r.total = 0.1 + r.ass;
  return r;
}

// Dataset score over ground-truth rallies. Predictions pair by rally_id; a
// ground-truth rally without a prediction scores 0, a prediction without a
// ground-truth rally is reported and ignored.
inline ScoreReport dataset_score(const std::vector<Rally>& gt, const std::vector<Rally>& pred,
                                 const ScoringConfig& cfg) {
  ScoreReport report;

  std::map<std::string, const Rally*> pred_by_id;
  for (const Rally& p : pred)
    if (!pred_by_id.emplace(p.rally_id, &p).second)
      throw DataError("duplicate rally_id in predictions: '" + p.rally_id + "'");

  std::set<std::string> gt_ids;
  for (const Rally& g : gt)
    if (!gt_ids.insert(g.rally_id).second)
      throw DataError("duplicate rally_id in ground truth: '" + g.rally_id + "'");

  for (const auto& [id, rally] : pred_by_id)
    if (!gt_ids.count(id)) {
      (void)rally;
      report.warnings.push_back("prediction for unknown rally '" + id + "' ignored");
    }

  std::vector<double> totals;
  totals.reserve(gt.size());
  for (const Rally& g : gt) {
    RallyScore rs;
    auto it = pred_by_id.find(g.rally_id);
    if (it != pred_by_id.end()) {
      rs = rally_score(g, *it->second, cfg);
    } else {
      report.warnings.push_back("missing prediction for rally '" + g.rally_id + "'");
    }
    totals.push_back(rs.total);
    report.per_rally.emplace(g.rally_id, std::move(rs));
  }

  report.total = detail::mean(totals);
  std::sort(report.warnings.begin(), report.warnings.end());
  return report;
}

}  // namespace shuttlekit
