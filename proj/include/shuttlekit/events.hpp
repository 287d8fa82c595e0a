// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Turns per-frame hit-probability streams into ShotSeq/HitFrame rows:
// quantile threshold, greedy gap grouping, per-group argmax.

#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "shuttlekit/rally.hpp"
#include "shuttlekit/util.hpp"

namespace shuttlekit {

// Per-frame hit-event probabilities for one clip.
struct ProbabilityStream {
  std::string rally_id;
  std::vector<double> probs;  // one value per frame, in [0,1]
};

struct ExtractionConfig {
  double quantile = 0.8;  // threshold = this quantile of the stream
  long long min_gap = 3;  // candidate runs closer than this merge into one event
};

struct HitEvent {
  long long frame = 0;
  double peak_prob = 0.0;
};

// q-quantile of the stream by linear interpolation between order statistics
// (index h = q * (n - 1)).
inline double quantile_threshold(const ProbabilityStream& stream, double q) {
  if (stream.probs.empty()) throw DataError("quantile of empty stream");
  if (!(q > 0.0 && q < 1.0)) throw DataError("quantile must lie in (0,1)");
  std::vector<double> sorted = stream.probs;
  std::sort(sorted.begin(), sorted.end());
  return detail::quantile_sorted(sorted, q);
}

// Candidate frames are those at or above the stream's quantile threshold.
// Candidates group greedily left to right, starting a new group whenever the
// gap to the previous candidate exceeds min_gap; each group emits its argmax
// frame (earliest on ties). Flat streams (peak-to-peak spread below 1e-9)
// carry no event evidence and emit nothing; for the same reason frames
// sitting exactly at the stream minimum never qualify, which keeps a
// constant baseline from flooding the candidate set when the quantile lands
// on it.
inline std::vector<HitEvent> extract_hits(const ProbabilityStream& stream,
                                          const ExtractionConfig& cfg) {
  if (stream.probs.empty()) throw DataError("empty probability stream");
  if (cfg.min_gap < 1) throw DataError("min_gap must be >= 1");

  const auto [mn, mx] = std::minmax_element(stream.probs.begin(), stream.probs.end());
  if (*mx - *mn < 1e-9) return {};
  const double floor_value = *mn;

  const double threshold = quantile_threshold(stream, cfg.quantile);

  std::vector<HitEvent> events;
  bool open = false;
  long long last_candidate = 0;
  HitEvent best;
  for (long long f = 0; f < static_cast<long long>(stream.probs.size()); ++f) {
    const double p = stream.probs[static_cast<std::size_t>(f)];
    if (p < threshold || p <= floor_value) continue;
    if (open && f - last_candidate > cfg.min_gap) {
      events.push_back(best);
      open = false;
    }
    if (!open) {
      open = true;
      best = {f, p};
    } else if (p > best.peak_prob) {
      best = {f, p};
    }
    last_candidate = f;
  }
  if (open) events.push_back(best);
  return events;
}

// Element-wise mean of equal-length streams. Centered on the first stream so
// that averaging identical streams reproduces them exactly.
inline ProbabilityStream merge_streams(const std::vector<ProbabilityStream>& streams) {
  if (streams.empty()) throw DataError("merge of zero streams");
  const std::size_t n = streams.front().probs.size();
  for (const ProbabilityStream& s : streams)
    if (s.probs.size() != n)
      throw DataError("stream length mismatch: " + std::to_string(s.probs.size()) + " vs " +
                      std::to_string(n));

  ProbabilityStream out = streams.front();
  if (streams.size() == 1) return out;
  const double k = static_cast<double>(streams.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double base = streams.front().probs[i];
    double delta = 0.0;
    for (const ProbabilityStream& s : streams) delta += s.probs[i] - base;
    out.probs[i] = std::clamp(base + delta / k, 0.0, 1.0);
  }
  return out;
}

// Hit events to the two columns they pin down. All attribute columns stay at
// placeholder defaults for downstream assembly.
inline Rally to_shot_rows(const std::vector<HitEvent>& events, std::string_view rally_id = {}) {
  Rally rally;
  rally.rally_id = std::string(rally_id);
  rally.shots.reserve(events.size());
  long long prev_frame = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].frame <= prev_frame)
      throw DataError("events are not strictly increasing by frame");
    prev_frame = events[i].frame;
    Shot s;
    s.shot_seq = static_cast<int>(i) + 1;
    s.hit_frame = events[i].frame;
    rally.shots.push_back(std::move(s));
  }
  return rally;
}

// --- stream file format: CSV "frame,prob", frames 0..n-1 contiguous -------

inline ProbabilityStream parse_stream_csv(std::string_view text, std::string_view rally_id = {}) {
  ProbabilityStream stream;
  stream.rally_id = std::string(rally_id);

  std::size_t pos = 0, line_no = 0;
  auto next_line = [&](std::string_view& out) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      out = detail::strip_cr(text.substr(pos));
      pos = text.size();
    } else {
      out = detail::strip_cr(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError("empty file, expected header", 1);
  if (line != "frame,prob") throw ParseError("expected header 'frame,prob'", 1);

  long long expected_frame = 0;
  while (next_line(line)) {
    if (line.empty() && pos >= text.size()) break;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 2) throw ParseError("row needs 2 fields", line_no);
    long long frame = 0;
    double prob = 0.0;
    if (!detail::parse_int(cells[0], frame) || !detail::parse_double(cells[1], prob))
      throw ParseError("non-numeric stream row", line_no);
    if (frame != expected_frame)
      throw ParseError("frames must be contiguous from 0, got " + std::to_string(frame) +
                           " after " + std::to_string(expected_frame - 1),
                       line_no);
    if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0)
      throw ParseError("probability outside [0,1]", line_no);
    stream.probs.push_back(prob);
    ++expected_frame;
  }
  if (stream.probs.empty()) throw ParseError("stream has no frames", line_no);
  return stream;
}

inline std::string write_stream_csv(const ProbabilityStream& stream) {
  std::string out = "frame,prob\n";
  for (std::size_t i = 0; i < stream.probs.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += detail::format_double(stream.probs[i]);
    out += '\n';
  }
  return out;
}

}  // namespace shuttlekit
