// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Rally/shot data model and exact parsing/serialization of the 14-column
// per-rally submission CSV.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "shuttlekit/util.hpp"

namespace shuttlekit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

// One hit of the shuttlecock, i.e. one CSV row. Coordinates are kept as
// doubles even though submissions usually carry integers: scoring works on
// real Euclidean distances.
struct Shot {
  int shot_seq = 1;          // 1-based index within the rally
  long long hit_frame = 0;   // video frame of the hit
  std::string hitter = "A";  // "A" or "B"
  int round_head = 1;        // {1,2}
  int backhand = 1;          // {1,2}
  int ball_height = 1;       // {1,2}
  Point2 landing;
  Point2 hitter_location;
  Point2 defender_location;
  int ball_type = 1;         // {1..9} by default
  std::string winner;        // "", "A", "B" or "X"; set on the last shot only

  bool operator==(const Shot&) const = default;
};

// One video clip of continuous play; the unit of scoring.
struct Rally {
  std::string rally_id;
  std::vector<Shot> shots;

  bool operator==(const Rally&) const = default;
};

// Category domains are conventions, not constants of nature: real data uses
// the defaults below, but everything that checks a domain takes them as a
// parameter.
struct CategoryDomains {
  std::vector<std::string> hitter{"A", "B"};
  std::vector<int> round_head{1, 2};
  std::vector<int> backhand{1, 2};
  std::vector<int> ball_height{1, 2};
  std::vector<int> ball_type{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::string> winner{"A", "B", "X"};
};

inline const CategoryDomains& default_domains() {
  static const CategoryDomains d;
  return d;
}

struct Violation {
  std::size_t row = 0;  // 0-based shot index
  std::string rule;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr std::string_view kRallyCsvHeader =
    "ShotSeq,HitFrame,Hitter,RoundHead,Backhand,BallHeight,LandingX,LandingY,"
    "HitterLocationX,HitterLocationY,DefenderLocationX,DefenderLocationY,"
    "BallType,Winner";

namespace detail {

template <class T>
inline bool in_domain(const std::vector<T>& domain, const T& value) {
  for (const T& d : domain)
    if (d == value) return true;
  return false;
}

inline bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace detail

// Lists every invariant violation, ordered by (row, rule id). Violations are
// data, not errors: this never throws on any in-memory rally.
inline ValidationReport validate(const Rally& rally,
                                 const CategoryDomains& domains = default_domains()) {
  ValidationReport report;
  auto add = [&](std::size_t row, std::string rule, std::string message) {
    report.violations.push_back({row, std::move(rule), std::move(message)});
  };

  for (std::size_t i = 0; i < rally.shots.size(); ++i) {
    const Shot& s = rally.shots[i];
    const bool last = i + 1 == rally.shots.size();

    if (s.shot_seq != static_cast<int>(i) + 1)
      add(i, "shotseq-sequence",
          "ShotSeq " + std::to_string(s.shot_seq) + " at row " + std::to_string(i) +
              ", expected " + std::to_string(i + 1));
    if (s.hit_frame < 0)
      add(i, "hitframe-negative", "HitFrame " + std::to_string(s.hit_frame) + " is negative");
    if (i > 0 && s.hit_frame <= rally.shots[i - 1].hit_frame)
      add(i, "hitframe-order",
          "HitFrame " + std::to_string(s.hit_frame) + " does not increase past " +
              std::to_string(rally.shots[i - 1].hit_frame));

    if (!detail::in_domain(domains.hitter, s.hitter))
      add(i, "hitter-domain", "Hitter '" + s.hitter + "' outside domain");
    if (!detail::in_domain(domains.round_head, s.round_head))
      add(i, "roundhead-domain", "RoundHead " + std::to_string(s.round_head) + " outside domain");
    if (!detail::in_domain(domains.backhand, s.backhand))
      add(i, "backhand-domain", "Backhand " + std::to_string(s.backhand) + " outside domain");
    if (!detail::in_domain(domains.ball_height, s.ball_height))
      add(i, "ballheight-domain",
          "BallHeight " + std::to_string(s.ball_height) + " outside domain");
    if (!detail::in_domain(domains.ball_type, s.ball_type))
      add(i, "balltype-domain", "BallType " + std::to_string(s.ball_type) + " outside domain");

    const Point2 pts[] = {s.landing, s.hitter_location, s.defender_location};
    for (const Point2& p : pts) {
      if (!detail::finite_nonneg(p.x) || !detail::finite_nonneg(p.y)) {
        add(i, "coord-range", "coordinate outside [0, inf)");
        break;
      }
    }

    if (!s.winner.empty()) {
      if (!detail::in_domain(domains.winner, s.winner))
        add(i, "winner-domain", "Winner '" + s.winner + "' outside domain");
      if (!last)
        add(i, "winner-nonlast", "Winner set on non-last shot " + std::to_string(i + 1));
    }
  }

  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) {
              if (a.row != b.row) return a.row < b.row;
              return a.rule < b.rule;
            });
  return report;
}

// Parses one rally CSV. Structural problems (bad header, non-numeric cells,
// out-of-domain values, ShotSeq not exactly 1..n) raise ParseError with the
// offending line; everything else is left to validate().
inline Rally parse_rally_csv(std::string_view text, std::string_view rally_id = {},
                             const CategoryDomains& domains = default_domains()) {
  Rally rally;
  rally.rally_id = std::string(rally_id);

  std::size_t pos = 0;
  std::size_t line_no = 0;
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

  std::string_view header;
  if (!next_line(header)) throw ParseError("empty file, expected header", 1);
  if (header != kRallyCsvHeader) {
    const auto expected = detail::split_csv(kRallyCsvHeader);
    const auto got = detail::split_csv(header);
    if (got.size() != expected.size())
      throw ParseError("header has " + std::to_string(got.size()) + " columns, expected " +
                           std::to_string(expected.size()),
                       1);
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (got[i] != expected[i])
        throw ParseError("column '" + std::string(got[i]) + "' where '" +
                             std::string(expected[i]) + "' was expected",
                         1);
    throw ParseError("malformed header", 1);
  }

  auto parse_cell_int = [&](std::string_view cell, const char* col) {
    long long v = 0;
    if (!detail::parse_int(cell, v))
      throw ParseError("non-numeric " + std::string(col) + " value '" + std::string(cell) + "'",
                       line_no);
    return v;
  };
  auto parse_cell_double = [&](std::string_view cell, const char* col) {
    double v = 0.0;
    if (!detail::parse_double(cell, v))
      throw ParseError("non-numeric " + std::string(col) + " value '" + std::string(cell) + "'",
                       line_no);
    return v;
  };
  auto require_domain_int = [&](long long v, const std::vector<int>& domain, const char* col) {
    if (v < INT32_MIN || v > INT32_MAX || !detail::in_domain(domain, static_cast<int>(v)))
      throw ParseError(std::string(col) + " value " + std::to_string(v) + " outside domain",
                       line_no);
    return static_cast<int>(v);
  };

  std::string_view line;
  while (next_line(line)) {
    if (line.empty()) {
      if (pos >= text.size()) break;  // trailing newline
      throw ParseError("empty row", line_no);
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 14)
      throw ParseError("row has " + std::to_string(cells.size()) + " fields, expected 14",
                       line_no);

    Shot s;
    const long long seq = parse_cell_int(cells[0], "ShotSeq");
    if (seq < 1 || seq > INT32_MAX) throw ParseError("ShotSeq out of range", line_no);
    s.shot_seq = static_cast<int>(seq);
    s.hit_frame = parse_cell_int(cells[1], "HitFrame");
    s.hitter = std::string(cells[2]);
    if (!detail::in_domain(domains.hitter, s.hitter))
      throw ParseError("Hitter value '" + s.hitter + "' outside domain", line_no);
    s.round_head = require_domain_int(parse_cell_int(cells[3], "RoundHead"), domains.round_head,
                                      "RoundHead");
    s.backhand =
        require_domain_int(parse_cell_int(cells[4], "Backhand"), domains.backhand, "Backhand");
    s.ball_height = require_domain_int(parse_cell_int(cells[5], "BallHeight"),
                                       domains.ball_height, "BallHeight");
    s.landing = {parse_cell_double(cells[6], "LandingX"), parse_cell_double(cells[7], "LandingY")};
    s.hitter_location = {parse_cell_double(cells[8], "HitterLocationX"),
                         parse_cell_double(cells[9], "HitterLocationY")};
    s.defender_location = {parse_cell_double(cells[10], "DefenderLocationX"),
                           parse_cell_double(cells[11], "DefenderLocationY")};
    s.ball_type =
        require_domain_int(parse_cell_int(cells[12], "BallType"), domains.ball_type, "BallType");
    s.winner = std::string(cells[13]);
    if (!s.winner.empty() && !detail::in_domain(domains.winner, s.winner))
      throw ParseError("Winner value '" + s.winner + "' outside domain", line_no);

    rally.shots.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < rally.shots.size(); ++i)
    if (rally.shots[i].shot_seq != static_cast<int>(i) + 1)
      throw ParseError("duplicate/gap in ShotSeq", i + 2);

  return rally;
}

// Canonical serialization: fixed header order, LF line endings, one row per
// shot, integral coordinates without a decimal point. Refuses invalid
// rallies, reporting the first violation.
inline std::string write_rally_csv(const Rally& rally,
                                   const CategoryDomains& domains = default_domains()) {
  const ValidationReport report = validate(rally, domains);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw DataError("invalid rally '" + rally.rally_id + "': row " + std::to_string(v.row) +
                    " [" + v.rule + "] " + v.message);
  }

  std::string out;
  out.reserve(64 + rally.shots.size() * 80);
  out += kRallyCsvHeader;
  out += '\n';
  for (const Shot& s : rally.shots) {
    out += std::to_string(s.shot_seq);
    out += ',';
    out += std::to_string(s.hit_frame);
    out += ',';
    out += s.hitter;
    out += ',';
    out += std::to_string(s.round_head);
    out += ',';
    out += std::to_string(s.backhand);
    out += ',';
    out += std::to_string(s.ball_height);
    out += ',';
    out += detail::format_double(s.landing.x);
    out += ',';
    out += detail::format_double(s.landing.y);
    out += ',';
    out += detail::format_double(s.hitter_location.x);
    out += ',';
    out += detail::format_double(s.hitter_location.y);
    out += ',';
    out += detail::format_double(s.defender_location.x);
    out += ',';
    out += detail::format_double(s.defender_location.y);
    out += ',';
    out += std::to_string(s.ball_type);
    out += ',';
    out += s.winner;
    out += '\n';
  }
  return out;
}

}  // namespace shuttlekit
