// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// shuttlekit CLI: score | preprocess | extract-events | assemble | synth |
// validate. Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shuttlekit/shuttlekit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shuttlekit;

namespace {

// deterministic mapping from error class to process exit code
namespace exit_status {
constexpr int kSuccess = 0;
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
}  // namespace exit_status

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("short write to '" + path.string() + "'");
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<Rally> load_rally_dir(const fs::path& dir) {
  std::vector<Rally> rallies;
  for (const fs::path& file : list_files(dir, ".csv")) {
    try {
      rallies.push_back(parse_rally_csv(read_file(file), file.stem().string()));
    } catch (const DataError& e) {
      throw DataError(file.string() + ": " + e.what());
    }
  }
  return rallies;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  long long w = 0, h = 0;
  if (x == std::string::npos || !detail::parse_int(s.substr(0, x), w) ||
      !detail::parse_int(s.substr(x + 1), h) || w < 1 || h < 1)
    throw DataError("--size expects WIDTHxHEIGHT, got '" + s + "'");
  return {static_cast<int>(w), static_cast<int>(h)};
}

std::pair<double, double> parse_shift(const std::string& s) {
  const auto c = s.find(',');
  double dx = 0, dy = 0;
  if (c == std::string::npos || !detail::parse_double(s.substr(0, c), dx) ||
      !detail::parse_double(s.substr(c + 1), dy))
    throw DataError("--shift expects DX,DY, got '" + s + "'");
  return {dx, dy};
}

// malformed flag values are usage errors, not data errors
const CLI::Validator kSizeValidator(
    [](std::string& s) -> std::string {
      try {
        parse_size(s);
        return {};
      } catch (const DataError& e) {
        return e.what();
      }
    },
    "WIDTHxHEIGHT");

const CLI::Validator kShiftValidator(
    [](std::string& s) -> std::string {
      try {
        parse_shift(s);
        return {};
      } catch (const DataError& e) {
        return e.what();
      }
    },
    "DX,DY");

// --- score -------------------------------------------------------------------

json score_report_json(const ScoreReport& report) {
  json rallies = json::object();
  for (const auto& [id, rs] : report.per_rally) {
    json shots = json::array();
    for (const ShotScore& ss : rs.per_shot)
      shots.push_back({{"gated", ss.gated}, {"total", ss.total}, {"terms", ss.terms}});
    rallies[id] = {{"total", rs.total},
                   {"count_gate", rs.count_gate},
                   {"ass", rs.ass},
                   {"shots", std::move(shots)}};
  }
  return json{{"total", report.total},
              {"rallies", std::move(rallies)},
              {"warnings", report.warnings}};
}

int cmd_score(const fs::path& gt_dir, const fs::path& pred_dir, bool inclusive,
              const std::string& json_report) {
  ScoringConfig cfg;
  cfg.inclusive_distance = inclusive;
  const ScoreReport report = dataset_score(load_rally_dir(gt_dir), load_rally_dir(pred_dir), cfg);

  for (const auto& [id, rs] : report.per_rally)
    std::cout << "rally " << id << " " << fmt4(rs.total) << "\n";
  for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
  std::cout << "total " << fmt4(report.total) << "\n";

  if (!json_report.empty()) {
    fs::path path(json_report);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path, score_report_json(report).dump(2) + "\n");
  }
  return 0;
}

// --- preprocess -----------------------------------------------------------------

int cmd_preprocess(const fs::path& in_dir, const fs::path& out_dir, const PreprocConfig& cfg,
                   int threads) {
  const auto files = list_ppm_frames(in_dir);
  if (files.size() < 2) throw DataError("need at least 2 frames in '" + in_dir.string() + "'");
  std::vector<RgbImage> frames(files.size());
  detail::parallel_for(files.size(), threads,
                       [&](std::size_t i) { frames[i] = read_ppm(files[i]); });

  const std::vector<RgbImage> out = process_sequence(frames, cfg, threads);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < out.size(); ++i)
    write_ppm(out_dir / frame_filename(i + 1), out[i]);
  std::cout << out.size() << " flow frames -> " << out_dir.string() << "\n";
  return 0;
}

// --- extract-events ---------------------------------------------------------------

int cmd_extract_events(const fs::path& probs, double quantile, long long min_gap, bool merge,
                       const fs::path& out_dir) {
  std::vector<ProbabilityStream> streams;
  if (fs::is_directory(probs)) {
    for (const fs::path& file : list_files(probs, ".csv"))
      streams.push_back(parse_stream_csv(read_file(file), file.stem().string()));
    if (streams.empty()) throw DataError("no stream files in '" + probs.string() + "'");
    if (merge) {
      ProbabilityStream merged = merge_streams(streams);
      merged.rally_id = probs.filename().string();  // folds of one rally
      streams = {std::move(merged)};
    }
  } else {
    streams.push_back(parse_stream_csv(read_file(probs), probs.stem().string()));
  }

  ExtractionConfig cfg;
  cfg.quantile = quantile;
  cfg.min_gap = min_gap;

  fs::create_directories(out_dir);
  for (const ProbabilityStream& stream : streams) {
    const auto events = extract_hits(stream, cfg);
    const Rally rally = to_shot_rows(events, stream.rally_id);
    write_file(out_dir / (stream.rally_id + ".csv"), write_rally_csv(rally));
    std::cout << stream.rally_id << " " << events.size() << " events\n";
  }
  return 0;
}

// --- assemble ----------------------------------------------------------------------

int cmd_assemble(const fs::path& events_csv, const fs::path& probs_jsonl,
                 const fs::path& detections_jsonl, const std::string& track_csv,
                 const std::string& poses_jsonl, const AssemblyConfig& cfg,
                 const fs::path& out_csv) {
  const Rally events = parse_rally_csv(read_file(events_csv), events_csv.stem().string());
  const ClassProbs probs = load_class_probs_jsonl(read_file(probs_jsonl));

  DetectionBundle bundle;
  load_detections_jsonl(bundle, read_file(detections_jsonl));
  if (!track_csv.empty()) load_track_csv(bundle, read_file(fs::path(track_csv)));
  if (!poses_jsonl.empty()) load_poses_jsonl(bundle, read_file(fs::path(poses_jsonl)));

  std::vector<std::string> warnings;
  const Rally rally = assemble_submission(events, probs, bundle, cfg, &warnings);
  for (const std::string& w : warnings) std::cout << "warning: " << w << "\n";

  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  write_file(out_csv, write_rally_csv(rally));
  std::cout << rally.rally_id << " " << rally.shots.size() << " shots -> " << out_csv.string()
            << "\n";
  return 0;
}

// --- synth --------------------------------------------------------------------------

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu", prefix, i);
  return buf;
}

int cmd_synth_rallies(std::size_t n, std::uint64_t seed, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < n; ++i) {
    synth::SynthParams params;
    params.seed = seed + i;
    const std::string id = padded_id("rally", i + 1);
    write_file(out_dir / (id + ".csv"), write_rally_csv(synth::gen_rally(params, id)));
  }
  std::cout << n << " rallies -> " << out_dir.string() << "\n";
  return 0;
}

int cmd_synth_streams(std::size_t n, long long length, int peaks, double peak_width,
                      double noise, std::uint64_t seed, const fs::path& out_dir) {
  if (peaks < 1) throw DataError("--peaks must be >= 1");
  if (length < 8 * peaks) throw DataError("stream too short for that many peaks");
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < n; ++i) {
    Xorshift64Star rng(seed + i);
    // one peak per equal slot, jittered but clear of the slot edges so
    // neighboring peaks stay separated
    std::vector<long long> frames;
    const long long slot = length / peaks;
    for (int k = 0; k < peaks; ++k) {
      const long long lo = k * slot + slot / 4;
      const long long hi = k * slot + (3 * slot) / 4;
      frames.push_back(rng.uniform_int(lo, hi));
    }
    const std::string id = padded_id("stream", i + 1);
    const auto stream =
        synth::gen_probability_stream(frames, length, peak_width, noise, rng.next(), id);
    write_file(out_dir / (id + ".csv"), write_stream_csv(stream));
  }
  std::cout << n << " streams -> " << out_dir.string() << "\n";
  return 0;
}

int cmd_synth_frames(const std::string& size, const std::string& shift, int n,
                     std::uint64_t seed, const fs::path& out_dir) {
  const auto [w, h] = parse_size(size);
  const auto [dx, dy] = parse_shift(shift);
  const auto frames = synth::gen_motion_sequence(w, h, dx, dy, n, seed);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < frames.size(); ++i)
    write_ppm(out_dir / frame_filename(i + 1), to_rgb(frames[i]));
  std::cout << frames.size() << " frames -> " << out_dir.string() << "\n";
  return 0;
}

// --- validate ------------------------------------------------------------------------

int cmd_validate(const fs::path& in) {
  std::vector<fs::path> files;
  if (fs::is_directory(in))
    files = list_files(in, ".csv");
  else
    files = {in};

  bool clean = true;
  for (const fs::path& file : files) {
    const std::string id = file.stem().string();
    Rally rally;
    try {
      rally = parse_rally_csv(read_file(file), id);
    } catch (const DataError& e) {
      std::cout << id << ": parse error: " << e.what() << "\n";
      clean = false;
      continue;
    }
    const ValidationReport report = validate(rally);
    if (report.ok()) {
      std::cout << id << ": OK\n";
    } else {
      clean = false;
      for (const Violation& v : report.violations)
        std::cout << id << ": row " << v.row << " [" << v.rule << "] " << v.message << "\n";
    }
  }
  return clean ? exit_status::kSuccess : exit_status::kDataError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"badminton rally analytics toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads = 1;
  app.add_option("--seed", seed, "PRNG seed for synthetic data")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256))
      ->capture_default_str();

  // score
  auto* score = app.add_subcommand("score", "score predictions against ground truth");
  score->fallthrough();
  std::string gt_dir, pred_dir, json_report;
  bool inclusive = false;
  score->add_option("--gt", gt_dir, "ground-truth rally CSV directory")->required();
  score->add_option("--pred", pred_dir, "predicted rally CSV directory")->required();
  score->add_flag("--inclusive-distance", inclusive, "use <= instead of < for distance gates");
  score->add_option("--json-report", json_report, "write full-precision JSON report here");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "frames -> background-free flow frames");
  preprocess->fallthrough();
  std::string in_dir, out_dir, size = "180x180", mode = "magnitude";
  PreprocConfig pre_cfg;
  preprocess->add_option("--in", in_dir, "input frame_NNNNNN.ppm directory")->required();
  preprocess->add_option("--out", out_dir, "output directory")->required();
  preprocess->add_option("--window", pre_cfg.window_radius, "least-squares window radius")
      ->check(CLI::Range(1, 16))->capture_default_str();
  preprocess->add_option("--bg-threshold", pre_cfg.background_threshold,
                         "suppress pixels slower than this (px/frame)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  preprocess->add_option("--min-eigen", pre_cfg.min_eigen, "structure tensor conditioning floor")
      ->check(CLI::PositiveNumber)->capture_default_str();
  preprocess->add_option("--size", size, "output WIDTHxHEIGHT")->check(kSizeValidator)
      ->capture_default_str();
  preprocess->add_option("--mode", mode, "render mode")
      ->check(CLI::IsMember({"magnitude", "hue"}))->capture_default_str();

  // extract-events
  auto* extract = app.add_subcommand("extract-events", "probability streams -> shot rows");
  extract->fallthrough();
  std::string probs_path, extract_out;
  double quantile = 0.8;
  long long min_gap = 3;
  bool merge = false;
  extract->add_option("--probs", probs_path, "stream CSV file or directory")->required();
  extract->add_option("--quantile", quantile, "candidate threshold quantile")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
  extract->add_option("--min-gap", min_gap, "merge events closer than this (frames)")
      ->check(CLI::Range(1LL, 1000000LL))->capture_default_str();
  extract->add_flag("--merge", merge, "mean-merge all streams in the directory first");
  extract->add_option("--out", extract_out, "output rally CSV directory")->required();

  // assemble
  auto* assemble = app.add_subcommand("assemble", "fill attribute columns of shot rows");
  assemble->fallthrough();
  std::string events_csv, probs_jsonl, detections_jsonl, track_csv, poses_jsonl, out_csv;
  std::string side_of_a = "bottom", locations = "bbox-vertex";
  bool no_alternate = false;
  assemble->add_option("--events", events_csv, "partial rally CSV (ShotSeq/HitFrame)")->required();
  assemble->add_option("--probs", probs_jsonl, "class probability JSONL")->required();
  assemble->add_option("--detections", detections_jsonl, "player/ball detection JSONL")
      ->required();
  assemble->add_option("--track", track_csv, "trajectory CSV (frame,x,y,visible)");
  assemble->add_option("--poses", poses_jsonl, "pose keypoint JSONL");
  assemble->add_option("--side-of-a", side_of_a, "court half of player A")
      ->check(CLI::IsMember({"top", "bottom"}))->capture_default_str();
  assemble->add_option("--locations", locations, "player location rule")
      ->check(CLI::IsMember({"bbox-vertex", "pose-feet"}))->capture_default_str();
  assemble->add_flag("--no-alternate", no_alternate,
                     "keep raw per-shot hitter predictions (no A/B alternation)");
  assemble->add_option("--out", out_csv, "output rally CSV")->required();

  // synth
  auto* syn = app.add_subcommand("synth", "generate synthetic fixtures");
  syn->require_subcommand(1);
  syn->fallthrough();

  auto* syn_rallies = syn->add_subcommand("rallies", "random valid rallies");
  syn_rallies->fallthrough();
  std::size_t n_rallies = 10;
  std::string rallies_out;
  syn_rallies->add_option("--n", n_rallies, "rally count")->capture_default_str();
  syn_rallies->add_option("--out", rallies_out, "output directory")->required();

  auto* syn_streams = syn->add_subcommand("streams", "probability streams with planted peaks");
  syn_streams->fallthrough();
  std::size_t n_streams = 10;
  long long stream_length = 150;
  int stream_peaks = 5;
  double peak_width = 2.0, stream_noise = 0.05;
  std::string streams_out;
  syn_streams->add_option("--n", n_streams, "stream count")->capture_default_str();
  syn_streams->add_option("--length", stream_length, "frames per stream")
      ->check(CLI::Range(8LL, 100000000LL))->capture_default_str();
  syn_streams->add_option("--peaks", stream_peaks, "planted events per stream")
      ->capture_default_str();
  syn_streams->add_option("--peak-width", peak_width, "peak sigma (frames)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  syn_streams->add_option("--noise", stream_noise, "baseline noise amplitude")
      ->check(CLI::Range(0.0, 0.999))->capture_default_str();
  syn_streams->add_option("--out", streams_out, "output directory")->required();

  auto* syn_frames = syn->add_subcommand("frames", "translating band-limited texture");
  syn_frames->fallthrough();
  std::string frames_size = "64x64", frames_shift = "1,0", frames_out;
  int n_frames = 5;
  syn_frames->add_option("--size", frames_size, "WIDTHxHEIGHT")->check(kSizeValidator)
      ->capture_default_str();
  syn_frames->add_option("--shift", frames_shift, "per-frame DX,DY (|d| <= 2)")
      ->check(kShiftValidator)->capture_default_str();
  syn_frames->add_option("--n", n_frames, "frame count")->check(CLI::Range(1, 100000))
      ->capture_default_str();
  syn_frames->add_option("--out", frames_out, "output directory")->required();

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check rally CSV invariants");
  validate_cmd->fallthrough();
  std::string validate_in;
  validate_cmd->add_option("--in", validate_in, "rally CSV file or directory")->required();

  try {
    app.parse(argc, argv);

    if (*score) return cmd_score(gt_dir, pred_dir, inclusive, json_report);
    if (*preprocess) {
      const auto [w, h] = parse_size(size);
      pre_cfg.output_width = w;
      pre_cfg.output_height = h;
      pre_cfg.render_mode = mode == "hue" ? RenderMode::angle_hue : RenderMode::magnitude_gray;
      return cmd_preprocess(in_dir, out_dir, pre_cfg, threads);
    }
    if (*extract) return cmd_extract_events(probs_path, quantile, min_gap, merge, extract_out);
    if (*assemble) {
      AssemblyConfig cfg;
      cfg.side_of_a = side_of_a == "top" ? CourtSide::top : CourtSide::bottom;
      cfg.location_mode =
          locations == "pose-feet" ? LocationMode::pose_feet : LocationMode::bbox_vertex;
      cfg.alternate = !no_alternate;
      return cmd_assemble(events_csv, probs_jsonl, detections_jsonl, track_csv, poses_jsonl, cfg,
                          out_csv);
    }
    if (*syn_rallies) return cmd_synth_rallies(n_rallies, seed, rallies_out);
    if (*syn_streams)
      return cmd_synth_streams(n_streams, stream_length, stream_peaks, peak_width, stream_noise,
                               seed, streams_out);
    if (*syn_frames) return cmd_synth_frames(frames_size, frames_shift, n_frames, seed, frames_out);
    if (*validate_cmd) return cmd_validate(validate_in);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_status::kSuccess : exit_status::kUsageError;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status::kDataError;
  }
}
