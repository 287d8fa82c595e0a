// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense single-scale Lucas-Kanade optical flow with motion-magnitude
// background suppression and flow-to-image rendering. Feeds the
// "flow frames without background" preprocessing stage.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shuttlekit/image.hpp"
#include "shuttlekit/util.hpp"

namespace shuttlekit {

struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major intensities in [0,1]

  GrayFrame() = default;
  GrayFrame(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.f) {}

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Per-pixel displacement between consecutive frames. Invalid pixels (border,
// ill-conditioned window, suppressed background) always carry zero flow.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;             // horizontal displacement, px/frame
  std::vector<float> v;             // vertical displacement, px/frame
  std::vector<std::uint8_t> valid;  // 1 where the least-squares system was solvable

  FlowField() = default;
  FlowField(int w, int h)
      : width(w),
        height(h),
        u(static_cast<std::size_t>(w) * h, 0.f),
        v(static_cast<std::size_t>(w) * h, 0.f),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

enum class RenderMode { magnitude_gray, angle_hue };

struct PreprocConfig {
  int window_radius = 2;              // 5x5 least-squares window
  double background_threshold = 0.5;  // px/frame; slower pixels count as background
  double min_eigen = 1e-4;            // conditioning floor on the summed structure tensor
  int output_width = 180;
  int output_height = 180;
  RenderMode render_mode = RenderMode::magnitude_gray;
};

// Rec.601 luma, scaled to [0,1].
inline GrayFrame to_grayscale(const RgbImage& frame) {
  if (frame.width <= 0 || frame.height <= 0) throw DataError("grayscale of empty image");
  GrayFrame g(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      const std::uint8_t* p = frame.px(x, y);
      g.at(x, y) =
          static_cast<float>((0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0);
    }
  return g;
}

inline RgbImage to_rgb(const GrayFrame& g) {
  RgbImage img(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const auto v = static_cast<std::uint8_t>(
          std::lround(std::clamp(static_cast<double>(g.at(x, y)), 0.0, 1.0) * 255.0));
      std::uint8_t* p = img.px(x, y);
      p[0] = p[1] = p[2] = v;
    }
  return img;
}

// Windowed Lucas-Kanade: per pixel, solve the 2x2 least-squares system over
// central-difference spatial gradients and the temporal difference
// next - prev. Gradients average the two frames, which centers them on the
// same half-frame instant as the temporal difference and cancels the
// first-order bias for larger shifts. Pixels whose summed structure tensor
// has a smaller eigenvalue below min_eigen are left invalid, as is the
// border the stencil cannot reach.
inline FlowField lucas_kanade_flow(const GrayFrame& prev, const GrayFrame& next,
                                   const PreprocConfig& cfg) {
  if (prev.width != next.width || prev.height != next.height)
    throw DataError("frame dimension mismatch in optical flow");
  if (cfg.window_radius < 1) throw DataError("window_radius must be >= 1");

  const int w = prev.width, h = prev.height, r = cfg.window_radius;
  FlowField flow(w, h);
  if (w < 2 * (r + 1) + 1 || h < 2 * (r + 1) + 1) return flow;  // too small: all invalid

  std::vector<double> ix(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> iy(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> it(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = flow.idx(x, y);
      ix[i] = 0.25 * ((prev.at(x + 1, y) - prev.at(x - 1, y)) +
                      (next.at(x + 1, y) - next.at(x - 1, y)));
      iy[i] = 0.25 * ((prev.at(x, y + 1) - prev.at(x, y - 1)) +
                      (next.at(x, y + 1) - next.at(x, y - 1)));
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      it[flow.idx(x, y)] = static_cast<double>(next.at(x, y)) - prev.at(x, y);

  // gradients exist on [1, w-2]; the window on top needs another r
  const int lo = r + 1;
  for (int y = lo; y < h - lo; ++y) {
    for (int x = lo; x < w - lo; ++x) {
      double sxx = 0, sxy = 0, syy = 0, sxt = 0, syt = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const std::size_t i = flow.idx(x + dx, y + dy);
          sxx += ix[i] * ix[i];
          sxy += ix[i] * iy[i];
          syy += iy[i] * iy[i];
          sxt += ix[i] * it[i];
          syt += iy[i] * it[i];
        }
      const double trace = sxx + syy;
      const double diff = sxx - syy;
      const double lambda_min = 0.5 * (trace - std::sqrt(diff * diff + 4.0 * sxy * sxy));
      if (lambda_min < cfg.min_eigen) continue;
      const double det = sxx * syy - sxy * sxy;
      const std::size_t i = flow.idx(x, y);
      flow.u[i] = static_cast<float>((sxy * syt - syy * sxt) / det);
      flow.v[i] = static_cast<float>((sxy * sxt - sxx * syt) / det);
      flow.valid[i] = 1;
    }
  }
  return flow;
}

// Zeroes and invalidates every pixel moving slower than the background
// threshold. With a static camera that is the background by definition.
// Idempotent.
inline FlowField suppress_background(FlowField flow, const PreprocConfig& cfg) {
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    const double mag = std::sqrt(static_cast<double>(flow.u[i]) * flow.u[i] +
                                 static_cast<double>(flow.v[i]) * flow.v[i]);
    if (mag < cfg.background_threshold) {
      flow.u[i] = 0.f;
      flow.v[i] = 0.f;
      flow.valid[i] = 0;
    }
  }
  return flow;
}

namespace detail {

// Magnitudes normalize against the 99th percentile over valid pixels so one
// outlier cannot flatten the rest of the frame to black.
inline double flow_norm_denominator(const FlowField& flow, std::vector<double>& mags) {
  mags.clear();
  double max_mag = 0.0;
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    if (!flow.valid[i]) continue;
    const double m = std::sqrt(static_cast<double>(flow.u[i]) * flow.u[i] +
                               static_cast<double>(flow.v[i]) * flow.v[i]);
    mags.push_back(m);
    max_mag = std::max(max_mag, m);
  }
  if (mags.empty()) return 0.0;
  std::sort(mags.begin(), mags.end());
  const double p99 = quantile_sorted(mags, 0.99);
  return p99 > 0.0 ? p99 : max_mag;
}

inline void hsv_to_rgb(double hue_deg, double sat, double val, std::uint8_t* out) {
  const double c = val * sat;
  const double hp = hue_deg / 60.0;
  const double xcomp = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)      { r = c; g = xcomp; }
  else if (hp < 2) { r = xcomp; g = c; }
  else if (hp < 3) { g = c; b = xcomp; }
  else if (hp < 4) { g = xcomp; b = c; }
  else if (hp < 5) { r = xcomp; b = c; }
  else             { r = c; b = xcomp; }
  const double m = val - c;
  out[0] = static_cast<std::uint8_t>(std::lround(std::clamp(r + m, 0.0, 1.0) * 255.0));
  out[1] = static_cast<std::uint8_t>(std::lround(std::clamp(g + m, 0.0, 1.0) * 255.0));
  out[2] = static_cast<std::uint8_t>(std::lround(std::clamp(b + m, 0.0, 1.0) * 255.0));
}

}  // namespace detail

// Flow to an 8-bit frame. magnitude_gray: intensity = magnitude / p99,
// clamped. angle_hue: hue from atan2(v,u), full saturation, value from the
// normalized magnitude. Invalid pixels render black either way.
inline RgbImage render_flow(const FlowField& flow, const PreprocConfig& cfg) {
  RgbImage img(flow.width, flow.height);
  std::vector<double> scratch;
  const double denom = detail::flow_norm_denominator(flow, scratch);
  if (denom <= 0.0) return img;  // nothing valid or all magnitudes zero

  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x) {
      const std::size_t i = flow.idx(x, y);
      if (!flow.valid[i]) continue;
      const double u = flow.u[i], v = flow.v[i];
      const double mag = std::sqrt(u * u + v * v);
      const double value = std::clamp(mag / denom, 0.0, 1.0);
      std::uint8_t* p = img.px(x, y);
      if (cfg.render_mode == RenderMode::magnitude_gray) {
        const auto g = static_cast<std::uint8_t>(std::lround(value * 255.0));
        p[0] = p[1] = p[2] = g;
      } else {
        double hue = std::atan2(v, u) * (180.0 / 3.14159265358979323846);
        if (hue < 0.0) hue += 360.0;
        if (hue >= 360.0) hue = 0.0;
        detail::hsv_to_rgb(hue, 1.0, value, p);
      }
    }
  return img;
}

// N input frames to N-1 rendered flow frames (pair t,t+1 makes output t),
// each resized to the configured output size. Frame pairs are independent,
// so `threads` may fan them out; output order stays by index.
inline std::vector<RgbImage> process_sequence(const std::vector<RgbImage>& frames,
                                              const PreprocConfig& cfg, int threads = 1) {
  if (frames.size() < 2) throw DataError("need at least 2 frames");
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].width != frames[0].width || frames[i].height != frames[0].height)
      throw DataError("frame dimension mismatch at frame " + std::to_string(i));

  std::vector<GrayFrame> gray(frames.size());
  detail::parallel_for(frames.size(), threads,
                       [&](std::size_t i) { gray[i] = to_grayscale(frames[i]); });

  std::vector<RgbImage> out(frames.size() - 1);
  detail::parallel_for(out.size(), threads, [&](std::size_t i) {
    FlowField flow = lucas_kanade_flow(gray[i], gray[i + 1], cfg);
    flow = suppress_background(std::move(flow), cfg);
    out[i] = resize_bilinear(render_flow(flow, cfg), cfg.output_width, cfg.output_height);
  });
  return out;
}

}  // namespace shuttlekit
