// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit RGB frames, binary PPM (P6) encode/decode, bilinear resize, and the
// zero-padded frame_NNNNNN.ppm sequence convention.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "shuttlekit/util.hpp"

namespace shuttlekit {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // RGB, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* px(int x, int y) {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* px(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool operator==(const RgbImage&) const = default;
};

namespace detail {

// PPM header tokens are separated by arbitrary whitespace and '#' comments.
inline bool ppm_token(std::string_view bytes, std::size_t& pos, std::string& token) {
  token.clear();
  while (pos < bytes.size()) {
    char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < bytes.size()) {
    char c = bytes[pos];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v' || c == '#')
      break;
    token.push_back(c);
    ++pos;
  }
  return !token.empty();
}

}  // namespace detail

inline RgbImage decode_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  std::string tok;
  if (!detail::ppm_token(bytes, pos, tok) || tok != "P6")
    throw DataError("not a binary PPM (P6) file");

  long long dims[3];  // width, height, maxval
  for (long long& d : dims) {
    if (!detail::ppm_token(bytes, pos, tok) || !detail::parse_int(tok, d))
      throw DataError("malformed PPM header");
  }
  const auto [w, h, maxval] = std::tuple{dims[0], dims[1], dims[2]};
  if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20) throw DataError("bad PPM dimensions");
  if (maxval < 1 || maxval > 255) throw DataError("only 8-bit PPM supported (maxval 1..255)");
  if (pos >= bytes.size()) throw DataError("truncated PPM header");
  ++pos;  // single whitespace byte after maxval

  RgbImage img(static_cast<int>(w), static_cast<int>(h));
  if (bytes.size() - pos < img.data.size()) throw DataError("truncated PPM pixel data");
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data()) + pos, img.data.size(),
              img.data.begin());
  if (maxval != 255)
    for (std::uint8_t& v : img.data)
      v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  return img;
}

inline std::string encode_ppm(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0) throw DataError("cannot encode empty image");
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  return out;
}

inline RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  const std::string bytes = encode_ppm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to '" + path.string() + "'");
}

// frame_000001.ppm, frame_000002.ppm, ... (1-based)
inline std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.ppm", index);
  return buf;
}

inline std::vector<std::filesystem::path> list_ppm_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw DataError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

// Bilinear resize with pixel-center alignment.
inline RgbImage resize_bilinear(const RgbImage& src, int out_w, int out_h) {
  if (src.width <= 0 || src.height <= 0) throw DataError("resize of empty image");
  if (out_w <= 0 || out_h <= 0) throw DataError("resize to empty image");
  if (out_w == src.width && out_h == src.height) return src;

  RgbImage dst(out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = src.px(x0, y0)[c] * (1.0 - wx) + src.px(x1, y0)[c] * wx;
        const double bot = src.px(x0, y1)[c] * (1.0 - wx) + src.px(x1, y1)[c] * wx;
        const double v = top * (1.0 - wy) + bot * wy;
        dst.px(x, y)[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return dst;
}

}  // namespace shuttlekit
