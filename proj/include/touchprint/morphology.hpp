#pragma once

#include <limits>
#include <vector>

#include "touchprint/raster.hpp"

namespace touchprint::morph {

/// How pixels outside the canvas are treated by erosion/dilation.
enum class Border {
  Replicate,   // nearest in-canvas pixel; borders neither grow nor shrink
  Background,  // outside counts as 0
};

namespace detail {

inline bool sample(const BinaryMask& m, int x, int y, Border border) {
  if (m.inside(x, y)) return m.get(x, y);
  if (border == Border::Background) return false;
  return m.get(std::clamp(x, 0, m.width - 1), std::clamp(y, 0, m.height - 1));
}

/// Separable 3x3 min (erode=true) or max filter.
inline BinaryMask filter3(const BinaryMask& m, bool erode, Border border) {
  BinaryMask tmp(m.width, m.height), out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const bool l = sample(m, x - 1, y, border), c = m.get(x, y), r = sample(m, x + 1, y, border);
      tmp.set(x, y, erode ? (l && c && r) : (l || c || r));
    }
  }
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const bool u = sample(tmp, x, y - 1, border), c = tmp.get(x, y), d = sample(tmp, x, y + 1, border);
      out.set(x, y, erode ? (u && c && d) : (u || c || d));
    }
  }
  return out;
}

/// 1-D squared distance transform of Felzenszwalb & Huttenlocher.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                   std::vector<double>& z, int n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == inf) continue;
    if (f[v[k]] == inf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = f[v[k]] == inf ? inf : dq * dq + f[v[k]];
  }
}

}  // namespace detail

inline BinaryMask erode3(const BinaryMask& m, Border border = Border::Replicate) {
  return detail::filter3(m, true, border);
}
inline BinaryMask dilate3(const BinaryMask& m, Border border = Border::Replicate) {
  return detail::filter3(m, false, border);
}
inline BinaryMask open3(const BinaryMask& m) { return dilate3(erode3(m)); }
inline BinaryMask close3(const BinaryMask& m) { return erode3(dilate3(m)); }

/// Squared Euclidean distance from every foreground pixel to the nearest
/// background pixel, where everything outside the canvas is background.
/// Background pixels get 0.
inline std::vector<double> squared_distance_to_background(const BinaryMask& m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Pad by one pixel so the canvas edge behaves as background.
  const int w = m.width + 2, h = m.height + 2;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.get(x, y)) grid[static_cast<std::size_t>(y + 1) * w + x + 1] = inf;

  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    detail::edt_1d(f, d, v, z, h);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    detail::edt_1d(f, d, v, z, w);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  }
  std::vector<double> out(static_cast<std::size_t>(m.width) * m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      out[static_cast<std::size_t>(y) * m.width + x] = grid[static_cast<std::size_t>(y + 1) * w + x + 1];
  return out;
}

/// Erosion with a Euclidean disk of the given radius; outside the canvas is background.
inline BinaryMask erode_disk(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  const auto dist = squared_distance_to_background(m);
  const double r2 = static_cast<double>(radius) * radius;
  BinaryMask out(m.width, m.height);
  for (std::size_t i = 0; i < dist.size(); ++i) out.bits[i] = dist[i] > r2 ? 1 : 0;
  return out;
}

/// Dilation with a Euclidean disk (dual of erode_disk on the complement).
inline BinaryMask dilate_disk(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  BinaryMask inv(m.width, m.height);
  for (std::size_t i = 0; i < m.bits.size(); ++i) inv.bits[i] = m.bits[i] ? 0 : 1;
  // Complement distances must not see the canvas edge as foreground, so pad
  // with a margin of background-of-complement (i.e. treat outside as mask=0).
  const int pad = radius + 1;
  BinaryMask padded(m.width + 2 * pad, m.height + 2 * pad, true);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) padded.set(x + pad, y + pad, inv.get(x, y));
  const auto dist = squared_distance_to_background(padded);
  const double r2 = static_cast<double>(radius) * radius;
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      out.set(x, y, dist[static_cast<std::size_t>(y + pad) * padded.width + x + pad] <= r2);
  return out;
}

/// Fills background regions not 4-connected to the canvas edge.
inline BinaryMask fill_holes(const BinaryMask& m) {
  BinaryMask outside(m.width, m.height);
  std::vector<int> stack;
  auto push = [&](int x, int y) {
    if (!m.inside(x, y) || m.get(x, y) || outside.get(x, y)) return;
    outside.set(x, y, true);
    stack.push_back(y * m.width + x);
  };
  for (int x = 0; x < m.width; ++x) {
    push(x, 0);
    push(x, m.height - 1);
  }
  for (int y = 0; y < m.height; ++y) {
    push(0, y);
    push(m.width - 1, y);
  }
  while (!stack.empty()) {
    const int p = stack.back();
    stack.pop_back();
    const int x = p % m.width, y = p / m.width;
    push(x + 1, y);
    push(x - 1, y);
    push(x, y + 1);
    push(x, y - 1);
  }
  BinaryMask out(m.width, m.height);
  for (std::size_t i = 0; i < m.bits.size(); ++i) out.bits[i] = outside.bits[i] ? 0 : 1;
  return out;
}

}  // namespace touchprint::morph
