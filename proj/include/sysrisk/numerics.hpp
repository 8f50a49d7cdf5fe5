#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "sysrisk/errors.hpp"

namespace sysrisk {

struct QuadratureConfig {
  int initial_nodes = 201;  // odd
  double tol = 1e-8;
  int max_nodes = 3201;
};

namespace detail {

inline double simpson(const std::function<double(double)>& f, int nodes) {
  // nodes odd >= 3, panels = nodes - 1 even
  const int panels = nodes - 1;
  const double h = 1.0 / panels;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < panels; ++i) acc += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace detail

// Composite Simpson on [0,1] with node doubling until two successive
// estimates agree to cfg.tol.
inline double integrate_unit_interval(const std::function<double(double)>& f,
                                      const QuadratureConfig& cfg = {}) {
  int nodes = cfg.initial_nodes;
  if (nodes < 3 || nodes % 2 == 0)
    throw Error("quadrature initial_nodes must be odd and >= 3");
  if (!(cfg.tol > 0.0)) throw Error("quadrature tol must be positive");
  double prev = detail::simpson(f, nodes);
  double gap = std::numeric_limits<double>::infinity();
  while (nodes * 2 - 1 <= cfg.max_nodes) {
    nodes = nodes * 2 - 1;
    const double next = detail::simpson(f, nodes);
    gap = std::abs(next - prev);
    prev = next;
    if (gap < cfg.tol) return prev;
  }
  if (gap > 100.0 * cfg.tol)
    throw NoConvergence("quadrature did not converge within max_nodes");
  return prev;
}

// ---------------------------------------------------------------------------
// Finite-difference directional derivatives. Step h = 1e-5 * max(1, |X|_inf),
// balancing truncation against rounding in double precision.

inline double fd_scale(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return std::max(1.0, m);
}

inline double fd_step(std::span<const double> x) { return 1e-5 * fd_scale(x); }

inline std::vector<double> axpy(std::span<const double> x, double h,
                                std::span<const double> u) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * u[i];
  return out;
}

// Central difference (F(X+hU) - F(X-hU)) / 2h for scalar-valued F.
template <typename F>
double directional_derivative_fd(F&& f, std::span<const double> x,
                                 std::span<const double> u) {
  const double h = fd_step(x);
  return (f(axpy(x, h, u)) - f(axpy(x, -h, u))) / (2.0 * h);
}

// One-sided forward variant for points where only the right derivative exists.
template <typename F>
double directional_derivative_fd_right(F&& f, std::span<const double> x,
                                       std::span<const double> u) {
  const double h = fd_step(x);
  return (f(axpy(x, h, u)) - f(std::vector<double>(x.begin(), x.end()))) / h;
}

// Vector-codomain versions, component-wise.
template <typename F>
std::vector<double> directional_derivative_fd_vec(F&& f, std::span<const double> x,
                                                  std::span<const double> u) {
  const double h = fd_step(x);
  const std::vector<double> hi = f(axpy(x, h, u));
  const std::vector<double> lo = f(axpy(x, -h, u));
  std::vector<double> out(hi.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (hi[i] - lo[i]) / (2.0 * h);
  return out;
}

inline double directional_derivative_fd_scalar(const std::function<double(double)>& f,
                                               double x, double u) {
  const std::array<double, 1> xs{x}, us{u};
  return directional_derivative_fd([&](std::span<const double> p) { return f(p[0]); },
                                   xs, us);
}

inline double directional_derivative_fd_scalar_right(
    const std::function<double(double)>& f, double x, double u) {
  const std::array<double, 1> xs{x}, us{u};
  return directional_derivative_fd_right(
      [&](std::span<const double> p) { return f(p[0]); }, xs, us);
}

// ---------------------------------------------------------------------------
// Root finding for monotone functions, with automatic bracket doubling.

inline double bisect_root(const std::function<double(double)>& g, double lo,
                          double hi) {
  if (lo > hi) std::swap(lo, hi);
  double flo = g(lo), fhi = g(hi);
  int doublings = 0;
  while (flo * fhi > 0.0) {
    if (++doublings > 60) throw NoBracket("could not bracket a sign change");
    const double width = std::max(hi - lo, 1e-8);
    if (std::abs(flo) <= std::abs(fhi)) {
      lo -= width;
      flo = g(lo);
    } else {
      hi += width;
      fhi = g(hi);
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = g(mid);
    if (fmid == 0.0) return mid;
    if (flo * fmid <= 0.0) {
      hi = mid;
      fhi = fmid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

// Minimal scalar m with pred(m) true, assuming pred is monotone in m.
// Initial bracket is doubled outward until it straddles the threshold.
inline double bisect_threshold(const std::function<bool(double)>& pred, double lo,
                               double hi) {
  if (lo > hi) std::swap(lo, hi);
  int doublings = 0;
  while (!pred(hi)) {
    if (++doublings > 60) throw NoBracket("predicate never becomes true");
    hi += std::max(hi - lo, 1e-8) * 2.0;
  }
  doublings = 0;
  while (pred(lo)) {
    if (++doublings > 60) throw NoBracket("predicate never becomes false");
    lo -= std::max(hi - lo, 1e-8) * 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Nested grid search. Blunt but honest; serves as the brute-force oracle for
// the inject-capital problems and small LPs.

struct GridResult {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
};

struct Box {
  std::vector<std::array<double, 2>> bounds;
  std::size_t dims() const { return bounds.size(); }
};

inline GridResult grid_minimize(
    const std::function<double(std::span<const double>)>& f, Box box,
    int resolution, int refinements) {
  if (resolution < 2) throw Error("grid resolution must be >= 2");
  const std::size_t d = box.dims();
  if (d == 0) throw Error("grid box must have at least one dimension");

  GridResult best;
  std::vector<double> point(d);
  std::vector<int> idx(d);

  for (int pass = 0; pass <= refinements; ++pass) {
    std::vector<double> step(d);
    for (std::size_t i = 0; i < d; ++i)
      step[i] = (box.bounds[i][1] - box.bounds[i][0]) / (resolution - 1);

    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < d; ++i)
        point[i] = box.bounds[i][0] + idx[i] * step[i];
      const double v = f(point);
      if (v < best.value) {
        best.value = v;
        best.argmin = point;
      }
      std::size_t carry = 0;
      while (carry < d && ++idx[carry] == resolution) idx[carry++] = 0;
      if (carry == d) break;
    }

    if (pass == refinements || best.argmin.empty()) break;
    // Zoom 10x around the incumbent, but never below 4 grid steps so the
    // incumbent's one-step position error stays inside the new box.
    for (std::size_t i = 0; i < d; ++i) {
      const double width = box.bounds[i][1] - box.bounds[i][0];
      const double half = 0.5 * std::max(width / 10.0, 4.0 * step[i]);
      box.bounds[i][0] = best.argmin[i] - half;
      box.bounds[i][1] = best.argmin[i] + half;
    }
  }
  return best;
}

}  // namespace sysrisk
