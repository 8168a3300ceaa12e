#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpwl/types.hpp"

namespace cpwl {

// Continuous piecewise-linear function on all of R. Interior slopes are
// derived from consecutive (knot, value) pairs, so continuity is structural
// and cannot be violated by construction. The two unbounded outer regions
// carry explicit slopes. An empty knot list encodes the affine function
// x -> value_at_zero + left_slope * x (left_slope == right_slope).
template <class Scalar = double>
struct LinearSpline {
  std::vector<Scalar> knots;   // strictly increasing
  std::vector<Scalar> values;  // same length as knots
  Scalar left_slope{0};
  Scalar right_slope{0};
  Scalar value_at_zero{0};  // meaningful only when knots is empty
};

template <class Scalar>
struct SlopeProfile {
  std::vector<Scalar> breakpoints;
  std::vector<Scalar> slopes;  // breakpoints.size() + 1 entries, left to right
};

template <class Scalar>
Index region_count(const LinearSpline<Scalar>& f) {
  return static_cast<Index>(f.knots.size()) + 1;
}

template <class Scalar>
LinearSpline<Scalar> affine(Scalar slope, Scalar value_at_zero) {
  LinearSpline<Scalar> f;
  f.left_slope = f.right_slope = slope;
  f.value_at_zero = value_at_zero;
  return f;
}

template <class Scalar>
std::vector<Scalar> region_slopes(const LinearSpline<Scalar>& f) {
  if (f.knots.empty()) return {f.left_slope};
  std::vector<Scalar> s;
  s.reserve(f.knots.size() + 1);
  s.push_back(f.left_slope);
  for (std::size_t i = 0; i + 1 < f.knots.size(); ++i)
    s.push_back((f.values[i + 1] - f.values[i]) / (f.knots[i + 1] - f.knots[i]));
  s.push_back(f.right_slope);
  return s;
}

template <class Scalar>
SlopeProfile<Scalar> slope_profile(const LinearSpline<Scalar>& f) {
  return SlopeProfile<Scalar>{f.knots, region_slopes(f)};
}

template <class Scalar>
Scalar eval(const LinearSpline<Scalar>& f, Scalar x) {
  using std::isfinite;
  if (!isfinite(x)) throw std::invalid_argument("eval: non-finite argument");
  if (f.knots.empty()) return f.value_at_zero + f.left_slope * x;
  const auto& k = f.knots;
  const auto& v = f.values;
  if (x <= k.front()) return v.front() + f.left_slope * (x - k.front());
  if (x >= k.back()) return v.back() + f.right_slope * (x - k.back());
  // first knot strictly greater than x
  std::size_t j = std::upper_bound(k.begin(), k.end(), x) - k.begin();
  if (x == k[j - 1]) return v[j - 1];
  Scalar t = (x - k[j - 1]) / (k[j] - k[j - 1]);
  return v[j - 1] + t * (v[j] - v[j - 1]);
}

namespace detail {

template <class Scalar>
bool slopes_equal(Scalar a, Scalar b) {
  using std::abs;
  return abs(a - b) <= tol::slope_eq * std::max(Scalar(1), std::max(abs(a), abs(b)));
}

// Assembles a spline from possibly messy (sorted) knot candidates: merges
// knots closer than the dedup tolerance, keeping the first value.
template <class Scalar>
LinearSpline<Scalar> assemble(std::vector<Scalar> knots, std::vector<Scalar> values,
                              Scalar left_slope, Scalar right_slope) {
  LinearSpline<Scalar> f;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!f.knots.empty() && knots[i] - f.knots.back() <= tol::knot_dedup) continue;
    f.knots.push_back(knots[i]);
    f.values.push_back(values[i]);
  }
  f.left_slope = left_slope;
  f.right_slope = right_slope;
  if (f.knots.empty()) {
    f.value_at_zero = 0;
    f.left_slope = f.right_slope = left_slope;
  }
  return f;
}

}  // namespace detail

// Canonical form: removes knots whose adjacent slopes agree (1e-12 relative).
// A knot-free result collapses to the affine representation.
template <class Scalar>
LinearSpline<Scalar> simplify(const LinearSpline<Scalar>& f) {
  using std::abs;
  if (f.knots.empty()) return f;
  std::vector<Scalar> k, v;
  k.reserve(f.knots.size());
  v.reserve(f.knots.size());
  auto seg_slope = [&](std::size_t a, std::size_t b) {
    return (v[b] - v[a]) / (k[b] - k[a]);
  };
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    k.push_back(f.knots[i]);
    v.push_back(f.values[i]);
    while (k.size() >= 3) {
      std::size_t n = k.size();
      if (!detail::slopes_equal(seg_slope(n - 3, n - 2), seg_slope(n - 2, n - 1))) break;
      k.erase(k.begin() + n - 2);
      v.erase(v.begin() + n - 2);
    }
  }
  while (k.size() >= 2 && detail::slopes_equal(f.left_slope, seg_slope(0, 1))) {
    k.erase(k.begin());
    v.erase(v.begin());
  }
  while (k.size() >= 2 && detail::slopes_equal(f.right_slope, seg_slope(k.size() - 2, k.size() - 1))) {
    k.pop_back();
    v.pop_back();
  }
  if (k.size() == 1 && detail::slopes_equal(f.left_slope, f.right_slope))
    return affine(f.left_slope, v[0] - f.left_slope * k[0]);
  LinearSpline<Scalar> out;
  out.knots = std::move(k);
  out.values = std::move(v);
  out.left_slope = f.left_slope;
  out.right_slope = f.right_slope;
  return out;
}

// Validating constructor for user-facing data.
template <class Scalar>
LinearSpline<Scalar> from_knots(std::vector<Scalar> knots, std::vector<Scalar> values,
                                Scalar left_slope, Scalar right_slope) {
  using std::isfinite;
  if (knots.size() != values.size())
    throw std::invalid_argument("from_knots: knots/values size mismatch");
  if (!isfinite(left_slope) || !isfinite(right_slope))
    throw std::invalid_argument("from_knots: non-finite slope");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!isfinite(knots[i]) || !isfinite(values[i]))
      throw std::invalid_argument("from_knots: non-finite data");
    if (i > 0 && !(knots[i] - knots[i - 1] > tol::knot_dedup))
      throw std::invalid_argument("from_knots: knots not strictly increasing");
  }
  if (knots.empty()) {
    using std::abs;
    if (abs(left_slope - right_slope) > 0)
      throw std::invalid_argument("from_knots: affine spline needs equal outer slopes");
    return affine(left_slope, Scalar(0));
  }
  LinearSpline<Scalar> f;
  f.knots = std::move(knots);
  f.values = std::move(values);
  f.left_slope = left_slope;
  f.right_slope = right_slope;
  return f;
}

template <class Scalar>
Scalar lipschitz(const LinearSpline<Scalar>& f) {
  using std::abs;
  Scalar m = 0;
  for (Scalar s : region_slopes(f)) m = std::max(m, abs(s));
  return m;
}

// Second-order total variation: sum of |slope jumps| across the interior
// knots of the simplified spline.
template <class Scalar>
Scalar tv2(const LinearSpline<Scalar>& f) {
  using std::abs;
  auto s = region_slopes(simplify(f));
  Scalar acc = 0;
  for (std::size_t i = 1; i < s.size(); ++i) acc += abs(s[i] - s[i - 1]);
  return acc;
}

template <class Scalar>
LinearSpline<Scalar> scale(const LinearSpline<Scalar>& f, Scalar a) {
  LinearSpline<Scalar> g = f;
  for (auto& v : g.values) v *= a;
  g.left_slope *= a;
  g.right_slope *= a;
  g.value_at_zero *= a;
  return g;
}

template <class Scalar>
LinearSpline<Scalar> negate(const LinearSpline<Scalar>& f) {
  return scale(f, Scalar(-1));
}

template <class Scalar>
LinearSpline<Scalar> shift_y(const LinearSpline<Scalar>& f, Scalar c) {
  LinearSpline<Scalar> g = f;
  for (auto& v : g.values) v += c;
  g.value_at_zero += c;
  return g;
}

// x -> f(-x)
template <class Scalar>
LinearSpline<Scalar> mirror_x(const LinearSpline<Scalar>& f) {
  LinearSpline<Scalar> g;
  g.knots.assign(f.knots.rbegin(), f.knots.rend());
  for (auto& k : g.knots) k = -k;
  g.values.assign(f.values.rbegin(), f.values.rend());
  g.left_slope = -f.right_slope;
  g.right_slope = -f.left_slope;
  g.value_at_zero = f.value_at_zero;
  return g;
}

// a*f + b*g, exact on the union of knots.
template <class Scalar>
LinearSpline<Scalar> linear_combo(Scalar a, const LinearSpline<Scalar>& f, Scalar b,
                                  const LinearSpline<Scalar>& g) {
  std::vector<Scalar> ks;
  ks.reserve(f.knots.size() + g.knots.size());
  ks.insert(ks.end(), f.knots.begin(), f.knots.end());
  ks.insert(ks.end(), g.knots.begin(), g.knots.end());
  std::sort(ks.begin(), ks.end());
  if (ks.empty()) {
    Scalar slope = a * f.left_slope + b * g.left_slope;
    return affine(slope, a * eval(f, Scalar(0)) + b * eval(g, Scalar(0)));
  }
  std::vector<Scalar> vs;
  vs.reserve(ks.size());
  for (Scalar x : ks) vs.push_back(a * eval(f, x) + b * eval(g, x));
  return simplify(detail::assemble(std::move(ks), std::move(vs),
                                   a * f.left_slope + b * g.left_slope,
                                   a * f.right_slope + b * g.right_slope));
}

template <class Scalar>
LinearSpline<Scalar> add(const LinearSpline<Scalar>& f, const LinearSpline<Scalar>& g) {
  return linear_combo(Scalar(1), f, Scalar(1), g);
}

// f(g(x)), exact: the result's knots are g's knots plus all preimages of f's
// knots under g, so the composition is affine between consecutive knots.
template <class Scalar>
LinearSpline<Scalar> compose(const LinearSpline<Scalar>& f, const LinearSpline<Scalar>& g) {
  if (g.knots.empty()) {
    Scalar s = g.left_slope, c = g.value_at_zero;
    if (s == Scalar(0)) return affine(Scalar(0), eval(f, c));
    if (f.knots.empty()) return affine(f.left_slope * s, eval(f, c));
    std::vector<Scalar> ks, vs;
    ks.reserve(f.knots.size());
    vs.reserve(f.knots.size());
    for (std::size_t i = 0; i < f.knots.size(); ++i) {
      std::size_t j = s > 0 ? i : f.knots.size() - 1 - i;
      ks.push_back((f.knots[j] - c) / s);
      vs.push_back(f.values[j]);
    }
    Scalar ls = (s > 0 ? f.left_slope : f.right_slope) * s;
    Scalar rs = (s > 0 ? f.right_slope : f.left_slope) * s;
    return simplify(detail::assemble(std::move(ks), std::move(vs), ls, rs));
  }

  const auto& k = g.knots;
  const auto& v = g.values;
  std::vector<Scalar> xs(k.begin(), k.end());
  if (!f.knots.empty()) {
    if (g.left_slope != Scalar(0)) {
      for (Scalar t : f.knots) {
        Scalar x = k.front() + (t - v.front()) / g.left_slope;
        if (x < k.front()) xs.push_back(x);
      }
    }
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
      Scalar si = (v[i + 1] - v[i]) / (k[i + 1] - k[i]);
      if (si == Scalar(0)) continue;
      for (Scalar t : f.knots) {
        Scalar x = k[i] + (t - v[i]) / si;
        if (x > k[i] && x < k[i + 1]) xs.push_back(x);
      }
    }
    if (g.right_slope != Scalar(0)) {
      for (Scalar t : f.knots) {
        Scalar x = k.back() + (t - v.back()) / g.right_slope;
        if (x > k.back()) xs.push_back(x);
      }
    }
  }
  std::sort(xs.begin(), xs.end());
  std::vector<Scalar> hs;
  hs.reserve(xs.size());
  for (Scalar x : xs) hs.push_back(eval(f, eval(g, x)));
  Scalar ls, rs;
  if (g.left_slope > 0)
    ls = f.left_slope * g.left_slope;
  else if (g.left_slope < 0)
    ls = f.right_slope * g.left_slope;
  else
    ls = 0;
  if (g.right_slope > 0)
    rs = f.right_slope * g.right_slope;
  else if (g.right_slope < 0)
    rs = f.left_slope * g.right_slope;
  else
    rs = 0;
  return simplify(detail::assemble(std::move(xs), std::move(hs), ls, rs));
}

namespace detail {

// Winning slope on an unbounded ray for max (larger=true) / min: decided by
// the value gap at the outermost knot, falling back to the slope ordering
// when the gap is a numerical tie (the ray then starts at a crossing).
template <class Scalar>
Scalar ray_slope(Scalar vf, Scalar vg, Scalar sf, Scalar sg, bool larger, bool left) {
  using std::abs;
  Scalar tie = tol::knot_dedup * std::max(Scalar(1), std::max(abs(vf), abs(vg)));
  if (abs(vf - vg) > tie) return (larger == (vf > vg)) ? sf : sg;
  if (left) return larger ? std::min(sf, sg) : std::max(sf, sg);
  return larger ? std::max(sf, sg) : std::min(sf, sg);
}

}  // namespace detail

template <class Scalar>
LinearSpline<Scalar> pointwise_max(const LinearSpline<Scalar>& f, const LinearSpline<Scalar>& g) {
  std::vector<Scalar> base;
  base.reserve(f.knots.size() + g.knots.size());
  base.insert(base.end(), f.knots.begin(), f.knots.end());
  base.insert(base.end(), g.knots.begin(), g.knots.end());
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());

  if (base.empty()) {
    Scalar d0 = eval(f, Scalar(0)) - eval(g, Scalar(0));
    Scalar ds = f.left_slope - g.left_slope;
    if (ds == Scalar(0)) return d0 >= 0 ? f : g;
    Scalar xc = -d0 / ds;
    std::vector<Scalar> ks{xc}, vs{eval(f, xc)};
    return simplify(detail::assemble(std::move(ks), std::move(vs),
                                     std::min(f.left_slope, g.left_slope),
                                     std::max(f.left_slope, g.left_slope)));
  }

  std::vector<Scalar> xs = base;
  auto d = [&](Scalar x) { return eval(f, x) - eval(g, x); };
  {
    Scalar d0 = d(base.front());
    Scalar ds = f.left_slope - g.left_slope;
    if (ds != Scalar(0) && d0 != Scalar(0)) {
      Scalar xc = base.front() - d0 / ds;
      if (xc < base.front()) xs.push_back(xc);
    }
  }
  for (std::size_t i = 0; i + 1 < base.size(); ++i) {
    Scalar da = d(base[i]), db = d(base[i + 1]);
    if ((da > 0 && db < 0) || (da < 0 && db > 0))
      xs.push_back(base[i] + da * (base[i + 1] - base[i]) / (da - db));
  }
  {
    Scalar d1 = d(base.back());
    Scalar ds = f.right_slope - g.right_slope;
    if (ds != Scalar(0) && d1 != Scalar(0)) {
      Scalar xc = base.back() - d1 / ds;
      if (xc > base.back()) xs.push_back(xc);
    }
  }
  std::sort(xs.begin(), xs.end());
  std::vector<Scalar> vs;
  vs.reserve(xs.size());
  for (Scalar x : xs) vs.push_back(std::max(eval(f, x), eval(g, x)));
  Scalar ls = detail::ray_slope(eval(f, xs.front()), eval(g, xs.front()), f.left_slope,
                                g.left_slope, true, true);
  Scalar rs = detail::ray_slope(eval(f, xs.back()), eval(g, xs.back()), f.right_slope,
                                g.right_slope, true, false);
  return simplify(detail::assemble(std::move(xs), std::move(vs), ls, rs));
}

template <class Scalar>
LinearSpline<Scalar> pointwise_min(const LinearSpline<Scalar>& f, const LinearSpline<Scalar>& g) {
  return negate(pointwise_max(negate(f), negate(g)));
}

// Natural CPWL interpolant of scattered 1-D samples; constant beyond the data.
// Duplicate x with matching y are merged, conflicting duplicates rejected.
template <class Scalar>
LinearSpline<Scalar> spline_from_samples(std::vector<Scalar> xs, std::vector<Scalar> ys) {
  using std::abs;
  using std::isfinite;
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("spline_from_samples: need equally many xs and ys, at least one");
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<Scalar> k, v;
  for (std::size_t idx : order) {
    Scalar x = xs[idx], y = ys[idx];
    if (!isfinite(x) || !isfinite(y))
      throw std::invalid_argument("spline_from_samples: non-finite sample");
    if (!k.empty() && x - k.back() <= tol::knot_dedup) {
      if (abs(y - v.back()) > tol::grid_eq * std::max(Scalar(1), abs(v.back())))
        throw std::invalid_argument("spline_from_samples: conflicting duplicate x");
      continue;
    }
    k.push_back(x);
    v.push_back(y);
  }
  return simplify(detail::assemble(std::move(k), std::move(v), Scalar(0), Scalar(0)));
}

// Reference grid for comparing CPWL functions: all supplied breakpoints, the
// midpoints between neighbours, and a uniform sweep of the padded hull.
template <class Scalar>
std::vector<Scalar> oracle_grid(std::vector<Scalar> breakpoints, int uniform_n = 10000) {
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  Scalar lo = breakpoints.empty() ? Scalar(0) : breakpoints.front();
  Scalar hi = breakpoints.empty() ? Scalar(0) : breakpoints.back();
  lo -= Scalar(5);
  hi += Scalar(5);
  std::vector<Scalar> grid = breakpoints;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    grid.push_back((breakpoints[i] + breakpoints[i + 1]) / Scalar(2));
  for (int i = 0; i < uniform_n; ++i)
    grid.push_back(lo + (hi - lo) * Scalar(i) / Scalar(uniform_n - 1));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

template <class Scalar>
std::vector<Scalar> oracle_grid(const LinearSpline<Scalar>& f, const LinearSpline<Scalar>& g,
                                int uniform_n = 10000) {
  std::vector<Scalar> b = f.knots;
  b.insert(b.end(), g.knots.begin(), g.knots.end());
  return oracle_grid(std::move(b), uniform_n);
}

template <class Scalar>
Scalar max_abs_diff(const LinearSpline<Scalar>& f, const LinearSpline<Scalar>& g,
                    const std::vector<Scalar>& grid) {
  using std::abs;
  Scalar m = 0;
  for (Scalar x : grid) m = std::max(m, abs(eval(f, x) - eval(g, x)));
  return m;
}

}  // namespace cpwl
