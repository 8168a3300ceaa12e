#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpwl/spline.hpp"

namespace cpwl {

// Ordered factorization g = f_n o ... o f_1. factors[0] is applied first.
// Chains produced by decompose() keep every factor 1-Lipschitz with at most
// 3 linear regions (after simplify).
template <class Scalar = double>
struct CompositionChain {
  std::vector<LinearSpline<Scalar>> factors;
};

// Empty chain composes to the identity.
template <class Scalar>
LinearSpline<Scalar> compose_chain(const CompositionChain<Scalar>& chain) {
  LinearSpline<Scalar> acc = affine(Scalar(1), Scalar(0));
  for (const auto& f : chain.factors) acc = compose(f, acc);
  return acc;
}

enum class SplitCase { up_to_three_regions, case1, case2, case3 };

struct CaseTag {
  SplitCase kind{SplitCase::up_to_three_regions};
  Index knot_index{-1};  // 0-based knot of the one-sided extremum (case1 only)
};

namespace detail {

enum class ExtremumSide { max_left, min_left, max_right, min_right };

// Weak one-sided extremum test at knot j: the value at the knot dominates
// (or is dominated by) g over the whole half line through it, ties allowed
// within tol::classify. On the unbounded ray only the slope sign matters.
// The check order below is the fixed subcase priority.
template <class Scalar>
std::optional<ExtremumSide> extremum_side(const LinearSpline<Scalar>& g, std::size_t j) {
  const auto& v = g.values;
  auto le = [](Scalar a, Scalar b) { return a <= b + Scalar(tol::classify); };
  bool maxl = g.left_slope > 0, minl = g.left_slope < 0;
  for (std::size_t i = 0; i < j && (maxl || minl); ++i) {
    maxl = maxl && le(v[i], v[j]);
    minl = minl && le(v[j], v[i]);
  }
  if (maxl) return ExtremumSide::max_left;
  if (minl) return ExtremumSide::min_left;
  bool maxr = g.right_slope < 0, minr = g.right_slope > 0;
  for (std::size_t i = j + 1; i < v.size() && (maxr || minr); ++i) {
    maxr = maxr && le(v[i], v[j]);
    minr = minr && le(v[j], v[i]);
  }
  if (maxr) return ExtremumSide::max_right;
  if (minr) return ExtremumSide::min_right;
  return std::nullopt;
}

// Smallest interior knot carrying a weak one-sided extremum. The outermost
// two knots are excluded: the split constructions need at least one region
// of g on each side of the chosen knot.
template <class Scalar>
std::optional<std::pair<std::size_t, ExtremumSide>> find_case1_knot(const LinearSpline<Scalar>& g) {
  for (std::size_t j = 1; j + 1 < g.knots.size(); ++j)
    if (auto side = extremum_side(g, j)) return std::make_pair(j, *side);
  return std::nullopt;
}

template <class Scalar>
bool unit_outer_slopes(const LinearSpline<Scalar>& g) {
  using std::abs;
  return abs(abs(g.left_slope) - 1) <= tol::classify && abs(abs(g.right_slope) - 1) <= tol::classify;
}

}  // namespace detail

// Classifies a spline with |outer slopes| = 1 for the recursive split. With
// more than 3 regions exactly one tag applies: case1 if some interior knot is
// a weak one-sided extremum (smallest such knot reported), otherwise case2 or
// case3 by the sign ratio of the two outer slopes (+1 -> case2, -1 -> case3).
template <class Scalar>
CaseTag case_split(const LinearSpline<Scalar>& g) {
  LinearSpline<Scalar> s = simplify(g);
  if (region_count(s) <= 3) return {SplitCase::up_to_three_regions, -1};
  if (!detail::unit_outer_slopes(s))
    throw std::logic_error("case_split: outer slopes not normalized");
  if (auto hit = detail::find_case1_knot(s))
    return {SplitCase::case1, static_cast<Index>(hit->first)};
  const bool same_sign = (s.left_slope > 0) == (s.right_slope > 0);
  return {same_sign ? SplitCase::case2 : SplitCase::case3, -1};
}

namespace detail {

// Weak maximum on (-inf, a_j]: factor through the level y = g(a_j). The left
// factor keeps g up to a_j and continues with slope +1, so it is invertible
// where it exceeds g(a_j); the right factor is the identity below that level
// and replays the remainder of g above it (input shifted by a_j - g(a_j)).
template <class Scalar>
std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> case1_max_left(const LinearSpline<Scalar>& g,
                                                                     std::size_t j) {
  LinearSpline<Scalar> f1;
  f1.knots.assign(g.knots.begin(), g.knots.begin() + j + 1);
  f1.values.assign(g.values.begin(), g.values.begin() + j + 1);
  f1.left_slope = g.left_slope;
  f1.right_slope = Scalar(1);

  const Scalar aj = g.knots[j];
  const Scalar vj = g.values[j];
  LinearSpline<Scalar> f2;
  f2.knots.push_back(vj);
  f2.values.push_back(vj);
  for (std::size_t i = j + 1; i < g.knots.size(); ++i) {
    f2.knots.push_back(vj + (g.knots[i] - aj));
    f2.values.push_back(g.values[i]);
  }
  f2.left_slope = Scalar(1);
  f2.right_slope = g.right_slope;
  return {simplify(f1), simplify(f2)};
}

}  // namespace detail

// pre: case_split(g).kind == case1. Returns (f1, f2) with g = f2 o f1, both
// 1-Lipschitz with |outer slopes| = 1 and strictly fewer regions than g.
// The three extremum variants other than max-on-left reduce to it by
// conjugating with negation (swaps max/min) and x-reflection (swaps sides).
template <class Scalar>
std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> split_case1(const LinearSpline<Scalar>& g) {
  LinearSpline<Scalar> s = simplify(g);
  auto hit = detail::find_case1_knot(s);
  if (!hit || region_count(s) <= 3 || !detail::unit_outer_slopes(s))
    throw std::logic_error("split_case1: case mismatch");
  const std::size_t j = hit->first;
  const std::size_t jm = s.knots.size() - 1 - j;  // index after mirror_x
  switch (hit->second) {
    case detail::ExtremumSide::max_left:
      return detail::case1_max_left(s, j);
    case detail::ExtremumSide::min_left: {
      auto [p1, p2] = detail::case1_max_left(negate(s), j);
      return {p1, negate(p2)};
    }
    case detail::ExtremumSide::max_right: {
      auto [p1, p2] = detail::case1_max_left(mirror_x(s), jm);
      return {mirror_x(p1), p2};
    }
    case detail::ExtremumSide::min_right: {
      auto [p1, p2] = detail::case1_max_left(mirror_x(negate(s)), jm);
      return {mirror_x(p1), negate(p2)};
    }
  }
  throw std::logic_error("split_case1: unreachable");
}

namespace detail {

// Both outer slopes +1 and no weak one-sided extremum, which forces
// v_first > v_i > v_last for the interior knot values. Reflecting the hull
// across y = v_first makes the first interior knot a weak maximum on the
// left; a 3-region valley (slopes +1, -1, +1) folds the image back.
template <class Scalar>
std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> case2_rising(const LinearSpline<Scalar>& g) {
  const Scalar v0 = g.values.front();
  const Scalar vl = g.values.back();
  LinearSpline<Scalar> f1 = g;
  for (std::size_t i = 1; i < f1.values.size(); ++i) f1.values[i] = 2 * v0 - g.values[i];

  LinearSpline<Scalar> f2;
  f2.knots = {v0, 2 * v0 - vl};
  f2.values = {v0, vl};
  f2.left_slope = Scalar(1);
  f2.right_slope = Scalar(1);
  return {simplify(f1), simplify(f2)};
}

}  // namespace detail

// pre: case_split(g).kind == case2. Returns (f1, f2) with g = f2 o f1; f1 has
// at most as many regions as g and falls into case1 (or, when simplification
// removes the reflected junction knot, a strictly smaller case2); f2 has 3
// regions with unit slopes.
template <class Scalar>
std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> split_case2(const LinearSpline<Scalar>& g) {
  LinearSpline<Scalar> s = simplify(g);
  if (case_split(s).kind != SplitCase::case2) throw std::logic_error("split_case2: case mismatch");
  if (s.left_slope > 0) return detail::case2_rising(s);
  auto [p1, p2] = detail::case2_rising(negate(s));
  return {p1, negate(p2)};
}

namespace detail {

// Outer slopes +1 / -1 and no weak one-sided extremum, which forces the
// global maximum onto an outermost knot a* (ties prefer the first knot).
// Reflect g across y = g(a*) right of a*, so both outer slopes rise; a
// 2-region fold (slopes +1, -1) at that level undoes the reflection.
template <class Scalar>
std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> case3_rising_falling(
    const LinearSpline<Scalar>& g) {
  const Scalar v0 = g.values.front();
  const Scalar vl = g.values.back();
  LinearSpline<Scalar> f1 = g;
  Scalar peak;
  if (v0 >= vl) {
    peak = v0;
    for (std::size_t i = 1; i < f1.values.size(); ++i) f1.values[i] = 2 * v0 - g.values[i];
  } else {
    peak = vl;  // a* is the last knot; only the right ray gets reflected
  }
  f1.right_slope = -g.right_slope;

  LinearSpline<Scalar> f2;
  f2.knots = {peak};
  f2.values = {peak};
  f2.left_slope = Scalar(1);
  f2.right_slope = Scalar(-1);
  return {simplify(f1), simplify(f2)};
}

}  // namespace detail

// pre: case_split(g).kind == case3. Returns (f1, f2) with g = f2 o f1; f1 has
// at most as many regions as g with outer slope ratio +1 (case1 or case2
// next), f2 has 2 regions with unit slopes.
template <class Scalar>
std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> split_case3(const LinearSpline<Scalar>& g) {
  LinearSpline<Scalar> s = simplify(g);
  if (case_split(s).kind != SplitCase::case3) throw std::logic_error("split_case3: case mismatch");
  if (s.left_slope > 0) return detail::case3_rising_falling(s);
  auto [p1, p2] = detail::case3_rising_falling(negate(s));
  return {p1, negate(p2)};
}

// Outer-slope normalization. The wrapper is applied to the INPUT:
// g(x) = core(wrapper(x)) exactly, with at most one 3-region factor in the
// wrapper chain (empty when g already has unit outer slopes). Composing on
// the input side is forced, not a taste choice: a post-composed wrapper would
// have to be the identity on core's image of the hull and simultaneously bend
// the unit extension back onto g's rays, which is impossible whenever an
// outermost hull value lies strictly inside that image.
template <class Scalar>
struct Normalized {
  LinearSpline<Scalar> core;         // |outer slopes| = 1, equals g on the knot hull
  CompositionChain<Scalar> wrapper;  // applied before core
};

template <class Scalar>
Normalized<Scalar> normalize_outer_slopes(const LinearSpline<Scalar>& g) {
  if (lipschitz(g) > 1 + tol::slope_eq)
    throw std::invalid_argument("normalize_outer_slopes: not 1-Lipschitz");
  LinearSpline<Scalar> s = simplify(g);
  auto unit = [](Scalar sl) {
    using std::abs;
    return abs(abs(sl) - 1) <= tol::slope_eq;
  };

  if (s.knots.empty()) {
    if (unit(s.left_slope)) return {s, {}};
    const Scalar a = s.left_slope;
    const Scalar eps = a >= 0 ? Scalar(1) : Scalar(-1);
    Normalized<Scalar> out;
    out.core = affine(eps, s.value_at_zero);
    out.wrapper.factors.push_back(affine(eps * a, Scalar(0)));
    return out;
  }
  if (unit(s.left_slope) && unit(s.right_slope)) return {s, {}};

  // Core: g on the hull, extended with unit slopes whose sign matches the
  // adjacent outer slope (a zero slope extends with +1). Wrapper: identity on
  // the hull, slope |outer slope| beyond it, so the wrapped input never
  // leaves the branch of the core extension that replays g's ray.
  const Scalar el = s.left_slope >= 0 ? Scalar(1) : Scalar(-1);
  const Scalar er = s.right_slope >= 0 ? Scalar(1) : Scalar(-1);
  Normalized<Scalar> out;
  out.core = s;
  out.core.left_slope = el;
  out.core.right_slope = er;
  out.core = simplify(out.core);

  LinearSpline<Scalar> w;
  w.knots.push_back(s.knots.front());
  w.values.push_back(s.knots.front());
  if (s.knots.size() > 1) {
    w.knots.push_back(s.knots.back());
    w.values.push_back(s.knots.back());
  }
  w.left_slope = el * s.left_slope;  // = |left slope|
  w.right_slope = er * s.right_slope;
  out.wrapper.factors.push_back(simplify(w));
  return out;
}

namespace detail {

template <class Scalar>
void decompose_normalized(const LinearSpline<Scalar>& g, CompositionChain<Scalar>& chain,
                          int depth, int budget) {
  // Every recursion level contributes at least one factor to its subtree and
  // the chain never exceeds ~2x the original region count, so path depth is
  // capped by the budget fixed at entry; the guard only trips on a logic bug.
  if (depth > budget) throw std::logic_error("decompose: recursion failed to terminate");
  LinearSpline<Scalar> s = simplify(g);
  const CaseTag tag = case_split(s);
  if (tag.kind == SplitCase::up_to_three_regions) {
    chain.factors.push_back(s);
    return;
  }
  std::pair<LinearSpline<Scalar>, LinearSpline<Scalar>> parts;
  switch (tag.kind) {
    case SplitCase::case1:
      parts = split_case1(s);
      break;
    case SplitCase::case2:
      parts = split_case2(s);
      break;
    default:
      parts = split_case3(s);
      break;
  }
  decompose_normalized(parts.first, chain, depth + 1, budget);
  decompose_normalized(parts.second, chain, depth + 1, budget);
}

}  // namespace detail

// Factors a 1-Lipschitz CPWL function into 1-Lipschitz factors with at most
// 3 linear regions each (chain applied first-to-last, length at most
// 2 * region count + 4). Functions with up to 3 regions come back as the
// singleton chain. If every slope of g has magnitude 1, the same holds for
// every factor: the splits only truncate, reflect, or mirror existing pieces
// and splice in unit-slope rays, and the wrapper is empty for such inputs.
template <class Scalar>
CompositionChain<Scalar> decompose(const LinearSpline<Scalar>& g) {
  if (lipschitz(g) > 1 + tol::slope_eq) throw std::invalid_argument("decompose: not 1-Lipschitz");
  LinearSpline<Scalar> s = simplify(g);
  if (region_count(s) <= 3) return {{s}};
  Normalized<Scalar> n = normalize_outer_slopes(s);
  CompositionChain<Scalar> chain = std::move(n.wrapper);
  detail::decompose_normalized(n.core, chain, 0, 8 + 2 * static_cast<int>(region_count(s)));
  return chain;
}

template <class Scalar>
struct ChainReport {
  Scalar max_grid_error{0};
  std::vector<Index> factor_region_counts;
  std::vector<Scalar> factor_lipschitz;
  bool ok{false};
};

// Checks a chain against its target on the decision grid: every breakpoint of
// both functions, the midpoints, and a uniform sweep spanning three times the
// knot range plus margin, so each outer ray is sampled at two points and grid
// equality decides CPWL equality on all of R.
template <class Scalar>
ChainReport<Scalar> verify_chain(const CompositionChain<Scalar>& chain,
                                 const LinearSpline<Scalar>& target) {
  ChainReport<Scalar> rep;
  const LinearSpline<Scalar> composed = compose_chain(chain);
  std::vector<Scalar> bp = target.knots;
  bp.insert(bp.end(), composed.knots.begin(), composed.knots.end());
  if (!bp.empty()) {
    const Scalar lo = *std::min_element(bp.begin(), bp.end());
    const Scalar hi = *std::max_element(bp.begin(), bp.end());
    bp.push_back(lo - (hi - lo));
    bp.push_back(hi + (hi - lo));
  }
  rep.max_grid_error = max_abs_diff(target, composed, oracle_grid(std::move(bp)));
  bool shape_ok = true;
  for (const auto& f : chain.factors) {
    rep.factor_region_counts.push_back(region_count(simplify(f)));
    rep.factor_lipschitz.push_back(lipschitz(f));
    shape_ok = shape_ok && rep.factor_region_counts.back() <= 3 &&
               rep.factor_lipschitz.back() <= 1 + tol::slope_eq;
  }
  rep.ok = shape_ok && rep.max_grid_error <= tol::grid_eq;
  return rep;
}

}  // namespace cpwl
