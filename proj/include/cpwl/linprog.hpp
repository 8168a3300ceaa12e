#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cpwl/types.hpp"

namespace cpwl {

enum class LpStatus { optimal, infeasible, unbounded };

template <class Scalar = double>
struct LpResult {
  LpStatus status{LpStatus::infeasible};
  Scalar objective{0};
  VectorX<Scalar> x;
};

// Dense two-phase tableau simplex with Bland's rule for
//   max c'x  s.t.  A x <= b,  x >= 0.
// Sized for the tiny feasibility systems produced by region enumeration
// (tens of rows); tolerances are absolute at 1e-9.
template <class Scalar>
LpResult<Scalar> solve_lp_max(const VectorX<Scalar>& c, const MatrixX<Scalar>& A,
                              const VectorX<Scalar>& b) {
  using std::abs;
  const Scalar eps = Scalar(1e-9);
  const Index m = A.rows(), n = A.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("solve_lp_max: size mismatch");

  // Columns: n structural, m slack, then one artificial per negated row.
  std::vector<Index> art_rows;
  for (Index i = 0; i < m; ++i)
    if (b[i] < Scalar(0)) art_rows.push_back(i);
  const Index na = static_cast<Index>(art_rows.size());
  const Index cols = n + m + na;
  MatrixX<Scalar> T = MatrixX<Scalar>::Zero(m, cols);
  VectorX<Scalar> rhs = b;
  T.block(0, 0, m, n) = A;
  for (Index i = 0; i < m; ++i) T(i, n + i) = Scalar(1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  for (Index k = 0; k < na; ++k) {
    Index i = art_rows[static_cast<std::size_t>(k)];
    T.row(i) = -T.row(i);
    rhs[i] = -rhs[i];
    T(i, n + m + k) = Scalar(1);
    basis[static_cast<std::size_t>(i)] = n + m + k;
  }

  auto pivot = [&](Index pr, Index pc) {
    const Scalar piv = T(pr, pc);
    T.row(pr) /= piv;
    rhs[pr] /= piv;
    for (Index i = 0; i < m; ++i) {
      if (i == pr || T(i, pc) == Scalar(0)) continue;
      Scalar f = T(i, pc);
      T.row(i) -= f * T.row(pr);
      rhs[i] -= f * rhs[pr];
    }
    basis[static_cast<std::size_t>(pr)] = pc;
  };

  // Bland: entering = lowest-index column with positive reduced cost; leaving
  // = min-ratio row, ties to the lowest basis index. Returns false when no
  // entering column remains (optimum reached).
  auto iterate = [&](const VectorX<Scalar>& obj, Index active_cols) -> bool {
    for (long guard = 0; guard < 100000; ++guard) {
      VectorX<Scalar> y = VectorX<Scalar>::Zero(m);
      for (Index i = 0; i < m; ++i) y[i] = obj[basis[static_cast<std::size_t>(i)]];
      Index enter = -1;
      for (Index j = 0; j < active_cols; ++j) {
        bool in_basis = false;
        for (Index i = 0; i < m; ++i)
          if (basis[static_cast<std::size_t>(i)] == j) in_basis = true;
        if (in_basis) continue;
        Scalar red = obj[j] - y.dot(T.col(j));
        if (red > eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      Scalar best = infinity<Scalar>();
      for (Index i = 0; i < m; ++i) {
        if (T(i, enter) > eps) {
          Scalar ratio = rhs[i] / T(i, enter);
          if (ratio < best - eps ||
              (ratio < best + eps &&
               (leave < 0 || basis[static_cast<std::size_t>(i)] <
                                 basis[static_cast<std::size_t>(leave)]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded direction
      pivot(leave, enter);
    }
    throw std::runtime_error("solve_lp_max: simplex failed to terminate");
  };

  LpResult<Scalar> res;
  if (na > 0) {
    VectorX<Scalar> phase1 = VectorX<Scalar>::Zero(cols);
    for (Index k = 0; k < na; ++k) phase1[n + m + k] = Scalar(-1);
    iterate(phase1, cols);
    Scalar infeas = 0;
    for (Index i = 0; i < m; ++i)
      if (basis[static_cast<std::size_t>(i)] >= n + m) infeas += rhs[i];
    if (infeas > eps) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // Degenerate artificials may linger in the basis at level zero; pivot
    // them out on any eligible column, or drop redundant rows from play.
    for (Index i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] < n + m) continue;
      Index enter = -1;
      for (Index j = 0; j < n + m; ++j)
        if (abs(T(i, j)) > eps) {
          enter = j;
          break;
        }
      if (enter >= 0) pivot(i, enter);
    }
  }

  VectorX<Scalar> obj = VectorX<Scalar>::Zero(cols);
  obj.head(n) = c;
  if (!iterate(obj, n + m)) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.x = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] < n) res.x[basis[static_cast<std::size_t>(i)]] = rhs[i];
  res.objective = c.dot(res.x);
  return res;
}

template <class Scalar = double>
struct InteriorPoint {
  bool feasible{false};
  VectorX<Scalar> x;
  Scalar margin{0};
};

// Strict-interior point of {x : Ax <= b} restricted to the box
// [-box_radius, box_radius]^d, found by maximizing the uniform slack t in
// A x + t <= b. Feasible iff the best margin exceeds tol::interior.
template <class Scalar>
InteriorPoint<Scalar> interior_point(const MatrixX<Scalar>& A, const VectorX<Scalar>& b,
                                     Scalar box_radius = Scalar(1e4)) {
  const Index m = A.rows(), d = A.cols();
  const Scalar R = box_radius;
  // Shift to u = x + R >= 0 and append u <= 2R box rows plus t <= R.
  MatrixX<Scalar> As = MatrixX<Scalar>::Zero(m + d + 1, d + 1);
  VectorX<Scalar> bs(m + d + 1);
  As.block(0, 0, m, d) = A;
  As.block(0, d, m, 1).setOnes();
  for (Index i = 0; i < m; ++i) bs[i] = b[i] + R * A.row(i).sum();
  for (Index i = 0; i < d; ++i) {
    As(m + i, i) = Scalar(1);
    bs[m + i] = Scalar(2) * R;
  }
  As(m + d, d) = Scalar(1);
  bs[m + d] = R;
  VectorX<Scalar> c = VectorX<Scalar>::Zero(d + 1);
  c[d] = Scalar(1);
  auto lp = solve_lp_max(c, As, bs);
  InteriorPoint<Scalar> out;
  if (lp.status != LpStatus::optimal) return out;  // box-capped LP is never unbounded
  out.margin = lp.objective;
  if (out.margin <= Scalar(tol::interior)) return out;
  out.x = lp.x.head(d).array() - R;
  out.feasible = true;
  return out;
}

}  // namespace cpwl
