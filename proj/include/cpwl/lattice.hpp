#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cpwl/types.hpp"

namespace cpwl {

// One affine piece x -> <gradient, x> + offset.
template <class Scalar = double>
struct AffinePiece {
  VectorX<Scalar> gradient;
  Scalar offset{0};
};

// Min-of-max lattice of affine pieces: f(x) = min_g max_{piece in g} piece(x).
template <class Scalar = double>
struct LatticeCPWL {
  Index dim{0};
  std::vector<std::vector<AffinePiece<Scalar>>> groups;
};

template <class Scalar = double>
struct InterpolationProblem {
  MatrixX<Scalar> points;  // d x N, one site per column
  VectorX<Scalar> values;  // N
  Scalar p{2};
};

// Dual-saturating direction for a site pair: u has the component signs of
// xj - xi and magnitudes |xj - xi|^(p/q), so that <u, xj - xi> equals
// ||u||_q * ||xj - xi||_p exactly. p = inf uses the one-hot sign at the
// smallest index attaining the max; p = 1 uses the sign vector on every
// nonzero component.
template <class Scalar>
VectorX<Scalar> holder_witness(const VectorX<Scalar>& xi, const VectorX<Scalar>& xj, Scalar p) {
  using std::abs;
  using std::pow;
  if (!(p >= Scalar(1))) throw std::invalid_argument("holder_witness: p must be >= 1");
  if (xi.size() != xj.size()) throw std::invalid_argument("holder_witness: dimension mismatch");
  VectorX<Scalar> d = xj - xi;
  if (d.template lpNorm<Eigen::Infinity>() == Scalar(0))
    throw std::invalid_argument("holder_witness: coincident sites");
  VectorX<Scalar> u = VectorX<Scalar>::Zero(d.size());
  if (std::isinf(p)) {
    Scalar m = d.template lpNorm<Eigen::Infinity>();
    for (Index k = 0; k < d.size(); ++k) {
      if (abs(d[k]) == m) {
        u[k] = Scalar(sgn(d[k]));
        break;
      }
    }
    return u;
  }
  if (p == Scalar(1)) {
    for (Index k = 0; k < d.size(); ++k) u[k] = Scalar(sgn(d[k]));
    return u;
  }
  Scalar e = p - Scalar(1);  // p/q
  Scalar scale = d.template lpNorm<Eigen::Infinity>();
  for (Index k = 0; k < d.size(); ++k)
    if (d[k] != Scalar(0)) u[k] = Scalar(sgn(d[k])) * pow(abs(d[k]) / scale, e);
  return u;
}

// Smallest p-Lipschitz constant compatible with the data.
template <class Scalar>
Scalar data_lipschitz(const InterpolationProblem<Scalar>& prob) {
  using std::abs;
  Scalar L = 0;
  const Index n = prob.points.cols();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      VectorX<Scalar> d = prob.points.col(i) - prob.points.col(j);
      Scalar dist = pnorm<Scalar>(d, prob.p);
      if (dist > 0) L = std::max(L, abs(prob.values[i] - prob.values[j]) / dist);
    }
  return L;
}

namespace detail {

template <class Scalar>
InterpolationProblem<Scalar> dedup_problem(const InterpolationProblem<Scalar>& prob) {
  using std::abs;
  const Index n = prob.points.cols();
  if (n == 0) throw std::invalid_argument("build_interpolant: no sites");
  if (!prob.points.allFinite() || !prob.values.allFinite())
    throw std::invalid_argument("build_interpolant: non-finite data");
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i) {
    bool dup = false;
    for (Index k : keep) {
      if ((prob.points.col(i) - prob.points.col(k)).template lpNorm<Eigen::Infinity>() <=
          tol::knot_dedup) {
        if (abs(prob.values[i] - prob.values[k]) >
            tol::grid_eq * std::max(Scalar(1), abs(prob.values[k])))
          throw std::invalid_argument("build_interpolant: conflicting duplicate sites");
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  InterpolationProblem<Scalar> out;
  out.p = prob.p;
  out.points.resize(prob.points.rows(), static_cast<Index>(keep.size()));
  out.values.resize(static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.points.col(static_cast<Index>(c)) = prob.points.col(keep[c]);
    out.values[static_cast<Index>(c)] = prob.values[keep[c]];
  }
  return out;
}

}  // namespace detail

// Min-max interpolant: group i collects the pieces through (x_i, y_i) aimed at
// every other site along its dual-saturating direction; each piece gradient
// has dual norm |y_j - y_i| / ||x_j - x_i||_p <= L, and the lattice matches
// the data exactly with p-Lipschitz constant L.
template <class Scalar>
LatticeCPWL<Scalar> build_interpolant(const InterpolationProblem<Scalar>& raw) {
  if (!(raw.p >= Scalar(1))) throw std::invalid_argument("build_interpolant: p must be >= 1");
  InterpolationProblem<Scalar> prob = detail::dedup_problem(raw);
  const Index n = prob.points.cols();
  const Scalar q = dual_index(prob.p);
  LatticeCPWL<Scalar> lat;
  lat.dim = prob.points.rows();
  lat.groups.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    auto& group = lat.groups[static_cast<std::size_t>(i)];
    if (n == 1) {
      group.push_back({VectorX<Scalar>::Zero(lat.dim), prob.values[0]});
      continue;
    }
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      AffinePiece<Scalar> piece;
      if (prob.values[j] == prob.values[i]) {
        piece.gradient = VectorX<Scalar>::Zero(lat.dim);
        piece.offset = prob.values[i];
      } else {
        VectorX<Scalar> u = holder_witness<Scalar>(prob.points.col(i), prob.points.col(j), prob.p);
        u /= pnorm<Scalar>(u, q);
        Scalar dist = pnorm<Scalar>(VectorX<Scalar>(prob.points.col(j) - prob.points.col(i)), prob.p);
        piece.gradient = u * ((prob.values[j] - prob.values[i]) / dist);
        piece.offset = prob.values[i] - piece.gradient.dot(prob.points.col(i));
      }
      group.push_back(std::move(piece));
    }
  }
  return lat;
}

template <class Scalar>
Scalar eval_lattice(const LatticeCPWL<Scalar>& lat, const VectorX<Scalar>& x) {
  if (x.size() != lat.dim) throw std::invalid_argument("eval_lattice: dimension mismatch");
  if (lat.groups.empty()) throw std::invalid_argument("eval_lattice: empty lattice");
  Scalar best = infinity<Scalar>();
  for (const auto& group : lat.groups) {
    Scalar gmax = -infinity<Scalar>();
    for (const auto& piece : group) {
      Scalar v = piece.gradient.dot(x) + piece.offset;
      if (v > gmax) gmax = v;
    }
    if (gmax < best) best = gmax;
  }
  return best;
}

// max over pieces of the dual norm of the gradient: an upper bound on the
// p-Lipschitz constant of the lattice.
template <class Scalar>
Scalar lattice_lipschitz_bound(const LatticeCPWL<Scalar>& lat, Scalar p) {
  Scalar q = dual_index(p);
  Scalar m = 0;
  for (const auto& group : lat.groups)
    for (const auto& piece : group) m = std::max(m, pnorm<Scalar>(piece.gradient, q));
  return m;
}

}  // namespace cpwl
