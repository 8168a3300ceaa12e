#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cpwl {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

template <class Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

// Library-wide tolerances. Knot/boundary comparisons are absolute; slope and
// norm comparisons are relative to max(1, magnitude).
namespace tol {
inline constexpr double knot_dedup = 1e-12;
inline constexpr double slope_eq = 1e-12;
inline constexpr double holder = 1e-10;
inline constexpr double grid_eq = 1e-9;
inline constexpr double power_iter = 1e-12;
inline constexpr int power_iter_max = 10000;
inline constexpr double unit_piece = 1e-9;   // ||J||_p >= 1 - unit_piece
inline constexpr double boundary = 1e-12;    // activation-boundary detection
inline constexpr double fd_step = 1e-6;
inline constexpr double fd_agree = 1e-5;
inline constexpr double classify = 1e-10;    // extremum / slope-sign tests
inline constexpr double interior = 1e-9;     // strict-interior LP margin
}  // namespace tol

template <class Scalar>
int sgn(Scalar x) {
  return (x > Scalar(0)) - (x < Scalar(0));
}

// Exponent of the dual norm: 1 <-> inf, otherwise p/(p-1).
template <class Scalar>
Scalar dual_index(Scalar p) {
  if (!(p >= Scalar(1))) throw std::invalid_argument("dual_index: p must be >= 1");
  if (std::isinf(p)) return Scalar(1);
  if (p == Scalar(1)) return infinity<Scalar>();
  return p / (p - Scalar(1));
}

// l^p norm of a vector, p in [1, inf].
template <class Scalar>
Scalar pnorm(const VectorX<Scalar>& v, Scalar p) {
  if (!(p >= Scalar(1))) throw std::invalid_argument("pnorm: p must be >= 1");
  if (v.size() == 0) return Scalar(0);
  if (std::isinf(p)) return v.template lpNorm<Eigen::Infinity>();
  if (p == Scalar(1)) return v.template lpNorm<1>();
  if (p == Scalar(2)) return v.norm();
  using std::abs;
  using std::pow;
  Scalar scale = v.template lpNorm<Eigen::Infinity>();
  if (scale == Scalar(0)) return Scalar(0);
  Scalar acc = 0;
  for (Index i = 0; i < v.size(); ++i) acc += pow(abs(v[i]) / scale, p);
  return scale * pow(acc, Scalar(1) / p);
}

}  // namespace cpwl
