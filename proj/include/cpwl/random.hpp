#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cpwl/net.hpp"
#include "cpwl/spline.hpp"
#include "cpwl/types.hpp"

namespace cpwl {

// Deterministic random source. Distribution shaping is done explicitly from
// raw mt19937_64 draws so streams are reproducible across standard libraries
// (std::*_distribution would not be).
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  // Box-Muller, one value per pair of draws.
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 == 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  // inclusive range
  long uniform_int(long lo, long hi) {
    return lo + static_cast<long>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  template <class Scalar = double>
  VectorX<Scalar> gaussian_vector(Index n) {
    VectorX<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v[i] = static_cast<Scalar>(normal());
    return v;
  }
  template <class Scalar = double>
  MatrixX<Scalar> gaussian_matrix(Index r, Index c) {
    MatrixX<Scalar> m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = static_cast<Scalar>(normal());
    return m;
  }
};

// Random 1-Lipschitz spline: knot count uniform in {0..max_knots}, knots
// i.i.d. normal (sorted, separated), region slopes normal clipped to [-1, 1],
// values integrated from a normal anchor at the first knot.
inline LinearSpline<double> random_lipschitz_spline(Rng& rng, int max_knots = 8) {
  int n = static_cast<int>(rng.uniform_int(0, max_knots));
  auto clip = [](double s) { return std::max(-1.0, std::min(1.0, s)); };
  if (n == 0) return affine(clip(rng.normal()), rng.normal());
  std::vector<double> k(n);
  for (auto& x : k) x = rng.normal();
  std::sort(k.begin(), k.end());
  for (int i = 1; i < n; ++i)
    if (k[i] - k[i - 1] < 1e-6) k[i] = k[i - 1] + 1e-6 + rng.uniform() * 1e-3;
  std::vector<double> slopes(n + 1);
  for (auto& s : slopes) s = clip(rng.normal());
  std::vector<double> v(n);
  v[0] = rng.normal();
  for (int i = 1; i < n; ++i) v[i] = v[i - 1] + slopes[i] * (k[i] - k[i - 1]);
  LinearSpline<double> f;
  f.knots = std::move(k);
  f.values = std::move(v);
  f.left_slope = slopes.front();
  f.right_slope = slopes.back();
  return simplify(f);
}

// Random zigzag with every slope in {-1, +1} (signs strictly alternate, so
// the simplified spline keeps exactly `regions` regions).
inline LinearSpline<double> random_unit_slope_spline(Rng& rng, int regions) {
  int n = regions - 1;
  double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
  if (n <= 0) return affine(sign, rng.normal());
  std::vector<double> k(n);
  for (auto& x : k) x = rng.normal();
  std::sort(k.begin(), k.end());
  for (int i = 1; i < n; ++i)
    if (k[i] - k[i - 1] < 1e-3) k[i] = k[i - 1] + 1e-3 + rng.uniform() * 1e-2;
  std::vector<double> v(n);
  v[0] = rng.normal();
  double s = -sign;  // slope right of knot i alternates starting from -left_slope
  for (int i = 1; i < n; ++i) {
    v[i] = v[i - 1] + s * (k[i] - k[i - 1]);
    s = -s;
  }
  LinearSpline<double> f;
  f.knots = std::move(k);
  f.values = std::move(v);
  f.left_slope = sign;
  f.right_slope = (n % 2 == 0) ? sign : -sign;
  return f;
}

// Random net with Gaussian weights and biases, weights projected onto the
// requested constraint set. `hidden` lists the hidden widths; groupsort and
// householder want even widths (caller's responsibility). Spline activations
// draw a fresh random 1-Lipschitz spline per neuron.
inline ConstrainedNet<double> random_net(Rng& rng, Index input_dim,
                                         const std::vector<Index>& hidden, Index output_dim,
                                         ActKind kind, ConstraintSpec<double> constraint,
                                         double leaky_c = 0.3) {
  ConstrainedNet<double> net;
  net.input_dim = input_dim;
  net.constraint = constraint;
  Index prev = input_dim;
  auto make_weight = [&](Index r, Index c) {
    MatrixX<double> W = rng.gaussian_matrix(r, c);
    switch (constraint.kind) {
      case ConstraintKind::pnorm: return project_pnorm(W, constraint.p);
      case ConstraintKind::orthogonal: return project_orthogonal(W);
      case ConstraintKind::none: return W;
    }
    return W;
  };
  for (Index width : hidden) {
    Layer<double> l;
    l.W = make_weight(width, prev);
    l.b = rng.gaussian_vector(width);
    ActivationSpec<double> a;
    a.kind = kind;
    switch (kind) {
      case ActKind::leaky_cpwl:
        a.c = leaky_c;
        a.lo = -rng.uniform(0.2, 1.5);
        a.hi = rng.uniform(0.2, 1.5);
        break;
      case ActKind::spline_per_neuron:
        for (Index i = 0; i < width; ++i) a.splines.push_back(random_lipschitz_spline(rng, 4));
        break;
      case ActKind::householder: {
        VectorX<double> v = rng.gaussian_vector(2);
        while (v.norm() < 1e-6) v = rng.gaussian_vector(2);
        a.direction = v / v.norm();
        break;
      }
      default:
        break;
    }
    l.act = a;
    net.layers.push_back(std::move(l));
    prev = width;
  }
  Layer<double> out;
  out.W = make_weight(output_dim, prev);
  out.b = rng.gaussian_vector(output_dim);
  net.layers.push_back(std::move(out));
  return net;
}

}  // namespace cpwl
