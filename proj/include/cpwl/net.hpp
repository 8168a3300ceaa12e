#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpwl/spline.hpp"
#include "cpwl/types.hpp"

namespace cpwl {

enum class ActKind { relu, leaky_cpwl, spline_per_neuron, groupsort, householder };

// One activation layer. GroupSort sorts contiguous groups ascending; when the
// width is not divisible by group_size the remainder forms a smaller trailing
// group (size 1 = passthrough), and group_sizes can spell out an arbitrary
// partition explicitly. Householder applies z -> z - 2(v'z)v per group of
// size |v| whenever v'z <= 0. LeakyCPWL is the identity on [lo, hi] with
// slope c in [0, 1) outside.
template <class Scalar = double>
struct ActivationSpec {
  ActKind kind{ActKind::relu};
  Scalar c{0};
  Scalar lo{0}, hi{0};
  std::vector<LinearSpline<Scalar>> splines;  // spline_per_neuron: one per neuron
  int group_size{2};
  std::vector<int> group_sizes;  // optional explicit partition
  VectorX<Scalar> direction;     // householder: unit vector, length = group size
};

enum class ConstraintKind { none, pnorm, orthogonal };

template <class Scalar = double>
struct ConstraintSpec {
  ConstraintKind kind{ConstraintKind::none};
  Scalar p{2};
};

template <class Scalar = double>
struct Layer {
  MatrixX<Scalar> W;
  VectorX<Scalar> b;
  std::optional<ActivationSpec<Scalar>> act;  // absent on the output layer
};

template <class Scalar = double>
struct ConstrainedNet {
  Index input_dim{0};
  std::vector<Layer<Scalar>> layers;
  ConstraintSpec<Scalar> constraint;
};

namespace detail {

template <class Scalar>
std::vector<int> groupsort_partition(const ActivationSpec<Scalar>& a, Index width) {
  std::vector<int> part;
  if (!a.group_sizes.empty()) {
    long sum = std::accumulate(a.group_sizes.begin(), a.group_sizes.end(), 0L);
    if (sum != width) throw std::invalid_argument("groupsort: partition does not cover width");
    for (int g : a.group_sizes)
      if (g < 1) throw std::invalid_argument("groupsort: group size must be >= 1");
    return a.group_sizes;
  }
  if (a.group_size < 2) throw std::invalid_argument("groupsort: group_size must be >= 2");
  Index rem = width;
  while (rem >= a.group_size) {
    part.push_back(a.group_size);
    rem -= a.group_size;
  }
  if (rem > 0) part.push_back(static_cast<int>(rem));
  return part;
}

template <class Scalar>
Scalar leaky_eval(Scalar c, Scalar lo, Scalar hi, Scalar x) {
  if (x < lo) return lo + c * (x - lo);
  if (x > hi) return hi + c * (x - hi);
  return x;
}

template <class Scalar>
void validate_activation(const ActivationSpec<Scalar>& a, Index width) {
  switch (a.kind) {
    case ActKind::relu:
      break;
    case ActKind::leaky_cpwl:
      if (!(a.c >= Scalar(0) && a.c < Scalar(1)))
        throw std::invalid_argument("leaky_cpwl: c must lie in [0, 1)");
      if (!(a.lo < a.hi)) throw std::invalid_argument("leaky_cpwl: need lo < hi");
      break;
    case ActKind::spline_per_neuron:
      if (static_cast<Index>(a.splines.size()) != width)
        throw std::invalid_argument("spline_per_neuron: need one spline per neuron");
      break;
    case ActKind::groupsort:
      groupsort_partition(a, width);
      break;
    case ActKind::householder: {
      if (a.direction.size() < 1 || width % a.direction.size() != 0)
        throw std::invalid_argument("householder: group size must divide width");
      using std::abs;
      if (abs(a.direction.norm() - Scalar(1)) > Scalar(1e-9))
        throw std::invalid_argument("householder: direction must be a unit vector");
      break;
    }
  }
}

}  // namespace detail

template <class Scalar>
void validate(const ConstrainedNet<Scalar>& net) {
  if (net.layers.empty()) throw std::invalid_argument("net: no layers");
  Index width = net.input_dim;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& layer = net.layers[k];
    if (layer.W.cols() != width) throw std::invalid_argument("net: layer width mismatch");
    if (layer.b.size() != layer.W.rows()) throw std::invalid_argument("net: bias size mismatch");
    bool last = (k + 1 == net.layers.size());
    if (last && layer.act) throw std::invalid_argument("net: output layer must be affine");
    if (!last && !layer.act) throw std::invalid_argument("net: hidden layer needs an activation");
    if (layer.act) detail::validate_activation(*layer.act, layer.W.rows());
    width = layer.W.rows();
  }
}

template <class Scalar>
VectorX<Scalar> apply_activation(const ActivationSpec<Scalar>& a, const VectorX<Scalar>& z) {
  VectorX<Scalar> h = z;
  switch (a.kind) {
    case ActKind::relu:
      h = h.cwiseMax(Scalar(0));
      break;
    case ActKind::leaky_cpwl:
      for (Index i = 0; i < h.size(); ++i) h[i] = detail::leaky_eval(a.c, a.lo, a.hi, h[i]);
      break;
    case ActKind::spline_per_neuron:
      for (Index i = 0; i < h.size(); ++i) h[i] = eval(a.splines[static_cast<std::size_t>(i)], h[i]);
      break;
    case ActKind::groupsort: {
      Index at = 0;
      for (int g : detail::groupsort_partition(a, z.size())) {
        std::sort(h.data() + at, h.data() + at + g);
        at += g;
      }
      break;
    }
    case ActKind::householder: {
      Index g = a.direction.size();
      for (Index at = 0; at < h.size(); at += g) {
        Scalar s = a.direction.dot(h.segment(at, g));
        if (s <= Scalar(0)) h.segment(at, g) -= Scalar(2) * s * a.direction;
      }
      break;
    }
  }
  return h;
}

template <class Scalar>
VectorX<Scalar> forward(const ConstrainedNet<Scalar>& net, const VectorX<Scalar>& x) {
  if (x.size() != net.input_dim) throw std::invalid_argument("forward: dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
  VectorX<Scalar> h = x;
  for (const auto& layer : net.layers) {
    VectorX<Scalar> z = layer.W * h + layer.b;
    h = layer.act ? apply_activation(*layer.act, z) : z;
  }
  return h;
}

namespace detail {

// Derivative matrix of an activation at pre-activation z plus boundary flag
// (within tol::boundary of a kink, a sorting tie, or a reflection plane).
template <class Scalar>
MatrixX<Scalar> activation_jacobian(const ActivationSpec<Scalar>& a, const VectorX<Scalar>& z,
                                    bool& boundary) {
  using std::abs;
  const Index n = z.size();
  MatrixX<Scalar> D = MatrixX<Scalar>::Zero(n, n);
  switch (a.kind) {
    case ActKind::relu:
      for (Index i = 0; i < n; ++i) {
        if (abs(z[i]) <= tol::boundary) boundary = true;
        D(i, i) = z[i] > 0 ? Scalar(1) : Scalar(0);
      }
      break;
    case ActKind::leaky_cpwl:
      for (Index i = 0; i < n; ++i) {
        if (abs(z[i] - a.lo) <= tol::boundary || abs(z[i] - a.hi) <= tol::boundary)
          boundary = true;
        D(i, i) = (z[i] > a.lo && z[i] < a.hi) ? Scalar(1) : a.c;
      }
      break;
    case ActKind::spline_per_neuron:
      for (Index i = 0; i < n; ++i) {
        const auto& f = a.splines[static_cast<std::size_t>(i)];
        for (Scalar k : f.knots)
          if (abs(z[i] - k) <= tol::boundary) boundary = true;
        auto s = region_slopes(f);
        std::size_t r =
            std::upper_bound(f.knots.begin(), f.knots.end(), z[i]) - f.knots.begin();
        D(i, i) = s[r];
      }
      break;
    case ActKind::groupsort: {
      Index at = 0;
      for (int g : groupsort_partition(a, n)) {
        std::vector<Index> idx(static_cast<std::size_t>(g));
        std::iota(idx.begin(), idx.end(), Index(0));
        std::stable_sort(idx.begin(), idx.end(),
                         [&](Index u, Index v) { return z[at + u] < z[at + v]; });
        for (Index r = 0; r + 1 < g; ++r)
          if (abs(z[at + idx[r + 1]] - z[at + idx[r]]) <= tol::boundary) boundary = true;
        for (Index r = 0; r < g; ++r) D(at + r, at + idx[r]) = Scalar(1);
        at += g;
      }
      break;
    }
    case ActKind::householder: {
      Index g = a.direction.size();
      for (Index at = 0; at < n; at += g) {
        Scalar s = a.direction.dot(z.segment(at, g));
        if (abs(s) <= tol::boundary) boundary = true;
        if (s <= Scalar(0))
          D.block(at, at, g, g) =
              MatrixX<Scalar>::Identity(g, g) - Scalar(2) * a.direction * a.direction.transpose();
        else
          D.block(at, at, g, g) = MatrixX<Scalar>::Identity(g, g);
      }
      break;
    }
  }
  return D;
}

}  // namespace detail

template <class Scalar>
struct JacobianResult {
  MatrixX<Scalar> J;
  bool perturbed{false};  // x sat on an activation boundary; J was taken nearby
};

// Jacobian at x. If x lies on an activation boundary the point is nudged by a
// deterministic offset (growing by powers of two until clear) and the result
// is flagged.
template <class Scalar>
JacobianResult<Scalar> jacobian(const ConstrainedNet<Scalar>& net, const VectorX<Scalar>& x) {
  validate(net);
  VectorX<Scalar> dir(net.input_dim);
  {
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    for (Index i = 0; i < dir.size(); ++i) {
      s ^= s << 13;
      s ^= s >> 7;
      s ^= s << 17;
      dir[i] = Scalar(1) + Scalar(s % 977) / Scalar(977);
    }
    dir /= dir.norm();
  }
  using std::abs;
  Scalar base = Scalar(1e-9) * std::max(Scalar(1), x.template lpNorm<Eigen::Infinity>());
  JacobianResult<Scalar> res;
  for (int attempt = 0; attempt < 9; ++attempt) {
    VectorX<Scalar> xa = x;
    if (attempt > 0) xa += dir * (base * Scalar(1 << (attempt - 1)));
    bool boundary = false;
    VectorX<Scalar> h = xa;
    MatrixX<Scalar> J = MatrixX<Scalar>::Identity(net.input_dim, net.input_dim);
    for (const auto& layer : net.layers) {
      VectorX<Scalar> z = layer.W * h + layer.b;
      J = (layer.W * J).eval();
      if (layer.act) {
        MatrixX<Scalar> D = detail::activation_jacobian(*layer.act, z, boundary);
        J = (D * J).eval();
        h = apply_activation(*layer.act, z);
      } else {
        h = z;
      }
    }
    res.J = std::move(J);
    res.perturbed = attempt > 0;
    if (!boundary) return res;
  }
  res.perturbed = true;
  return res;
}

// Largest singular value by power iteration on W'W with a fixed seeded start;
// relative tolerance tol::power_iter, at most tol::power_iter_max sweeps.
template <class Scalar>
Scalar spectral_norm(const MatrixX<Scalar>& W) {
  if (W.rows() == 0 || W.cols() == 0) return Scalar(0);
  VectorX<Scalar> v(W.cols());
  std::uint64_t s = 0x2545f4914f6cdd1dull;
  for (Index i = 0; i < v.size(); ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v[i] = Scalar(1) + Scalar(s % 1009) / Scalar(1009);
  }
  v /= v.norm();
  Scalar sigma = 0;
  for (int it = 0; it < tol::power_iter_max; ++it) {
    VectorX<Scalar> u = W * v;
    Scalar next = u.norm();
    if (next == Scalar(0)) return Scalar(0);
    VectorX<Scalar> w = W.transpose() * u;
    Scalar wn = w.norm();
    if (wn == Scalar(0)) return next;
    v = w / wn;
    using std::abs;
    if (abs(next - sigma) <= tol::power_iter * std::max(next, Scalar(1e-300))) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return (W * v).norm();
}

// Upper bound on the operator p->p norm, exact for p in {1, 2, inf} and for
// single-row / single-column matrices (dual and primal vector norms); other p
// fall back to the interpolation bound ||W||_1^(1/p) ||W||_inf^(1-1/p).
template <class Scalar>
Scalar opnorm_bound(const MatrixX<Scalar>& W, Scalar p) {
  using std::pow;
  if (!(p >= Scalar(1))) throw std::invalid_argument("opnorm_bound: p must be >= 1");
  if (W.rows() == 0 || W.cols() == 0) return Scalar(0);
  auto norm1 = [&] { return W.cwiseAbs().colwise().sum().maxCoeff(); };
  auto norminf = [&] { return W.cwiseAbs().rowwise().sum().maxCoeff(); };
  if (p == Scalar(1)) return norm1();
  if (std::isinf(p)) return norminf();
  if (W.rows() == 1) return pnorm<Scalar>(W.row(0).transpose(), dual_index(p));
  if (W.cols() == 1) return pnorm<Scalar>(W.col(0), p);
  if (p == Scalar(2)) return spectral_norm(W);
  Scalar a = norm1(), b = norminf();
  if (a == Scalar(0)) return Scalar(0);
  return pow(a, Scalar(1) / p) * pow(b, Scalar(1) - Scalar(1) / p);
}

// Scales W so that the operator p-norm (or its bound, see opnorm_bound) is at
// most 1; matrices already inside the ball are returned unchanged.
template <class Scalar>
MatrixX<Scalar> project_pnorm(const MatrixX<Scalar>& W, Scalar p) {
  Scalar n = opnorm_bound(W, p);
  if (n <= Scalar(1)) return W;
  return W / n;
}

// Nearest-orthonormal polish: scale to unit spectral norm, then iterate
// W <- W (3I - W'W)/2 until the Gram residual drops below 1e-10, with an SVD
// polar fallback; rank-deficient input is rejected.
template <class Scalar>
MatrixX<Scalar> project_orthogonal(const MatrixX<Scalar>& W) {
  if (W.rows() < W.cols()) return project_orthogonal<Scalar>(W.transpose()).transpose();
  Scalar sigma = spectral_norm(W);
  if (sigma == Scalar(0)) throw std::domain_error("project_orthogonal: rank deficient");
  MatrixX<Scalar> A = W / sigma;
  const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(W.cols(), W.cols());
  Scalar prev = infinity<Scalar>();
  for (int it = 0; it < 100; ++it) {
    MatrixX<Scalar> G = A.transpose() * A;
    Scalar res = (G - I).norm();
    // quadratic convergence: polish to machine precision, settle for any
    // plateau that already meets the 1e-10 contract
    if (res < Scalar(1e-14) || (res < Scalar(1e-10) && res >= prev)) return A;
    if (res > prev * Scalar(4)) break;  // diverging: hand over to the fallback
    prev = res;
    A = A * (Scalar(3) * I - G) / Scalar(2);
  }
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Scalar smin = svd.singularValues().minCoeff();
  Scalar smax = svd.singularValues().maxCoeff();
  if (smin <= Scalar(1e-12) * smax) throw std::domain_error("project_orthogonal: rank deficient");
  return svd.matrixU() * svd.matrixV().transpose();
}

template <class Scalar>
Scalar activation_lipschitz(const ActivationSpec<Scalar>& a) {
  switch (a.kind) {
    case ActKind::relu:
    case ActKind::groupsort:
    case ActKind::householder:
      return Scalar(1);
    case ActKind::leaky_cpwl:
      return std::max(Scalar(1), a.c);
    case ActKind::spline_per_neuron: {
      Scalar m = 0;
      for (const auto& f : a.splines) m = std::max(m, lipschitz(f));
      return m;
    }
  }
  return Scalar(1);
}

template <class Scalar>
struct LayerCheck {
  Scalar weight_norm{0};      // operator norm bound, or Gram residual for orthogonal
  Scalar activation_lipschitz{1};
  bool ok{true};
};

template <class Scalar>
struct ConstraintReport {
  std::vector<LayerCheck<Scalar>> layers;
  Scalar lipschitz_bound{1};  // product of layer norms and activation constants
  bool passed{true};
};

template <class Scalar>
ConstraintReport<Scalar> check_constraints(const ConstrainedNet<Scalar>& net) {
  validate(net);
  ConstraintReport<Scalar> rep;
  for (const auto& layer : net.layers) {
    LayerCheck<Scalar> c;
    Scalar factor = 1;
    switch (net.constraint.kind) {
      case ConstraintKind::pnorm:
        c.weight_norm = opnorm_bound(layer.W, net.constraint.p);
        c.ok = c.weight_norm <= Scalar(1) + Scalar(tol::unit_piece);
        factor = c.weight_norm;
        break;
      case ConstraintKind::orthogonal: {
        Index r = layer.W.rows(), co = layer.W.cols();
        MatrixX<Scalar> G = r >= co ? MatrixX<Scalar>(layer.W.transpose() * layer.W)
                                    : MatrixX<Scalar>(layer.W * layer.W.transpose());
        c.weight_norm = (G - MatrixX<Scalar>::Identity(G.rows(), G.cols())).norm();
        c.ok = c.weight_norm < Scalar(1e-10);
        factor = spectral_norm(layer.W);
        break;
      }
      case ConstraintKind::none:
        c.weight_norm = spectral_norm(layer.W);
        factor = c.weight_norm;
        break;
    }
    if (layer.act) {
      c.activation_lipschitz = activation_lipschitz(*layer.act);
      if (c.activation_lipschitz > Scalar(1) + Scalar(tol::unit_piece)) c.ok = false;
      factor *= c.activation_lipschitz;
    }
    rep.lipschitz_bound *= factor;
    rep.passed = rep.passed && c.ok;
    rep.layers.push_back(c);
  }
  return rep;
}

// Two affine layers around an (identity, |.|) spline activation that equal
// MaxMin = GroupSort(2) exactly; both weights are rotations.
template <class Scalar = double>
ConstrainedNet<Scalar> maxmin_as_spline_net() {
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  ConstrainedNet<Scalar> net;
  net.input_dim = 2;
  net.constraint = {ConstraintKind::pnorm, Scalar(2)};
  Layer<Scalar> l1;
  l1.W.resize(2, 2);
  l1.W << r, r, r, -r;
  l1.b = VectorX<Scalar>::Zero(2);
  ActivationSpec<Scalar> act;
  act.kind = ActKind::spline_per_neuron;
  act.splines = {affine(Scalar(1), Scalar(0)),
                 from_knots<Scalar>({0}, {0}, Scalar(-1), Scalar(1))};
  l1.act = act;
  Layer<Scalar> l2;
  l2.W.resize(2, 2);
  l2.W << r, -r, r, r;
  l2.b = VectorX<Scalar>::Zero(2);
  net.layers = {std::move(l1), std::move(l2)};
  return net;
}

// Odd-even transposition network: n MaxMin stages whose mixing weights are
// permutations, equal to a full ascending sort of the n inputs.
template <class Scalar = double>
ConstrainedNet<Scalar> groupsort_as_maxmin_net(Index n) {
  if (n < 1) throw std::invalid_argument("groupsort_as_maxmin_net: need n >= 1");
  ConstrainedNet<Scalar> net;
  net.input_dim = n;
  net.constraint = {ConstraintKind::orthogonal, Scalar(2)};
  auto perm_matrix = [&](const std::vector<Index>& perm) {
    MatrixX<Scalar> P = MatrixX<Scalar>::Zero(n, n);
    for (Index r = 0; r < n; ++r) P(r, perm[static_cast<std::size_t>(r)]) = Scalar(1);
    return P;  // (P x)_r = x_perm[r]
  };
  std::vector<Index> prev_layout(static_cast<std::size_t>(n));
  std::iota(prev_layout.begin(), prev_layout.end(), Index(0));
  MatrixX<Scalar> prev_P = MatrixX<Scalar>::Identity(n, n);
  for (Index stage = 0; stage < n; ++stage) {
    Index o = stage % 2;
    std::vector<Index> layout;
    std::vector<int> part;
    for (Index i = o; i + 1 < n; i += 2) {
      layout.push_back(i);
      layout.push_back(i + 1);
      part.push_back(2);
    }
    if (o == 1) {
      layout.push_back(0);
      part.push_back(1);
    }
    if ((n - o) % 2 == 1) {
      layout.push_back(n - 1);
      part.push_back(1);
    }
    MatrixX<Scalar> P = perm_matrix(layout);
    Layer<Scalar> l;
    l.W = P * prev_P.transpose();  // undo previous layout, apply this one
    l.b = VectorX<Scalar>::Zero(n);
    ActivationSpec<Scalar> act;
    act.kind = ActKind::groupsort;
    act.group_size = 2;
    act.group_sizes = part;
    l.act = act;
    net.layers.push_back(std::move(l));
    prev_P = P;
  }
  Layer<Scalar> out;
  out.W = prev_P.transpose();
  out.b = VectorX<Scalar>::Zero(n);
  net.layers.push_back(std::move(out));
  return net;
}

// Exact restriction of the network to the line t -> x0 + t*u, one CPWL spline
// per output coordinate. Sorting and reflection activations are resolved with
// pointwise min/max algebra, so the result is exact CPWL arithmetic.
template <class Scalar>
std::vector<LinearSpline<Scalar>> restrict_to_line(const ConstrainedNet<Scalar>& net,
                                                   const VectorX<Scalar>& u,
                                                   const VectorX<Scalar>& x0) {
  validate(net);
  if (u.size() != net.input_dim || x0.size() != net.input_dim)
    throw std::invalid_argument("restrict_to_line: dimension mismatch");
  std::vector<LinearSpline<Scalar>> h;
  h.reserve(static_cast<std::size_t>(net.input_dim));
  for (Index i = 0; i < net.input_dim; ++i) h.push_back(affine(u[i], x0[i]));
  for (const auto& layer : net.layers) {
    std::vector<LinearSpline<Scalar>> z;
    z.reserve(static_cast<std::size_t>(layer.W.rows()));
    for (Index r = 0; r < layer.W.rows(); ++r) {
      LinearSpline<Scalar> acc = affine(Scalar(0), layer.b[r]);
      for (Index cidx = 0; cidx < layer.W.cols(); ++cidx) {
        if (layer.W(r, cidx) == Scalar(0)) continue;
        acc = linear_combo(Scalar(1), acc, layer.W(r, cidx), h[static_cast<std::size_t>(cidx)]);
      }
      z.push_back(std::move(acc));
    }
    if (!layer.act) {
      h = std::move(z);
      continue;
    }
    const auto& a = *layer.act;
    switch (a.kind) {
      case ActKind::relu: {
        auto relu = from_knots<Scalar>({0}, {0}, Scalar(0), Scalar(1));
        for (auto& f : z) f = compose(relu, f);
        break;
      }
      case ActKind::leaky_cpwl: {
        auto leaky = from_knots<Scalar>({a.lo, a.hi}, {a.lo, a.hi}, a.c, a.c);
        for (auto& f : z) f = compose(leaky, f);
        break;
      }
      case ActKind::spline_per_neuron:
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = compose(a.splines[i], z[i]);
        break;
      case ActKind::groupsort: {
        Index at = 0;
        for (int g : detail::groupsort_partition(a, static_cast<Index>(z.size()))) {
          // odd-even transposition on the splines themselves
          for (int stage = 0; stage < g; ++stage)
            for (Index i = at + stage % 2; i + 1 < at + g; i += 2) {
              auto lo = pointwise_min(z[i], z[i + 1]);
              auto hi = pointwise_max(z[i], z[i + 1]);
              z[i] = std::move(lo);
              z[i + 1] = std::move(hi);
            }
          at += g;
        }
        break;
      }
      case ActKind::householder: {
        Index g = a.direction.size();
        for (Index at = 0; at < static_cast<Index>(z.size()); at += g) {
          LinearSpline<Scalar> s = affine(Scalar(0), Scalar(0));
          for (Index i = 0; i < g; ++i)
            s = linear_combo(Scalar(1), s, a.direction[i], z[at + i]);
          auto neg = pointwise_min(s, affine(Scalar(0), Scalar(0)));
          for (Index i = 0; i < g; ++i)
            z[at + i] = linear_combo(Scalar(1), z[at + i], Scalar(-2) * a.direction[i], neg);
        }
        break;
      }
    }
    h = std::move(z);
  }
  return h;
}

}  // namespace cpwl
