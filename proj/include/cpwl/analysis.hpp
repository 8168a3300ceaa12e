#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cpwl/net.hpp"
#include "cpwl/random.hpp"
#include "cpwl/regions.hpp"
#include "cpwl/spline.hpp"
#include "cpwl/types.hpp"

namespace cpwl {

// ---------------------------------------------------------------------------
// Sawtooth family. sigma_k(x) = |x| - 1/2^k, and the m-fold composition
// F_m = sigma_m o ... o sigma_1 is a sawtooth with 2^m regions whose slopes
// alternate between -1 and +1, so tv2(F_m) = 2(2^m - 1). Every knot and value
// is a dyadic rational, which keeps the whole construction exact in doubles.

template <class Scalar = double>
LinearSpline<Scalar> sawtooth_sigma(int k) {
  if (k < 1) throw std::invalid_argument("sawtooth_sigma: k must be >= 1");
  const Scalar h = Scalar(std::ldexp(1.0, -k));
  return from_knots<Scalar>({Scalar(0)}, {-h}, Scalar(-1), Scalar(1));
}

template <class Scalar = double>
LinearSpline<Scalar> build_sawtooth(int m) {
  if (m < 1) throw std::invalid_argument("build_sawtooth: depth must be >= 1");
  if (m > 20)
    throw std::invalid_argument("build_sawtooth: depth budget exceeded (2^m regions, max m = 20)");
  LinearSpline<Scalar> f = sawtooth_sigma<Scalar>(1);
  for (int k = 2; k <= m; ++k) f = compose(sawtooth_sigma<Scalar>(k), f);
  return f;
}

// Network wrapper around the sawtooth: a normalized read-out of `direction`
// followed by depth 1x1 stages carrying sigma_1..sigma_depth. Restricted to
// the line t -> t*u the net computes F_depth(c*t) with c = |u|_2^2 / |u|_q,
// so for u = e_1 (any p) the restriction is F_depth itself.
template <class Scalar = double>
struct SawtoothSpec {
  int depth{1};
  VectorX<Scalar> direction;  // u, nonzero
  Scalar p{2};                // norm index for the weight constraint
};

template <class Scalar>
ConstrainedNet<Scalar> build_sawtooth_net(const SawtoothSpec<Scalar>& spec) {
  if (spec.depth < 1) throw std::invalid_argument("build_sawtooth_net: depth must be >= 1");
  if (spec.depth > 20)
    throw std::invalid_argument("build_sawtooth_net: depth budget exceeded (max 20)");
  if (spec.direction.size() == 0 || !spec.direction.allFinite() ||
      spec.direction.cwiseAbs().maxCoeff() == Scalar(0))
    throw std::invalid_argument("build_sawtooth_net: direction must be nonzero");
  if (!(spec.p >= Scalar(1))) throw std::invalid_argument("build_sawtooth_net: p must be >= 1");

  ConstrainedNet<Scalar> net;
  net.input_dim = spec.direction.size();
  net.constraint = {ConstraintKind::pnorm, spec.p};

  // The 1-row first layer has operator p-norm |w|_q, so dividing by the dual
  // norm puts it exactly on the constraint boundary.
  Layer<Scalar> first;
  first.W = spec.direction.transpose() / pnorm<Scalar>(spec.direction, dual_index(spec.p));
  first.b = VectorX<Scalar>::Zero(1);
  ActivationSpec<Scalar> a1;
  a1.kind = ActKind::spline_per_neuron;
  a1.splines.push_back(sawtooth_sigma<Scalar>(1));
  first.act = std::move(a1);
  net.layers.push_back(std::move(first));

  for (int k = 2; k <= spec.depth; ++k) {
    Layer<Scalar> l;
    l.W = MatrixX<Scalar>::Identity(1, 1);
    l.b = VectorX<Scalar>::Zero(1);
    ActivationSpec<Scalar> a;
    a.kind = ActKind::spline_per_neuron;
    a.splines.push_back(sawtooth_sigma<Scalar>(k));
    l.act = std::move(a);
    net.layers.push_back(std::move(l));
  }

  Layer<Scalar> out;
  out.W = MatrixX<Scalar>::Identity(1, 1);
  out.b = VectorX<Scalar>::Zero(1);
  net.layers.push_back(std::move(out));
  validate(net);
  return net;
}

// Exact CPWL realization of x -> c + sum_i u_i sigma(w_i x + b_i); the
// workhorse behind the one-hidden-layer variation bound.
template <class Scalar>
LinearSpline<Scalar> one_hidden_layer_spline(const VectorX<Scalar>& w, const VectorX<Scalar>& b,
                                             const VectorX<Scalar>& u, Scalar c,
                                             const LinearSpline<Scalar>& sigma) {
  if (w.size() != b.size() || w.size() != u.size())
    throw std::invalid_argument("one_hidden_layer_spline: width mismatch");
  LinearSpline<Scalar> acc = affine(Scalar(0), c);
  for (Index i = 0; i < w.size(); ++i)
    acc = linear_combo(Scalar(1), acc, u[i], compose(sigma, affine(w[i], b[i])));
  return simplify(acc);
}

// ---------------------------------------------------------------------------
// Experiment drivers. Both are double-only like the random generators; the
// sampling order is fixed, so a (p, trials, seed) triple pins the report.

struct Tv2BoundTrial {
  int width{0};
  double tv2_sigma{0};
  double tv2_f{0};
  double ratio{0};  // tv2_f / tv2_sigma; 0 when the activation came out affine
};

struct Tv2BoundReport {
  double p{2};
  int trials{0};
  std::uint64_t seed{0};
  double max_ratio{0};
  int violations{0};  // trials with tv2(f) > tv2(sigma) + 1e-9
  bool passed{true};
  std::vector<Tv2BoundTrial> trial_log;
};

// Samples one-hidden-layer scalar nets x -> u' sigma(w x + b) + c with
// |w|_p <= 1 and |u|_q <= 1 (exact vector-norm projections) and a shared
// 1-Lipschitz activation, then checks the variation bound tv2(f) <= tv2(sigma)
// on the exact CPWL realization. Pass `activation` to pin sigma (e.g. ReLU);
// by default each trial draws a fresh random spline.
inline Tv2BoundReport tv2_bound_experiment(
    double p, int trials, std::uint64_t seed = 0x7e57ed,
    const std::optional<LinearSpline<double>>& activation = {}) {
  if (!(p >= 1.0)) throw std::invalid_argument("tv2_bound_experiment: p must be >= 1");
  if (trials < 0) throw std::invalid_argument("tv2_bound_experiment: negative trial count");
  Rng rng(seed);
  Tv2BoundReport rep;
  rep.p = p;
  rep.trials = trials;
  rep.seed = seed;
  rep.trial_log.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const int width = static_cast<int>(rng.uniform_int(1, 32));
    const LinearSpline<double> sigma = activation ? *activation : random_lipschitz_spline(rng);
    const MatrixX<double> Wc = project_pnorm(rng.gaussian_matrix(width, 1), p);
    const MatrixX<double> Ur = project_pnorm(rng.gaussian_matrix(1, width), p);
    const VectorX<double> w = Wc.col(0);
    const VectorX<double> u = Ur.row(0).transpose();
    const VectorX<double> b = rng.gaussian_vector(width);
    const double c = rng.normal();
    const LinearSpline<double> f = one_hidden_layer_spline<double>(w, b, u, c, sigma);

    Tv2BoundTrial tr;
    tr.width = width;
    tr.tv2_sigma = tv2(sigma);
    tr.tv2_f = tv2(f);
    if (tr.tv2_sigma > 0) {
      tr.ratio = tr.tv2_f / tr.tv2_sigma;
      rep.max_ratio = std::max(rep.max_ratio, tr.ratio);
    }
    if (tr.tv2_f > tr.tv2_sigma + 1e-9) ++rep.violations;
    rep.trial_log.push_back(tr);
  }
  rep.passed = rep.violations == 0;
  return rep;
}

// The smallest net computing |x| exactly: one spline neuron, identity weights.
inline ConstrainedNet<double> abs_value_spline_net() {
  ConstrainedNet<double> net;
  net.input_dim = 1;
  net.constraint = {ConstraintKind::pnorm, 2.0};
  Layer<double> l1;
  l1.W = MatrixX<double>::Identity(1, 1);
  l1.b = VectorX<double>::Zero(1);
  ActivationSpec<double> act;
  act.kind = ActKind::spline_per_neuron;
  act.splines.push_back(from_knots<double>({0.0}, {0.0}, -1.0, 1.0));
  l1.act = std::move(act);
  net.layers.push_back(std::move(l1));
  Layer<double> out;
  out.W = MatrixX<double>::Identity(1, 1);
  out.b = VectorX<double>::Zero(1);
  net.layers.push_back(std::move(out));
  return net;
}

// Exact sup_{|x| <= 1} |net(x) - |x|| for scalar nets with 1-D input: both
// sides are CPWL, so the maximum sits at a knot of the difference or at an
// endpoint of the interval.
inline double abs_fit_sup_error(const ConstrainedNet<double>& net) {
  if (net.input_dim != 1) throw std::invalid_argument("abs_fit_sup_error: need 1-D input");
  VectorX<double> u(1), x0(1);
  u << 1.0;
  x0 << 0.0;
  std::vector<LinearSpline<double>> h = restrict_to_line(net, u, x0);
  if (h.size() != 1) throw std::invalid_argument("abs_fit_sup_error: need scalar output");
  const LinearSpline<double> diff =
      linear_combo(1.0, h[0], -1.0, from_knots<double>({0.0}, {0.0}, -1.0, 1.0));
  double worst = 0;
  auto consider = [&](double x) {
    if (x < -1.0 || x > 1.0) return;
    worst = std::max(worst, std::abs(eval(diff, x)));
  };
  consider(-1.0);
  consider(1.0);
  for (double k : diff.knots) consider(k);
  return worst;
}

struct Prop31Trial {
  Index input_dim{0};
  int depth{0};
  bool leaky{false};
  Index feasible{-1};     // -1: enumeration skipped (budget)
  Index unit_pieces{-1};  // feasible pieces at unit operator norm
  double fit_sup_error{0};
};

struct Prop31Report {
  double p{2};
  int trials{0};
  Index width_budget{4};
  std::uint64_t seed{0};
  int nets_enumerated{0};
  int skipped{0};  // enumeration budget exceeded on these trials
  bool budget_exceeded{false};
  int violations{0};  // nets with two or more unit-norm pieces
  Index max_unit_pieces{0};
  double max_restriction_tv2{0};  // ReLU nets at p = inf, exact line restrictions
  int restriction_violations{0};  // restriction tv2 above 2 + 1e-9 (p = inf only)
  double abs_fit_best_sup_error{infinity<double>()};
  double abs_fit_spline_error{infinity<double>()};
  bool passed{true};
  std::vector<Prop31Trial> trial_log;
};

// Random ReLU / leaky nets under a p-norm constraint, p > 1: enumerates the
// affine pieces of each and counts those at unit operator norm (the theory
// allows at most one). At p = inf the ReLU trials also get their line
// restrictions checked against the tv2 <= 2 saturation ceiling. Each trial
// additionally tries to fit |x| on [-1, 1] with a fresh constrained ReLU net;
// the exact spline net does it with error 0, the ReLU family cannot.
inline Prop31Report prop31_campaign(double p, int trials, Index width_budget,
                                    std::uint64_t seed = 0x31ca11) {
  if (!(p > 1.0)) throw std::invalid_argument("prop31_campaign: p must exceed 1");
  if (width_budget < 1) throw std::invalid_argument("prop31_campaign: width budget must be >= 1");
  if (trials < 0) throw std::invalid_argument("prop31_campaign: negative trial count");
  Rng rng(seed);
  Prop31Report rep;
  rep.p = p;
  rep.trials = trials;
  rep.width_budget = width_budget;
  rep.seed = seed;
  rep.abs_fit_spline_error = abs_fit_sup_error(abs_value_spline_net());
  rep.trial_log.reserve(static_cast<std::size_t>(trials));
  const bool p_inf = std::isinf(p);
  for (int t = 0; t < trials; ++t) {
    Prop31Trial tr;
    tr.input_dim = rng.uniform_int(1, 2);
    tr.depth = static_cast<int>(rng.uniform_int(1, 3));
    tr.leaky = t % 2 != 0;
    std::vector<Index> hidden;
    for (int l = 0; l < tr.depth; ++l) hidden.push_back(rng.uniform_int(1, width_budget));
    ConstrainedNet<double> net =
        random_net(rng, tr.input_dim, hidden, 1, tr.leaky ? ActKind::leaky_cpwl : ActKind::relu,
                   {ConstraintKind::pnorm, p});
    try {
      RegionReport<double> rr = enumerate_regions(net, p);
      ++rep.nets_enumerated;
      tr.feasible = rr.feasible_count;
      tr.unit_pieces = rr.unit_norm_count;
      rep.max_unit_pieces = std::max(rep.max_unit_pieces, rr.unit_norm_count);
      if (rr.unit_norm_count > 1) ++rep.violations;
    } catch (const std::length_error&) {
      ++rep.skipped;
      rep.budget_exceeded = true;
    }
    if (p_inf && !tr.leaky) {
      VectorX<double> dir = rng.gaussian_vector(net.input_dim);
      double ninf = dir.cwiseAbs().maxCoeff();
      if (ninf < 1e-12) {
        dir.setZero();
        dir[0] = 1.0;
        ninf = 1.0;
      }
      const VectorX<double> unit_dir = dir / ninf;  // the ceiling assumes |u|_inf = 1
      const VectorX<double> base = rng.gaussian_vector(net.input_dim);
      const double tvr = tv2(restrict_to_line(net, unit_dir, base)[0]);
      rep.max_restriction_tv2 = std::max(rep.max_restriction_tv2, tvr);
      if (tvr > 2.0 + 1e-9) ++rep.restriction_violations;
    }
    {
      const int fit_depth = static_cast<int>(rng.uniform_int(1, 3));
      std::vector<Index> fit_hidden;
      for (int l = 0; l < fit_depth; ++l) fit_hidden.push_back(rng.uniform_int(1, width_budget));
      ConstrainedNet<double> fit =
          random_net(rng, 1, fit_hidden, 1, ActKind::relu, {ConstraintKind::pnorm, p});
      tr.fit_sup_error = abs_fit_sup_error(fit);
      rep.abs_fit_best_sup_error = std::min(rep.abs_fit_best_sup_error, tr.fit_sup_error);
    }
    rep.trial_log.push_back(tr);
  }
  rep.passed = rep.violations == 0 && rep.restriction_violations == 0;
  return rep;
}

}  // namespace cpwl
