#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cpwl/linprog.hpp"
#include "cpwl/net.hpp"
#include "cpwl/spline.hpp"
#include "cpwl/types.hpp"

namespace cpwl {

template <class Scalar = double>
struct RegionInfo {
  std::vector<int> pattern;    // one region index per unit, layer-major
  MatrixX<Scalar> jacobian;    // output_dim x input_dim, constant on the piece
  Scalar p_opnorm{0};
  bool empty{false};           // reached but its interior is empty
  VectorX<Scalar> witness;     // strict-interior input when not empty
};

template <class Scalar = double>
struct RegionReport {
  Scalar p{2};
  std::vector<RegionInfo<Scalar>> regions;  // lexicographic in pattern
  Index feasible_count{0};
  Index unit_norm_count{0};  // feasible pieces with p_opnorm >= 1 - tol::unit_piece
};

namespace detail {

template <class Scalar>
struct UnitPiece {
  Scalar slope, offset;
  Scalar lo, hi;  // pre-activation range, +-inf at the ends
};

// A unit is the smallest block with its own region index: a neuron for
// component-wise activations, a whole group for sorting/reflection ones.
template <class Scalar>
struct Unit {
  std::size_t layer;
  ActKind kind{ActKind::relu};
  Index at{0}, size{1};  // neuron span within the layer
  std::vector<UnitPiece<Scalar>> pieces;       // component-wise kinds
  std::vector<std::vector<Index>> orderings;   // groupsort: ascending lane orders
  VectorX<Scalar> v;                           // householder direction
  std::size_t region_count() const {
    switch (kind) {
      case ActKind::groupsort: return orderings.size();
      case ActKind::householder: return 2;
      default: return pieces.size();
    }
  }
};

template <class Scalar>
std::vector<UnitPiece<Scalar>> spline_pieces(const LinearSpline<Scalar>& f) {
  std::vector<UnitPiece<Scalar>> out;
  if (f.knots.empty()) {
    out.push_back({f.left_slope, f.value_at_zero, -infinity<Scalar>(), infinity<Scalar>()});
    return out;
  }
  auto s = region_slopes(f);
  for (std::size_t r = 0; r < s.size(); ++r) {
    std::size_t anchor = r == 0 ? 0 : r - 1;
    UnitPiece<Scalar> p;
    p.slope = s[r];
    p.offset = f.values[anchor] - s[r] * f.knots[anchor];
    p.lo = r == 0 ? -infinity<Scalar>() : f.knots[r - 1];
    p.hi = r == s.size() - 1 ? infinity<Scalar>() : f.knots[r];
    out.push_back(p);
  }
  return out;
}

template <class Scalar>
std::vector<Unit<Scalar>> collect_units(const ConstrainedNet<Scalar>& net) {
  std::vector<Unit<Scalar>> units;
  for (std::size_t k = 0; k + 1 < net.layers.size(); ++k) {
    const auto& a = *net.layers[k].act;
    const Index width = net.layers[k].W.rows();
    switch (a.kind) {
      case ActKind::relu:
      case ActKind::leaky_cpwl:
      case ActKind::spline_per_neuron:
        for (Index i = 0; i < width; ++i) {
          Unit<Scalar> u;
          u.layer = k;
          u.kind = a.kind;
          u.at = i;
          if (a.kind == ActKind::relu)
            u.pieces = spline_pieces(from_knots<Scalar>({0}, {0}, Scalar(0), Scalar(1)));
          else if (a.kind == ActKind::leaky_cpwl)
            u.pieces = spline_pieces(from_knots<Scalar>({a.lo, a.hi}, {a.lo, a.hi}, a.c, a.c));
          else
            u.pieces = spline_pieces(a.splines[static_cast<std::size_t>(i)]);
          units.push_back(std::move(u));
        }
        break;
      case ActKind::groupsort: {
        Index at = 0;
        for (int g : groupsort_partition(a, width)) {
          Unit<Scalar> u;
          u.layer = k;
          u.kind = ActKind::groupsort;
          u.at = at;
          u.size = g;
          std::vector<Index> q(static_cast<std::size_t>(g));
          std::iota(q.begin(), q.end(), Index(0));
          do {
            u.orderings.push_back(q);
          } while (std::next_permutation(q.begin(), q.end()));
          units.push_back(std::move(u));
          at += g;
        }
        break;
      }
      case ActKind::householder:
        for (Index at = 0; at < width; at += a.direction.size()) {
          Unit<Scalar> u;
          u.layer = k;
          u.kind = ActKind::householder;
          u.at = at;
          u.size = a.direction.size();
          u.v = a.direction;
          units.push_back(std::move(u));
        }
        break;
    }
  }
  return units;
}

}  // namespace detail

// Enumerates the affine pieces of the net by activation pattern, depth-first
// with infeasible-prefix pruning: a subset of a set with empty interior has
// empty interior, so a pattern is skipped (not reported) as soon as some
// prefix of it already fails the strict-interior test, and a full pattern
// whose final unit fails is reported with the empty marker. Feasibility is a
// phase-1 simplex on unit-normal rows with margin tol::interior, witnesses
// confined to the box [-1e4, 1e4]^d. Patterns come out in lexicographic
// order. The p-operator norm is exact: row/column sums for p in {1, inf},
// power iteration for p = 2, and the dual norm of the gradient for scalar
// outputs at any other p (vector outputs are rejected there).
template <class Scalar>
RegionReport<Scalar> enumerate_regions(const ConstrainedNet<Scalar>& net, Scalar p) {
  validate(net);
  if (!(p >= Scalar(1))) throw std::invalid_argument("enumerate_regions: p must be >= 1");
  const Index d = net.input_dim;
  const Index out_dim = net.layers.back().W.rows();
  if (p != Scalar(1) && p != Scalar(2) && !std::isinf(p) && out_dim != 1)
    throw std::invalid_argument(
        "enumerate_regions: p-operator norm for vector outputs only at p in {1, 2, inf}");

  auto units = detail::collect_units(net);
  Index neurons = 0;
  for (std::size_t k = 0; k + 1 < net.layers.size(); ++k) neurons += net.layers[k].W.rows();
  if (neurons > 24) throw std::length_error("net too large for enumeration");
  double combos = 1;
  for (const auto& u : units) {
    combos *= static_cast<double>(u.region_count());
    if (combos > double(1 << 24)) throw std::length_error("net too large for enumeration");
  }

  const Scalar box = Scalar(1e4);
  RegionReport<Scalar> rep;
  rep.p = p;

  std::vector<int> pattern(units.size(), 0);
  std::vector<VectorX<Scalar>> rows;  // unit-normal constraint rows, DFS path
  std::vector<Scalar> rhs;
  bool force_empty = false;  // current leaf was contradicted by a dropped zero row

  auto feasible_now = [&]() -> InteriorPoint<Scalar> {
    MatrixX<Scalar> A(static_cast<Index>(rows.size()), d);
    VectorX<Scalar> b(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      A.row(static_cast<Index>(i)) = rows[i].transpose();
      b[static_cast<Index>(i)] = rhs[i];
    }
    return interior_point(A, b, box);
  };

  // Appends a*x <= c normalized; returns -1 when the row is an outright
  // contradiction (zero normal, non-positive slack).
  auto push_row = [&](const VectorX<Scalar>& a, Scalar c) -> int {
    Scalar n = a.norm();
    if (n <= Scalar(tol::boundary)) return c > Scalar(tol::interior) ? 0 : -1;
    rows.push_back(a / n);
    rhs.push_back(c / n);
    return 1;
  };

  auto emit = [&](const MatrixX<Scalar>& J) {
    RegionInfo<Scalar> info;
    info.pattern = pattern;
    info.jacobian = J;
    if (p == Scalar(1) || p == Scalar(2) || std::isinf(p))
      info.p_opnorm = opnorm_bound(J, p);
    else
      info.p_opnorm = pnorm<Scalar>(J.row(0).transpose(), dual_index(p));
    auto ip = force_empty ? InteriorPoint<Scalar>{} : feasible_now();
    if (ip.feasible) {
      info.witness = ip.x;
      ++rep.feasible_count;
      if (info.p_opnorm >= Scalar(1) - Scalar(tol::unit_piece)) ++rep.unit_norm_count;
    } else {
      info.empty = true;
    }
    rep.regions.push_back(std::move(info));
  };

  std::function<void(std::size_t, std::size_t, const MatrixX<Scalar>&, const VectorX<Scalar>&)>
      dfs_layer;
  std::function<void(std::size_t, std::size_t, const MatrixX<Scalar>&, const VectorX<Scalar>&,
                     MatrixX<Scalar>&, VectorX<Scalar>&)>
      dfs_unit;

  dfs_layer = [&](std::size_t k, std::size_t ui, const MatrixX<Scalar>& A,
                  const VectorX<Scalar>& c) {
    const auto& layer = net.layers[k];
    MatrixX<Scalar> Z = layer.W * A;
    VectorX<Scalar> zc = layer.W * c + layer.b;
    if (k + 1 == net.layers.size()) {
      emit(Z);
      return;
    }
    MatrixX<Scalar> H = MatrixX<Scalar>::Zero(layer.W.rows(), d);
    VectorX<Scalar> hc = VectorX<Scalar>::Zero(layer.W.rows());
    dfs_unit(k, ui, Z, zc, H, hc);
  };

  dfs_unit = [&](std::size_t k, std::size_t ui, const MatrixX<Scalar>& Z,
                 const VectorX<Scalar>& zc, MatrixX<Scalar>& H, VectorX<Scalar>& hc) {
    if (ui >= units.size() || units[ui].layer != k) {
      dfs_layer(k + 1, ui, H, hc);
      return;
    }
    const auto& u = units[ui];
    const bool last = ui + 1 == units.size();
    for (std::size_t r = 0; r < u.region_count(); ++r) {
      pattern[ui] = static_cast<int>(r);
      std::size_t saved = rows.size();
      bool viable = true;
      switch (u.kind) {
        case ActKind::groupsort: {
          const auto& q = u.orderings[r];
          for (Index j = 0; j + 1 < u.size; ++j) {
            VectorX<Scalar> a = (Z.row(u.at + q[static_cast<std::size_t>(j)]) -
                                 Z.row(u.at + q[static_cast<std::size_t>(j + 1)]))
                                    .transpose();
            Scalar cb = zc[u.at + q[static_cast<std::size_t>(j + 1)]] -
                        zc[u.at + q[static_cast<std::size_t>(j)]];
            if (push_row(a, cb) < 0) viable = false;
          }
          for (Index j = 0; j < u.size; ++j) {
            H.row(u.at + j) = Z.row(u.at + q[static_cast<std::size_t>(j)]);
            hc[u.at + j] = zc[u.at + q[static_cast<std::size_t>(j)]];
          }
          break;
        }
        case ActKind::householder: {
          VectorX<Scalar> a = (u.v.transpose() * Z.middleRows(u.at, u.size)).transpose();
          Scalar s0 = u.v.dot(zc.segment(u.at, u.size));
          if (r == 0) {  // keep: v'z >= 0
            if (push_row(VectorX<Scalar>(-a), s0) < 0) viable = false;
            H.middleRows(u.at, u.size) = Z.middleRows(u.at, u.size);
            hc.segment(u.at, u.size) = zc.segment(u.at, u.size);
          } else {  // reflect: v'z <= 0
            if (push_row(a, -s0) < 0) viable = false;
            MatrixX<Scalar> Rf = MatrixX<Scalar>::Identity(u.size, u.size) -
                                 Scalar(2) * u.v * u.v.transpose();
            H.middleRows(u.at, u.size) = Rf * Z.middleRows(u.at, u.size);
            hc.segment(u.at, u.size) = Rf * zc.segment(u.at, u.size);
          }
          break;
        }
        default: {
          const auto& pc = u.pieces[r];
          VectorX<Scalar> a = Z.row(u.at).transpose();
          if (std::isfinite(pc.hi) && push_row(a, pc.hi - zc[u.at]) < 0) viable = false;
          if (std::isfinite(pc.lo) && push_row(VectorX<Scalar>(-a), zc[u.at] - pc.lo) < 0)
            viable = false;
          H.row(u.at) = pc.slope * Z.row(u.at);
          hc[u.at] = pc.slope * zc[u.at] + pc.offset;
          break;
        }
      }
      if (last) {
        // The definitive LP runs in emit; a contradicted row forces empty.
        force_empty = !viable;
        dfs_unit(k, ui + 1, Z, zc, H, hc);
        force_empty = false;
      } else if (viable && (rows.size() == saved || feasible_now().feasible)) {
        dfs_unit(k, ui + 1, Z, zc, H, hc);
      }
      rows.resize(saved);
      rhs.resize(saved);
    }
    pattern[ui] = 0;
  };

  MatrixX<Scalar> A0 = MatrixX<Scalar>::Identity(d, d);
  VectorX<Scalar> c0 = VectorX<Scalar>::Zero(d);
  dfs_layer(0, 0, A0, c0);
  return rep;
}

template <class Scalar>
RegionReport<Scalar> enumerate_regions(const ConstrainedNet<Scalar>& net) {
  Scalar p = net.constraint.kind == ConstraintKind::pnorm ? net.constraint.p : Scalar(2);
  return enumerate_regions(net, p);
}

}  // namespace cpwl
