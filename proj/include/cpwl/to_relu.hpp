#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cpwl/lattice.hpp"
#include "cpwl/net.hpp"
#include "cpwl/random.hpp"
#include "cpwl/types.hpp"

namespace cpwl {

namespace detail {

enum class FoldOp { take_max, take_min, pass };

}  // namespace detail

// Rewrites a min-of-max lattice as an unconstrained ReLU net computing the
// same function exactly: max(a,b) = b + ReLU(a-b) and min(a,b) = b -
// ReLU(b-a), folded level by level in binary trees (passthrough of a value c
// costs the pair ReLU(c) - ReLU(-c)). Weight norms are whatever they are --
// the construction trades constraint satisfaction for exactness. The result
// is self-checked against eval_lattice on deterministic sample points.
template <class Scalar>
ConstrainedNet<Scalar> lattice_to_relu_net(const LatticeCPWL<Scalar>& lat) {
  if (lat.groups.empty()) throw std::invalid_argument("lattice_to_relu_net: empty lattice");
  for (const auto& g : lat.groups) {
    if (g.empty()) throw std::invalid_argument("lattice_to_relu_net: empty group");
    for (const auto& piece : g)
      if (piece.gradient.size() != lat.dim)
        throw std::invalid_argument("lattice_to_relu_net: piece dimension mismatch");
  }

  ConstrainedNet<Scalar> net;
  net.input_dim = lat.dim;
  net.constraint = {ConstraintKind::none, Scalar(2)};

  // Current values as affine functions C h + d of the net built so far
  // (initially h = x and the values are the raw pieces).
  MatrixX<Scalar> C(0, lat.dim);
  VectorX<Scalar> dvec;
  std::vector<std::size_t> group_of;  // value index -> group
  {
    Index total = 0;
    for (const auto& g : lat.groups) total += static_cast<Index>(g.size());
    C.resize(total, lat.dim);
    dvec.resize(total);
    Index at = 0;
    for (std::size_t gi = 0; gi < lat.groups.size(); ++gi)
      for (const auto& piece : lat.groups[gi]) {
        C.row(at) = piece.gradient.transpose();
        dvec[at] = piece.offset;
        group_of.push_back(gi);
        ++at;
      }
  }

  while (C.rows() > 1) {
    // Pair values group by group (max within a group); once every group is
    // down to one value, pair across groups (min).
    // Same-group values stay contiguous, so adjacency detects multiplicity.
    bool all_single = true;
    for (std::size_t i = 0; i + 1 < group_of.size(); ++i)
      if (group_of[i] == group_of[i + 1]) all_single = false;
    struct Op {
      detail::FoldOp kind;
      Index a, b;  // value indices (b unused for pass)
      std::size_t group;
    };
    std::vector<Op> ops;
    if (!all_single) {
      Index i = 0;
      while (i < C.rows()) {
        if (i + 1 < C.rows() && group_of[static_cast<std::size_t>(i)] ==
                                     group_of[static_cast<std::size_t>(i + 1)]) {
          ops.push_back({detail::FoldOp::take_max, i, i + 1,
                         group_of[static_cast<std::size_t>(i)]});
          i += 2;
        } else {
          ops.push_back({detail::FoldOp::pass, i, i, group_of[static_cast<std::size_t>(i)]});
          i += 1;
        }
      }
    } else {
      // Results get fresh singleton group ids so later levels keep pairing
      // them with min, never max.
      Index i = 0;
      while (i < C.rows()) {
        if (i + 1 < C.rows()) {
          ops.push_back({detail::FoldOp::take_min, i, i + 1, lat.groups.size() + ops.size()});
          i += 2;
        } else {
          ops.push_back({detail::FoldOp::pass, i, i, lat.groups.size() + ops.size()});
          i += 1;
        }
      }
    }

    Index width = 0;
    for (const auto& op : ops) width += op.kind == detail::FoldOp::pass ? 2 : 3;
    Layer<Scalar> layer;
    layer.W.resize(width, C.cols());
    layer.b.resize(width);
    ActivationSpec<Scalar> act;
    act.kind = ActKind::relu;
    layer.act = act;

    MatrixX<Scalar> Cn = MatrixX<Scalar>::Zero(static_cast<Index>(ops.size()), width);
    VectorX<Scalar> dn = VectorX<Scalar>::Zero(static_cast<Index>(ops.size()));
    std::vector<std::size_t> gn;
    Index row = 0;
    for (std::size_t oi = 0; oi < ops.size(); ++oi) {
      const auto& op = ops[oi];
      const Index o = static_cast<Index>(oi);
      switch (op.kind) {
        case detail::FoldOp::take_max:
          // neurons: relu(a-b), relu(b), relu(-b); value = n1 + n2 - n3
          layer.W.row(row) = C.row(op.a) - C.row(op.b);
          layer.b[row] = dvec[op.a] - dvec[op.b];
          layer.W.row(row + 1) = C.row(op.b);
          layer.b[row + 1] = dvec[op.b];
          layer.W.row(row + 2) = -C.row(op.b);
          layer.b[row + 2] = -dvec[op.b];
          Cn(o, row) = Scalar(1);
          Cn(o, row + 1) = Scalar(1);
          Cn(o, row + 2) = Scalar(-1);
          row += 3;
          break;
        case detail::FoldOp::take_min:
          // neurons: relu(b-a), relu(b), relu(-b); value = n2 - n3 - n1
          layer.W.row(row) = C.row(op.b) - C.row(op.a);
          layer.b[row] = dvec[op.b] - dvec[op.a];
          layer.W.row(row + 1) = C.row(op.b);
          layer.b[row + 1] = dvec[op.b];
          layer.W.row(row + 2) = -C.row(op.b);
          layer.b[row + 2] = -dvec[op.b];
          Cn(o, row) = Scalar(-1);
          Cn(o, row + 1) = Scalar(1);
          Cn(o, row + 2) = Scalar(-1);
          row += 3;
          break;
        case detail::FoldOp::pass:
          // value = relu(c) - relu(-c)
          layer.W.row(row) = C.row(op.a);
          layer.b[row] = dvec[op.a];
          layer.W.row(row + 1) = -C.row(op.a);
          layer.b[row + 1] = -dvec[op.a];
          Cn(o, row) = Scalar(1);
          Cn(o, row + 1) = Scalar(-1);
          row += 2;
          break;
      }
      gn.push_back(op.group);
    }
    net.layers.push_back(std::move(layer));
    C = std::move(Cn);
    dvec = std::move(dn);
    group_of = std::move(gn);
  }

  Layer<Scalar> out;
  out.W = C;
  out.b = dvec;
  net.layers.push_back(std::move(out));
  validate(net);

  // Deterministic spot check: the rewrite must reproduce the lattice.
  Rng check_rng(0x1a77u);
  for (int t = 0; t < 128; ++t) {
    VectorX<Scalar> x = check_rng.template gaussian_vector<Scalar>(lat.dim) * Scalar(3);
    Scalar want = eval_lattice(lat, x);
    Scalar got = forward(net, x)[0];
    using std::abs;
    if (abs(got - want) > Scalar(1e-10) * std::max(Scalar(1), abs(want)))
      throw std::logic_error("lattice_to_relu_net: self-check failed");
  }
  return net;
}

}  // namespace cpwl
