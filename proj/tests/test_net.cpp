#include <doctest.h>

#include <cpwl/net.hpp>
#include <cpwl/random.hpp>

#include "oracles.hpp"

using namespace cpwl;

namespace {

ConstrainedNet<double> identity_relu_net() {
  ConstrainedNet<double> net;
  net.input_dim = 2;
  Layer<double> l1;
  l1.W = MatrixX<double>::Identity(2, 2);
  l1.b = VectorX<double>::Zero(2);
  l1.act = ActivationSpec<double>{};  // relu
  Layer<double> l2;
  l2.W = MatrixX<double>::Identity(2, 2);
  l2.b = VectorX<double>::Zero(2);
  net.layers = {l1, l2};
  return net;
}

VectorX<double> vec2(double a, double b) {
  VectorX<double> v(2);
  v << a, b;
  return v;
}

double maxdiff(const VectorX<double>& a, const VectorX<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("forward: activation basics") {
  // MaxMin sorts each pair ascending
  ConstrainedNet<double> ms;
  ms.input_dim = 2;
  Layer<double> l1;
  l1.W = MatrixX<double>::Identity(2, 2);
  l1.b = VectorX<double>::Zero(2);
  ActivationSpec<double> gs;
  gs.kind = ActKind::groupsort;
  gs.group_size = 2;
  l1.act = gs;
  Layer<double> l2;
  l2.W = MatrixX<double>::Identity(2, 2);
  l2.b = VectorX<double>::Zero(2);
  ms.layers = {l1, l2};
  CHECK(maxdiff(forward(ms, vec2(3, 5)), vec2(3, 5)) == 0);
  CHECK(maxdiff(forward(ms, vec2(5, 3)), vec2(3, 5)) == 0);

  // Householder with v = (1,0) reflects the first coordinate when v'z <= 0
  ConstrainedNet<double> hh = ms;
  ActivationSpec<double> ha;
  ha.kind = ActKind::householder;
  ha.direction = vec2(1, 0);
  hh.layers[0].act = ha;
  CHECK(maxdiff(forward(hh, vec2(-2, 7)), vec2(2, 7)) == 0);
  CHECK(maxdiff(forward(hh, vec2(2, 7)), vec2(2, 7)) == 0);

  // single ReLU layer
  CHECK(maxdiff(forward(identity_relu_net(), vec2(-1, 2)), vec2(0, 2)) == 0);

  VectorX<double> bad(3);
  bad << 1, 2, 3;
  CHECK_THROWS_AS(forward(ms, bad), std::invalid_argument);
}

TEST_CASE("groupsort partitions and a full-width sort") {
  Rng rng(11);
  ActivationSpec<double> a;
  a.kind = ActKind::groupsort;
  a.group_size = 2;
  // width 5 -> groups 2,2,1 (trailing remainder passes through)
  VectorX<double> z(5);
  z << 4, 1, 9, -3, 7;
  VectorX<double> want(5);
  want << 1, 4, -3, 9, 7;
  CHECK(maxdiff(apply_activation(a, z), want) == 0);

  // explicit partition covering the width
  a.group_sizes = {3, 2};
  want << 1, 4, 9, -3, 7;
  CHECK(maxdiff(apply_activation(a, z), want) == 0);

  // full sort preserves the multiset and every p-norm of the group
  a.group_sizes = {5};
  for (int t = 0; t < 50; ++t) {
    VectorX<double> v = rng.gaussian_vector(5);
    VectorX<double> s = apply_activation(a, v);
    CHECK(maxdiff(s, oracle::sorted_copy(v)) == 0);
    for (double p : {1.0, 2.0})
      CHECK(pnorm(s, p) == doctest::Approx(pnorm(v, p)).epsilon(1e-14));
  }

  a.group_sizes = {3, 3};
  CHECK_THROWS_AS(apply_activation(a, z), std::invalid_argument);
}

TEST_CASE("spectral norm: closed forms and the Jacobi SVD oracle") {
  MatrixX<double> D = MatrixX<double>::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = 4;
  CHECK(spectral_norm(D) == doctest::Approx(4).epsilon(1e-12));
  MatrixX<double> ones = MatrixX<double>::Ones(2, 2);
  CHECK(spectral_norm(ones) == doctest::Approx(2).epsilon(1e-12));
  CHECK(spectral_norm(MatrixX<double>(MatrixX<double>::Zero(3, 2))) == 0);

  Rng rng(42);
  for (int t = 0; t < 25; ++t) {
    MatrixX<double> W = rng.gaussian_matrix(5, 3);
    CHECK(std::abs(spectral_norm(W) - oracle::spectral_norm(W)) < 1e-9);
    MatrixX<double> T = rng.gaussian_matrix(2, 6);
    CHECK(std::abs(spectral_norm(T) - oracle::spectral_norm(T)) < 1e-9);
  }
}

TEST_CASE("pnorm projection and operator-norm bounds") {
  MatrixX<double> W(2, 2);
  W << 2, 0, 0, 1;
  MatrixX<double> P = project_pnorm(W, 2.0);
  CHECK(P(0, 0) == doctest::Approx(1).epsilon(1e-12));
  CHECK(P(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

  MatrixX<double> row(1, 2);
  row << 0, 4;
  MatrixX<double> Pr = project_pnorm(row, infinity<double>());
  CHECK(Pr(0, 0) == 0);
  CHECK(Pr(0, 1) == doctest::Approx(1).epsilon(1e-14));

  // p = 1: max column l1 sum
  MatrixX<double> C(2, 2);
  C << 1, 0, 3, 0;
  CHECK(opnorm_bound(C, 1.0) == doctest::Approx(4).epsilon(1e-14));

  // single row at p = 1.5: exact dual norm; the projected row attains 1
  MatrixX<double> r15(1, 3);
  r15 << 1, -2, 3;
  double q = dual_index(1.5);
  CHECK(opnorm_bound(r15, 1.5) ==
        doctest::Approx(pnorm<double>(r15.row(0).transpose(), q)).epsilon(1e-12));
  MatrixX<double> pr15 = project_pnorm(r15, 1.5);
  CHECK(opnorm_bound(pr15, 1.5) == doctest::Approx(1).epsilon(1e-12));

  Rng rng(7);
  for (int t = 0; t < 40; ++t) {
    MatrixX<double> A = rng.gaussian_matrix(1 + t % 4, 1 + (t / 2) % 4);
    for (double p : {1.0, 1.5, 2.0, infinity<double>()}) {
      MatrixX<double> Pp = project_pnorm(A, p);
      CHECK(opnorm_bound(Pp, p) <= 1 + 1e-9);
      // the bound really bounds the quotient norm on random vectors
      for (int s = 0; s < 10; ++s) {
        VectorX<double> v = rng.gaussian_vector(A.cols());
        VectorX<double> Av = A * v;
        CHECK(pnorm(Av, p) <= opnorm_bound(A, p) * pnorm(v, p) * (1 + 1e-12));
      }
    }
    MatrixX<double> small = A / (opnorm_bound(A, 2.0) * 2);
    CHECK((project_pnorm(small, 2.0) - small).norm() == 0);  // already inside the ball
  }
  CHECK_THROWS_AS(opnorm_bound(W, 0.5), std::invalid_argument);
}

TEST_CASE("orthogonal projection") {
  MatrixX<double> D = MatrixX<double>::Zero(2, 2);
  D(0, 0) = 2;
  D(1, 1) = 3;
  CHECK((project_orthogonal(D) - MatrixX<double>::Identity(2, 2)).norm() < 1e-12);

  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    MatrixX<double> W = rng.gaussian_matrix(4, 4);
    MatrixX<double> Q = project_orthogonal(W);
    CHECK((Q.transpose() * Q - MatrixX<double>::Identity(4, 4)).norm() < 1e-10);
    MatrixX<double> T = rng.gaussian_matrix(5, 3);  // tall: Q'Q = I
    MatrixX<double> Qt = project_orthogonal(T);
    CHECK((Qt.transpose() * Qt - MatrixX<double>::Identity(3, 3)).norm() < 1e-10);
    MatrixX<double> F = rng.gaussian_matrix(2, 4);  // flat: QQ' = I
    MatrixX<double> Qf = project_orthogonal(F);
    CHECK((Qf * Qf.transpose() - MatrixX<double>::Identity(2, 2)).norm() < 1e-10);
  }

  CHECK_THROWS_AS(project_orthogonal(MatrixX<double>(MatrixX<double>::Zero(3, 3))),
                  std::domain_error);
  MatrixX<double> rank1(2, 2);
  rank1 << 1, 2, 2, 4;
  CHECK_THROWS_AS(project_orthogonal(rank1), std::domain_error);
}

TEST_CASE("jacobian: exact cases, boundary flag, finite differences") {
  Rng rng(13);

  // linear net: J = W2 W1 exactly
  ConstrainedNet<double> lin;
  lin.input_dim = 3;
  Layer<double> l1;
  l1.W = rng.gaussian_matrix(4, 3);
  l1.b = rng.gaussian_vector(4);
  ActivationSpec<double> id_act;
  id_act.kind = ActKind::spline_per_neuron;
  for (int i = 0; i < 4; ++i) id_act.splines.push_back(affine(1.0, 0.0));
  l1.act = id_act;
  Layer<double> l2;
  l2.W = rng.gaussian_matrix(2, 4);
  l2.b = rng.gaussian_vector(2);
  lin.layers = {l1, l2};
  VectorX<double> x0 = rng.gaussian_vector(3);
  auto jr = jacobian(lin, x0);
  CHECK(!jr.perturbed);
  CHECK((jr.J - l2.W * l1.W).norm() < 1e-12);

  // MaxMin at a non-tie point: permutation matrix
  ConstrainedNet<double> ms;
  ms.input_dim = 2;
  Layer<double> g1;
  g1.W = MatrixX<double>::Identity(2, 2);
  g1.b = VectorX<double>::Zero(2);
  ActivationSpec<double> gs;
  gs.kind = ActKind::groupsort;
  g1.act = gs;
  Layer<double> g2;
  g2.W = MatrixX<double>::Identity(2, 2);
  g2.b = VectorX<double>::Zero(2);
  ms.layers = {g1, g2};
  VectorX<double> pt(2);
  pt << 2, -1;
  auto jm = jacobian(ms, pt);
  CHECK(!jm.perturbed);
  MatrixX<double> perm(2, 2);
  perm << 0, 1, 1, 0;  // output = (min, max) = (x2, x1)
  CHECK((jm.J - perm).norm() == 0);

  // tie point is flagged and resolved deterministically
  VectorX<double> tie(2);
  tie << 1, 1;
  auto jt = jacobian(ms, tie);
  CHECK(jt.perturbed);
  auto jt2 = jacobian(ms, tie);
  CHECK((jt.J - jt2.J).norm() == 0);

  // finite differences across every activation family
  for (ActKind kind : {ActKind::relu, ActKind::leaky_cpwl, ActKind::spline_per_neuron,
                       ActKind::groupsort, ActKind::householder}) {
    auto net = random_net(rng, 3, {4, 4}, 2, kind, {ConstraintKind::pnorm, 2.0});
    for (int t = 0; t < 40; ++t) {
      VectorX<double> x = rng.gaussian_vector(3) * 2;
      auto res = jacobian(net, x);
      if (res.perturbed) continue;  // measure-zero boundary draw
      MatrixX<double> fd = oracle::fd_jacobian(net, x);
      CHECK((res.J - fd).cwiseAbs().maxCoeff() < tol::fd_agree);
    }
  }
}

TEST_CASE("check_constraints") {
  auto idnet = identity_relu_net();
  idnet.constraint = {ConstraintKind::pnorm, 2.0};
  auto rep = check_constraints(idnet);
  CHECK(rep.passed);
  CHECK(rep.lipschitz_bound == doctest::Approx(1).epsilon(1e-12));
  for (const auto& lc : rep.layers) CHECK(lc.weight_norm == doctest::Approx(1).epsilon(1e-12));

  Rng rng(21);
  auto net = random_net(rng, 3, {4, 5}, 2, ActKind::relu, {ConstraintKind::pnorm, 2.0});
  auto r2 = check_constraints(net);
  CHECK(r2.passed);
  CHECK(r2.lipschitz_bound <= 1 + 1e-6);

  // a 2-Lipschitz spline activation must be flagged
  auto bad = net;
  ActivationSpec<double> steep;
  steep.kind = ActKind::spline_per_neuron;
  for (int i = 0; i < 4; ++i) steep.splines.push_back(affine(2.0, 0.0));
  bad.layers[0].act = steep;
  CHECK(!check_constraints(bad).passed);

  // orthogonal family: groupsort-as-maxmin passes with zero residual
  auto sorter = groupsort_as_maxmin_net(4);
  auto r3 = check_constraints(sorter);
  CHECK(r3.passed);
  CHECK(r3.lipschitz_bound == doctest::Approx(1).epsilon(1e-12));

  // 1-Lipschitz whenever the report passes
  for (int pairs = 0; pairs < 500; ++pairs) {
    VectorX<double> x = rng.gaussian_vector(3), y = rng.gaussian_vector(3);
    VectorX<double> fx = forward(net, x), fy = forward(net, y);
    VectorX<double> dxy = x - y, dfxy = fx - fy;
    CHECK(pnorm(dfxy, 2.0) <= (1 + 1e-9) * pnorm(dxy, 2.0));
  }
}

TEST_CASE("maxmin_as_spline_net equals MaxMin with unit-norm weights") {
  auto net = maxmin_as_spline_net();
  CHECK(spectral_norm(net.layers[0].W) == doctest::Approx(1).epsilon(1e-12));
  CHECK(spectral_norm(net.layers[1].W) == doctest::Approx(1).epsilon(1e-12));

  CHECK(maxdiff(forward(net, vec2(3, 5)), vec2(3, 5)) < 1e-12);
  CHECK(maxdiff(forward(net, vec2(7, 7)), vec2(7, 7)) < 1e-12);

  Rng rng(31);
  ActivationSpec<double> gs;
  gs.kind = ActKind::groupsort;
  for (int t = 0; t < 2000; ++t) {
    VectorX<double> x = rng.gaussian_vector(2) * 3;
    CHECK(maxdiff(forward(net, x), apply_activation(gs, x)) < 1e-12);
  }
}

TEST_CASE("groupsort_as_maxmin_net sorts with permutation weights") {
  auto n3 = groupsort_as_maxmin_net(3);
  VectorX<double> x(3);
  x << 2, 1, 3;
  VectorX<double> want(3);
  want << 1, 2, 3;
  CHECK(maxdiff(forward(n3, x), want) == 0);

  // every mixing weight is a permutation matrix
  for (const auto& layer : n3.layers) {
    const MatrixX<double>& W = layer.W;
    for (Index i = 0; i < W.rows(); ++i)
      for (Index j = 0; j < W.cols(); ++j) CHECK((W(i, j) == 0 || W(i, j) == 1));
    for (Index i = 0; i < W.rows(); ++i) CHECK(W.row(i).sum() == 1);
    for (Index j = 0; j < W.cols(); ++j) CHECK(W.col(j).sum() == 1);
  }

  Rng rng(17);
  for (Index n : {Index(1), Index(2), Index(4), Index(5)}) {
    auto net = groupsort_as_maxmin_net(n);
    for (int t = 0; t < 400; ++t) {
      VectorX<double> v = rng.gaussian_vector(n);
      CHECK(maxdiff(forward(net, v), oracle::sorted_copy(v)) == 0);
    }
    VectorX<double> sorted = oracle::sorted_copy(rng.gaussian_vector(n));
    CHECK(maxdiff(forward(net, sorted), sorted) == 0);
  }
  CHECK_THROWS_AS(groupsort_as_maxmin_net(0), std::invalid_argument);
}

TEST_CASE("householder continuity across the reflection plane") {
  Rng rng(23);
  VectorX<double> v = rng.gaussian_vector(2);
  v /= v.norm();
  ActivationSpec<double> a;
  a.kind = ActKind::householder;
  a.direction = v;
  for (int t = 0; t < 100; ++t) {
    // z on the plane v'z = 0, then tiny steps to both sides
    VectorX<double> w = rng.gaussian_vector(2);
    VectorX<double> z = w - v * v.dot(w);
    VectorX<double> zp = z + v * 1e-9, zm = z - v * 1e-9;
    CHECK((apply_activation(a, zp) - apply_activation(a, zm)).norm() < 1e-8);
    // both one-sided Jacobians are orthogonal
    bool b = false;
    MatrixX<double> Dp = detail::activation_jacobian(a, zp, b);
    MatrixX<double> Dm = detail::activation_jacobian(a, zm, b);
    CHECK((Dp.transpose() * Dp - MatrixX<double>::Identity(2, 2)).norm() < 1e-12);
    CHECK((Dm.transpose() * Dm - MatrixX<double>::Identity(2, 2)).norm() < 1e-12);
  }
}

TEST_CASE("restrict_to_line matches forward along random lines") {
  Rng rng(29);
  for (ActKind kind : {ActKind::relu, ActKind::leaky_cpwl, ActKind::spline_per_neuron,
                       ActKind::groupsort, ActKind::householder}) {
    auto net = random_net(rng, 3, {4}, 2, kind, {ConstraintKind::pnorm, 2.0});
    VectorX<double> u = rng.gaussian_vector(3), x0 = rng.gaussian_vector(3);
    auto lines = restrict_to_line(net, u, x0);
    REQUIRE(lines.size() == 2);
    for (int t = 0; t < 200; ++t) {
      double s = rng.uniform(-5, 5);
      VectorX<double> xt = x0 + s * u;
      VectorX<double> y = forward(net, xt);
      for (int o = 0; o < 2; ++o)
        CHECK(std::abs(eval(lines[static_cast<std::size_t>(o)], s) - y[o]) < 1e-9);
    }
  }
}

TEST_CASE("net validation rejects malformed nets") {
  ConstrainedNet<double> net;
  CHECK_THROWS_AS(validate(net), std::invalid_argument);  // no layers
  net.input_dim = 2;
  Layer<double> l;
  l.W = MatrixX<double>::Identity(3, 3);  // wrong input width
  l.b = VectorX<double>::Zero(3);
  net.layers = {l};
  CHECK_THROWS_AS(validate(net), std::invalid_argument);
  net.layers[0].W = MatrixX<double>::Identity(3, 2);
  net.layers[0].b = VectorX<double>::Zero(4);
  CHECK_THROWS_AS(validate(net), std::invalid_argument);  // bias size
  net.layers[0].b = VectorX<double>::Zero(3);
  CHECK_NOTHROW(validate(net));
  net.layers[0].act = ActivationSpec<double>{};  // activation on output layer
  CHECK_THROWS_AS(validate(net), std::invalid_argument);
}
