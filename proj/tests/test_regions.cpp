#include <doctest.h>

#include <cpwl/linprog.hpp>
#include <cpwl/random.hpp>
#include <cpwl/regions.hpp>

using namespace cpwl;

namespace {

// f(x) = ReLU(x) as a one-neuron net
ConstrainedNet<double> relu_net_1d() {
  ConstrainedNet<double> net;
  net.input_dim = 1;
  Layer<double> l1;
  l1.W = MatrixX<double>::Ones(1, 1);
  l1.b = VectorX<double>::Zero(1);
  l1.act = ActivationSpec<double>{};
  Layer<double> l2 = l1;
  l2.act.reset();
  net.layers = {l1, l2};
  net.constraint = {ConstraintKind::pnorm, 2.0};
  return net;
}

}  // namespace

TEST_CASE("simplex: known optima, infeasibility, unboundedness") {
  // max x + y s.t. x <= 2, y <= 3
  MatrixX<double> A = MatrixX<double>::Identity(2, 2);
  VectorX<double> b(2);
  b << 2, 3;
  VectorX<double> c(2);
  c << 1, 1;
  auto r = solve_lp_max(c, A, b);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(5).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(2).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(3).epsilon(1e-12));

  // max 2x + y s.t. x + y <= 4, x <= 3 -> x = 3, y = 1
  MatrixX<double> A2(2, 2);
  A2 << 1, 1, 1, 0;
  VectorX<double> b2(2);
  b2 << 4, 3;
  VectorX<double> c2(2);
  c2 << 2, 1;
  auto r2 = solve_lp_max(c2, A2, b2);
  REQUIRE(r2.status == LpStatus::optimal);
  CHECK(r2.objective == doctest::Approx(7).epsilon(1e-12));

  // infeasible: x <= -1 with x >= 0 (phase 1 fails)
  MatrixX<double> A3(1, 1);
  A3 << 1;
  VectorX<double> b3(1);
  b3 << -1;
  VectorX<double> c3(1);
  c3 << 1;
  CHECK(solve_lp_max(c3, A3, b3).status == LpStatus::infeasible);

  // unbounded: max x with only x >= 0
  MatrixX<double> A4(1, 1);
  A4 << -1;
  VectorX<double> b4(1);
  b4 << 0;
  CHECK(solve_lp_max(c3, A4, b4).status == LpStatus::unbounded);

  // negative rhs that is still feasible (needs the artificial pass):
  // max x s.t. -x <= -1, x <= 3  ->  x = 3
  MatrixX<double> A5(2, 1);
  A5 << -1, 1;
  VectorX<double> b5(2);
  b5 << -1, 3;
  auto r5 = solve_lp_max(c3, A5, b5);
  REQUIRE(r5.status == LpStatus::optimal);
  CHECK(r5.objective == doctest::Approx(3).epsilon(1e-12));
}

TEST_CASE("interior_point: margins and empties") {
  // slab 0 <= x <= 1 in 1d: deepest point x = 0.5 with margin 0.5
  MatrixX<double> A(2, 1);
  A << 1, -1;
  VectorX<double> b(2);
  b << 1, 0;
  auto ip = interior_point(A, b, 10.0);
  REQUIRE(ip.feasible);
  CHECK(ip.margin == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ip.x[0] == doctest::Approx(0.5).epsilon(1e-9));

  // triangle x >= 0, y >= 0, x + y <= 1 (rows scaled to unit norm outside)
  MatrixX<double> T(3, 2);
  T << -1, 0, 0, -1, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  VectorX<double> tb(3);
  tb << 0, 0, 1 / std::sqrt(2.0);
  auto it = interior_point(T, tb, 10.0);
  REQUIRE(it.feasible);
  CHECK(it.x[0] > 0);
  CHECK(it.x[1] > 0);
  CHECK(it.x[0] + it.x[1] < 1);

  // contradictory halfplanes: x <= 0 and -x <= -1
  MatrixX<double> E(2, 1);
  E << 1, -1;
  VectorX<double> eb(2);
  eb << 0, -1;
  CHECK(!interior_point(E, eb, 10.0).feasible);

  // degenerate: x <= 0, -x <= 0 has the single point 0, no interior
  VectorX<double> zb = VectorX<double>::Zero(2);
  CHECK(!interior_point(E, zb, 10.0).feasible);
}

TEST_CASE("enumerate_regions: single ReLU neuron") {
  auto rep = enumerate_regions(relu_net_1d());
  REQUIRE(rep.regions.size() == 2);
  CHECK(rep.feasible_count == 2);
  CHECK(rep.unit_norm_count == 1);
  CHECK(rep.regions[0].pattern == std::vector<int>{0});
  CHECK(rep.regions[1].pattern == std::vector<int>{1});
  CHECK(rep.regions[0].p_opnorm == 0);  // inactive piece
  CHECK(rep.regions[1].p_opnorm == 1);  // active piece
  CHECK(rep.regions[0].witness[0] < 0);
  CHECK(rep.regions[1].witness[0] > 0);
}

TEST_CASE("enumerate_regions: 2-region unit-slope spline escapes the bound") {
  // |x| as a one-neuron spline net: both pieces have |gradient| = 1
  ConstrainedNet<double> net;
  net.input_dim = 1;
  Layer<double> l1;
  l1.W = MatrixX<double>::Ones(1, 1);
  l1.b = VectorX<double>::Zero(1);
  ActivationSpec<double> a;
  a.kind = ActKind::spline_per_neuron;
  a.splines = {from_knots<double>({0}, {0}, -1.0, 1.0)};
  l1.act = a;
  Layer<double> l2;
  l2.W = MatrixX<double>::Ones(1, 1);
  l2.b = VectorX<double>::Zero(1);
  net.layers = {l1, l2};
  net.constraint = {ConstraintKind::pnorm, 2.0};

  auto rep = enumerate_regions(net);
  REQUIRE(rep.regions.size() == 2);
  CHECK(rep.feasible_count == 2);
  CHECK(rep.unit_norm_count == 2);  // splines escape the <=1 restriction
  CHECK(rep.regions[0].jacobian(0, 0) == -1);
  CHECK(rep.regions[1].jacobian(0, 0) == 1);
}

TEST_CASE("enumerate_regions: groupsort and householder units") {
  // MaxMin: two orderings, both feasible, jacobians are permutations
  ConstrainedNet<double> ms;
  ms.input_dim = 2;
  Layer<double> l1;
  l1.W = MatrixX<double>::Identity(2, 2);
  l1.b = VectorX<double>::Zero(2);
  ActivationSpec<double> gs;
  gs.kind = ActKind::groupsort;
  l1.act = gs;
  Layer<double> l2;
  l2.W = MatrixX<double>::Identity(2, 2);
  l2.b = VectorX<double>::Zero(2);
  ms.layers = {l1, l2};
  auto rep = enumerate_regions(ms, 2.0);
  REQUIRE(rep.regions.size() == 2);
  CHECK(rep.feasible_count == 2);
  for (const auto& r : rep.regions) {
    CHECK(r.p_opnorm == doctest::Approx(1).epsilon(1e-12));
    CHECK(r.jacobian.cwiseAbs().sum() == 2);  // permutation
  }

  // Householder: two half-spaces, both orthogonal jacobians
  ConstrainedNet<double> hh = ms;
  ActivationSpec<double> ha;
  ha.kind = ActKind::householder;
  VectorX<double> v(2);
  v << 1, 0;
  ha.direction = v;
  hh.layers[0].act = ha;
  auto hrep = enumerate_regions(hh, 2.0);
  REQUIRE(hrep.regions.size() == 2);
  CHECK(hrep.feasible_count == 2);
  for (const auto& r : hrep.regions)
    CHECK((r.jacobian.transpose() * r.jacobian - MatrixX<double>::Identity(2, 2)).norm() <
          1e-12);
}

TEST_CASE("enumerate_regions: witnesses realize their patterns") {
  Rng rng(37);
  for (int t = 0; t < 8; ++t) {
    auto net = random_net(rng, 2, {3, 3}, 1, t % 2 ? ActKind::relu : ActKind::leaky_cpwl,
                          {ConstraintKind::pnorm, 2.0});
    auto rep = enumerate_regions(net);
    int feasible = 0;
    for (const auto& r : rep.regions) {
      if (r.empty) continue;
      ++feasible;
      auto j = jacobian(net, r.witness);
      CHECK(!j.perturbed);  // witness is strictly interior
      CHECK((j.J - r.jacobian).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(feasible == rep.feasible_count);
    CHECK(feasible >= 1);

    // determinism: a second run reproduces the same report
    auto rep2 = enumerate_regions(net);
    REQUIRE(rep2.regions.size() == rep.regions.size());
    for (std::size_t i = 0; i < rep.regions.size(); ++i) {
      CHECK(rep.regions[i].pattern == rep2.regions[i].pattern);
      CHECK(rep.regions[i].empty == rep2.regions[i].empty);
      if (!rep.regions[i].empty)
        CHECK((rep.regions[i].witness - rep2.regions[i].witness).norm() == 0);
    }
  }
}

TEST_CASE("enumerate_regions: at most one unit-norm piece under a p>1 constraint") {
  Rng rng(41);
  int checked = 0;
  for (int t = 0; t < 24; ++t) {
    double p = t % 3 == 0 ? 1.5 : (t % 3 == 1 ? 2.0 : infinity<double>());
    std::vector<Index> hidden(static_cast<std::size_t>(1 + t % 3), 3);
    auto net = random_net(rng, 2, hidden, 1, t % 2 ? ActKind::relu : ActKind::leaky_cpwl,
                          {ConstraintKind::pnorm, p});
    auto rep = enumerate_regions(net, p);
    CHECK(rep.unit_norm_count <= 1);
    ++checked;
  }
  CHECK(checked == 24);
}

TEST_CASE("enumerate_regions: budget guard and p validation") {
  Rng rng(43);
  auto big = random_net(rng, 2, {13, 13}, 1, ActKind::relu, {ConstraintKind::pnorm, 2.0});
  CHECK_THROWS_AS(enumerate_regions(big), std::length_error);

  auto vec_out = random_net(rng, 2, {2}, 2, ActKind::relu, {ConstraintKind::pnorm, 1.5});
  CHECK_THROWS_AS(enumerate_regions(vec_out, 1.5), std::invalid_argument);
  CHECK_NOTHROW(enumerate_regions(vec_out, 2.0));
}
