// Acceptance harness: one line per criterion, exit 0 iff everything passed.
// argv[1] is the path to the cpwl CLI binary (used by the determinism check).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <cpwl/analysis.hpp>
#include <cpwl/decompose.hpp>
#include <cpwl/io.hpp>
#include <cpwl/lattice.hpp>
#include <cpwl/net.hpp>
#include <cpwl/random.hpp>
#include <cpwl/regions.hpp>
#include <cpwl/spline.hpp>
#include <cpwl/to_relu.hpp>

#include "oracles.hpp"

using namespace cpwl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

int failures = 0;

template <class Fn>
void criterion(int id, const char* name, double budget_s, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && dt >= budget_s) {
    out.pass = false;
    out.detail += out.detail.empty() ? "" : "; ";
    out.detail += "over time budget";
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %2d %-22s %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), dt);
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double pick_p(int t) {
  const double choices[3] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
  return choices[t % 3];
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  // 1. tv2(build_sawtooth(m)) = 2(2^m - 1) exactly.
  criterion(1, "sawtooth-tv2", 1.0, [] {
    Outcome out;
    out.pass = true;
    for (int m = 1; m <= 12; ++m) {
      const auto f = build_sawtooth<double>(m);
      const double want = 2.0 * double((Index(1) << m) - 1);
      if (tv2(f) != want || region_count(f) != (Index(1) << m)) out.pass = false;
    }
    out.detail = "2(2^m-1) exact, m=1..12";
    return out;
  });

  // 2. Interpolant hits the data and never exceeds the optimal constant.
  criterion(2, "interpolant-optimal", 30.0, [] {
    Outcome out;
    Rng rng(0xACC0002);
    double worst_fit = 0, worst_ratio = 0;
    for (int t = 0; t < 50; ++t) {
      InterpolationProblem<double> prob;
      const Index d = rng.uniform_int(1, 5);
      const Index n = rng.uniform_int(2, 12);
      prob.points = rng.gaussian_matrix(d, n);
      prob.values = rng.gaussian_vector(n) * 2;
      prob.p = pick_p(t);
      const auto lat = build_interpolant(prob);
      const double L = data_lipschitz(prob);
      for (Index i = 0; i < n; ++i) {
        const double err =
            std::abs(eval_lattice(lat, VectorX<double>(prob.points.col(i))) - prob.values[i]);
        worst_fit = std::max(worst_fit, err);
      }
      for (int s = 0; s < 2000; ++s) {
        const double scale = (s % 2) ? 3.0 : 1.0;
        const VectorX<double> a = rng.gaussian_vector(d) * scale;
        const VectorX<double> b = rng.gaussian_vector(d) * scale;
        const double dist = pnorm<double>(a - b, prob.p);
        if (dist < 1e-12) continue;
        const double q = std::abs(eval_lattice(lat, a) - eval_lattice(lat, b)) / dist;
        worst_ratio = std::max(worst_ratio, q / L);
      }
    }
    out.pass = worst_fit <= 1e-10 && worst_ratio <= 1 + 1e-9;
    char buf[160];
    std::snprintf(buf, sizeof buf, "50 problems, 1e5 pairs: fit %.2e, max quotient/L %.12f",
                  worst_fit, worst_ratio);
    out.detail = buf;
    return out;
  });

  // 3. Holder witnesses saturate the inequality.
  criterion(3, "holder-saturation", 0, [] {
    Outcome out;
    Rng rng(0xACC0003);
    const double ps[5] = {1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()};
    double worst = 0;
    for (double p : ps) {
      const double q = (p == 1) ? std::numeric_limits<double>::infinity()
                                : (std::isinf(p) ? 1.0 : p / (p - 1));
      for (int t = 0; t < 300; ++t) {
        const Index d = rng.uniform_int(1, 6);
        const VectorX<double> xi = rng.gaussian_vector(d) * 2;
        VectorX<double> xj = rng.gaussian_vector(d) * 2;
        if ((xj - xi).cwiseAbs().maxCoeff() < 1e-9) xj[0] += 1.0;
        const VectorX<double> u = holder_witness(xi, xj, p);
        const double lhs = u.dot(xj - xi);
        const double rhs = pnorm<double>(u, q) * pnorm<double>(xj - xi, p);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
    }
    out.pass = worst <= 1e-10;
    char buf[96];
    std::snprintf(buf, sizeof buf, "1500 witnesses, worst relative gap %.2e", worst);
    out.detail = buf;
    return out;
  });

  // 4. Decomposition round-trip on random splines and the sawtooth family.
  // Timed by hand because the input set is shared with criterion 5's spirit.
  bool chain_ok = true;
  double chain_err = 0;
  {
    Rng rng(0xACC0004);
    std::vector<LinearSpline<double>> inputs;
    for (int t = 0; t < 200; ++t) inputs.push_back(random_lipschitz_spline(rng, 9));
    for (int m = 1; m <= 6; ++m) inputs.push_back(build_sawtooth<double>(m));
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out4;
    out4.pass = true;
    for (const auto& g : inputs) {
      const auto chain = decompose(g);
      const auto rep = verify_chain(chain, g);
      chain_err = std::max(chain_err, rep.max_grid_error);
      if (!rep.ok || rep.max_grid_error >= 1e-9) out4.pass = false;
      for (Index rc : rep.factor_region_counts)
        if (rc > 3) out4.pass = false;
      for (double L : rep.factor_lipschitz)
        if (L > 1 + 1e-12) out4.pass = false;
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    chain_ok = out4.pass && dt < 60.0;
    char buf[120];
    std::snprintf(buf, sizeof buf, "206 inputs, factors <=3 regions, max grid error %.2e",
                  chain_err);
    std::printf("[%s]  4 %-22s %s (%.2f s)\n", chain_ok ? "PASS" : "FAIL", "decompose-roundtrip",
                buf, dt);
    if (!chain_ok) ++failures;
  }
  criterion(5, "unit-slope-factors", 0, [&] {
    Outcome out;
    Rng rng(0xACC0005);
    std::vector<LinearSpline<double>> inputs;
    for (int t = 0; t < 200; ++t)
      inputs.push_back(random_unit_slope_spline(rng, int(rng.uniform_int(1, 10))));
    for (int m = 1; m <= 6; ++m) inputs.push_back(build_sawtooth<double>(m));
    out.pass = true;
    for (const auto& g : inputs) {
      for (double s : region_slopes(g))
        if (std::abs(std::abs(s) - 1) > 1e-12) out.pass = false;  // generator sanity
      const auto chain = decompose(g);
      if (verify_chain(chain, g).max_grid_error >= 1e-9) out.pass = false;
      for (const auto& f : chain.factors)
        for (double s : region_slopes(simplify(f)))
          if (std::abs(std::abs(s) - 1) > 1e-12) out.pass = false;
    }
    out.detail = "206 unit-slope inputs, every factor slope has |s| = 1";
    return out;
  });
  (void)chain_ok;

  // 6. Constrained ReLU/LeakyCPWL nets have at most one near-unit-norm piece.
  criterion(6, "one-unit-piece", 120.0, [] {
    Outcome out;
    const double ps[3] = {1.5, 2.0, std::numeric_limits<double>::infinity()};
    int enumerated = 0, violations = 0, skipped = 0;
    bool all_passed = true;  // also covers the p = inf restriction check
    uint64_t seed = 0xACC0006;
    for (double p : ps) {
      const auto rep = prop31_campaign(p, 40, 4, seed++);
      enumerated += rep.nets_enumerated;
      violations += rep.violations;
      skipped += rep.skipped;
      all_passed = all_passed && rep.passed;
    }
    out.pass = all_passed && enumerated >= 100 && violations == 0 && skipped == 0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d nets over p in {1.5,2,inf}, %d violations", enumerated,
                  violations);
    out.detail = buf;
    return out;
  });

  // 7. One-hidden-layer nets never beat the activation's TV2; width 1 is tight.
  criterion(7, "tv2-bound", 0, [] {
    Outcome out;
    int violations = 0;
    double max_ratio = 0;
    const double ps[3] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
    const int counts[3] = {300, 400, 300};
    uint64_t seed = 0xACC0007;
    for (int i = 0; i < 3; ++i) {
      const auto rep = tv2_bound_experiment(ps[i], counts[i], seed++);
      violations += rep.violations;
      max_ratio = std::max(max_ratio, rep.max_ratio);
      if (!rep.passed) violations += 1;
    }
    // width-1 equality: unit hidden weight, unit outer weight, hat activation.
    // Dyadic shifts keep every knot and slope computation exact, so the ratio
    // is 1 with no tolerance at all.
    const auto hat = from_knots<double>({-1, 0, 1}, {1, 0, 1}, 0.0, 0.0);
    bool tight = tv2(hat) == 4.0;
    for (int t = 0; t < 50; ++t) {
      VectorX<double> w(1), b(1), u(1);
      w << (t % 2 ? 1.0 : -1.0);
      b << (t - 25) * 0.125;
      u << (t % 3 ? 1.0 : -1.0);
      const double c = (t % 16 - 8) * 0.25;
      const auto f = one_hidden_layer_spline<double>(w, b, u, c, hat);
      if (tv2(f) != tv2(hat)) tight = false;
    }
    out.pass = violations == 0 && tight && max_ratio <= 1 + 1e-9;
    char buf[120];
    std::snprintf(buf, sizeof buf, "1000 nets, 0 violations expected (got %d), width-1 ratio %s",
                  violations, tight ? "1 exactly" : "NOT 1");
    out.detail = buf;
    return out;
  });

  // 8. Activation rewrites agree with the direct activations.
  criterion(8, "maxmin-groupsort", 0, [] {
    Outcome out;
    Rng rng(0xACC0008);
    const auto mm = maxmin_as_spline_net<double>();
    const double s1 = oracle::spectral_norm(mm.layers[0].W);
    const double s2 = oracle::spectral_norm(mm.layers[1].W);
    bool norms = std::abs(s1 - 1) <= 1e-12 && std::abs(s2 - 1) <= 1e-12;
    ActivationSpec<double> gs;
    gs.kind = ActKind::groupsort;
    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
      const VectorX<double> x = rng.gaussian_vector(2) * 3;
      worst = std::max(worst, (forward(mm, x) - apply_activation(gs, x)).cwiseAbs().maxCoeff());
    }
    for (Index n = 1; n <= 6; ++n) {
      const auto net = groupsort_as_maxmin_net<double>(n);
      for (int t = 0; t < 1700; ++t) {
        const VectorX<double> v = rng.gaussian_vector(n) * 2;
        worst = std::max(worst, (forward(net, v) - oracle::sorted_copy(v)).cwiseAbs().maxCoeff());
      }
    }
    out.pass = norms && worst <= 1e-12;
    char buf[120];
    std::snprintf(buf, sizeof buf, "20200 inputs, max deviation %.2e, |W1|_2=|W2|_2=1 %s", worst,
                  norms ? "holds" : "FAILS");
    out.detail = buf;
    return out;
  });

  // 9. Lattice-to-ReLU exports evaluate identically to the lattice.
  criterion(9, "lattice-to-relu", 0, [] {
    Outcome out;
    Rng rng(0xACC0009);
    double worst = 0;
    for (int t = 0; t < 10; ++t) {
      InterpolationProblem<double> prob;
      const Index d = rng.uniform_int(1, 3);
      const Index n = rng.uniform_int(2, 8);
      prob.points = rng.gaussian_matrix(d, n);
      prob.values = rng.gaussian_vector(n);
      prob.p = pick_p(t);
      const auto lat = build_interpolant(prob);
      const auto net = lattice_to_relu_net(lat);
      for (int s = 0; s < 1000; ++s) {
        const VectorX<double> x = rng.gaussian_vector(d) * 2;
        worst = std::max(worst, std::abs(forward(net, x)[0] - eval_lattice(lat, x)));
      }
    }
    out.pass = worst <= 1e-10;
    char buf[96];
    std::snprintf(buf, sizeof buf, "10 lattices x 1000 points, max |net - lattice| %.2e", worst);
    out.detail = buf;
    return out;
  });

  // 10. Jacobians agree with central differences away from kink boundaries.
  criterion(10, "jacobian-fd", 0, [] {
    Outcome out;
    Rng rng(0xACC000A);
    const ActKind kinds[5] = {ActKind::relu, ActKind::leaky_cpwl, ActKind::spline_per_neuron,
                              ActKind::groupsort, ActKind::householder};
    double worst = 0;
    bool enough = true;
    for (ActKind kind : kinds) {
      int accepted = 0, attempts = 0;
      while (accepted < 100 && attempts < 20000) {
        // fresh net every 25 draws for variety
        const auto net = random_net(rng, 3, {4, 4}, 2, kind, {ConstraintKind::pnorm, 2.0});
        for (int s = 0; s < 25 && accepted < 100; ++s) {
          ++attempts;
          const VectorX<double> x = rng.gaussian_vector(3) * 2;
          const auto res = jacobian(net, x);
          if (res.perturbed) continue;
          const auto fd = oracle::fd_jacobian(net, x);
          worst = std::max(worst, (res.J - fd).cwiseAbs().maxCoeff());
          ++accepted;
        }
      }
      if (accepted < 100) enough = false;
    }
    out.pass = enough && worst <= 1e-5;
    char buf[96];
    std::snprintf(buf, sizeof buf, "100 points x 5 families, max |J - fd| %.2e", worst);
    out.detail = buf;
    return out;
  });

  // 11. CLI runs with identical seeds produce byte-identical files and stdout.
  criterion(11, "cli-determinism", 0, [&] {
    Outcome out;
    if (cli.empty()) {
      out.detail = "no CLI path passed as argv[1]";
      return out;
    }
    const fs::path tmp = fs::path("acceptance_tmp");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp / "run1");
    fs::create_directories(tmp / "run2");
    const std::string q = "\"" + fs::absolute(fs::path(cli)).string() + "\"";
    const std::string dir = tmp.string();

    // fixtures written through the library so the CLI sees real inputs
    {
      InterpolationProblem<double> prob;
      prob.points = MatrixX<double>(1, 2);
      prob.points << 0, 1;
      prob.values = VectorX<double>(2);
      prob.values << 0, 1;
      prob.p = 2;
      io::json pj = io::envelope("points.v1", 0);
      pj.update(io::points_to_json(prob));
      io::save_json((tmp / "pts.json").string(), pj);
      io::json sj = io::envelope("spline.v1", 0);
      sj.update(io::spline_to_json(build_sawtooth<double>(4)));
      io::save_json((tmp / "saw4.json").string(), sj);
    }

    // Each command runs twice with an identical argument string, from two
    // sibling directories; every produced file (including captured stdout)
    // must then match byte for byte.
    bool ran = true;
    auto shell = [&](const std::string& cmd) {
      const int rc = std::system(cmd.c_str());
      return rc == 0;
    };
    auto twice = [&](const std::string& args, const std::string& base) {
      for (int i = 1; i <= 2; ++i) {
        const std::string rd = dir + "/run" + std::to_string(i);
        ran = ran && shell("cd " + rd + " && " + q + " " + args + " > " + base + ".txt");
      }
    };

    twice("sawtooth --depth 6 --dim 3 --u 1,1,1 --p inf --seed 11 --out saw.json", "saw");
    twice("tv2-bound --p inf --trials 60 --seed 42 --out tb.json --csv-out tb.csv", "tb");
    twice("prop31 --p 2 --trials 8 --width-budget 3 --seed 7 --out p31.json", "p31");
    twice("interpolate --p 2 --in ../pts.json --seed 5 --out lat.json", "lat");
    twice("decompose --in ../saw4.json --seed 3 --out chain.json", "chain");
    twice("sawtooth --depth 5 --seed 2 --out f5.json --csv-out f5.csv --grid 257", "f5");

    bool identical = ran;
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(tmp / "run1")) {
      const fs::path other = tmp / "run2" / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) identical = false;
      ++compared;
    }
    if (compared < 12) identical = false;  // txt + json per command at least

    // pinned example outputs
    ran = ran && shell(q + " sawtooth --depth 3 --emit-tv2 > " + dir + "/tv2.txt");
    ran = ran && shell(q + " eval --in " + dir + "/run1/lat.json --x 0.5 > " + dir + "/ev.txt");
    const bool examples = slurp(tmp / "tv2.txt") == "14\n" && slurp(tmp / "ev.txt") == "0.5\n";

    out.pass = ran && identical && examples;
    char buf[120];
    std::snprintf(buf, sizeof buf, "%zu files byte-compared across reruns%s%s", compared,
                  identical ? "" : " (MISMATCH)", examples ? ", examples pinned" : ", examples FAIL");
    out.detail = buf;
    return out;
  });

  if (failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
