// Command-line front end: every library operation behind one binary with
// stable JSON/CSV formats. Exit codes: 0 = success and all asserted
// invariants held, 2 = an invariant was violated (worth a bug report),
// 1 = usage or IO error.

#include <CLI11.hpp>

#include <cpwl/analysis.hpp>
#include <cpwl/decompose.hpp>
#include <cpwl/io.hpp>
#include <cpwl/lattice.hpp>
#include <cpwl/net.hpp>
#include <cpwl/regions.hpp>
#include <cpwl/to_relu.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using cpwl::io::json;

double parse_p_flag(const std::string& s) {
  return cpwl::io::p_from_json(json(s));  // accepts "2", "1.5", "inf"
}

cpwl::LinearSpline<double> load_spline(const std::string& path) {
  return cpwl::io::spline_from_json(cpwl::io::load_json(path));
}

struct CommonFlags {
  std::string in, out, csv_out;
  std::string p{"2"};
  std::uint64_t seed{0};
  int grid{1001};
  double tol{cpwl::tol::grid_eq};
};

int run_interpolate(const CommonFlags& fl, bool p_given) {
  cpwl::InterpolationProblem<double> prob = cpwl::io::points_from_json(cpwl::io::load_json(fl.in));
  if (p_given) prob.p = parse_p_flag(fl.p);
  cpwl::LatticeCPWL<double> lat = cpwl::build_interpolant(prob);
  json j = cpwl::io::envelope("lattice.v1", fl.seed);
  j.update(cpwl::io::lattice_to_json(lat));
  cpwl::io::save_json(fl.out, j);
  std::printf("interpolate  sites=%ld  d=%ld  groups=%zu  p=%s  -> %s\n",
              static_cast<long>(prob.points.cols()), static_cast<long>(lat.dim),
              lat.groups.size(), cpwl::io::p_to_string(prob.p).c_str(), fl.out.c_str());
  return 0;
}

int run_eval(const CommonFlags& fl, const std::vector<double>& x) {
  json j = cpwl::io::load_json(fl.in);
  double y = 0;
  if (j.contains("groups")) {
    cpwl::LatticeCPWL<double> lat = cpwl::io::lattice_from_json(j);
    if (static_cast<cpwl::Index>(x.size()) != lat.dim)
      throw std::invalid_argument("eval: --x needs " + std::to_string(lat.dim) + " components");
    cpwl::VectorX<double> xv(lat.dim);
    for (cpwl::Index i = 0; i < lat.dim; ++i) xv[i] = x[static_cast<std::size_t>(i)];
    y = cpwl::eval_lattice(lat, xv);
  } else {
    if (x.size() != 1) throw std::invalid_argument("eval: splines take exactly one --x value");
    y = cpwl::eval(cpwl::io::spline_from_json(j), x[0]);
  }
  std::printf("%s\n", cpwl::io::fmt17(y).c_str());
  return 0;
}

int run_to_relu(const CommonFlags& fl) {
  cpwl::LatticeCPWL<double> lat = cpwl::io::lattice_from_json(cpwl::io::load_json(fl.in));
  cpwl::ConstrainedNet<double> net = cpwl::lattice_to_relu_net(lat);
  json j = cpwl::io::envelope("net.v1", fl.seed);
  j.update(cpwl::io::net_to_json(net));
  cpwl::io::save_json(fl.out, j);
  std::printf("to-relu  layers=%zu  input_dim=%ld  -> %s\n", net.layers.size(),
              static_cast<long>(net.input_dim), fl.out.c_str());
  return 0;
}

int run_decompose(const CommonFlags& fl) {
  cpwl::LinearSpline<double> g = load_spline(fl.in);
  cpwl::CompositionChain<double> chain = cpwl::decompose(g);
  cpwl::ChainReport<double> rep = cpwl::verify_chain(chain, g);
  bool structure_ok = true;
  for (cpwl::Index rc : rep.factor_region_counts) structure_ok = structure_ok && rc <= 3;
  for (double L : rep.factor_lipschitz)
    structure_ok = structure_ok && L <= 1.0 + cpwl::tol::slope_eq;
  const bool pass = structure_ok && rep.max_grid_error <= fl.tol;
  if (!fl.out.empty()) {
    json j = cpwl::io::envelope("chain.v1", fl.seed);
    j.update(cpwl::io::chain_to_json(chain));
    j["report"] = cpwl::io::report_to_json(rep);
    cpwl::io::save_json(fl.out, j);
  }
  std::printf("decompose  factors=%zu  max_grid_error=%s  [%s]\n", chain.factors.size(),
              cpwl::io::fmt17(rep.max_grid_error).c_str(), pass ? "ok" : "VIOLATION");
  return pass ? 0 : 2;
}

int run_verify(const CommonFlags& fl, bool force_enumerate, bool p_given) {
  cpwl::ConstrainedNet<double> net = cpwl::io::net_from_json(cpwl::io::load_json(fl.in));
  cpwl::ConstraintReport<double> crep = cpwl::check_constraints(net);
  json j = cpwl::io::envelope("report.v1", fl.seed);
  j["kind"] = "verify";
  json layers = json::array();
  for (const auto& lc : crep.layers)
    layers.push_back(json{{"weight_norm", lc.weight_norm},
                          {"activation_lipschitz", lc.activation_lipschitz},
                          {"ok", lc.ok}});
  j["constraint"] = json{{"passed", crep.passed},
                         {"lipschitz_bound", crep.lipschitz_bound},
                         {"layers", std::move(layers)}};

  cpwl::Index units = 0;
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) units += net.layers[l].W.rows();
  j["regions"] = nullptr;
  if (force_enumerate || units <= 16) {
    const double p = p_given ? parse_p_flag(fl.p)
                             : (net.constraint.kind == cpwl::ConstraintKind::pnorm
                                    ? net.constraint.p
                                    : 2.0);
    try {
      cpwl::RegionReport<double> rr = cpwl::enumerate_regions(net, p);
      j["regions"] = json{{"p", cpwl::io::p_to_json(rr.p)},
                          {"feasible_count", rr.feasible_count},
                          {"unit_norm_count", rr.unit_norm_count}};
    } catch (const std::exception& e) {
      j["regions_error"] = e.what();
    }
  }
  if (!fl.out.empty()) cpwl::io::save_json(fl.out, j);
  std::printf("verify  layers=%zu  lipschitz_bound=%s  [%s]\n", net.layers.size(),
              cpwl::io::fmt17(crep.lipschitz_bound).c_str(),
              crep.passed ? "ok" : "VIOLATION");
  return crep.passed ? 0 : 2;
}

int run_sawtooth(const CommonFlags& fl, int depth, int dim, std::vector<double> u,
                 bool emit_tv2) {
  cpwl::LinearSpline<double> f = cpwl::build_sawtooth<double>(depth);
  if (emit_tv2) std::printf("%s\n", cpwl::io::fmt17(cpwl::tv2(f)).c_str());
  if (dim > 0) {
    cpwl::SawtoothSpec<double> spec;
    spec.depth = depth;
    spec.p = parse_p_flag(fl.p);
    if (u.empty()) {
      u.assign(static_cast<std::size_t>(dim), 0.0);
      u[0] = 1.0;
    }
    if (static_cast<int>(u.size()) != dim)
      throw std::invalid_argument("sawtooth: --u needs exactly --dim components");
    spec.direction.resize(dim);
    for (int i = 0; i < dim; ++i) spec.direction[i] = u[static_cast<std::size_t>(i)];
    cpwl::ConstrainedNet<double> net = cpwl::build_sawtooth_net(spec);
    if (!fl.out.empty()) {
      json j = cpwl::io::envelope("net.v1", fl.seed);
      j.update(cpwl::io::net_to_json(net));
      cpwl::io::save_json(fl.out, j);
    }
  } else if (!fl.out.empty()) {
    json j = cpwl::io::envelope("spline.v1", fl.seed);
    j.update(cpwl::io::spline_to_json(f));
    cpwl::io::save_json(fl.out, j);
  }
  if (!fl.csv_out.empty())
    cpwl::io::save_csv(fl.csv_out, [&](std::ostream& os) {
      cpwl::io::write_spline_csv(os, f, cpwl::io::csv_grid(f, fl.grid));
    });
  return 0;
}

int run_tv2(const CommonFlags& fl) {
  std::printf("%s\n", cpwl::io::fmt17(cpwl::tv2(load_spline(fl.in))).c_str());
  return 0;
}

int run_tv2_bound(const CommonFlags& fl, int trials) {
  cpwl::Tv2BoundReport rep = cpwl::tv2_bound_experiment(parse_p_flag(fl.p), trials, fl.seed);
  if (!fl.out.empty()) {
    json j = cpwl::io::envelope("report.v1", fl.seed);
    j["kind"] = "tv2_bound";
    j.update(cpwl::io::report_to_json(rep));
    cpwl::io::save_json(fl.out, j);
  }
  if (!fl.csv_out.empty())
    cpwl::io::save_csv(fl.csv_out,
                       [&](std::ostream& os) { cpwl::io::write_tv2_bound_csv(os, rep); });
  std::printf("tv2-bound  p=%s  trials=%d  max_ratio=%s  violations=%d  [%s]\n",
              cpwl::io::p_to_string(rep.p).c_str(), rep.trials,
              cpwl::io::fmt17(rep.max_ratio).c_str(), rep.violations,
              rep.passed ? "ok" : "VIOLATION");
  return rep.passed ? 0 : 2;
}

int run_prop31(const CommonFlags& fl, int trials, long width_budget) {
  cpwl::Prop31Report rep =
      cpwl::prop31_campaign(parse_p_flag(fl.p), trials, width_budget, fl.seed);
  if (!fl.out.empty()) {
    json j = cpwl::io::envelope("report.v1", fl.seed);
    j["kind"] = "prop31";
    j.update(cpwl::io::report_to_json(rep));
    cpwl::io::save_json(fl.out, j);
  }
  if (!fl.csv_out.empty())
    cpwl::io::save_csv(fl.csv_out,
                       [&](std::ostream& os) { cpwl::io::write_prop31_csv(os, rep); });
  std::printf(
      "prop31  p=%s  trials=%d  enumerated=%d  skipped=%d  max_unit_pieces=%ld  violations=%d"
      "  [%s]%s\n",
      cpwl::io::p_to_string(rep.p).c_str(), rep.trials, rep.nets_enumerated, rep.skipped,
      static_cast<long>(rep.max_unit_pieces), rep.violations, rep.passed ? "ok" : "VIOLATION",
      rep.budget_exceeded ? "  (partial: enumeration budget exceeded)" : "");
  return rep.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPWL spline algebra and Lipschitz-constrained network toolkit"};
  app.require_subcommand(1);

  CommonFlags fl;
  std::vector<double> xflag, uflag;
  int depth = 1, dim = 0, trials = 100;
  long width_budget = 4;
  bool emit_tv2 = false, force_enum = false;

  auto add_common = [&](CLI::App* c, bool needs_in, bool needs_out) {
    auto* in = c->add_option("--in", fl.in, "input JSON file");
    if (needs_in) in->required()->check(CLI::ExistingFile);
    auto* out = c->add_option("--out", fl.out, "output JSON file");
    if (needs_out) out->required();
    c->add_option("--seed", fl.seed, "rng seed stamped into outputs");
    return c;
  };

  CLI::App* interp = add_common(app.add_subcommand("interpolate",
                                                   "optimal Lipschitz interpolant (lattice.v1)"),
                                true, true);
  CLI::Option* interp_p = interp->add_option("--p", fl.p, "norm index: number or inf");

  CLI::App* ev = add_common(app.add_subcommand("eval", "evaluate a spline.v1 or lattice.v1 file"),
                            true, false);
  ev->add_option("--x", xflag, "evaluation point (comma separated for d > 1)")
      ->required()
      ->delimiter(',');

  CLI::App* torelu = add_common(
      app.add_subcommand("to-relu", "exact ReLU network for a lattice.v1 file"), true, true);

  CLI::App* dec = add_common(
      app.add_subcommand("decompose",
                         "factor a 1-Lipschitz spline into <= 3-region factors (chain.v1)"),
      true, false);
  dec->add_option("--tol", fl.tol, "grid-error acceptance threshold")
      ->check(CLI::PositiveNumber);

  CLI::App* ver = add_common(
      app.add_subcommand("verify", "check weight constraints; enumerate regions when small"),
      true, false);
  CLI::Option* ver_p = ver->add_option("--p", fl.p, "norm index for region enumeration");
  ver->add_flag("--enumerate", force_enum, "force region enumeration");

  CLI::App* saw = add_common(app.add_subcommand("sawtooth", "build F_m (spline.v1 or net.v1)"),
                             false, false);
  saw->add_option("--depth", depth, "composition depth m >= 1")->required();
  saw->add_option("--dim", dim, "emit a net.v1 wrapper with this input dimension")
      ->check(CLI::PositiveNumber);
  saw->add_option("--u", uflag, "direction for the net wrapper (comma separated)")
      ->delimiter(',');
  saw->add_option("--p", fl.p, "norm index for the net constraint");
  saw->add_flag("--emit-tv2", emit_tv2, "print tv2(F_m) to stdout");
  saw->add_option("--grid", fl.grid, "CSV sample count")->check(CLI::PositiveNumber);
  saw->add_option("--csv-out", fl.csv_out, "write an x,f(x) grid CSV");

  CLI::App* tv = add_common(app.add_subcommand("tv2", "print the second-order variation"),
                            true, false);

  CLI::App* tvb = add_common(
      app.add_subcommand("tv2-bound", "one-hidden-layer variation bound experiment"), false,
      false);
  tvb->add_option("--p", fl.p, "norm index: number or inf");
  tvb->add_option("--trials", trials, "sample count")->check(CLI::PositiveNumber);
  tvb->add_option("--csv-out", fl.csv_out, "write the per-trial log as CSV");

  CLI::App* p31 = add_common(
      app.add_subcommand("prop31", "unit-piece census over random constrained nets"), false,
      false);
  p31->add_option("--p", fl.p, "norm index: number > 1 or inf");
  p31->add_option("--trials", trials, "sample count")->check(CLI::PositiveNumber);
  p31->add_option("--width-budget", width_budget, "max hidden width per layer")
      ->check(CLI::PositiveNumber);
  p31->add_option("--csv-out", fl.csv_out, "write the per-trial log as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*interp) return run_interpolate(fl, interp_p->count() > 0);
    if (*ev) return run_eval(fl, xflag);
    if (*torelu) return run_to_relu(fl);
    if (*dec) return run_decompose(fl);
    if (*ver) return run_verify(fl, force_enum, ver_p->count() > 0);
    if (*saw) return run_sawtooth(fl, depth, dim, uflag, emit_tv2);
    if (*tv) return run_tv2(fl);
    if (*tvb) return run_tv2_bound(fl, trials);
    if (*p31) return run_prop31(fl, trials, width_budget);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;  // unreachable: require_subcommand(1)
}
