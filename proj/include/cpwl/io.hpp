#pragma once

// On-disk formats: JSON schemas spline.v1, lattice.v1, points.v1, net.v1,
// chain.v1, report.v1, plus CSV grid dumps (header row, comma separator, 17
// significant digits). Readers throw std::invalid_argument naming the bad
// field; writers emit through nlohmann::json, whose sorted keys and
// shortest-round-trip doubles make output byte-deterministic.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpwl/analysis.hpp"
#include "cpwl/decompose.hpp"
#include "cpwl/lattice.hpp"
#include "cpwl/net.hpp"
#include "cpwl/spline.hpp"

namespace cpwl::io {

using nlohmann::json;

inline constexpr const char* artifact_version = "1.0.0";

// Output envelope shared by every file the tool writes.
inline json envelope(const char* schema, std::uint64_t seed) {
  json j;
  j["schema"] = schema;
  j["seed"] = seed;
  j["version"] = artifact_version;
  return j;
}

namespace detail {

inline const json& field(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(std::string(where) + ": missing field '" + key + "'");
  return *it;
}

inline double number(const json& j, const char* key, const char* where) {
  const json& v = field(j, key, where);
  if (!v.is_number())
    throw std::invalid_argument(std::string(where) + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> number_list(const json& v, const char* key, const char* where) {
  if (!v.is_array())
    throw std::invalid_argument(std::string(where) + ": field '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number())
      throw std::invalid_argument(std::string(where) + ": field '" + key +
                                  "' must hold numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

template <class Scalar>
json eigen_vector(const VectorX<Scalar>& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline VectorX<double> to_eigen(const std::vector<double>& v) {
  VectorX<double> out(static_cast<Index>(v.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// p encoding: the string "inf" or a JSON number; numeric strings like "2" are
// accepted on input for leniency but never emitted.

inline json p_to_json(double p) {
  if (std::isinf(p)) return "inf";
  return p;
}

inline std::string p_to_string(double p) {
  if (std::isinf(p)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

inline double p_from_json(const json& j) {
  double p = 0;
  if (j.is_number()) {
    p = j.get<double>();
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "Inf" || s == "INF" || s == "infinity") return infinity<double>();
    std::size_t used = 0;
    try {
      p = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size())
      throw std::invalid_argument("p: expected a number or \"inf\", got \"" + s + "\"");
  } else {
    throw std::invalid_argument("p: expected a number or \"inf\"");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("p: must be >= 1");
  return p;
}

// ---------------------------------------------------------------------------
// spline.v1: {"knots":[...],"values":[...],"left_slope":..,"right_slope":..}
// or {"affine":{"slope":..,"value_at_zero":..}} for the knot-free case.

inline json spline_to_json(const LinearSpline<double>& f) {
  json j;
  if (f.knots.empty()) {
    j["affine"] = json{{"slope", f.left_slope}, {"value_at_zero", f.value_at_zero}};
    return j;
  }
  j["knots"] = f.knots;
  j["values"] = f.values;
  j["left_slope"] = f.left_slope;
  j["right_slope"] = f.right_slope;
  return j;
}

inline LinearSpline<double> spline_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("spline.v1: expected an object");
  if (j.contains("affine")) {
    const json& a = j["affine"];
    return affine(detail::number(a, "slope", "spline.v1 affine"),
                  detail::number(a, "value_at_zero", "spline.v1 affine"));
  }
  std::vector<double> k =
      detail::number_list(detail::field(j, "knots", "spline.v1"), "knots", "spline.v1");
  std::vector<double> v =
      detail::number_list(detail::field(j, "values", "spline.v1"), "values", "spline.v1");
  const double ls = detail::number(j, "left_slope", "spline.v1");
  const double rs = detail::number(j, "right_slope", "spline.v1");
  if (k.empty()) throw std::invalid_argument("spline.v1: empty knots; use the affine form");
  return from_knots<double>(std::move(k), std::move(v), ls, rs);  // validates ordering
}

// ---------------------------------------------------------------------------
// lattice.v1: {"d":..,"groups":[[{"gradient":[...],"offset":..},...],...]}

inline json lattice_to_json(const LatticeCPWL<double>& lat) {
  json j;
  j["d"] = lat.dim;
  json groups = json::array();
  for (const auto& g : lat.groups) {
    json jg = json::array();
    for (const auto& piece : g)
      jg.push_back(json{{"gradient", detail::eigen_vector(piece.gradient)},
                        {"offset", piece.offset}});
    groups.push_back(std::move(jg));
  }
  j["groups"] = std::move(groups);
  return j;
}

inline LatticeCPWL<double> lattice_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("lattice.v1: expected an object");
  LatticeCPWL<double> lat;
  const double d = detail::number(j, "d", "lattice.v1");
  if (d < 1 || d != std::floor(d)) throw std::invalid_argument("lattice.v1: d must be a positive integer");
  lat.dim = static_cast<Index>(d);
  const json& groups = detail::field(j, "groups", "lattice.v1");
  if (!groups.is_array() || groups.empty())
    throw std::invalid_argument("lattice.v1: groups must be a nonempty array");
  for (const json& jg : groups) {
    if (!jg.is_array() || jg.empty())
      throw std::invalid_argument("lattice.v1: each group must be a nonempty array");
    std::vector<AffinePiece<double>> g;
    for (const json& jp : jg) {
      AffinePiece<double> piece;
      piece.gradient = detail::to_eigen(detail::number_list(
          detail::field(jp, "gradient", "lattice.v1 piece"), "gradient", "lattice.v1 piece"));
      if (piece.gradient.size() != lat.dim)
        throw std::invalid_argument("lattice.v1: gradient length does not match d");
      piece.offset = detail::number(jp, "offset", "lattice.v1 piece");
      g.push_back(std::move(piece));
    }
    lat.groups.push_back(std::move(g));
  }
  return lat;
}

// ---------------------------------------------------------------------------
// points.v1: {"p":"inf"|number,"points":[{"x":[...],"y":..},...]}

inline json points_to_json(const InterpolationProblem<double>& prob) {
  json j;
  j["p"] = p_to_json(prob.p);
  json pts = json::array();
  for (Index i = 0; i < prob.points.cols(); ++i) {
    VectorX<double> x = prob.points.col(i);
    pts.push_back(json{{"x", detail::eigen_vector(x)}, {"y", prob.values[i]}});
  }
  j["points"] = std::move(pts);
  return j;
}

inline InterpolationProblem<double> points_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("points.v1: expected an object");
  InterpolationProblem<double> prob;
  prob.p = p_from_json(detail::field(j, "p", "points.v1"));
  const json& pts = detail::field(j, "points", "points.v1");
  if (!pts.is_array() || pts.empty())
    throw std::invalid_argument("points.v1: points must be a nonempty array");
  std::vector<VectorX<double>> xs;
  std::vector<double> ys;
  for (const json& jp : pts) {
    xs.push_back(detail::to_eigen(detail::number_list(detail::field(jp, "x", "points.v1 point"),
                                                      "x", "points.v1 point")));
    ys.push_back(detail::number(jp, "y", "points.v1 point"));
    if (xs.back().size() != xs.front().size())
      throw std::invalid_argument("points.v1: inconsistent site dimensions");
  }
  if (xs.front().size() == 0) throw std::invalid_argument("points.v1: sites must be nonempty");
  prob.points.resize(xs.front().size(), static_cast<Index>(xs.size()));
  prob.values.resize(static_cast<Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    prob.points.col(static_cast<Index>(i)) = xs[i];
    prob.values[static_cast<Index>(i)] = ys[i];
  }
  return prob;
}

// ---------------------------------------------------------------------------
// net.v1: {"layers":[{"W":[[...]],"b":[...],"activation":{...}|null}],
//          "constraint":{"kind":...}}

inline json activation_to_json(const ActivationSpec<double>& a) {
  json j;
  switch (a.kind) {
    case ActKind::relu:
      j["kind"] = "relu";
      break;
    case ActKind::leaky_cpwl:
      j["kind"] = "leaky_cpwl";
      j["c"] = a.c;
      j["lo"] = a.lo;
      j["hi"] = a.hi;
      break;
    case ActKind::spline_per_neuron: {
      j["kind"] = "spline_per_neuron";
      json sp = json::array();
      for (const auto& s : a.splines) sp.push_back(spline_to_json(s));
      j["splines"] = std::move(sp);
      break;
    }
    case ActKind::groupsort:
      j["kind"] = "groupsort";
      j["group_size"] = a.group_size;
      if (!a.group_sizes.empty()) j["sizes"] = a.group_sizes;
      break;
    case ActKind::householder:
      j["kind"] = "householder";
      j["direction"] = detail::eigen_vector(a.direction);
      break;
  }
  return j;
}

inline ActivationSpec<double> activation_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("net.v1: activation must be an object or null");
  const json& k = detail::field(j, "kind", "net.v1 activation");
  if (!k.is_string()) throw std::invalid_argument("net.v1 activation: kind must be a string");
  const std::string kind = k.get<std::string>();
  ActivationSpec<double> a;
  if (kind == "relu") {
    a.kind = ActKind::relu;
  } else if (kind == "leaky_cpwl") {
    a.kind = ActKind::leaky_cpwl;
    a.c = detail::number(j, "c", "net.v1 activation");
    a.lo = detail::number(j, "lo", "net.v1 activation");
    a.hi = detail::number(j, "hi", "net.v1 activation");
  } else if (kind == "spline_per_neuron") {
    a.kind = ActKind::spline_per_neuron;
    const json& sp = detail::field(j, "splines", "net.v1 activation");
    if (!sp.is_array()) throw std::invalid_argument("net.v1 activation: splines must be an array");
    for (const json& s : sp) a.splines.push_back(spline_from_json(s));
  } else if (kind == "groupsort") {
    a.kind = ActKind::groupsort;
    a.group_size = static_cast<int>(detail::number(j, "group_size", "net.v1 activation"));
    if (j.contains("sizes")) {
      for (double v : detail::number_list(j["sizes"], "sizes", "net.v1 activation"))
        a.group_sizes.push_back(static_cast<int>(v));
    }
  } else if (kind == "householder") {
    a.kind = ActKind::householder;
    a.direction = detail::to_eigen(detail::number_list(
        detail::field(j, "direction", "net.v1 activation"), "direction", "net.v1 activation"));
  } else {
    throw std::invalid_argument("net.v1 activation: unknown kind '" + kind + "'");
  }
  return a;
}

inline json net_to_json(const ConstrainedNet<double>& net) {
  json j;
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json jl;
    json W = json::array();
    for (Index r = 0; r < layer.W.rows(); ++r) {
      VectorX<double> row = layer.W.row(r).transpose();
      W.push_back(detail::eigen_vector(row));
    }
    jl["W"] = std::move(W);
    jl["b"] = detail::eigen_vector(layer.b);
    jl["activation"] = layer.act ? activation_to_json(*layer.act) : json(nullptr);
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  switch (net.constraint.kind) {
    case ConstraintKind::pnorm:
      j["constraint"] = json{{"kind", "pnorm"}, {"p", p_to_json(net.constraint.p)}};
      break;
    case ConstraintKind::orthogonal:
      j["constraint"] = json{{"kind", "orthogonal"}};
      break;
    case ConstraintKind::none:
      j["constraint"] = json{{"kind", "none"}};
      break;
  }
  return j;
}

inline ConstrainedNet<double> net_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("net.v1: expected an object");
  ConstrainedNet<double> net;
  const json& layers = detail::field(j, "layers", "net.v1");
  if (!layers.is_array() || layers.empty())
    throw std::invalid_argument("net.v1: layers must be a nonempty array");
  for (const json& jl : layers) {
    Layer<double> layer;
    const json& W = detail::field(jl, "W", "net.v1 layer");
    if (!W.is_array() || W.empty())
      throw std::invalid_argument("net.v1 layer: W must be a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (const json& r : W) {
      rows.push_back(detail::number_list(r, "W", "net.v1 layer"));
      if (rows.back().size() != rows.front().size() || rows.back().empty())
        throw std::invalid_argument("net.v1 layer: ragged or empty W rows");
    }
    layer.W.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index r = 0; r < layer.W.rows(); ++r)
      for (Index c = 0; c < layer.W.cols(); ++c)
        layer.W(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    layer.b = detail::to_eigen(
        detail::number_list(detail::field(jl, "b", "net.v1 layer"), "b", "net.v1 layer"));
    const json& act = detail::field(jl, "activation", "net.v1 layer");
    if (!act.is_null()) layer.act = activation_from_json(act);
    net.layers.push_back(std::move(layer));
  }
  net.input_dim = net.layers.front().W.cols();
  const json& c = detail::field(j, "constraint", "net.v1");
  const json& ck = detail::field(c, "kind", "net.v1 constraint");
  if (!ck.is_string()) throw std::invalid_argument("net.v1 constraint: kind must be a string");
  const std::string kind = ck.get<std::string>();
  if (kind == "pnorm") {
    net.constraint.kind = ConstraintKind::pnorm;
    net.constraint.p = p_from_json(detail::field(c, "p", "net.v1 constraint"));
  } else if (kind == "orthogonal") {
    net.constraint.kind = ConstraintKind::orthogonal;
  } else if (kind == "none") {
    net.constraint.kind = ConstraintKind::none;
  } else {
    throw std::invalid_argument("net.v1 constraint: unknown kind '" + kind + "'");
  }
  validate(net);  // dimension and activation shape invariants
  return net;
}

// ---------------------------------------------------------------------------
// chain.v1: {"factors":[spline.v1, ...]}; extra keys (e.g. the verification
// report the decompose command attaches) are ignored on input.

inline json chain_to_json(const CompositionChain<double>& chain) {
  json j;
  json factors = json::array();
  for (const auto& f : chain.factors) factors.push_back(spline_to_json(f));
  j["factors"] = std::move(factors);
  return j;
}

inline CompositionChain<double> chain_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("chain.v1: expected an object");
  const json& factors = detail::field(j, "factors", "chain.v1");
  if (!factors.is_array()) throw std::invalid_argument("chain.v1: factors must be an array");
  CompositionChain<double> chain;
  for (const json& f : factors) chain.factors.push_back(spline_from_json(f));
  return chain;
}

// ---------------------------------------------------------------------------
// report payloads (report.v1 files embed one of these under the envelope)

inline json report_to_json(const ChainReport<double>& rep) {
  json j;
  j["max_grid_error"] = rep.max_grid_error;
  j["factor_region_counts"] = rep.factor_region_counts;
  j["factor_lipschitz"] = rep.factor_lipschitz;
  j["ok"] = rep.ok;
  return j;
}

inline json report_to_json(const Tv2BoundReport& rep) {
  json j;
  j["p"] = p_to_json(rep.p);
  j["trials"] = rep.trials;
  j["max_ratio"] = rep.max_ratio;
  j["violations"] = rep.violations;
  j["passed"] = rep.passed;
  return j;
}

inline json report_to_json(const Prop31Report& rep) {
  json j;
  j["p"] = p_to_json(rep.p);
  j["trials"] = rep.trials;
  j["width_budget"] = rep.width_budget;
  j["nets_enumerated"] = rep.nets_enumerated;
  j["skipped"] = rep.skipped;
  j["budget_exceeded"] = rep.budget_exceeded;
  j["violations"] = rep.violations;
  j["max_unit_pieces"] = rep.max_unit_pieces;
  if (std::isinf(rep.p)) {
    j["max_restriction_tv2"] = rep.max_restriction_tv2;
    j["restriction_violations"] = rep.restriction_violations;
  }
  if (std::isfinite(rep.abs_fit_best_sup_error))
    j["abs_fit_best_sup_error"] = rep.abs_fit_best_sup_error;
  j["abs_fit_spline_error"] = rep.abs_fit_spline_error;
  j["passed"] = rep.passed;
  return j;
}

// ---------------------------------------------------------------------------
// file helpers

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // e.what() carries the byte offset of the syntax error
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::invalid_argument("failed writing " + path);
}

// ---------------------------------------------------------------------------
// CSV: header row, comma separator, 17 significant digits

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Uniform sample positions covering the knot range with padding 2 on each
// side (affine splines sample [-2, 2]); n >= 2 points, endpoints included.
inline std::vector<double> csv_grid(const LinearSpline<double>& f, int n) {
  if (n < 2) throw std::invalid_argument("csv_grid: need at least 2 samples");
  const double lo = (f.knots.empty() ? 0.0 : f.knots.front()) - 2.0;
  const double hi = (f.knots.empty() ? 0.0 : f.knots.back()) + 2.0;
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * double(i) / double(n - 1);
  return xs;
}

inline void write_spline_csv(std::ostream& os, const LinearSpline<double>& f,
                             const std::vector<double>& xs) {
  os << "x,f(x)\n";
  for (double x : xs) os << fmt17(x) << ',' << fmt17(eval(f, x)) << '\n';
}

inline void write_tv2_bound_csv(std::ostream& os, const Tv2BoundReport& rep) {
  os << "trial,width,tv2_sigma,tv2_f,ratio\n";
  for (std::size_t i = 0; i < rep.trial_log.size(); ++i) {
    const auto& tr = rep.trial_log[i];
    os << i << ',' << tr.width << ',' << fmt17(tr.tv2_sigma) << ',' << fmt17(tr.tv2_f) << ','
       << fmt17(tr.ratio) << '\n';
  }
}

inline void write_prop31_csv(std::ostream& os, const Prop31Report& rep) {
  os << "trial,input_dim,depth,leaky,feasible,unit_pieces,fit_sup_error\n";
  for (std::size_t i = 0; i < rep.trial_log.size(); ++i) {
    const auto& tr = rep.trial_log[i];
    os << i << ',' << tr.input_dim << ',' << tr.depth << ',' << (tr.leaky ? 1 : 0) << ','
       << tr.feasible << ',' << tr.unit_pieces << ',' << fmt17(tr.fit_sup_error) << '\n';
  }
}

inline void save_csv(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  writer(out);
  if (!out) throw std::invalid_argument("failed writing " + path);
}

}  // namespace cpwl::io
