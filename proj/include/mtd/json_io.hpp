#pragma once

// JSON configs and reports: model/density builders, scenario dispatch, deterministic output.

#include <Eigen/Dense>
#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtd/curvature.hpp"
#include "mtd/error.hpp"
#include "mtd/harness.hpp"
#include "mtd/models.hpp"
#include "mtd/semigroup.hpp"
#include "mtd/transport.hpp"

namespace mtd::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace detail {

inline void put_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "\"nan\"";
  } else if (std::isinf(v)) {
    out += v > 0 ? "\"inf\"" : "\"-inf\"";
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }
}

inline void put(std::string& out, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += json(it.key()).dump();
        out += colon;
        put(out, it.value(), indent, depth + 1);
      }
      out += close;
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        put(out, v, indent, depth + 1);
      }
      out += close;
      out += ']';
      return;
    }
    case json::value_t::number_float:
      put_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serializes with sorted keys and every float printed with 17 significant digits.
inline std::string dump(const json& j, int indent = 2) {
  std::string out;
  detail::put(out, j, indent, 0);
  return out;
}

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const VerificationReport& r) {
  json j;
  j["inequality_id"] = r.inequality_id;
  j["parameters"] = json(r.parameters);
  j["lhs"] = {{"value", r.lhs}, {"provenance", std::string(provenance_name(r.lhs_tag))}};
  j["rhs"] = {{"value", r.rhs}, {"provenance", std::string(provenance_name(r.rhs_tag))}};
  j["margin"] = r.margin;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["diagnostic"] = r.diagnostic;
  j["notes"] = r.notes;
  j["extras"] = json(r.extras);
  return j;
}

inline json to_json(const TransportResult& r) {
  json j;
  j["value"] = r.value;
  j["phi_profile"] = r.phi_profile;
  j["diagnostics"] = {{"iterations", r.iterations},
                      {"grad_norm", r.grad_norm},
                      {"phi_deviation", r.phi_deviation},
                      {"converged", r.converged},
                      {"xi", r.xi_name},
                      {"K", static_cast<std::int64_t>(r.path.intervals())}};
  return j;
}

/// Rows "inequality_id,params_hash,lhs,rhs,margin,pass".
inline std::string summary_csv(const std::vector<std::pair<std::string, VerificationReport>>& rows) {
  std::string out = "inequality_id,params_hash,lhs,rhs,margin,pass\n";
  for (const auto& [hash, r] : rows) {
    std::string line = r.inequality_id + "," + hash + ",";
    detail::put_number(line, r.lhs);
    line += ',';
    detail::put_number(line, r.rhs);
    line += ',';
    detail::put_number(line, r.margin);
    line += r.pass ? ",1\n" : ",0\n";
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config reading
// ---------------------------------------------------------------------------

[[noreturn]] inline void config_error(const std::string& what) { throw Error(Errc::ConfigError, what); }

/// Reads keys from `src`, recording every value actually used (defaults included) in `out`.
class Params {
 public:
  Params(const json& src, json& out) : src_(src), out_(out) {
    if (!src_.is_object()) config_error("expected a JSON object");
  }

  bool has(const std::string& key) const { return src_.contains(key); }

  double num(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!src_.contains(key)) {
      if (!def) config_error("missing numeric field '" + key + "'");
      out_[key] = *def;
      return *def;
    }
    const json& v = src_.at(key);
    double x = 0.0;
    if (v.is_number()) {
      x = v.get<double>();
    } else if (v.is_string() && (v == "inf" || v == "infinity")) {
      x = std::numeric_limits<double>::infinity();
    } else {
      config_error("field '" + key + "' must be a number");
    }
    out_[key] = v;
    return x;
  }

  Index integer(const std::string& key, std::optional<Index> def = std::nullopt) {
    const double x = num(key, def ? std::optional<double>(static_cast<double>(*def)) : std::nullopt);
    if (x != std::floor(x) || !std::isfinite(x)) config_error("field '" + key + "' must be an integer");
    out_[key] = static_cast<std::int64_t>(x);
    return static_cast<Index>(x);
  }

  std::string str(const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!src_.contains(key)) {
      if (!def) config_error("missing string field '" + key + "'");
      out_[key] = *def;
      return *def;
    }
    if (!src_.at(key).is_string()) config_error("field '" + key + "' must be a string");
    out_[key] = src_.at(key);
    return src_.at(key).get<std::string>();
  }

  bool flag(const std::string& key, bool def) {
    if (!src_.contains(key)) {
      out_[key] = def;
      return def;
    }
    if (!src_.at(key).is_boolean()) config_error("field '" + key + "' must be a boolean");
    out_[key] = src_.at(key);
    return src_.at(key).get<bool>();
  }

  std::vector<double> list(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
    if (!src_.contains(key)) {
      if (!def) config_error("missing list field '" + key + "'");
      out_[key] = *def;
      return *def;
    }
    const json& v = src_.at(key);
    if (!v.is_array()) config_error("field '" + key + "' must be an array");
    std::vector<double> r;
    for (const auto& x : v) {
      if (!x.is_number()) config_error("field '" + key + "' must hold numbers");
      r.push_back(x.get<double>());
    }
    out_[key] = v;
    return r;
  }

  const json& raw(const std::string& key) const {
    if (!src_.contains(key)) config_error("missing field '" + key + "'");
    return src_.at(key);
  }

  json& out() { return out_; }

 private:
  const json& src_;
  json& out_;
};

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct Model {
  std::string name;
  std::shared_ptr<const MarkovTriple> triple;
  std::optional<LineGrid> grid;
  double mesh_h = 0.0;
  double kappa = 0.0;
  double circumference = 1.0;
  std::shared_ptr<const Model> first;
  std::shared_ptr<const Model> second;

  const MarkovTriple& chain() const {
    if (!triple) config_error("model '" + name + "' is not a finite triple");
    return *triple;
  }
  const LineGrid& line() const {
    if (!grid) config_error("model '" + name + "' is not a line grid");
    return *grid;
  }
};

inline Eigen::VectorXd potential_from(const json& v, Index m, double circ, Params& p) {
  if (v.is_array()) {
    Eigen::VectorXd out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i].get<double>();
    if (out.size() != m) config_error("potential must have m values");
    return out;
  }
  if (!v.is_string()) config_error("V must be \"zero\", \"cos\" or an array");
  const std::string name = v.get<std::string>();
  if (name == "zero") return Eigen::VectorXd::Zero(m);
  if (name == "cos") {
    const double amp = p.num("V_amp", 1.0);
    return sample_potential(m, [&](double x) { return amp * std::cos(2.0 * std::numbers::pi * x / circ); }, circ);
  }
  config_error("unknown potential '" + name + "'");
}

/// {"model":"two_point","kappa":..} | "ring" (m, rate) | "circle_diffusion" (m, V, circumference)
/// | "product" (factors: [model, model]) | "line" (a, b, m).
inline std::shared_ptr<const Model> build_model(const json& spec, json& resolved) {
  Params p(spec, resolved);
  auto out = std::make_shared<Model>();
  out->name = p.str("model");
  if (out->name == "two_point") {
    out->kappa = p.num("kappa", 1.0);
    out->triple = std::make_shared<MarkovTriple>(two_point(out->kappa));
  } else if (out->name == "ring") {
    const Index m = p.integer("m");
    out->triple = std::make_shared<MarkovTriple>(ring_chain(m, p.num("rate", 1.0)));
  } else if (out->name == "circle_diffusion") {
    const Index m = p.integer("m");
    out->circumference = p.num("circumference", 1.0);
    const json v = spec.contains("V") ? spec.at("V") : json("zero");
    resolved["V"] = v;
    out->triple =
        std::make_shared<MarkovTriple>(circle_diffusion(m, potential_from(v, m, out->circumference, p), out->circumference));
    out->mesh_h = out->circumference / static_cast<double>(m);
  } else if (out->name == "product") {
    const json& f = p.raw("factors");
    if (!f.is_array() || f.size() != 2) config_error("product needs two factors");
    json rf = json::array({json::object(), json::object()});
    out->first = build_model(f[0], rf[0]);
    out->second = build_model(f[1], rf[1]);
    resolved["factors"] = rf;
    out->triple = std::make_shared<MarkovTriple>(product(out->first->chain(), out->second->chain()));
    out->mesh_h = std::max(out->first->mesh_h, out->second->mesh_h);
  } else if (out->name == "line") {
    out->grid = make_line_grid(p.num("a", -12.0), p.num("b", 12.0), p.integer("m", 1024));
  } else {
    config_error("unknown model '" + out->name + "'");
  }
  return out;
}

/// The "model" entry of a config: a nested object, or a name with its parameters inline.
inline std::shared_ptr<const Model> model_of(const json& cfg, json& resolved) {
  if (!cfg.contains("model")) config_error("missing field 'model'");
  const json& m = cfg.at("model");
  json r = json::object();
  std::shared_ptr<const Model> out;
  if (m.is_object()) {
    out = build_model(m, r);
  } else {
    out = build_model(cfg, r);
  }
  resolved["model"] = r;
  return out;
}

// ---------------------------------------------------------------------------
// Densities and fields
// ---------------------------------------------------------------------------

inline Eigen::VectorXd array_values(const json& v) {
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_error("density arrays must hold numbers");
    out(static_cast<Index>(i)) = v[i].get<double>();
  }
  return out;
}

inline Eigen::VectorXd node_positions(const Model& m) {
  if (m.grid) return m.grid->nodes;
  return circle_nodes(m.chain().size(), m.circumference);
}

/// Inline array | "uniform" | {"preset": "random"|"smooth"|"cos"|"tensor"|"gaussian", ...}.
inline Eigen::VectorXd density_from(const json& spec, const Model& model, std::uint64_t seed, json& resolved) {
  if (spec.is_array()) {
    resolved = spec;
    Eigen::VectorXd v = array_values(spec);
    if (model.grid) return v;
    const MarkovTriple& t = model.chain();
    if (v.size() != t.size()) config_error("density has the wrong number of entries");
    if (!(v.minCoeff() > 0.0)) config_error("densities must be strictly positive");
    if (std::abs(t.mean(v) - 1.0) > 1e-9) config_error("density must have unit mass");
    return v / t.mean(v);
  }
  if (spec.is_string() && spec == "uniform") {
    resolved = spec;
    if (model.grid) config_error("no uniform density on a line grid");
    return Eigen::VectorXd::Ones(model.chain().size());
  }
  Params p(spec, resolved);
  const std::string kind = p.str("preset");
  if (kind == "gaussian") {
    return sample_gaussian(model.line(), p.num("mean", 0.0), p.num("sd", 1.0));
  }
  const MarkovTriple& t = model.chain();
  if (kind == "random" || kind == "smooth") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.integer("seed", static_cast<Index>(seed))));
    if (kind == "random") return random_density(t, rng, p.num("spread", 1.0));
    return smooth_circle_density(t, rng, p.num("amp", 0.4));
  }
  if (kind == "cos") {
    const double amp = p.num("amp", 0.5);
    const double mode = p.num("mode", 1.0);
    const double phase = p.num("phase", 0.0);
    if (std::abs(amp) >= 1.0) config_error("cos preset needs |amp| < 1");
    const Eigen::VectorXd x = node_positions(model);
    Eigen::VectorXd v(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      v(i) = 1.0 + amp * std::cos(2.0 * std::numbers::pi * mode * x(i) / model.circumference + phase);
    }
    return v / t.mean(v);
  }
  if (kind == "tensor") {
    if (!model.first) config_error("tensor densities need a product model");
    json r1;
    json r2;
    const Eigen::VectorXd f1 = density_from(p.raw("f1"), *model.first, seed, r1);
    const Eigen::VectorXd f2 = density_from(p.raw("f2"), *model.second, seed + 1, r2);
    resolved["f1"] = r1;
    resolved["f2"] = r2;
    return tensor(f1, f2);
  }
  config_error("unknown density preset '" + kind + "'");
}

/// Test functions: inline array | {"preset": "sin"|"cos", "mode"} | {"preset": "log"|"neglog", "of": density}.
inline Eigen::VectorXd field_from(const json& spec, const Model& model, std::uint64_t seed, json& resolved) {
  if (spec.is_array()) {
    resolved = spec;
    Eigen::VectorXd v = array_values(spec);
    if (v.size() != model.chain().size()) config_error("field has the wrong number of entries");
    return v;
  }
  Params p(spec, resolved);
  const std::string kind = p.str("preset");
  if (kind == "sin" || kind == "cos") {
    const double mode = p.num("mode", 1.0);
    const Eigen::VectorXd x = node_positions(model);
    Eigen::VectorXd v(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double a = 2.0 * std::numbers::pi * mode * x(i) / model.circumference;
      v(i) = kind == "sin" ? std::sin(a) : std::cos(a);
    }
    return v;
  }
  if (kind == "log" || kind == "neglog") {
    json r;
    const Eigen::VectorXd d = density_from(p.raw("of"), model, seed, r);
    resolved["of"] = r;
    const Eigen::VectorXd l = d.array().log().matrix();
    return kind == "log" ? l : Eigen::VectorXd(-l);
  }
  config_error("unknown field preset '" + kind + "'");
}

/// "log" | "p=1.5" | {"p": 1.5}.
inline XiFunction xi_from(const json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "log") return XiFunction::log_entropy();
    if (s.rfind("p=", 0) == 0) {
      try {
        return XiFunction::power(std::stod(s.substr(2)));
      } catch (const std::invalid_argument&) {
        config_error("bad xi exponent '" + s + "'");
      }
    }
  } else if (spec.is_object() && spec.contains("p") && spec.at("p").is_number()) {
    return XiFunction::power(spec.at("p").get<double>());
  }
  config_error("xi must be \"log\", \"p=<exponent>\" or {\"p\": <exponent>}");
}

inline TransportOptions transport_from(Params& p, Index default_k = TransportOptions{}.K) {
  TransportOptions o;
  o.K = p.integer("K", default_k);
  o.tol_rel = p.num("tol_rel", o.tol_rel);
  o.max_iter = static_cast<int>(p.integer("max_iter", o.max_iter));
  return o;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct ScenarioResult {
  json resolved;
  std::string params_hash;
  std::vector<VerificationReport> reports;
  std::string error;  // set when the verification itself raised
};

/// Scenario reads happen first (ConfigError escapes); failures inside the check become `error`.
inline ScenarioResult run_scenario(const json& scenario, std::uint64_t default_seed) {
  ScenarioResult res;
  json& rs = res.resolved;
  rs = json::object();
  Params top(scenario, rs);
  const std::string id = top.str("inequality_id");
  if (scenario.contains("id")) top.str("id");
  const auto seed = static_cast<std::uint64_t>(top.integer("seed", static_cast<Index>(default_seed)));
  const json empty = json::object();
  const json& params_src = scenario.contains("params") ? scenario.at("params") : empty;
  json params_out = json::object();
  Params p(params_src, params_out);

  std::shared_ptr<const Model> model;
  if (id != "cor46_formula") {
    model = model_of(scenario, rs);
  }
  auto dens = [&](const char* key, std::uint64_t s) {
    json r;
    Eigen::VectorXd v = density_from(top.raw(key), *model, s, r);
    rs[key] = r;
    return v;
  };
  auto field = [&](const char* key, std::uint64_t s) {
    json r;
    Eigen::VectorXd v = field_from(top.raw(key), *model, s, r);
    rs[key] = r;
    return v;
  };
  HarnessOptions ho;
  std::function<std::vector<VerificationReport>()> run;

  auto finite = [&](Index default_k = 32) {
    ho.transport = transport_from(p, default_k);
    ho.quad_nodes = static_cast<int>(p.integer("quad_nodes", ho.quad_nodes));
    ho.solver_variant = p.flag("solver_variant", true);
    ho.mesh_h = model ? model->mesh_h : 0.0;
  };
  LineOptions lo;
  auto line = [&]() {
    lo.quad_nodes = static_cast<int>(p.integer("quad_nodes", lo.quad_nodes));
    lo.n = p.num("n", 1.0);
  };

  if (id == "prop22_heat") {
    line();
    const double t = p.num("T");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_prop22_heat(model->line(), f, g, t, lo)}; };
  } else if (id == "lemma21_heat") {
    line();
    const double t = p.num("T");
    Eigen::VectorXd g = dens("g", seed);
    Eigen::VectorXd w;
    const json& fs = top.raw("F");
    if (fs.is_string() && fs == "score") {
      w = line_derivative(model->line(), g);
      rs["F"] = fs;
    } else if (fs.is_object() && fs.value("preset", "") == "modulated") {
      json r;
      Params fp(fs, r);
      fp.str("preset");
      const double freq = fp.num("freq", 1.0);
      w = (model->line().nodes.array() * freq).sin().matrix().cwiseProduct(g);
      rs["F"] = r;
    } else if (fs.is_array()) {
      w = array_values(fs);
      rs["F"] = fs;
    } else {
      config_error("F must be \"score\", {\"preset\":\"modulated\"} or an array");
    }
    run = [=, &model] { return std::vector{verify_lemma21_heat(model->line(), w, g, t, lo)}; };
  } else if (id == "remark23_different_times") {
    line();
    const double s = p.num("s");
    const double t = p.num("t");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_remark23_different_times(model->line(), f, g, s, t, lo)}; };
  } else if (id == "evi_heat_dimensional") {
    line();
    const double dt = p.num("dt", 1e-3);
    const int sn = static_cast<int>(p.integer("s_nodes", 33));
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_evi_heat_dimensional(model->line(), f, g, dt, sn, lo)}; };
  } else if (id == "prop38_kuwada" || id == "prop38_derivative") {
    finite(64);
    const double t = p.num("t", id == "prop38_kuwada" ? std::optional<double>() : 1e-3);
    Eigen::VectorXd f = dens("f", seed);
    if (id == "prop38_kuwada") {
      run = [=, &model] { return std::vector{verify_prop38_kuwada(model->chain(), f, t, ho)}; };
    } else {
      const double slack = p.num("slack", 0.05);
      run = [=, &model] { return std::vector{verify_kuwada_derivative(model->chain(), f, t, slack, ho)}; };
    }
  } else if (id == "cor310_talagrand") {
    finite();
    const double c = p.num("C");
    const std::vector<double> ts = p.list("T_grid");
    Eigen::VectorXd f = dens("f", seed);
    run = [=, &model] { return verify_cor310_talagrand(model->chain(), f, c, ts, ho); };
  } else if (id == "thm44_contraction") {
    finite();
    const double r = p.num("R", 0.0);
    const double n = p.num("n");
    const double t = p.num("T");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_thm44_contraction(model->chain(), f, g, r, n, t, ho)}; };
  } else if (id == "lemma42_integrated") {
    finite();
    const double r = p.num("R", 0.0);
    const double n = p.num("n");
    const double t = p.num("t");
    Eigen::VectorXd f = field("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_lemma42_integrated(model->chain(), f, g, r, n, t, ho)}; };
  } else if (id == "lemma43_pointwise") {
    finite();
    const double r = p.num("R", 0.0);
    const double n = p.num("n");
    Eigen::VectorXd f = field("f", seed);
    Eigen::VectorXd g = field("g", seed + 1);
    run = [=, &model] { return std::vector{verify_lemma43_pointwise(model->chain(), f, g, r, n, ho)}; };
  } else if (id == "thm51_evi") {
    finite();
    const double r = p.num("R", 0.0);
    const double t = p.num("t");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_thm51_evi(model->chain(), f, g, r, t, ho)}; };
  } else if (id == "dimEVI_T2") {
    finite();
    const double r = p.num("R", 0.0);
    const double n = p.num("n");
    const double dt = p.num("dt", 1e-3);
    const bool closed = p.flag("closed_form", false);
    if (closed && model->name != "two_point") config_error("closed_form needs the two_point model");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] {
      return std::vector{verify_dimEVI_T2(model->chain(), f, g, r, n, dt, ho, closed ? model->kappa : 0.0)};
    };
  } else if (id == "tensorization") {
    finite();
    if (!model->first) config_error("tensorization needs a product model");
    const XiFunction xi = xi_from(params_src.contains("xi") ? params_src.at("xi") : json("log"));
    params_out["xi"] = params_src.contains("xi") ? params_src.at("xi") : json("log");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] {
      return std::vector{verify_tensorization(model->first->chain(), model->second->chain(), f, g, xi, ho)};
    };
  } else if (id == "thm62_contraction" || id == "thm62_evi") {
    finite();
    const double r = p.num("R", 0.0);
    const double t = p.num("t");
    const XiFunction xi = xi_from(params_src.contains("xi") ? params_src.at("xi") : json("log"));
    params_out["xi"] = params_src.contains("xi") ? params_src.at("xi") : json("log");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    if (id == "thm62_contraction") {
      run = [=, &model] { return std::vector{verify_thm62_contraction(model->chain(), f, g, r, t, xi, ho)}; };
    } else {
      run = [=, &model] { return std::vector{verify_thm62_evi(model->chain(), f, g, r, t, xi, ho)}; };
    }
  } else if (id == "thm63_power") {
    finite();
    const double r = p.num("R", 0.0);
    const double pe = p.num("p", 1.5);
    const double t = p.num("t");
    Eigen::VectorXd f = dens("f", seed);
    Eigen::VectorXd g = dens("g", seed + 1);
    run = [=, &model] { return std::vector{verify_thm63_power(model->chain(), f, g, r, pe, t, ho)}; };
  } else if (id == "cor46_formula") {
    const double a = p.num("T2sq0");
    const double r = p.num("R");
    const double n = p.num("n");
    const double t = p.num("T");
    run = [=] { return std::vector{verify_cor46_formula(a, r, n, t)}; };
  } else {
    config_error("unknown inequality_id '" + id + "'");
  }
  rs["params"] = params_out;
  res.params_hash = fnv1a_hex(rs.dump());
  try {
    res.reports = run();
  } catch (const Error& e) {
    res.error = e.what();
  }
  return res;
}

}  // namespace mtd::io
