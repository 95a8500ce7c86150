// mtd_cli: transport distances, verification batches and curvature estimates from JSON configs.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mtd/json_io.hpp"

namespace {

using mtd::io::json;

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string dump_path;
  std::string summary_csv;
  std::string xi;
  bool quiet = false;
  unsigned jobs = 1;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) mtd::io::config_error("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    mtd::io::config_error(std::string("invalid JSON: ") + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) mtd::io::config_error("cannot write '" + path + "'");
  os << text;
}

int cmd_distance(const Flags& fl) {
  const json cfg = load_config(fl.config);
  json resolved = json::object();
  const auto model = mtd::io::model_of(cfg, resolved);
  mtd::io::Params p(cfg, resolved);
  const auto seed = static_cast<std::uint64_t>(p.integer("seed", static_cast<mtd::Index>(fl.seed)));
  json rf;
  json rg;
  if (!cfg.contains("f") || !cfg.contains("g")) mtd::io::config_error("distance needs densities 'f' and 'g'");
  const Eigen::VectorXd f = mtd::io::density_from(cfg.at("f"), *model, seed, rf);
  const Eigen::VectorXd g = mtd::io::density_from(cfg.at("g"), *model, seed + 1, rg);
  resolved["f"] = rf;
  resolved["g"] = rg;
  const mtd::TransportOptions opt = mtd::io::transport_from(p);
  json xi_spec = cfg.contains("xi") ? cfg.at("xi") : json("log");
  if (!fl.xi.empty()) xi_spec = fl.xi;
  const mtd::XiFunction xi = mtd::io::xi_from(xi_spec);
  resolved["xi"] = xi_spec;

  const mtd::TransportResult res = mtd::minimize_action_xi(model->chain(), f, g, xi, opt);
  json out = mtd::io::to_json(res);
  out["config"] = resolved;
  write_text(fl.out, mtd::io::dump(out) + "\n");
  if (!fl.dump_path.empty()) {
    std::ofstream os(fl.dump_path);
    if (!os) mtd::io::config_error("cannot write '" + fl.dump_path + "'");
    mtd::write_path_csv(os, model->chain(), res.path);
  }
  if (!res.converged) {
    if (!fl.quiet) std::cerr << "NonConvergence: solver stopped before the tolerance was met\n";
    return kExitNonConvergence;
  }
  return 0;
}

int cmd_verify(const Flags& fl) {
  const json cfg = load_config(fl.config);
  const json* list = &cfg;
  if (cfg.is_object()) {
    if (!cfg.contains("scenarios")) mtd::io::config_error("missing field 'scenarios'");
    list = &cfg.at("scenarios");
  }
  if (!list->is_array()) mtd::io::config_error("'scenarios' must be an array");
  if (list->empty()) mtd::io::config_error("scenario list is empty");
  const std::uint64_t seed = cfg.is_object() && cfg.contains("seed") && cfg.at("seed").is_number_unsigned()
                                 ? cfg.at("seed").get<std::uint64_t>()
                                 : fl.seed;

  const std::size_t count = list->size();
  std::vector<mtd::io::ScenarioResult> results(count);
  std::vector<std::string> config_errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = mtd::io::run_scenario((*list)[i], seed);
      } catch (const std::exception& e) {
        config_errors[i] = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(fl.jobs, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < count; ++i) {
    if (!config_errors[i].empty()) {
      mtd::io::config_error("scenario " + std::to_string(i) + ": " + config_errors[i]);
    }
  }

  json reports = json::array();
  std::vector<std::pair<std::string, mtd::VerificationReport>> rows;
  int failed = 0;
  int errors = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = results[i];
    if (!r.error.empty()) {
      ++errors;
      json j;
      j["scenario_index"] = i;
      j["params_hash"] = r.params_hash;
      j["config"] = r.resolved;
      j["error"] = r.error;
      j["pass"] = false;
      reports.push_back(j);
      if (!fl.quiet) std::cerr << "[error] scenario " << i << ": " << r.error << "\n";
      continue;
    }
    for (const auto& rep : r.reports) {
      json j = mtd::io::to_json(rep);
      j["scenario_index"] = i;
      j["params_hash"] = r.params_hash;
      j["config"] = r.resolved;
      reports.push_back(j);
      rows.emplace_back(r.params_hash, rep);
      if (!rep.diagnostic && !rep.pass) ++failed;
      if (!fl.quiet) {
        std::cerr << (rep.diagnostic ? "[diag]" : rep.pass ? "[pass]" : "[FAIL]") << " " << rep.inequality_id
                  << " margin=" << rep.margin << " tol=" << rep.tolerance << "\n";
      }
    }
  }
  json out;
  out["reports"] = reports;
  out["summary"] = {{"scenarios", count}, {"reports", rows.size()}, {"failed", failed}, {"errors", errors}};
  write_text(fl.out, mtd::io::dump(out) + "\n");
  if (!fl.summary_csv.empty()) {
    std::ofstream os(fl.summary_csv, std::ios::binary);
    if (!os) mtd::io::config_error("cannot write '" + fl.summary_csv + "'");
    os << mtd::io::summary_csv(rows);
  }
  return failed + errors > 0 ? kExitFail : 0;
}

int cmd_curvature(const Flags& fl) {
  const json cfg = load_config(fl.config);
  json resolved = json::object();
  const auto model = mtd::io::model_of(cfg, resolved);
  mtd::io::Params p(cfg, resolved);
  const double n = p.num("n", mtd::kInfiniteDimension);
  const auto seed = static_cast<std::uint64_t>(p.integer("seed", static_cast<mtd::Index>(fl.seed)));
  const int samples = static_cast<int>(p.integer("sample_count", 64));
  const mtd::MarkovTriple& t = model->chain();
  json out;
  out["best_R_estimate"] = mtd::estimate_best_R(t, n, samples, seed);
  out["lsi_lower_bound"] = mtd::lsi_lower_bound(t, samples, seed);
  out["sample_count"] = samples;
  out["config"] = resolved;
  write_text(fl.out, mtd::io::dump(out) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov transportation distances and dimensional contraction checks"};
  app.require_subcommand(1);
  Flags fl;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", fl.config, "JSON config file")->required();
    sub->add_option("--seed", fl.seed, "default seed for random presets");
    sub->add_option("--out", fl.out, "write JSON here instead of stdout");
    sub->add_flag("--quiet", fl.quiet, "suppress progress on stderr");
  };
  CLI::App* dist = app.add_subcommand("distance", "minimize the action between two densities");
  common(dist);
  dist->add_option("--dump-path", fl.dump_path, "write the optimal path as CSV");
  dist->add_option("--xi", fl.xi, "\"log\" or \"p=<exponent>\"");
  CLI::App* ver = app.add_subcommand("verify", "run a scenario batch");
  common(ver);
  ver->add_option("--summary-csv", fl.summary_csv, "write a CSV summary");
  ver->add_option("--jobs", fl.jobs, "worker threads; output order is fixed");
  CLI::App* curv = app.add_subcommand("curvature", "estimate the best R and an LSI lower bound");
  common(curv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*dist) return cmd_distance(fl);
    if (*ver) return cmd_verify(fl);
    return cmd_curvature(fl);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
}
