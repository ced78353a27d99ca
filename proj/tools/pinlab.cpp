// pinlab command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pinlab/pinlab.hpp"

namespace fs = std::filesystem;
using namespace pinlab;

namespace {

struct Output {
  std::string name;
  CsvWriter csv;
  Json summary = Json::object();
  std::vector<std::string> warnings;
  std::optional<bool> verdict;  // empty: nothing asserted
};

double need_beta(const RunConfig& c) {
  if (!c.beta) throw UsageError("missing required field 'beta'");
  return *c.beta;
}

std::size_t need_N(const RunConfig& c) {
  if (!c.N) throw UsageError("missing required field 'N'");
  return static_cast<std::size_t>(*c.N);
}

std::vector<std::size_t> N_grid_or(const RunConfig& c, std::vector<std::size_t> dflt) {
  if (c.N_grid.empty()) return dflt;
  return {c.N_grid.begin(), c.N_grid.end()};
}

std::vector<double> need_delta_grid(const RunConfig& c) {
  if (!c.delta_grid.empty()) return c.delta_grid;
  if (c.delta || c.u) return {c.delta_value()};
  throw UsageError("missing required field 'delta_grid' (or 'delta')");
}

void require_recurrent(const ExcursionLaw& law, const char* cmd) {
  if (!law.is_recurrent())
    throw UsageError(std::string(cmd) + ": law has p_inf > 0; use a recurrent law");
}

void require_heavy(const ExcursionLaw& law, const char* cmd) {
  if (!law.is_heavy()) throw UsageError(std::string(cmd) + ": needs a heavy(...) law");
}

unsigned nthreads(const RunConfig& c) { return resolve_threads(static_cast<int>(c.threads)); }

Output run_annealed(const RunConfig& c, const ExcursionLaw& law) {
  const double beta = need_beta(c);
  require_recurrent(law, "annealed");
  const auto grid = need_delta_grid(c);
  Output o{"annealed", CsvWriter({"beta", "delta", "beta_delta", "alpha0", "delta_star", "M", "residual_lhs",
                                  "residual_var"})};
  RenewalTable table(law);
  double worst = 0;
  for (double d : grid) {
    const double bd = beta * d;
    AnnealedSolution s;
    try {
      s = solve_annealed(law, bd, {.m_cap = c.m_cap, .table = &table});
    } catch (const CorrelationLengthCapExceeded& e) {
      o.warnings.push_back("delta=" + fmt(d) + ": M not computed, " + e.what());
      s = solve_annealed(law, bd, {.with_corr_length = false});
    }
    worst = std::max({worst, std::abs(s.residual_lhs), std::abs(s.residual_var)});
    o.csv.row({beta, d, bd, s.alpha0, s.delta_star,
               s.corr_length_M ? CsvField(*s.corr_length_M) : CsvField(std::string()), s.residual_lhs,
               s.residual_var});
  }
  o.summary["max_abs_residual"] = worst;
  o.verdict = worst < 1e-10;
  return o;
}

Output run_quenched(const RunConfig& c, const ExcursionLaw& law) {
  const double beta = need_beta(c);
  const auto p = PinningParams::from_delta(beta, c.delta_value());
  const std::size_t N = need_N(c);
  Output o{"quenched", CsvWriter({"replica", "seed_child", "N", "log_Z", "fN", "mean_LN", "contact"})};
  const auto q = quenched_mc(law, p, N, static_cast<std::size_t>(c.replicas), c.seed, {.threads = nthreads(c)});
  const double n = static_cast<double>(N);
  for (const auto& r : q.replicas)
    o.csv.row({static_cast<std::int64_t>(r.replica), std::to_string(r.seed_child), r.N, r.log_Z, r.log_Z / n,
               r.mean_LN, r.mean_LN / n});
  const double fa = annealed_dp(law, p, N, {.keep_log_z = false}).log_Z / n;
  o.summary["beta"] = beta;
  o.summary["u"] = p.u;
  o.summary["delta"] = p.delta();
  o.summary["N"] = N;
  o.summary["n_replicas"] = q.free_energy.n_replicas;
  o.summary["f_mean"] = q.free_energy.mean;
  o.summary["f_se"] = q.free_energy.std_error;
  o.summary["c_mean"] = q.contact.mean;
  o.summary["c_se"] = q.contact.std_error;
  o.summary["annealed_fN"] = fa;
  o.verdict = q.free_energy.mean <= fa + 3 * q.free_energy.std_error;
  if (!*o.verdict) o.warnings.push_back("quenched mean exceeds annealed + 3 se");
  return o;
}

Output run_curve(const RunConfig& c, const ExcursionLaw& law) {
  const double beta = need_beta(c);
  require_heavy(law, "curve");
  require_recurrent(law, "curve");
  const auto grid = need_delta_grid(c);
  const std::size_t N = need_N(c);
  Output o{"curve", CsvWriter({"beta", "delta", "N", "M", "annealed_f", "annealed_c", "annealed_fN", "annealed_cN",
                               "quenched_f", "quenched_f_se", "quenched_c", "quenched_c_se", "ratio",
                               "jensen_ok"})};
  const auto res = curve_compare(law, beta, grid, N, static_cast<std::size_t>(c.replicas), c.seed,
                                 {.threads = nthreads(c), .enforce_min_N = c.enforce_min_N, .m_cap = c.m_cap});
  bool ok = true;
  for (const auto& p : res.points) {
    o.csv.row({p.beta, p.delta, p.N, p.M ? CsvField(*p.M) : CsvField(std::string()), p.annealed_f, p.annealed_c,
               p.annealed_fN, p.annealed_cN, p.quenched_f.mean, p.quenched_f.std_error, p.quenched_c.mean,
               p.quenched_c.std_error, p.ratio(), std::int64_t{p.jensen_ok}});
    ok = ok && p.jensen_ok;
  }
  o.warnings = res.notices;
  o.summary["points"] = res.points.size();
  o.summary["skipped"] = grid.size() - res.points.size();
  o.summary["jensen_ok"] = ok;
  o.verdict = ok;
  return o;
}

Output run_bound(const RunConfig& c, const ExcursionLaw& law) {
  const double beta = need_beta(c);
  require_heavy(law, "bound");
  require_recurrent(law, "bound");
  const auto grid = need_delta_grid(c);
  const std::size_t N = need_N(c);
  Output o{"bound", CsvWriter({"delta", "N", "quenched_f", "quenched_f_se", "bound_f", "slack_f", "f_ok",
                               "quenched_c", "quenched_c_se", "bound_c", "slack_c", "c_ok"})};
  const auto rep = quadratic_bound_check(law, beta, grid, N, static_cast<std::size_t>(c.replicas), c.seed,
                                         nthreads(c));
  for (const auto& r : rep.rows)
    o.csv.row({r.delta, r.point.N, r.point.quenched_f.mean, r.point.quenched_f.std_error, r.bound_f, r.slack_f,
               std::int64_t{r.f_ok}, r.point.quenched_c.mean, r.point.quenched_c.std_error, r.bound_c, r.slack_c,
               std::int64_t{r.c_ok}});
  o.warnings = rep.notices;
  o.summary["beta"] = beta;
  o.summary["delta2"] = rep.delta2;
  o.summary["all_ok"] = rep.all_ok();
  o.verdict = rep.all_ok();
  return o;
}

Output run_bracket(const RunConfig& c, const ExcursionLaw& law) {
  const double beta = need_beta(c);
  require_heavy(law, "bracket");
  require_recurrent(law, "bracket");
  if (c.delta_grid.empty()) throw UsageError("missing required field 'delta_grid'");
  const auto Ns = N_grid_or(c, {1 << 11, 1 << 13});
  Output o{"bracket", CsvWriter({"delta", "theta", "N", "contact", "contact_se", "quenched_f", "quenched_f_se",
                                 "annealed_fN", "extrapolated", "above"})};
  const auto rep = critical_bracket(law, beta, c.delta_grid, Ns, static_cast<std::size_t>(c.replicas), c.seed,
                                    nthreads(c), c.theta_c);
  for (const auto& r : rep.rows)
    for (std::size_t k = 0; k < Ns.size(); ++k)
      o.csv.row({r.delta, r.theta, static_cast<std::int64_t>(Ns[k]), r.contact[k], r.contact_se[k],
                 r.quenched_f[k], r.quenched_f_se[k], r.annealed_fN[k], r.extrapolated, std::int64_t{r.above}});
  o.warnings = rep.warnings;
  o.summary["beta"] = beta;
  o.summary["theta_c"] = c.theta_c;
  o.summary["delta_lo"] = rep.delta_lo;
  o.summary["delta_hi"] = jnum(rep.delta_hi);
  o.summary["monotone"] = rep.monotone;
  return o;
}

Output run_overlap(const RunConfig& c, const ExcursionLaw& law) {
  const auto Ns = N_grid_or(c, {1000, 10000, 100000});
  Output o{"overlap", CsvWriter({"N", "k", "survival", "n_pairs"})};
  std::vector<double> xs, ps;
  Json per = Json::array();
  for (std::size_t N : Ns) {
    const auto s = overlap_survival(law, static_cast<std::int64_t>(N), static_cast<std::size_t>(c.k_max),
                                    static_cast<std::size_t>(c.pairs), c.seed, nthreads(c));
    for (std::size_t k = 0; k < s.survival.size(); ++k)
      o.csv.row({static_cast<std::int64_t>(N), static_cast<std::int64_t>(k), s.survival[k],
                 static_cast<std::int64_t>(s.n_pairs)});
    per.push_back({{"N", N}, {"p_hat", s.p_hat}, {"slope", s.slope}, {"mean_B", s.mean_B},
                   {"k_fit_max", s.k_fit_max}, {"truncated", s.truncated}});
    if (s.k_fit_max < 2) o.warnings.push_back("N=" + std::to_string(N) + ": too few survivors to fit p_hat");
    if (s.truncated) o.warnings.push_back("N=" + std::to_string(N) + ": k_max truncates the fit range");
    xs.push_back(static_cast<double>(N));
    ps.push_back(s.p_hat);
  }
  o.summary["per_N"] = per;
  if (law.is_heavy() && law.phi().is_constant() && Ns.size() >= 2) {
    const auto v = overlap_regime_verdict(law.c(), xs, ps);
    o.summary["regime"] = v.regime;
    o.summary["statistic"] = jnum(v.statistic);
    o.summary["target"] = v.target;
    o.verdict = v.pass;
  }
  return o;
}

Output run_transient(const RunConfig& c, const ExcursionLaw& law) {
  const double beta = need_beta(c);
  if (law.is_recurrent()) throw UsageError("transient: needs a law with p_inf > 0");
  const double ucd = deterministic_critical_u(law, beta);
  std::vector<double> us = c.u_grid;
  if (us.empty()) us = (c.u || c.delta) ? std::vector<double>{c.u_value()} : std::vector<double>{ucd + 0.2};
  const auto Ns = N_grid_or(c, {1 << 10, 1 << 12, 1 << 14});
  Output o{"transient", CsvWriter({"u", "replica", "N", "d"})};
  const auto rep = transient_map_check(law, beta, us, Ns, static_cast<std::size_t>(c.replicas), c.seed,
                                       nthreads(c));
  Json per = Json::array();
  bool ok = true;
  for (const auto& r : rep.rows) {
    for (std::size_t i = 0; i < r.d.size(); ++i)
      for (std::size_t k = 0; k < Ns.size(); ++k)
        o.csv.row({r.u, static_cast<std::int64_t>(i), static_cast<std::int64_t>(Ns[k]), r.d[i][k]});
    const double f_last = r.f_transient.back();
    Json j = {{"u", r.u}, {"u_recurrent", r.u_recurrent}, {"fraction_decreasing", r.fraction_decreasing},
              {"mean_d_last", r.mean_d_last}, {"f_last", f_last}, {"fit_C", r.fit_C}};
    if (r.u > ucd) {
      const bool pass = r.fraction_decreasing >= 0.95 && r.mean_d_last <= 0.01 * f_last;
      j["pass"] = pass;
      ok = ok && pass;
    }
    per.push_back(j);
  }
  o.summary["beta"] = beta;
  o.summary["u_c_d"] = ucd;
  o.summary["per_u"] = per;
  o.verdict = ok;
  return o;
}

Output run_c32(const RunConfig& c, const ExcursionLaw& law) {
  require_heavy(law, "c32scale");
  if (std::abs(law.c() - 1.5) > 1e-12) throw UsageError("c32scale: needs c = 1.5");
  const std::vector<double> betas = c.beta_grid.empty() ? std::vector<double>{0.5, 0.4, 0.3, 0.25, 0.2}
                                                        : c.beta_grid;
  Output o{"c32scale", CsvWriter({"beta", "inv_beta2", "delta0_hat"})};
  const auto rep = c32_scale(law, betas, c.A);
  for (std::size_t i = 0; i < betas.size(); ++i)
    o.csv.row({betas[i], 1.0 / (betas[i] * betas[i]), rep.delta0[i]});
  o.summary["A"] = c.A;
  o.summary["slope"] = rep.fit.slope;
  o.summary["target"] = -c.A / 2;
  o.summary["strictly_decreasing"] = rep.strictly_decreasing;
  if (law.phi().is_constant()) o.verdict = std::abs(rep.fit.slope / (-c.A / 2) - 1) < 0.05;
  return o;
}

int run_selfcheck_cmd(const RunConfig& c) {
  bool ok = true;
  for (const auto& r : run_selfcheck(c.seed)) {
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (auto& ch : s)
    if (ch == '_') ch = '-';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pinlab: renewal pinning model numerics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file; flags override it");
  std::map<std::string, std::string> flags;
  for (const auto& k : config_keys()) {
    std::string names = "--" + k;
    if (flag_name(k) != k) names += ",--" + flag_name(k);
    app.add_option(names, flags[k])->allow_extra_args(false);
  }
  const std::vector<std::pair<std::string, std::string>> cmds{
      {"annealed", "exact annealed free energy, contact fraction and correlation length"},
      {"quenched", "replica Monte Carlo of the quenched free energy"},
      {"curve", "annealed vs quenched curves along a Delta grid"},
      {"bound", "quadratic bounds on the quenched free energy and contact fraction"},
      {"bracket", "finite-size bracket of the quenched critical point"},
      {"overlap", "two-replica overlap survival and its decay rate"},
      {"transient", "transient model vs its recurrent counterpart on shared disorder"},
      {"c32scale", "Delta_0 scale at c = 3/2"},
      {"selfcheck", "brute-force invariant checks"}};
  for (const auto& [name, help] : cmds) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  std::optional<Output> out;
  RunConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = read_config_file(config_path);
    if (app.count("--delta") > 0) kv.erase("u");
    if (app.count("--u") > 0) kv.erase("delta");
    for (const auto& k : config_keys())
      if (app.count("--" + k) > 0) kv[k] = flags[k];
    cfg = config_from_map(kv);
    if (cmd == "selfcheck") return run_selfcheck_cmd(cfg);
    const auto law = parse_law(cfg.law);
    if (cmd == "annealed") out = run_annealed(cfg, law);
    else if (cmd == "quenched") out = run_quenched(cfg, law);
    else if (cmd == "curve") out = run_curve(cfg, law);
    else if (cmd == "bound") out = run_bound(cfg, law);
    else if (cmd == "bracket") out = run_bracket(cfg, law);
    else if (cmd == "overlap") out = run_overlap(cfg, law);
    else if (cmd == "transient") out = run_transient(cfg, law);
    else if (cmd == "c32scale") out = run_c32(cfg, law);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "pinlab %s: error: %s\n", cmd.c_str(), e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "pinlab %s: error: %s\n", cmd.c_str(), e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "pinlab %s: error: %s\n", cmd.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pinlab %s: failed: %s\n", cmd.c_str(), e.what());
    return 2;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const std::string hash = config_hash(cfg);
    out->csv.write(dir / (out->name + ".csv"));
    Json s = out->summary;
    s["experiment"] = out->name;
    s["config_hash"] = hash;
    s["parameters"] = parse_config_text(to_config_text(cfg));
    s["parameters"].erase("out_dir");
    s["parameters"].erase("threads");
    s["verdict"] = out->verdict ? (*out->verdict ? "pass" : "fail") : "none";
    s["warnings"] = out->warnings;
    write_json(dir / (out->name + ".summary.json"), s);
    Manifest m{hash, cfg.seed, {{out->name, secs}}, out->warnings};
    write_json(dir / "manifest.json", m.to_json());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pinlab %s: failed writing output: %s\n", cmd.c_str(), e.what());
    return 2;
  }
  for (const auto& w : out->warnings) std::fprintf(stderr, "pinlab %s: warning: %s\n", cmd.c_str(), w.c_str());
  std::printf("%s: %s -> %s/%s.csv\n", out->name.c_str(),
              out->verdict ? (*out->verdict ? "pass" : "FAIL") : "done", cfg.out_dir.c_str(), out->name.c_str());
  return out->verdict && !*out->verdict ? 1 : 0;
}
