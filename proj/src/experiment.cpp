#include "chaoslab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "chaoslab/bounds.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/rng.hpp"
#include "chaoslab/verify.hpp"

namespace chaoslab {

using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---- config access -------------------------------------------------------

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(p, "required field is missing");
  return obj.at(key);
}

double as_real(const json& v, const std::string& p) {
  if (!v.is_number()) throw ConfigError(p, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(p, "expected a finite number");
  return x;
}

std::int64_t as_int(const json& v, const std::string& p) {
  if (!v.is_number_integer()) throw ConfigError(p, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& p) {
  if (!v.is_string()) throw ConfigError(p, "expected a string");
  return v.get<std::string>();
}

double real_or(const json& obj, const std::string& key, const std::string& path, double dflt) {
  if (!obj.is_object() || !obj.contains(key)) return dflt;
  return as_real(obj.at(key), join(path, key));
}

std::int64_t int_or(const json& obj, const std::string& key, const std::string& path,
                    std::int64_t dflt) {
  if (!obj.is_object() || !obj.contains(key)) return dflt;
  return as_int(obj.at(key), join(path, key));
}

std::vector<double> reals_or(const json& obj, const std::string& key, const std::string& path,
                             std::vector<double> dflt) {
  if (!obj.is_object() || !obj.contains(key)) return dflt;
  const std::string p = join(path, key);
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_real(v[i], p + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> symmetric_grid(double lo, double hi, int per_side) {
  std::vector<double> g;
  for (int i = per_side - 1; i >= 0; --i) g.push_back(-(lo + (hi - lo) * i / (per_side - 1)));
  for (int i = 0; i < per_side; ++i) g.push_back(lo + (hi - lo) * i / (per_side - 1));
  return g;
}

ModelSpec parse_model(const json& block) {
  const std::string path = "model";
  if (!block.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = as_string(require(block, "type", path), "model.type");
  auto coupling = [&](double theta, double sigma) {
    const bool has_j = block.contains("J");
    const bool has_frac = block.contains("J_fraction");
    if (has_j == has_frac) {
      throw ConfigError("model.J", "give exactly one of J and J_fraction");
    }
    if (has_j) return as_real(block.at("J"), "model.J");
    const double frac = as_real(block.at("J_fraction"), "model.J_fraction");
    return frac * critical_coupling(curie_weiss_model(theta, sigma, 1.0));
  };
  ModelSpec m;
  if (type == "curie-weiss") {
    const double theta = as_real(require(block, "theta", path), "model.theta");
    const double sigma = as_real(require(block, "sigma", path), "model.sigma");
    if (!(theta > 0.0)) throw ConfigError("model.theta", "must be positive for curie-weiss");
    m = curie_weiss_model(theta, sigma, coupling(theta, sigma));
  } else if (type == "gaussian") {
    const double sigma = as_real(require(block, "sigma", path), "model.sigma");
    if (!(sigma > 0.0)) throw ConfigError("model.sigma", "must be positive");
    m = gaussian_model(sigma, coupling(0.0, sigma));
  } else if (type == "coulomb") {
    const double theta = as_real(require(block, "theta", path), "model.theta");
    const double sigma = as_real(require(block, "sigma", path), "model.sigma");
    const double eps = as_real(require(block, "eps", path), "model.eps");
    const double strength = real_or(block, "strength", path, 1.0);
    if (!(eps > 0.0)) throw ConfigError("model.eps", "must be positive");
    m = coulomb_model(theta, sigma, eps, strength);
  } else {
    throw ConfigError("model.type", "unknown model type '" + type + "'");
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return m;
}

// ---- output helpers ------------------------------------------------------

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

std::string csv_footer(const ExperimentConfig& cfg) {
  return "# config_hash=" + hex64(cfg.hash) + "\n";
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json bundle_json(const ConstantsBundle& b) {
  json j;
  j["regime"] = to_string(b.regime);
  j["rho"] = b.rho;
  j["gamma"] = b.gamma;
  j["M"] = b.big_m;
  j["rho0"] = opt(b.rho0);
  j["lambda"] = opt(b.lambda);
  j["eps"] = opt(b.eps);
  j["lambda_n"] = opt(b.lambda_n);
  j["delta_n"] = opt(b.delta_n);
  j["j_c"] = opt(b.j_c);
  j["var_mstar"] = opt(b.var_mstar);
  return j;
}

json scan_json(const ScanReport& r) {
  json j;
  j["grid"] = r.grid;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["min_margin"] = r.min_margin;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <typename Body>
void parallel_for(int n, int threads, Body body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, std::max(n, 1));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool subcritical(const ModelSpec& model) {
  return model.is_rank_one() && model.coupling() > 0.0 &&
         model.coupling() < critical_coupling(model);
}

std::optional<ConstantsBundle> scan_bundle(const ModelSpec& model, int n) {
  if (!model.is_quartic() || model.quartic().theta <= 0.0 || !subcritical(model)) {
    return std::nullopt;
  }
  const auto& q = model.quartic();
  return curie_weiss_constants_raw(q.theta, q.sigma, model.coupling(), n, 1);
}

void require_rank_one(const ExperimentConfig& cfg) {
  if (!cfg.model.is_rank_one()) {
    throw ConfigError("model.type", "command '" + cfg.command + "' needs a rank-one model");
  }
}

void require_n_grid(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty()) throw ConfigError("n_grid", "required field is missing");
}

// ---- commands ------------------------------------------------------------

void run_constants(const ExperimentConfig& cfg, RunReport& rep) {
  require_n_grid(cfg);
  const ModelSpec& m = cfg.model;
  json rows = json::array();
  for (int n : cfg.n_grid) {
    json row;
    row["N"] = n;
    try {
      ConstantsBundle b;
      if (m.family == ModelFamily::CurieWeiss) {
        b = curie_weiss_constants_raw(m.quartic().theta, m.quartic().sigma, m.coupling(), n, 1);
      } else if (m.family == ModelFamily::Gaussian) {
        b = prop25_constants(DisplacementInputs{m.quartic().sigma, std::fabs(m.coupling()), 1, n});
      } else {
        const double rho0 = curie_weiss_rho0(m.quartic().theta, m.quartic().sigma);
        b = prop25_constants(BoundedForceInputs{rho0, m.force_bound, m.force_bound_minus});
      }
      row["constants"] = bundle_json(b);
      row["lambda_n_positive"] = b.lambda_n ? json(*b.lambda_n > 0.0) : json(nullptr);
    } catch (const Error& e) {
      row["constants"] = nullptr;
      row["error"] = std::string(to_string(e.code())) + ": " + e.what();
    }
    rows.push_back(row);
  }
  json doc;
  doc["command"] = "constants";
  doc["model"] = to_string(m.family);
  doc["config_hash"] = hex64(cfg.hash);
  doc["rows"] = rows;
  const std::string p = out_path(cfg, "constants.json");
  write_text(p, doc.dump(2) + "\n");
  rep.outputs.push_back(p);
}

void run_fixed_point(const ExperimentConfig& cfg, RunReport& rep) {
  require_rank_one(cfg);
  const ModelSpec& m = cfg.model;
  const FixedPointResult fp = solve_fixed_point(m, 1e-12, 1.0);
  json doc;
  doc["command"] = "fixed-point";
  doc["config_hash"] = hex64(cfg.hash);
  doc["h_star"] = fp.h_star;
  doc["m_star_mean"] = fp.m_star.mean();
  doc["m_star_variance"] = fp.m_star.variance();
  doc["iterations"] = fp.iterations;
  doc["residual"] = fp.residual;
  doc["j_c"] = critical_coupling(m);
  doc["J"] = m.coupling();
  rep.checks.push_back({"fixed-point.residual", std::fabs(fp.residual) <= 1e-10,
                        "residual " + g17(fp.residual)});
  if (m.coupling() > 0.0) {
    std::vector<double> grid;
    for (int i = 1; i <= 30; ++i) grid.push_back(0.1 * i);
    const ConcavityReport ghs = ghs_concavity_check(m, grid);
    doc["ghs"] = {{"grid", ghs.grid},
                  {"second_difference", ghs.second_difference},
                  {"max_second_difference", ghs.max_second_difference},
                  {"min_mirrored", ghs.min_mirrored},
                  {"pass", ghs.pass}};
    rep.checks.push_back({"fixed-point.ghs-concavity", ghs.pass,
                          "max second difference " + g17(ghs.max_second_difference)});
  }
  const std::string p = out_path(cfg, "fixed_point.json");
  write_text(p, doc.dump(2) + "\n");
  rep.outputs.push_back(p);
}

struct CellResult {
  int n = 0;
  EntropyLevels levels;
  double w2_sq = 0.0;
  std::optional<ConstantsBundle> bundle;
};

void run_chaos_scan(const ExperimentConfig& cfg, RunReport& rep) {
  require_rank_one(cfg);
  require_n_grid(cfg);
  const ModelSpec& m = cfg.model;
  std::vector<CellResult> cells(cfg.n_grid.size());
  parallel_for(static_cast<int>(cells.size()), cfg.threads, [&](int i) {
    CellResult& c = cells[static_cast<std::size_t>(i)];
    c.n = cfg.n_grid[static_cast<std::size_t>(i)];
    const MixtureLaw law = build_mixture(m, c.n, cfg.node_count);
    EntropyOptions eo = cfg.entropy;
    eo.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c.n));
    c.levels = relative_entropy_levels(law, std::min({cfg.k_max, c.n, 8}), eo);
    const TiltedMeasure ref(m, law.reference_tilt, law.spec);
    const double w2 = wasserstein2_marginal(law, ref);
    c.w2_sq = w2 * w2;
    c.bundle = scan_bundle(m, c.n);
  });

  std::ostringstream csv;
  csv << "N,k,H_exact,H_se,W2_sq,bound_marginal,bound_conditional_sum,lambda_n,pass\n";
  bool all_ok = true;
  std::vector<std::pair<double, double>> first_level;
  for (const CellResult& c : cells) {
    const int kmax = static_cast<int>(c.levels.levels.size()) - 1;
    const bool bounded = c.bundle && c.bundle->lambda_n && *c.bundle->lambda_n > 0.0;
    double cond_sum = 0.0;
    double prev_cond = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kmax; ++k) {
      const double h = c.levels.levels[static_cast<std::size_t>(k)];
      const double cond = conditional_entropy_level(c.levels, k);
      bool ok = cond >= prev_cond - cfg.monotone_slack;
      prev_cond = cond;
      double bm = kNaN;
      double bc = kNaN;
      if (bounded) {
        bm = chaos_bound_marginal(*c.bundle, c.n, k);
        const double bck = chaos_bound_conditional(*c.bundle, c.n, k);
        cond_sum += bck;
        bc = cond_sum;
        ok = ok && h <= bm + cfg.bound_slack && cond <= bck + cfg.bound_slack;
      }
      all_ok = all_ok && ok;
      const double lam = c.bundle && c.bundle->lambda_n ? *c.bundle->lambda_n : kNaN;
      csv << c.n << ',' << k << ',' << g17(h) << ','
          << g17(c.levels.standard_errors[static_cast<std::size_t>(k)]) << ',' << g17(c.w2_sq)
          << ',' << g17(bm) << ',' << g17(bc) << ',' << g17(lam) << ',' << (ok ? 1 : 0) << '\n';
      if (k == 1) first_level.emplace_back(c.n, h);
    }
  }
  csv << csv_footer(cfg);
  const std::string p = out_path(cfg, "chaos_scan.csv");
  write_text(p, csv.str());
  rep.outputs.push_back(p);
  rep.checks.push_back({"chaos-scan.bounds-and-monotonicity", all_ok,
                        "every row passes its bound and monotonicity checks"});

  if (first_level.size() >= 3) {
    try {
      const ScalingFit fit = fit_scaling(first_level);
      json doc;
      doc["k"] = 1;
      doc["slope"] = fit.slope;
      doc["intercept"] = fit.intercept;
      doc["r_squared"] = fit.r_squared;
      json pts = json::array();
      for (const auto& [x, y] : fit.points) pts.push_back({x, y});
      doc["points"] = pts;
      doc["config_hash"] = hex64(cfg.hash);
      const std::string sp = out_path(cfg, "scaling.json");
      write_text(sp, doc.dump(2) + "\n");
      rep.outputs.push_back(sp);
      if (cfg.expected_slope) {
        const bool ok = fit.slope >= cfg.expected_slope->first &&
                        fit.slope <= cfg.expected_slope->second && fit.r_squared >= 0.999;
        rep.checks.push_back({"chaos-scan.scaling", ok,
                              "slope " + g17(fit.slope) + ", r^2 " + g17(fit.r_squared)});
      }
    } catch (const Error& e) {
      if (cfg.expected_slope) rep.checks.push_back({"chaos-scan.scaling", false, e.what()});
    }
  } else if (cfg.expected_slope) {
    rep.checks.push_back({"chaos-scan.scaling", false, "fewer than 3 grid points"});
  }
}

int auto_t1_particles(const ModelSpec& m) {
  const auto& q = m.quartic();
  const ConstantsBundle b0 = curie_weiss_constants_raw(q.theta, q.sigma, m.coupling(), 1, 1);
  for (int n = 32; n <= (1 << 16); n *= 2) {
    const ConstantsBundle b = curie_weiss_constants_raw(q.theta, q.sigma, m.coupling(), n, 1);
    if (*b.lambda_n >= 0.5 * *b0.lambda) return n;
  }
  return 1 << 16;
}

void run_verify(const ExperimentConfig& cfg, RunReport& rep) {
  require_rank_one(cfg);
  const ModelSpec& m = cfg.model;
  if (!m.is_quartic() || m.quartic().theta <= 0.0) {
    throw ConfigError("model.type", "verify needs a curie-weiss model");
  }
  if (!subcritical(m)) throw ConfigError("model.J", "verify needs 0 < J < J_c");
  const VerifySettings& v = cfg.verify;
  const double tol = cfg.scan_tolerance;
  const auto& q = m.quartic();
  const int n_t1 = v.t1_particles > 0 ? v.t1_particles : auto_t1_particles(m);
  const ConstantsBundle bundle = curie_weiss_constants_raw(q.theta, q.sigma, m.coupling(), n_t1, 1);

  json doc;
  doc["command"] = "verify";
  doc["config_hash"] = hex64(cfg.hash);
  doc["constants"] = bundle_json(bundle);
  doc["t1_particles"] = n_t1;
  std::ostringstream csv;
  csv << "check,grid,lhs,rhs,margin,pass\n";
  auto record = [&](const std::string& name, const ScanReport& r) {
    doc[name] = scan_json(r);
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      const double margin = r.rhs[i] - r.lhs[i];
      csv << name << ',' << g17(r.grid[i]) << ',' << g17(r.lhs[i]) << ',' << g17(r.rhs[i]) << ','
          << g17(margin) << ',' << (margin >= -r.tolerance ? 1 : 0) << '\n';
    }
    rep.checks.push_back({"verify." + name, r.pass, "min margin " + g17(r.min_margin)});
  };
  record("nonlinear-lsi", nonlinear_lsi_scan(m, bundle, v.lsi_grid, tol));
  record("linear-lsi", linear_lsi_scan(m, bundle, v.lsi_grid, tol));
  record("phi-positivity", phi_positivity_scan(m, v.phi_eps, v.phi_grid, tol));
  const PsiScan psi = psi_positivity_scan(m, v.psi_alpha, v.psi_m0_mean, v.psi_offsets, tol);
  doc["psi_h_star"] = psi.h_star;
  record("psi-positivity", psi.report);

  if (*bundle.lambda_n > 0.0) {
    record("marginal-t1", marginal_t1_ratio_scan(m, n_t1, bundle, v.t1_grid, std::nullopt, tol));
    const MixtureLaw law = build_mixture(m, n_t1, cfg.node_count);
    const TiltedMeasure lo_node(m, law.z_nodes.front());
    const TiltedMeasure hi_node(m, law.z_nodes.back());
    const QuantileTable qt =
        marginal_quantile_table(law, lo_node.window().lo, hi_node.window().hi);
    const BolleyVillaniReport bv = bolley_villani_moment_check(
        [&](double u) { return qt.quantile(u); }, *bundle.lambda_n, *bundle.delta_n, tol);
    doc["bolley-villani"] = {{"moment", bv.moment}, {"bound", bv.bound}, {"pass", bv.pass}};
    csv << "bolley-villani," << n_t1 << ',' << g17(bv.moment) << ',' << g17(bv.bound) << ','
        << g17(bv.bound - bv.moment) << ',' << (bv.pass ? 1 : 0) << '\n';
    rep.checks.push_back({"verify.bolley-villani", bv.pass,
                          "moment " + g17(bv.moment) + " vs " + g17(bv.bound)});
  } else {
    rep.checks.push_back({"verify.marginal-t1", false,
                          "lambda_N <= 0 at N = " + std::to_string(n_t1)});
  }
  csv << csv_footer(cfg);
  const std::string jp = out_path(cfg, "verify.json");
  const std::string cp = out_path(cfg, "verify.csv");
  write_text(jp, doc.dump(2) + "\n");
  write_text(cp, csv.str());
  rep.outputs.push_back(jp);
  rep.outputs.push_back(cp);
}

void run_jw(const ExperimentConfig& cfg, RunReport& rep) {
  require_rank_one(cfg);
  require_n_grid(cfg);
  const ModelSpec& m = cfg.model;
  if (!subcritical(m)) throw ConfigError("model.J", "jw needs 0 < J < J_c");
  const double j = m.coupling();
  const double jc = critical_coupling(m);
  const double eps = 0.5 * std::min(jc / j - 1.0, 1.0);
  const double var = TiltedMeasure(m, j * solve_fixed_point(m, 1e-12, 0.0).h_star).variance();
  const double rhs = jw_rhs(eps, j, var);
  const bool gaussian = m.is_gaussian_oracle();
  const double exact = gaussian ? -0.5 * std::log1p(-j / m.quartic().sigma) : kNaN;

  std::vector<double> values(cfg.n_grid.size());
  parallel_for(static_cast<int>(values.size()), cfg.threads, [&](int i) {
    values[static_cast<std::size_t>(i)] = jw_log_mgf(m, cfg.n_grid[static_cast<std::size_t>(i)]);
  });
  std::ostringstream csv;
  csv << "N,log_mgf,rhs,gaussian_exact,pass\n";
  bool all_ok = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    bool ok = values[i] <= rhs + cfg.scan_tolerance;
    if (gaussian) ok = ok && std::fabs(values[i] - exact) <= 1e-8;
    all_ok = all_ok && ok;
    csv << cfg.n_grid[i] << ',' << g17(values[i]) << ',' << g17(rhs) << ',' << g17(exact) << ','
        << (ok ? 1 : 0) << '\n';
  }
  csv << csv_footer(cfg);
  const std::string p = out_path(cfg, "jw.csv");
  write_text(p, csv.str());
  rep.outputs.push_back(p);
  rep.checks.push_back({"jw.log-mgf-bound", all_ok, "rhs " + g17(rhs)});
}

void run_sample(const ExperimentConfig& cfg, RunReport& rep) {
  const ModelSpec& m = cfg.model;
  ChainConfig chain = cfg.sample.chain;
  chain.seed = cfg.seed;
  if (cfg.sample.tune) chain.step_size = tune_step_size(m, chain, cfg.sample.target_acceptance);
  const SampleBatch batch = run_chains(m, chain, cfg.sample.n_chains, cfg.threads);
  const std::string bp = out_path(cfg, "samples.bin");
  write_sample_batch(bp, batch);
  rep.outputs.push_back(bp);
  rep.outputs.push_back(bp + ".json");

  const std::size_t rows = batch.draws.rows;
  const std::size_t n = batch.draws.cols;
  std::vector<double> means(rows);
  std::vector<double> squares(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    double s2 = 0.0;
    for (double x : batch.draws.row(r)) {
      s += x;
      s2 += x * x;
    }
    means[r] = s / static_cast<double>(n);
    squares[r] = s2 / static_cast<double>(n);
  }
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    mean += means[r];
    second += squares[r];
  }
  mean /= static_cast<double>(rows);
  second /= static_cast<double>(rows);
  const int batches = rows >= 100 ? 50 : 2;
  json doc;
  doc["command"] = "sample";
  doc["config_hash"] = hex64(cfg.hash);
  doc["step_size"] = chain.step_size;
  doc["acceptance_rate"] = batch.acceptance_rate;
  doc["n_rows"] = rows;
  doc["coordinate_mean"] = mean;
  doc["coordinate_mean_se"] = batch_means_standard_error(means, batches);
  doc["coordinate_second_moment"] = second;
  doc["coordinate_second_moment_se"] = batch_means_standard_error(squares, batches);
  const std::string sp = out_path(cfg, "sample_summary.json");
  write_text(sp, doc.dump(2) + "\n");
  rep.outputs.push_back(sp);
  if (chain.algorithm == SamplerAlgorithm::Mala) {
    const bool ok = batch.acceptance_rate > 0.05;
    rep.checks.push_back({"sample.acceptance", ok, "rate " + g17(batch.acceptance_rate)});
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");

  ExperimentConfig cfg;
  cfg.command = as_string(require(doc, "command", ""), "command");
  static const char* kCommands[] = {"constants", "fixed-point", "chaos-scan",
                                    "verify",    "sample",      "jw"};
  if (std::find(std::begin(kCommands), std::end(kCommands), cfg.command) == std::end(kCommands)) {
    throw ConfigError("command", "unknown command '" + cfg.command + "'");
  }
  cfg.model = parse_model(require(doc, "model", ""));

  if (doc.contains("n_grid")) {
    const json& g = doc.at("n_grid");
    if (!g.is_array()) throw ConfigError("n_grid", "expected an array of integers");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string p = "n_grid[" + std::to_string(i) + "]";
      const auto n = as_int(g[i], p);
      if (n < 1 || n > (1 << 24)) throw ConfigError(p, "N must lie in [1, 2^24]");
      cfg.n_grid.push_back(static_cast<int>(n));
    }
    if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end())) {
      throw ConfigError("n_grid", "must be sorted ascending");
    }
  }
  if (cfg.command == "chaos-scan" || cfg.command == "jw" || cfg.command == "constants") {
    if (!doc.contains("n_grid") || cfg.n_grid.empty()) {
      throw ConfigError("n_grid", "required field is missing");
    }
  }
  cfg.k_max = static_cast<int>(int_or(doc, "k_max", "", 4));
  if (cfg.k_max < 1) throw ConfigError("k_max", "must be >= 1");
  const std::int64_t seed = int_or(doc, "seed", "", 1);
  if (seed < 0) throw ConfigError("seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (doc.contains("output_dir")) cfg.output_dir = as_string(doc.at("output_dir"), "output_dir");
  cfg.threads = static_cast<int>(int_or(doc, "threads", "", 1));
  if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");
  cfg.node_count = static_cast<int>(int_or(doc, "node_count", "", 257));
  if (cfg.node_count < 32) throw ConfigError("node_count", "must be >= 32");

  if (doc.contains("entropy")) {
    const json& e = doc.at("entropy");
    if (e.contains("method")) {
      const std::string method = as_string(e.at("method"), "entropy.method");
      if (method == "exact-grid") {
        cfg.entropy.method = EntropyMethod::ExactGrid;
      } else if (method == "monte-carlo") {
        cfg.entropy.method = EntropyMethod::MonteCarlo;
      } else {
        throw ConfigError("entropy.method", "expected exact-grid or monte-carlo");
      }
    }
    cfg.entropy.grid_points =
        static_cast<std::size_t>(int_or(e, "grid_points", "entropy", 4096));
    cfg.entropy.grid_sd = real_or(e, "grid_sd", "entropy", 12.0);
    cfg.entropy.mc_samples =
        static_cast<std::size_t>(int_or(e, "mc_samples", "entropy", 1000000));
  }
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    cfg.bound_slack = real_or(t, "bound_slack", "tolerances", cfg.bound_slack);
    cfg.monotone_slack = real_or(t, "monotone_slack", "tolerances", cfg.monotone_slack);
    cfg.scan_tolerance = real_or(t, "scan", "tolerances", cfg.scan_tolerance);
  }
  if (doc.contains("expected_slope")) {
    const auto band = reals_or(doc, "expected_slope", "", {});
    if (band.size() != 2 || band[0] > band[1]) {
      throw ConfigError("expected_slope", "expected [low, high]");
    }
    cfg.expected_slope = std::make_pair(band[0], band[1]);
  }

  const json vb = doc.contains("verify") ? doc.at("verify") : json::object();
  VerifySettings& v = cfg.verify;
  v.lsi_grid = reals_or(vb, "lsi_grid", "verify", symmetric_grid(0.01, 5.0, 12));
  v.phi_grid = reals_or(vb, "phi_grid", "verify", symmetric_grid(0.01, 3.0, 12));
  v.psi_offsets = reals_or(vb, "psi_offsets", "verify", symmetric_grid(0.01, 3.0, 12));
  v.psi_alpha = real_or(vb, "psi_alpha", "verify", 0.0);
  v.psi_m0_mean = real_or(vb, "psi_m0_mean", "verify", 0.0);
  if (vb.contains("phi_eps")) v.phi_eps = as_real(vb.at("phi_eps"), "verify.phi_eps");
  v.t1_grid = reals_or(vb, "t1_grid", "verify", {-2.0, -1.0, -0.25, 0.0, 0.25, 1.0, 2.0});
  v.t1_particles = static_cast<int>(int_or(vb, "t1_particles", "verify", 0));

  if (cfg.command == "sample") {
    const json& s = require(doc, "sample", "");
    ChainConfig& c = cfg.sample.chain;
    c.n_particles = static_cast<int>(as_int(require(s, "n_particles", "sample"), "sample.n_particles"));
    c.n_steps = as_int(require(s, "n_steps", "sample"), "sample.n_steps");
    c.burn_in = int_or(s, "burn_in", "sample", c.n_steps / 10);
    c.thinning = int_or(s, "thinning", "sample", 1);
    c.step_size = real_or(s, "step_size", "sample", 0.05);
    c.energy_ceiling = real_or(s, "energy_ceiling", "sample", 1e8);
    if (s.contains("algorithm")) {
      const std::string a = as_string(s.at("algorithm"), "sample.algorithm");
      if (a != "mala" && a != "ula") throw ConfigError("sample.algorithm", "expected mala or ula");
      c.algorithm = sampler_algorithm_from_string(a);
    }
    if (s.contains("tune")) {
      if (!s.at("tune").is_boolean()) throw ConfigError("sample.tune", "expected a boolean");
      cfg.sample.tune = s.at("tune").get<bool>();
    }
    cfg.sample.target_acceptance = real_or(s, "target_acceptance", "sample", 0.574);
    cfg.sample.n_chains = static_cast<int>(int_or(s, "n_chains", "sample", 1));
    try {
      c.validate();
    } catch (const Error& e) {
      throw ConfigError("sample", e.what());
    }
    if (cfg.sample.n_chains < 1) throw ConfigError("sample.n_chains", "must be >= 1");
  }

  json hashed = doc;
  hashed.erase("output_dir");
  hashed.erase("threads");
  cfg.hash = fnv1a64(hashed.dump());
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) fail(ErrorCode::InvalidArgument, "fit_scaling needs at least 3 points");
  ScalingFit fit;
  for (const auto& [n, h] : points) {
    if (!(h > 0.0)) fail(ErrorCode::DegenerateInput, "fit_scaling needs H > 0 everywhere");
    if (!(n > 0.0)) fail(ErrorCode::DegenerateInput, "fit_scaling needs N > 0 everywhere");
    fit.points.emplace_back(std::log(n), std::log(h));
  }
  const double m = static_cast<double>(fit.points.size());
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::DegenerateInput, "fit_scaling needs distinct N values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["pass"] = all_passed();
  json cs = json::array();
  for (const auto& c : checks) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = cs;
  j["outputs"] = outputs;
  return j.dump(2);
}

RunReport run(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  RunReport rep;
  rep.command = cfg.command;
  if (cfg.command == "constants") {
    run_constants(cfg, rep);
  } else if (cfg.command == "fixed-point") {
    run_fixed_point(cfg, rep);
  } else if (cfg.command == "chaos-scan") {
    run_chaos_scan(cfg, rep);
  } else if (cfg.command == "verify") {
    run_verify(cfg, rep);
  } else if (cfg.command == "jw") {
    run_jw(cfg, rep);
  } else if (cfg.command == "sample") {
    run_sample(cfg, rep);
  } else {
    throw ConfigError("command", "unknown command '" + cfg.command + "'");
  }
  return rep;
}

}  // namespace chaoslab
