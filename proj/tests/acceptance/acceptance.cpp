// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "chaoslab/bounds.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/experiment.hpp"
#include "chaoslab/marginals.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/metrics.hpp"
#include "chaoslab/sampler.hpp"
#include "chaoslab/verify.hpp"

using namespace chaoslab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  criterion %2d  %-36s  %s  [%.1f s]\n", o.pass ? "PASS" : "FAIL", id,
              title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double jc() {
  static const double v = critical_coupling(curie_weiss_model(1.0, 1.0, 1.0));
  return v;
}

ModelSpec cw(double frac) { return curie_weiss_model(1.0, 1.0, frac * jc()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Entropy levels of the criterion-3 scan, shared by criteria 3 to 5.
struct ScanCell {
  int n;
  EntropyLevels levels;
};

const std::vector<ScanCell>& scan_cells() {
  static const std::vector<ScanCell> cells = [] {
    std::vector<ScanCell> out;
    for (int n : {8, 16, 32, 64, 128}) {
      out.push_back({n, relative_entropy_levels(build_mixture(cw(0.5), n), 4)});
    }
    return out;
  }();
  return cells;
}

Outcome gaussian_oracle() {
  const ModelSpec g = gaussian_model(1.0, 0.5);
  double worst = 0.0;
  for (int n : {4, 8, 16, 32, 64}) {
    const EntropyLevels lv = relative_entropy_levels(build_mixture(g, n), 2);
    for (int k = 1; k <= 2; ++k) {
      worst = std::max(worst, std::fabs(lv.levels[k] - gaussian_entropy_oracle(1.0, 0.5, n, k)));
    }
  }
  return {worst <= 1e-6, fmt("max abs error %.2e", worst)};
}

// Direct tensor quadrature of the N-particle density and its marginals.
Outcome brute_force_marginals() {
  const double j = 0.5 * jc();
  constexpr double kL = 7.0;
  constexpr int kCells = 400;
  const double h = 2.0 * kL / kCells;
  std::vector<double> xs(kCells + 1);
  std::vector<double> ws(kCells + 1);
  for (int i = 0; i <= kCells; ++i) {
    xs[i] = -kL + h * i;
    ws[i] = (i == 0 || i == kCells ? 1.0 : (i % 2 ? 4.0 : 2.0)) * h / 3.0;
  }
  auto log_joint = [&](const std::vector<double>& x) {
    double s = 0.0;
    double v = 0.0;
    for (double xi : x) {
      s += xi;
      v += oracle::quartic_v(1.0, 1.0, xi);
    }
    return -v + j * s * s / (2.0 * static_cast<double>(x.size()));
  };
  // Integrates exp(log_joint) over the trailing `free` coordinates.
  std::function<double(std::vector<double>&, int)> integrate_tail = [&](std::vector<double>& x,
                                                                       int free) -> double {
    if (free == 0) return std::exp(log_joint(x));
    const std::size_t slot = x.size() - static_cast<std::size_t>(free);
    double acc = 0.0;
    for (int i = 0; i <= kCells; ++i) {
      x[slot] = xs[i];
      acc += ws[i] * integrate_tail(x, free - 1);
    }
    return acc;
  };

  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> probe(-2.0, 2.0);
  double worst = 0.0;
  int probes = 0;
  for (int n : {2, 3}) {
    const MixtureLaw law = build_mixture(cw(0.5), n);
    std::vector<double> x(n, 0.0);
    const double log_z = std::log(integrate_tail(x, n));
    for (int p = 0; p < 20; ++p) {
      for (int k = 1; k <= n; ++k) {
        std::vector<double> y(n, 0.0);
        for (int i = 0; i < k; ++i) y[i] = probe(gen);
        const double ref = std::log(integrate_tail(y, n - k)) - log_z;
        const double got = marginal_log_density(law, k, std::span<const double>(y.data(), k));
        worst = std::max(worst, std::fabs(got - ref));
        ++probes;
      }
    }
  }
  return {worst <= 1e-6, fmt("max abs log-density error %.2e over %g probes", worst, probes)};
}

Outcome chaos_scaling() {
  std::vector<std::pair<double, double>> pts;
  for (const ScanCell& c : scan_cells()) pts.emplace_back(c.n, c.levels.levels[1]);
  const ScalingFit fit = fit_scaling(pts);
  const EntropyLevels& top = scan_cells().back().levels;
  double lo = 1e300;
  double hi = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const double r = top.levels[k] / (k * k);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const bool ok = fit.slope >= -2.2 && fit.slope <= -1.8 && fit.r_squared >= 0.999 && hi < 2.0 * lo;
  return {ok, fmt("slope %.4f, r^2 %.6f", fit.slope, fit.r_squared) +
                  fmt(", H_k/k^2 spread %.3f at N = %g", hi / lo, 128)};
}

Outcome bound_validity() {
  int active = 0;
  double worst_ratio = 0.0;
  bool ok = true;
  for (const ScanCell& c : scan_cells()) {
    const ConstantsBundle b = curie_weiss_constants_raw(1.0, 1.0, 0.5 * jc(), c.n, 1);
    if (!(*b.lambda_n > 0.0)) continue;
    for (int k = 1; k <= 4; ++k) {
      ++active;
      const double h = c.levels.levels[k];
      const double hc = conditional_entropy_level(c.levels, k);
      const double bm = chaos_bound_marginal(b, c.n, k);
      const double bc = chaos_bound_conditional(b, c.n, k);
      ok = ok && h <= bm + 1e-12 && hc <= bc + 1e-12;
      worst_ratio = std::max({worst_ratio, h / bm, hc / bc});
    }
  }
  return {ok && active > 0,
          fmt("%g active cells, largest entropy/bound ratio %.2e", active, worst_ratio)};
}

Outcome hierarchy_monotone() {
  double worst = 1e300;  // smallest increment seen
  int laws = 0;
  auto scan = [&](const EntropyLevels& lv) {
    ++laws;
    for (int k = 2; k < static_cast<int>(lv.levels.size()); ++k) {
      worst = std::min(worst, conditional_entropy_level(lv, k) - conditional_entropy_level(lv, k - 1));
    }
  };
  for (const ScanCell& c : scan_cells()) scan(c.levels);
  for (double frac : {0.3, 0.6, 0.9}) {
    for (int n : {8, 32, 128}) scan(relative_entropy_levels(build_mixture(cw(frac), n), 4));
  }
  for (int n : {4, 16, 64}) scan(relative_entropy_levels(build_mixture(gaussian_model(1.0, 0.5), n), 4));
  return {worst >= -1e-10, fmt("%g laws, smallest increment %.2e", laws, worst)};
}

Outcome jw_corollary() {
  const double j = 0.5 * jc();
  const double eps = 0.5 * std::min(jc() / j - 1.0, 1.0);
  const double rhs = jw_rhs(eps, j, 1.0 / jc());
  bool ok = true;
  double largest = 0.0;
  for (int n : {16, 64, 256}) {
    const double v = jw_log_mgf(cw(0.5), n);
    largest = std::max(largest, v);
    ok = ok && v <= rhs + 1e-9;
  }
  const double g = jw_log_mgf(gaussian_model(1.0, 0.5), 16);
  const double gerr = std::fabs(g + 0.5 * std::log(0.5));
  ok = ok && gerr <= 1e-8;
  return {ok, fmt("max log-MGF %.6f vs rhs %.3f", largest, rhs) + fmt(", Gaussian error %.1e", gerr)};
}

Outcome proof_algebra() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lu(-4.0, 4.0);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double rho = std::pow(10.0, lu(gen));
    const double gamma = std::pow(10.0, lu(gen));
    const double m = std::pow(10.0, lu(gen));
    for (int n : {10, 100}) {
      if (!verify_upper_solution(rho, gamma, m, n).pass) ++bad;
    }
  }
  int lemma_bad = 0;
  for (double alpha : {0.0, 0.125, 0.25, 0.5}) {
    for (int n = 2; n <= 1024; ++n) {
      if (!lemma51_coefficient_check(n, alpha).pass) ++lemma_bad;
    }
  }
  return {bad == 0 && lemma_bad == 0,
          fmt("%g upper-solution failures, %g coefficient failures", bad, lemma_bad)};
}

Outcome inequality_scans(const fs::path& root) {
  std::string detail;
  bool ok = true;
  for (double frac : {0.3, 0.6, 0.9}) {
    std::ostringstream text;
    text.precision(17);
    text << R"({"command":"verify","model":{"type":"curie-weiss","theta":1,"sigma":1,"J_fraction":)"
         << frac << "}}";
    ExperimentConfig cfg = parse_config(text.str());
    cfg.output_dir = (root / ("verify_" + std::to_string(static_cast<int>(frac * 10)))).string();
    const RunReport r = run(cfg);
    int passed = 0;
    for (const CheckResult& c : r.checks) {
      if (c.pass) {
        ++passed;
      } else {
        ok = false;
        detail += " " + c.name + "@" + fmt("%.1f", frac);
      }
    }
    detail += fmt(" %.1fJc:%g", frac, passed) + "/" + std::to_string(r.checks.size());
    ok = ok && r.checks.size() == 6;
  }
  return {ok, detail.substr(1)};
}

Outcome sampler_consistency() {
  const ModelSpec m = cw(0.5);
  constexpr int kN = 32;
  ChainConfig c;
  c.n_particles = kN;
  c.step_size = 0.1;
  c.burn_in = 20000;
  c.n_steps = 1000000 + c.burn_in;
  c.thinning = 1;
  c.seed = 314;
  c.step_size = tune_step_size(m, c, 0.574);

  std::vector<double> mean_series;
  std::vector<double> second_series;
  Matrix rotating(1000000, 1);
  std::size_t t = 0;
  run_chain_streaming(m, c, [&](std::span<const double> x) {
    double s = 0.0;
    double s2 = 0.0;
    for (double v : x) {
      s += v;
      s2 += v * v;
    }
    mean_series.push_back(s / kN);
    second_series.push_back(s2 / kN);
    rotating.data[t] = x[t % kN];
    ++t;
  });
  if (t != 1000000) return {false, "unexpected draw count"};

  const MixtureLaw law = build_mixture(m, kN);
  double exact_second = 0.0;
  for (std::size_t i = 0; i < law.z_nodes.size(); ++i) {
    exact_second += std::exp(law.z_log_weights[i]) * TiltedMeasure(m, law.per_node_tilt[i]).moment(2);
  }
  auto avg = [](const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a += x;
    return a / static_cast<double>(v.size());
  };
  const double mean = avg(mean_series);
  const double mean_se = batch_means_standard_error(mean_series);
  const double second = avg(second_series);
  const double second_se = batch_means_standard_error(second_series);
  // The exact coordinate mean is zero, so the variance is the second moment.
  const bool mean_ok = std::fabs(mean) <= 3.0 * mean_se;
  const bool var_ok = std::fabs(second - exact_second) <= 3.0 * second_se;

  const Matrix exact = sample_marginal(law, 1, 1000000, 2718);
  const DivergenceEstimate kl = kl_knn(rotating, exact);
  const bool kl_ok = kl.value < 0.01 + 3.0 * kl.standard_error;
  return {mean_ok && var_ok && kl_ok,
          fmt("step %.4f, mean %.2e", c.step_size, mean) + fmt(" (se %.1e), var %.5f", mean_se, second) +
              fmt(" vs %.5f", exact_second) + fmt(" (se %.1e), kNN KL %.4f", second_se, kl.value) +
              fmt(" (se %.4f)", kl.standard_error)};
}

Outcome determinism(const fs::path& root) {
  const std::vector<std::string> configs = {
      R"({"command":"chaos-scan","model":{"type":"curie-weiss","theta":1,"sigma":1,"J_fraction":0.5},"n_grid":[8,16,32,64],"k_max":4,"seed":5})",
      R"({"command":"chaos-scan","model":{"type":"curie-weiss","theta":1,"sigma":1,"J_fraction":0.5},"n_grid":[8,16,32],"k_max":5,"seed":5,"entropy":{"method":"monte-carlo","mc_samples":20000}})",
      R"({"command":"verify","model":{"type":"curie-weiss","theta":1,"sigma":1,"J_fraction":0.6}})",
      R"({"command":"jw","model":{"type":"curie-weiss","theta":1,"sigma":1,"J_fraction":0.5},"n_grid":[16,64,256]})",
      R"({"command":"sample","model":{"type":"curie-weiss","theta":1,"sigma":1,"J_fraction":0.5},"seed":9,"sample":{"n_particles":16,"n_steps":20000,"burn_in":2000,"tune":true,"n_chains":2}})",
  };
  int compared = 0;
  std::string bad;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (int rep = 0; rep < 2; ++rep) {
      ExperimentConfig cfg = parse_config(configs[i]);
      cfg.output_dir = (root / ("det_" + std::to_string(i) + "_" + std::to_string(rep))).string();
      cfg.threads = rep == 0 ? 1 : 4;
      run(cfg);
    }
    const fs::path a = root / ("det_" + std::to_string(i) + "_0");
    const fs::path b = root / ("det_" + std::to_string(i) + "_1");
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string ext = entry.path().extension().string();
      if (ext != ".csv" && ext != ".bin") continue;
      ++compared;
      const std::string name = entry.path().filename().string();
      if (slurp(entry.path()) != slurp(b / name)) bad += " " + name;
    }
  }
  return {bad.empty() && compared >= 5,
          bad.empty() ? fmt("%g output files identical across reruns (1 vs 4 threads)", compared)
                      : "differs:" + bad};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "chaoslab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  report(1, "Gaussian oracle equivalence", gaussian_oracle);
  report(2, "brute-force marginal equivalence", brute_force_marginals);
  report(3, "sharp chaos scaling", chaos_scaling);
  report(4, "bound validity", bound_validity);
  report(5, "hierarchy monotonicity", hierarchy_monotone);
  report(6, "log-MGF corollary", jw_corollary);
  report(7, "proof-internal algebra", proof_algebra);
  report(8, "inequality scans", [&] { return inequality_scans(root); });
  report(9, "sampler consistency", sampler_consistency);
  report(10, "determinism", [&] { return determinism(root); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
