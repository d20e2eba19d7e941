#include "chaoslab/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "chaoslab/errors.hpp"

namespace chaoslab {
namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478226, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Segment {
  double a;
  double b;
  double value;
  double error;
  double roundoff;
  bool operator<(const Segment& o) const { return error < o.error; }
};

double checked(const RealFn& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    fail(ErrorCode::NonFinite, "integrand is not finite at x = " + std::to_string(x));
  }
  return v;
}

Segment gk21(const RealFn& f, double a, double b) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double dhlgth = std::fabs(hlgth);

  const double fc = checked(f, centr);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::fabs(resk);
  std::array<double, 10> fv1{};
  std::array<double, 10> fv2{};
  for (int j = 0; j < 10; ++j) {
    const double absc = hlgth * kXgk[j];
    const double f1 = checked(f, centr - absc);
    const double f2 = checked(f, centr + absc);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[10] * std::fabs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  }
  const double result = resk * hlgth;
  resabs *= dhlgth;
  resasc *= dhlgth;
  double abserr = std::fabs((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) {
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  }
  const double roundoff = 50.0 * kEps * resabs;
  abserr = std::max(abserr, roundoff);
  return {a, b, result, abserr, roundoff};
}

double adaptive(const RealFn& f, double lo, double hi, const QuadratureSpec& spec,
                int initial_pieces) {
  if (lo == hi) return 0.0;
  initial_pieces = std::max(1, std::min(initial_pieces, spec.max_subdivisions));
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  double total_round = 0.0;
  const double width = (hi - lo) / initial_pieces;
  for (int i = 0; i < initial_pieces; ++i) {
    const double a = lo + width * i;
    const double b = (i + 1 == initial_pieces) ? hi : lo + width * (i + 1);
    Segment s = gk21(f, a, b);
    total += s.value;
    total_err += s.error;
    total_round += s.roundoff;
    heap.push(s);
  }
  int count = initial_pieces;
  auto done = [&] {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(total));
    return total_err <= tol || total_err <= 2.0 * total_round;
  };
  while (!done()) {
    if (count >= spec.max_subdivisions) {
      fail(ErrorCode::NonConvergent,
           "quadrature did not reach tolerance within " +
               std::to_string(spec.max_subdivisions) + " subintervals (error estimate " +
               std::to_string(total_err) + ")");
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk21(f, worst.a, mid);
    Segment right = gk21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_round += left.roundoff + right.roundoff - worst.roundoff;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum in a fixed order so the result does not carry incremental drift.
  std::vector<Segment> parts;
  parts.reserve(heap.size());
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  double sum = 0.0;
  for (const Segment& s : parts) sum += s.value;
  return sum;
}

constexpr int kSamplesPerSegment = 32;
constexpr int kMaxDoublings = 60;

// Shared doubling search. `value` returns a quantity compared on a linear
// (log_domain = false) or logarithmic scale.
Window search_window(const RealFn& value, const QuadratureSpec& spec, bool log_domain) {
  spec.validate();
  const double c = spec.center;
  double wl = spec.initial_half_width;
  double wr = spec.initial_half_width;
  const double log_thr = std::log(spec.truncation_threshold);

  std::vector<std::pair<double, double>> samples;
  double peak = log_domain ? -std::numeric_limits<double>::infinity() : 0.0;
  auto take = [&](double a, double b, bool include_a) {
    for (int i = include_a ? 0 : 1; i <= kSamplesPerSegment; ++i) {
      const double x = a + (b - a) * i / kSamplesPerSegment;
      double v = value(x);
      if (std::isnan(v) || (!log_domain && !std::isfinite(v)) ||
          (log_domain && v == std::numeric_limits<double>::infinity())) {
        fail(ErrorCode::NonFinite, "integrand is not finite at x = " + std::to_string(x));
      }
      if (!log_domain) v = std::fabs(v);
      peak = std::max(peak, v);
      samples.emplace_back(x, v);
    }
  };
  auto small = [&](double v) {
    if (log_domain) return v == -std::numeric_limits<double>::infinity() || v <= peak + log_thr;
    return v <= spec.truncation_threshold * peak;
  };

  take(c - wl, c, true);
  take(c, c + wr, false);
  double fl = samples.front().second;
  double fr = samples.back().second;
  for (int it = 0;; ++it) {
    const bool has_peak = log_domain ? std::isfinite(peak) : peak > 0.0;
    const bool left_ok = has_peak && small(fl);
    const bool right_ok = has_peak && small(fr);
    if (left_ok && right_ok) break;
    if (it >= kMaxDoublings) {
      fail(ErrorCode::DivergentIntegral,
           "integration window did not close after " + std::to_string(kMaxDoublings) +
               " doublings");
    }
    if (!left_ok) {
      const double a = c - 2.0 * wl;
      const std::size_t before = samples.size();
      take(a, c - wl, true);
      samples.pop_back();  // c - wl was sampled already
      fl = samples[before].second;
      wl *= 2.0;
    }
    if (!right_ok) {
      take(c + wr, c + 2.0 * wr, false);
      fr = samples.back().second;
      wr *= 2.0;
    }
  }

  std::sort(samples.begin(), samples.end());
  // Trim to the sampled support, keeping one negligible sample on each side.
  std::size_t first = 0;
  while (first + 1 < samples.size() && small(samples[first + 1].second)) ++first;
  std::size_t last = samples.size() - 1;
  while (last > first + 1 && small(samples[last - 1].second)) --last;
  return {samples[first].first, samples[last].first, peak};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0)) fail(ErrorCode::InvalidArgument, "abs_tol must be positive");
  if (!(rel_tol > 0.0)) fail(ErrorCode::InvalidArgument, "rel_tol must be positive");
  if (max_subdivisions < 1) fail(ErrorCode::InvalidArgument, "max_subdivisions must be >= 1");
  if (!(truncation_threshold > 0.0 && truncation_threshold <= 1e-6)) {
    fail(ErrorCode::InvalidArgument, "truncation_threshold must lie in (0, 1e-6]");
  }
  if (!(initial_half_width > 0.0) || !std::isfinite(center)) {
    fail(ErrorCode::InvalidArgument, "initial window must be finite with positive width");
  }
}

Window find_window(const RealFn& f, const QuadratureSpec& spec) {
  return search_window(f, spec, false);
}

Window find_log_window(const RealFn& log_f, const QuadratureSpec& spec) {
  return search_window(log_f, spec, true);
}

double integrate_interval(const RealFn& f, double lo, double hi, const QuadratureSpec& spec) {
  spec.validate();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::InvalidArgument, "integration bounds must be finite");
  }
  return adaptive(f, lo, hi, spec, 1);
}

double integrate(const RealFn& f, const QuadratureSpec& spec) {
  const Window w = find_window(f, spec);
  if (w.peak == 0.0) return 0.0;
  return adaptive(f, w.lo, w.hi, spec, 8);
}

double integrate_on(const RealFn& f, const Window& window, const QuadratureSpec& spec) {
  spec.validate();
  return adaptive(f, window.lo, window.hi, spec, 8);
}

double log_integrate_exp_on(const RealFn& log_f, const Window& window,
                            const QuadratureSpec& spec) {
  const double shift = window.peak;
  const RealFn g = [&](double x) {
    const double v = log_f(x);
    if (std::isnan(v)) fail(ErrorCode::NonFinite, "log integrand is NaN");
    return std::exp(v - shift);
  };
  const double mass = adaptive(g, window.lo, window.hi, spec, 8);
  if (!(mass > 0.0)) fail(ErrorCode::NonFinite, "log integral of a vanishing integrand");
  return shift + std::log(mass);
}

double log_integrate_exp(const RealFn& log_f, const QuadratureSpec& spec) {
  return log_integrate_exp_on(log_f, find_log_window(log_f, spec), spec);
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "Gauss-Legendre order must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double GridDensity::mass() const {
  const std::size_t n = values.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += values[i];
  s -= 0.5 * (values.front() + values.back());
  return s * spacing();
}

double GridDensity::mean() const {
  const std::size_t n = values.size();
  double s = 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    s += w * values[i];
    m += w * values[i] * x(i);
  }
  return m / s;
}

void GridDensity::normalize() {
  const double m = mass();
  if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorCode::NonFinite, "grid density has no mass");
  for (double& v : values) v /= m;
}

void GridDensity::validate() const {
  if (!(hi > lo)) fail(ErrorCode::InvalidArgument, "grid requires hi > lo");
  if (values.size() < 2) fail(ErrorCode::InvalidArgument, "grid requires at least 2 points");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::InvalidArgument, "grid density values must be finite and non-negative");
    }
  }
}

GridDensity GridDensity::sample(const RealFn& density, double lo, double hi,
                                std::size_t n_points) {
  GridDensity g;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(n_points);
  g.validate();
  for (std::size_t i = 0; i < n_points; ++i) g.values[i] = density(g.x(i));
  g.validate();
  return g;
}

GridDensity convolve(const GridDensity& p, const GridDensity& q) {
  p.validate();
  q.validate();
  const double hp = p.spacing();
  const double hq = q.spacing();
  if (std::fabs(hp - hq) > 1e-12 * std::max(hp, hq)) {
    fail(ErrorCode::GridMismatch, "convolution grids have different spacings");
  }
  const std::size_t n = p.values.size();
  const std::size_t m = q.values.size();
  GridDensity r;
  r.lo = p.lo + q.lo;
  r.hi = p.hi + q.hi;
  r.values.assign(n + m - 1, 0.0);
  const double* pv = p.values.data();
  const double* qv = q.values.data();
  double* rv = r.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = pv[i];
    if (a == 0.0) continue;
    double* out = rv + i;
    for (std::size_t j = 0; j < m; ++j) out[j] += a * qv[j];
  }
  for (double& v : r.values) v *= hp;
  r.normalize();
  return r;
}

double find_root(const RealFn& g, std::pair<double, double> bracket, double tol) {
  double a = std::min(bracket.first, bracket.second);
  double b = std::max(bracket.first, bracket.second);
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "root tolerance must be positive");
  double fa = g(a);
  double fb = g(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    fail(ErrorCode::NonFinite, "root function is not finite at the bracket ends");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    fail(ErrorCode::NoSignChange, "no sign change on [" + std::to_string(a) + ", " +
                                      std::to_string(b) + "]");
  }
  int side = 0;
  bool bisect_next = false;
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    const double width = b - a;
    double c;
    if (bisect_next) {
      c = 0.5 * (a + b);
    } else {
      c = (a * fb - b * fa) / (fb - fa);
      if (!(c > a && c < b)) c = 0.5 * (a + b);
    }
    const double fc = g(c);
    if (!std::isfinite(fc)) fail(ErrorCode::NonFinite, "root function is not finite");
    if (fc == 0.0) return c;
    if ((fc > 0.0) == (fa > 0.0)) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;  // Illinois modification
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    bisect_next = (b - a) > 0.5 * width;
  }
  if ((b - a) > tol && (b - a) > 4.0 * kEps * std::max(std::fabs(a), std::fabs(b))) {
    fail(ErrorCode::NonConvergent, "root bracket did not shrink to tolerance");
  }
  return 0.5 * (a + b);
}

std::pair<double, double> expand_bracket(const RealFn& g, double lo, double hi,
                                         int max_doublings) {
  if (!(hi > lo)) fail(ErrorCode::InvalidArgument, "bracket requires hi > lo");
  double flo = g(lo);
  double fhi = g(hi);
  for (int it = 0; it < max_doublings; ++it) {
    if (flo == 0.0 || fhi == 0.0 || (flo > 0.0) != (fhi > 0.0)) return {lo, hi};
    const double w = hi - lo;
    lo -= w;
    hi += w;
    flo = g(lo);
    fhi = g(hi);
  }
  if (flo == 0.0 || fhi == 0.0 || (flo > 0.0) != (fhi > 0.0)) return {lo, hi};
  fail(ErrorCode::NoSignChange, "could not bracket a sign change");
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::InvalidArgument, "normal_quantile needs u in (0, 1)");
  // Acklam's rational approximation, then two Halley steps.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double p = std::min(u, 1.0 - u);
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // x now approximates the lower-tail quantile of p <= 1/2
  for (int it = 0; it < 2; ++it) {
    const double e = normal_cdf(x) - p;
    const double step = e / normal_pdf(x);
    x -= step / (1.0 + 0.5 * x * step);
  }
  return u <= 0.5 ? x : -x;
}

}  // namespace chaoslab
