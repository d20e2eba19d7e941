#include "chaoslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include "chaoslab/errors.hpp"

namespace chaoslab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Fnv1a {
  std::uint64_t h = 14695981039346656037ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  void real(double x) { bytes(&x, sizeof x); }
  void integer(std::int64_t x) { bytes(&x, sizeof x); }
};

}  // namespace

const char* to_string(ModelFamily family) noexcept {
  switch (family) {
    case ModelFamily::CurieWeiss: return "curie-weiss";
    case ModelFamily::Gaussian: return "gaussian";
    case ModelFamily::Coulomb: return "coulomb";
    case ModelFamily::Custom: return "custom";
  }
  return "custom";
}

double ModelSpec::v(double x) const {
  return std::visit(Overloaded{
                        [x](const QuarticConfinement& q) {
                          const double x2 = x * x;
                          return 0.25 * q.theta * x2 * x2 + 0.5 * q.sigma * x2;
                        },
                        [x](const GeneralPotential& g) { return g.v(x); },
                    },
                    confinement);
}

double ModelSpec::grad_v(double x) const {
  return std::visit(Overloaded{
                        [x](const QuarticConfinement& q) {
                          return q.theta * x * x * x + q.sigma * x;
                        },
                        [x](const GeneralPotential& g) { return g.grad_v(x); },
                    },
                    confinement);
}

double ModelSpec::w(double x, double y) const {
  return std::visit(Overloaded{
                        [=](const RankOneInteraction& r) { return -r.j * x * y; },
                        [=](const GeneralKernel& k) { return k.w(x, y); },
                    },
                    interaction);
}

double ModelSpec::grad1_w(double x, double y) const {
  return std::visit(Overloaded{
                        [=](const RankOneInteraction& r) { return -r.j * y; },
                        [=](const GeneralKernel& k) { return k.grad1_w(x, y); },
                    },
                    interaction);
}

bool ModelSpec::is_gaussian_oracle() const {
  return is_quartic() && is_rank_one() && quartic().theta == 0.0;
}

const QuarticConfinement& ModelSpec::quartic() const {
  if (!is_quartic()) fail(ErrorCode::InvalidArgument, "model confinement is not quartic");
  return std::get<QuarticConfinement>(confinement);
}

double ModelSpec::coupling() const {
  if (!is_rank_one()) fail(ErrorCode::InvalidArgument, "model interaction is not rank-one");
  return std::get<RankOneInteraction>(interaction).j;
}

void ModelSpec::validate() const {
  if (dimension < 1) fail(ErrorCode::InvalidArgument, "dimension must be >= 1");
  for (double b : {lipschitz_plus, lipschitz_minus, force_bound, force_bound_minus,
                   convexity_kappa}) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      fail(ErrorCode::InvalidArgument, "bound metadata must be finite and non-negative");
    }
  }
  if (is_quartic()) {
    const auto& q = quartic();
    if (!std::isfinite(q.theta) || !std::isfinite(q.sigma)) {
      fail(ErrorCode::InvalidArgument, "confinement coefficients must be finite");
    }
    if (q.theta < 0.0) fail(ErrorCode::InvalidArgument, "theta must be >= 0");
    if (q.theta == 0.0 && !(q.sigma > 0.0)) {
      fail(ErrorCode::InvalidArgument, "theta = 0 requires sigma > 0");
    }
  } else {
    const auto& g = std::get<GeneralPotential>(confinement);
    if (!g.v || !g.grad_v) fail(ErrorCode::InvalidArgument, "general potential needs v and grad_v");
  }
  if (is_rank_one()) {
    const double j = coupling();
    if (!std::isfinite(j)) fail(ErrorCode::InvalidArgument, "coupling must be finite");
    const double want_minus = j > 0.0 ? j : 0.0;
    const double want_plus = j < 0.0 ? -j : 0.0;
    if (lipschitz_minus != want_minus || lipschitz_plus != want_plus) {
      fail(ErrorCode::InvalidArgument,
           "rank-one interaction requires lipschitz_minus = max(J, 0), lipschitz_plus = max(-J, 0)");
    }
  } else {
    const auto& k = std::get<GeneralKernel>(interaction);
    if (!k.w || !k.grad1_w) fail(ErrorCode::InvalidArgument, "general kernel needs w and grad1_w");
  }
}

std::uint64_t ModelSpec::fingerprint() const {
  Fnv1a f;
  const char* fam = to_string(family);
  f.bytes(fam, std::strlen(fam));
  f.integer(dimension);
  if (is_quartic()) {
    f.real(quartic().theta);
    f.real(quartic().sigma);
  }
  if (is_rank_one()) f.real(coupling());
  for (double b : {lipschitz_plus, lipschitz_minus, force_bound, force_bound_minus,
                   convexity_kappa, coulomb_eps, coulomb_strength}) {
    f.real(b);
  }
  return f.h;
}

ModelSpec curie_weiss_model(double theta, double sigma, double j, int dimension) {
  ModelSpec m;
  m.confinement = QuarticConfinement{theta, sigma};
  m.interaction = RankOneInteraction{j};
  m.dimension = dimension;
  m.lipschitz_minus = j > 0.0 ? j : 0.0;
  m.lipschitz_plus = j < 0.0 ? -j : 0.0;
  m.convexity_kappa = theta == 0.0 ? std::max(sigma, 0.0) : 0.0;
  m.family = theta == 0.0 ? ModelFamily::Gaussian : ModelFamily::CurieWeiss;
  m.validate();
  return m;
}

ModelSpec gaussian_model(double sigma, double j) { return curie_weiss_model(0.0, sigma, j, 1); }

ModelSpec coulomb_model(double theta, double sigma, double eps, double strength) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "Coulomb regularization eps must be > 0");
  if (!(strength >= 0.0)) fail(ErrorCode::InvalidArgument, "Coulomb strength must be >= 0");
  ModelSpec m;
  m.confinement = QuarticConfinement{theta, sigma};
  const double s = std::sqrt(2.0 * eps);
  const double root_eps2 = 2.0 * std::sqrt(eps);
  GeneralKernel k;
  k.w = [=](double x, double y) {
    const double u = x - y;
    const double smoothed = u * std::erf(u / (s * std::numbers::sqrt2)) +
                            s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-u * u / (2.0 * s * s));
    return -strength * smoothed;
  };
  k.grad1_w = [=](double x, double y) { return -strength * std::erf((x - y) / root_eps2); };
  k.symmetric = true;
  m.interaction = k;
  m.force_bound = strength;
  m.force_bound_minus = 0.0;
  m.lipschitz_plus = strength / std::sqrt(std::numbers::pi * eps);
  m.lipschitz_minus = 0.0;
  m.convexity_kappa = theta == 0.0 ? std::max(sigma, 0.0) : 0.0;
  m.family = ModelFamily::Coulomb;
  m.coulomb_eps = eps;
  m.coulomb_strength = strength;
  m.validate();
  return m;
}

double energy_per_particle(const ModelSpec& model, std::span<const double> config) {
  const std::size_t n = config.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "configuration must have at least one particle");
  const double nn = static_cast<double>(n);
  double conf = 0.0;
  for (double x : config) conf += model.v(x);
  double inter = 0.0;
  if (model.is_rank_one()) {
    double s = 0.0;
    for (double x : config) s += x;
    inter = -model.coupling() * s * s;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) inter += model.w(config[i], config[k]);
    }
  }
  const double e = conf / nn + inter / (2.0 * nn * nn);
  if (!std::isfinite(e)) fail(ErrorCode::NonFinite, "energy overflow");
  return e;
}

double gibbs_log_density_unnormalized(const ModelSpec& model, std::span<const double> config) {
  const std::size_t n = config.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "configuration must have at least one particle");
  const double nn = static_cast<double>(n);
  double conf = 0.0;
  for (double x : config) conf += model.v(x);
  double inter = 0.0;
  if (model.is_rank_one()) {
    double s = 0.0;
    for (double x : config) s += x;
    inter = -model.coupling() * s * s;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) inter += model.w(config[i], config[k]);
    }
  }
  const double l = -conf - inter / (2.0 * nn);
  if (!std::isfinite(l)) fail(ErrorCode::NonFinite, "log density overflow");
  return l;
}

void gibbs_log_density_gradient(const ModelSpec& model, std::span<const double> config,
                                std::span<double> out) {
  const std::size_t n = config.size();
  if (out.size() != n) fail(ErrorCode::InvalidArgument, "gradient buffer has the wrong size");
  const double nn = static_cast<double>(n);
  if (model.is_rank_one()) {
    double s = 0.0;
    for (double x : config) s += x;
    const double field = model.coupling() * s / nn;
    for (std::size_t i = 0; i < n; ++i) out[i] = -model.grad_v(config[i]) + field;
  } else {
    // W symmetric: d/dx_i of (1/2N) sum_{a,b} W(x_a, x_b) = (1/N) sum_l d1W(x_i, x_l).
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      for (std::size_t l = 0; l < n; ++l) f += model.grad1_w(config[i], config[l]);
      out[i] = -model.grad_v(config[i]) - f / nn;
    }
  }
  for (double g : out) {
    if (!std::isfinite(g)) fail(ErrorCode::NonFinite, "non-finite gradient");
  }
}

double reduced_kernel_force(const ModelSpec& model, const RealFn& mstar_mean_force, double x,
                            double y) {
  return model.grad1_w(x, y) - mstar_mean_force(x);
}

}  // namespace chaoslab
