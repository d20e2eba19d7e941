#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chaoslab/bounds.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/experiment.hpp"
#include "chaoslab/marginals.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/sampler.hpp"
#include "chaoslab/verify.hpp"

namespace py = pybind11;
using namespace chaoslab;

namespace {

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

py::dict bundle_dict(const ConstantsBundle& b) {
  py::dict d;
  d["regime"] = to_string(b.regime);
  d["rho"] = b.rho;
  d["gamma"] = b.gamma;
  d["M"] = b.big_m;
  auto opt = [&](const char* key, const std::optional<double>& v) {
    d[key] = v ? py::cast(*v) : py::none();
  };
  opt("rho0", b.rho0);
  opt("lambda", b.lambda);
  opt("eps", b.eps);
  opt("lambda_n", b.lambda_n);
  opt("delta_n", b.delta_n);
  opt("j_c", b.j_c);
  opt("var_mstar", b.var_mstar);
  return d;
}

ConstantsBundle bundle_from(const ModelSpec& m, int n) {
  if (!m.is_quartic()) throw Error(ErrorCode::InvalidArgument, "constants need a quartic model");
  const auto& q = m.quartic();
  return curie_weiss_constants_raw(q.theta, q.sigma, m.coupling(), n, 1);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Mean-field Gibbs measures, exact marginals and chaos bounds.";

  static py::exception<Error> error_type(mod, "ChaoslabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<ModelSpec>(mod, "Model")
      .def_property_readonly("family", [](const ModelSpec& m) { return to_string(m.family); })
      .def_property_readonly("coupling", &ModelSpec::coupling)
      .def_property_readonly("fingerprint", &ModelSpec::fingerprint)
      .def("__repr__", [](const ModelSpec& m) {
        return std::string("<chaoslab.Model ") + to_string(m.family) + ">";
      });

  mod.def("curie_weiss_model", &curie_weiss_model, py::arg("theta"), py::arg("sigma"),
          py::arg("J"), py::arg("dimension") = 1);
  mod.def("gaussian_model", &gaussian_model, py::arg("sigma"), py::arg("J"));
  mod.def("coulomb_model", &coulomb_model, py::arg("theta"), py::arg("sigma"), py::arg("eps"),
          py::arg("strength") = 1.0);

  mod.def("critical_coupling", [](const ModelSpec& m) { return critical_coupling(m); });
  mod.def("magnetization", [](const ModelSpec& m, double h) { return magnetization(m, h); },
          py::arg("model"), py::arg("h"));
  mod.def("fixed_point", [](const ModelSpec& m) {
    const FixedPointResult r = solve_fixed_point(m);
    py::dict d;
    d["h_star"] = r.h_star;
    d["iterations"] = r.iterations;
    d["residual"] = r.residual;
    d["variance"] = r.m_star.variance();
    return d;
  });

  mod.def(
      "entropy_levels",
      [](const ModelSpec& m, int n, int k_max, const std::string& method, std::size_t mc_samples,
         std::uint64_t seed) {
        EntropyOptions opt;
        if (method == "monte-carlo") {
          opt.method = EntropyMethod::MonteCarlo;
        } else if (method != "exact-grid") {
          throw Error(ErrorCode::InvalidArgument, "method must be exact-grid or monte-carlo");
        }
        opt.mc_samples = mc_samples;
        opt.seed = seed;
        const EntropyLevels lv = relative_entropy_levels(build_mixture(m, n), k_max, opt);
        return py::make_tuple(lv.levels, lv.standard_errors);
      },
      py::arg("model"), py::arg("N"), py::arg("k_max") = 4, py::arg("method") = "exact-grid",
      py::arg("mc_samples") = 1000000, py::arg("seed") = 1,
      "Returns (levels, standard_errors); levels[k] = H(m^{N,k} | m_*^k).");
  mod.def("gaussian_entropy_oracle", &gaussian_entropy_oracle, py::arg("sigma"), py::arg("J"),
          py::arg("N"), py::arg("k"));
  mod.def(
      "marginal_log_density",
      [](const ModelSpec& m, int n, std::vector<double> point) {
        return marginal_log_density(build_mixture(m, n), static_cast<int>(point.size()), point);
      },
      py::arg("model"), py::arg("N"), py::arg("point"));
  mod.def(
      "sample_marginal",
      [](const ModelSpec& m, int n, int k, std::size_t count, std::uint64_t seed) {
        return to_array(sample_marginal(build_mixture(m, n), k, count, seed));
      },
      py::arg("model"), py::arg("N"), py::arg("k"), py::arg("count"), py::arg("seed") = 1);

  mod.def(
      "constants",
      [](const ModelSpec& m, int n) { return bundle_dict(bundle_from(m, n)); }, py::arg("model"),
      py::arg("N"));
  mod.def(
      "chaos_bounds",
      [](const ModelSpec& m, int n, int k) {
        const ConstantsBundle b = bundle_from(m, n);
        return py::make_tuple(chaos_bound_marginal(b, n, k), chaos_bound_conditional(b, n, k));
      },
      py::arg("model"), py::arg("N"), py::arg("k"),
      "Returns (marginal bound, conditional bound) at level k.");
  mod.def("jw_log_mgf", [](const ModelSpec& m, int n) { return jw_log_mgf(m, n); },
          py::arg("model"), py::arg("N"));
  mod.def("jw_rhs", &jw_rhs, py::arg("eps"), py::arg("l_minus"), py::arg("var_mstar"));

  mod.def(
      "run_chain",
      [](const ModelSpec& m, int n, std::int64_t n_steps, std::int64_t burn_in, int thinning,
         double step_size, std::uint64_t seed, const std::string& algorithm, bool tune) {
        ChainConfig c;
        c.n_particles = n;
        c.n_steps = n_steps;
        c.burn_in = burn_in;
        c.thinning = thinning;
        c.step_size = step_size;
        c.seed = seed;
        c.algorithm = sampler_algorithm_from_string(algorithm);
        if (tune) c.step_size = tune_step_size(m, c, 0.574);
        SampleBatch b;
        {
          py::gil_scoped_release release;
          b = run_chain(m, c);
        }
        return py::make_tuple(to_array(b.draws), b.acceptance_rate, c.step_size);
      },
      py::arg("model"), py::arg("N"), py::arg("n_steps"), py::arg("burn_in") = 0,
      py::arg("thinning") = 1, py::arg("step_size") = 0.05, py::arg("seed") = 1,
      py::arg("algorithm") = "mala", py::arg("tune") = false,
      "Returns (draws, acceptance_rate, step_size).");
  mod.def("read_samples", [](const std::string& path) { return to_array(read_sample_file(path)); },
          py::arg("path"));

  mod.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& output_dir, int threads) {
        ExperimentConfig cfg = parse_config(config_json);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (threads > 0) cfg.threads = threads;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run(cfg);
        }
        return r.to_json();
      },
      py::arg("config_json"), py::arg("output_dir") = "", py::arg("threads") = 0,
      "Runs a pipeline from a JSON config string and returns the report as JSON text.");
}
