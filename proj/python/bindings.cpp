#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stablecone/compensator.hpp"
#include "stablecone/errors.hpp"
#include "stablecone/experiments.hpp"
#include "stablecone/martin.hpp"
#include "stablecone/stable.hpp"
#include "stablecone/walk.hpp"

namespace py = pybind11;
namespace sc = stablecone;

namespace {

sc::IncrementLaw make_law(const sc::StableParams& p, std::optional<double> eps) {
  if (!eps) return sc::IncrementLaw::exact(p);
  return sc::IncrementLaw::perturbed(p, *eps);
}

py::dict survival_dict(const sc::SurvivalTable& t) {
  py::dict d;
  d["horizons"] = t.horizons;
  d["survivors"] = t.survivors;
  d["reps"] = t.reps;
  d["estimate"] = t.estimate;
  d["ci_lo"] = t.ci_lo;
  d["ci_hi"] = t.ci_hi;
  return d;
}

py::dict result_dict(const sc::RunResult& r) {
  py::list checks, outputs;
  for (const auto& c : r.checks) {
    py::dict d;
    d["name"] = c.name;
    d["passed"] = c.passed;
    d["detail"] = c.detail;
    checks.append(d);
  }
  for (const auto& o : r.manifest.outputs) {
    py::dict d;
    d["path"] = o.path;
    d["sha256"] = o.sha256;
    d["bytes"] = o.bytes;
    outputs.append(d);
  }
  py::dict d;
  d["kind"] = r.manifest.kind;
  d["seed"] = r.manifest.seed;
  d["config_digest"] = r.manifest.config_digest;
  d["checks"] = checks;
  d["flags"] = r.flags;
  d["outputs"] = outputs;
  d["all_passed"] = r.all_passed();
  return d;
}

}  // namespace

PYBIND11_MODULE(_stablecone, m) {
  m.doc() = "Random walks in cones with isotropic stable increments";
  m.attr("__version__") = std::string(sc::kToolVersion);

  py::register_exception<sc::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<sc::QuadratureError>(m, "QuadratureError", PyExc_ArithmeticError);
  py::register_exception<sc::RejectionCapError>(m, "RejectionCapError", PyExc_RuntimeError);

  py::class_<sc::StableParams>(m, "StableParams")
      .def(py::init<double, int>(), py::arg("alpha"), py::arg("dim"))
      .def_property_readonly("alpha", &sc::StableParams::alpha)
      .def_property_readonly("dim", &sc::StableParams::dim)
      .def("__repr__", [](const sc::StableParams& p) {
        return "StableParams(alpha=" + sc::format_double(p.alpha()) + ", dim=" + std::to_string(p.dim()) + ")";
      });

  m.def("radial_density",
        [](const sc::StableParams& p, double r) {
          return r == 0.0 ? sc::radial_density_at_zero(p) : sc::radial_density(p, r).value;
        },
        py::arg("params"), py::arg("r"), "Density of Z at |y| = r");
  m.def("ball_exit_radius_cdf", &sc::ball_exit_radius_cdf, py::arg("params"), py::arg("r"), py::arg("rho"));
  m.def("poisson_ball_mass",
        [](const sc::StableParams& p, double r, double q, double rho_max) {
          return sc::poisson_ball_mass(p, r, q, rho_max).value;
        },
        py::arg("params"), py::arg("r"), py::arg("q"),
        py::arg("rho_max") = std::numeric_limits<double>::infinity());

  m.def("green_halfline", &sc::green_halfline, py::arg("alpha"), py::arg("x"), py::arg("y"));
  m.def("green_halfspace",
        [](const sc::StableParams& p, const sc::Vec& x, const sc::Vec& y) {
          return sc::green_halfspace(sc::GreenHalfspace(p), x, y);
        },
        py::arg("params"), py::arg("x"), py::arg("y"));
  m.def("martin_halfspace",
        [](const sc::StableParams& p, const sc::Vec& x) { return sc::eval_martin_halfspace(p, x); },
        py::arg("params"), py::arg("x"));

  m.def("survival_curve",
        [](const sc::StableParams& p, double theta, const sc::Vec& start,
           const std::vector<std::int64_t>& horizons, std::int64_t reps, std::uint64_t seed, int threads,
           std::optional<double> eps) {
          const sc::WalkConfig cfg{sc::ConeSpec(p.dim(), theta), make_law(p, eps), start,
                                   horizons.empty() ? 1 : horizons.back(), reps, seed};
          sc::SurvivalTable t;
          {
            py::gil_scoped_release release;
            t = sc::survival_curve(cfg, horizons, threads);
          }
          return survival_dict(t);
        },
        py::arg("params"), py::arg("theta"), py::arg("start"), py::arg("horizons"), py::arg("reps"),
        py::arg("seed") = 0, py::arg("threads") = 1, py::arg("perturbation") = py::none());

  m.def("estimate_beta",
        [](const sc::StableParams& p, double theta, const std::vector<std::int64_t>& horizons,
           std::int64_t reps, std::uint64_t seed, int threads) {
          sc::BetaEstimate b;
          {
            py::gil_scoped_release release;
            b = sc::estimate_beta(sc::ConeSpec(p.dim(), theta), sc::IncrementLaw::exact(p), horizons,
                                  reps, seed, threads);
          }
          py::dict d;
          d["beta_hat"] = b.beta_hat;
          d["se"] = b.se;
          d["ci"] = py::make_tuple(b.ci_lo, b.ci_hi);
          d["fit_horizons"] = b.fit_horizons;
          return d;
        },
        py::arg("params"), py::arg("theta"), py::arg("horizons"), py::arg("reps"), py::arg("seed") = 0,
        py::arg("threads") = 1);

  m.def("experiment_kinds", &sc::kind_names);
  m.def("normalize_config", [](const std::string& text) { return sc::serialize_config(sc::parse_config(text)); },
        py::arg("json_text"), "Parse, fill defaults and return the canonical JSON");
  m.def("run_experiment",
        [](const std::string& text, const std::filesystem::path& out_dir, int threads) {
          const auto cfg = sc::parse_config(text);
          sc::RunResult r;
          {
            py::gil_scoped_release release;
            r = sc::run_experiment(cfg, out_dir, threads);
          }
          return result_dict(r);
        },
        py::arg("json_text"), py::arg("out_dir"), py::arg("threads") = 1);
  m.def("verify_manifest", &sc::verify_manifest, py::arg("manifest_path"));
}
