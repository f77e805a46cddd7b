#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phmc/config.hpp"
#include "phmc/coupling.hpp"
#include "phmc/error.hpp"
#include "phmc/experiment.hpp"
#include "phmc/models.hpp"
#include "phmc/sampler.hpp"
#include "phmc/theory.hpp"

namespace py = pybind11;
using namespace phmc;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
using Json = nlohmann::json;

Json parse(const std::string& text) { return text.empty() ? Json::object() : Json::parse(text); }

struct PyModel {
  ModelPtr model;

  explicit PyModel(const std::string& config) : model(build_model(parse(config))) {}

  std::vector<double> covariance() const {
    const auto& ev = model->covariance().eigenvalues();
    return {ev.begin(), ev.end()};
  }

  std::vector<double> to_eigen(const std::vector<double>& grid) const {
    return model->to_eigen(SpectralVector::grid(grid, model->weight())).data();
  }

  std::vector<double> to_grid(const std::vector<double>& eigen) const {
    return model->to_grid(SpectralVector::eigen(eigen, model->weight())).data();
  }

  py::tuple force(const std::vector<double>& grid) const {
    if (grid.size() != model->dimension()) throw DimensionError("force", model->dimension(), grid.size());
    std::vector<double> out(grid.size());
    const double U = model->force(grid, out);
    return py::make_tuple(U, out);
  }

  std::vector<double> initial_state(const std::string& spec, std::uint64_t seed) const {
    RngStream rng(seed);
    return phmc::initial_state(*model, parse(spec), rng).data();
  }
};

std::string sample(const PyModel& m, const std::vector<double>& x0, double T, double dt, std::size_t steps,
                   std::uint64_t seed, bool metropolis) {
  const PhmcKernel k = metropolis ? PhmcKernel::randomized(m.model, T, dt) : PhmcKernel::exact(m.model, T, dt);
  RngStream rng(seed);
  ChainStats st;
  {
    py::gil_scoped_release release;
    st = run_chain(SpectralVector::grid(x0, m.model->weight()), k, steps, rng);
  }
  Json j = to_json(st);
  j["final_state"] = st.final_state.data();
  return j.dump();
}

std::string coupling_times(const PyModel& m, const std::vector<double>& x0, const std::vector<double>& y0,
                           const std::vector<double>& T_grid, const std::vector<std::string>& rules, double dt,
                           std::size_t n, std::size_t replicas, std::size_t max_steps, double threshold,
                           std::uint64_t seed, std::size_t threads) {
  CouplingKernel templ;
  templ.base = PhmcKernel::randomized(m.model, T_grid.empty() ? 1.0 : T_grid.back(), dt);
  templ.split = ModeSplit{n};
  templ.meet_threshold = threshold;
  CouplingTimeConfig cfg;
  cfg.T_grid = T_grid;
  for (const auto& r : rules) cfg.rules.push_back(GammaSpec::parse(r));
  cfg.replicas = replicas;
  cfg.max_steps = max_steps;
  cfg.seed = seed;
  cfg.threads = threads;
  const double w = m.model->weight();
  CouplingTimeResult res;
  {
    py::gil_scoped_release release;
    res = coupling_time_experiment(m.model->to_eigen(SpectralVector::grid(x0, w)),
                                   m.model->to_eigen(SpectralVector::grid(y0, w)), templ, cfg);
  }
  Json rows = Json::array(), summary = Json::array();
  for (const auto& r : res.rows)
    rows.push_back({{"gamma_rule", r.gamma_rule}, {"T", r.T}, {"replica", r.replica},
                    {"meet_steps", r.meet_steps}, {"censored", r.censored}});
  for (const auto& s : res.summary)
    summary.push_back({{"gamma_rule", s.gamma_rule}, {"T", s.T}, {"mean", s.mean}, {"median", s.median},
                       {"se", s.se}, {"censored", s.censored}, {"replicas", s.replicas}});
  return Json{{"rows", rows}, {"summary", summary}}.dump();
}

std::string failure_probability(const std::vector<double>& z, double gamma, const std::vector<double>& ctilde,
                                std::size_t samples, std::uint64_t seed) {
  RngStream rng(seed);
  const auto r = coupling_failure_probability(SpectralVector::eigen(z), gamma, SpectralOperator(ctilde), samples, rng);
  return Json{{"empirical", r.empirical}, {"se", r.se}, {"tv_exact", r.tv_exact}, {"bound", r.bound}, {"h", r.h}}
      .dump();
}

std::string lemma_check(const std::string& kind, const std::string& params, std::size_t m) {
  const auto r = eigenvalue_lemma_check(kind, parse(params), m);
  return Json{{"model", r.model},
              {"m", r.m},
              {"checked", r.checked},
              {"max_violation_bracket", r.max_violation_bracket},
              {"max_violation_ratio", r.max_violation_ratio},
              {"ok", r.ok()}}
      .dump();
}

std::string contraction(double L, double K, double A, std::size_t n, double sigma_min, double sigma_max,
                        double trace, double T, std::optional<double> R) {
  const DriftConstants dc(L, K, A, n);
  return to_json(R ? contraction_constants(dc, sigma_min, sigma_max, trace, T, *R)
                   : contraction_constants(dc, sigma_min, sigma_max, trace, T))
      .dump();
}

py::tuple run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
              std::size_t threads) {
  RunOptions o;
  o.out = out;
  o.seed = seed;
  o.threads = threads;
  std::ostringstream log;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_experiment(parse(config), o, log);
  }
  return py::make_tuple(code, log.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Preconditioned HMC on spectral truncations";

  const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ConditionError>(m, "ConditionError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

  m.def("version", &library_version);
  m.def("parse_toml", [](const std::string& text) { return parse_toml(text).dump(); });

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("config"))
      .def_property_readonly("kind", [](const PyModel& p) { return p.model->kind(); })
      .def_property_readonly("dimension", [](const PyModel& p) { return p.model->dimension(); })
      .def_property_readonly("weight", [](const PyModel& p) { return p.model->weight(); })
      .def_property_readonly("covariance", &PyModel::covariance)
      .def("describe", [](const PyModel& p) { return p.model->describe().dump(); })
      .def("to_eigen", &PyModel::to_eigen, py::arg("grid"))
      .def("to_grid", &PyModel::to_grid, py::arg("eigen"))
      .def("force", &PyModel::force, py::arg("grid"))
      .def("initial_state", &PyModel::initial_state, py::arg("spec"), py::arg("seed") = 0);

  m.def("sample", &sample, py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("dt"), py::arg("steps"),
        py::arg("seed"), py::arg("metropolis") = true);
  m.def("coupling_times", &coupling_times, py::arg("model"), py::arg("x0"), py::arg("y0"), py::arg("T_grid"),
        py::arg("rules"), py::arg("dt"), py::arg("n"), py::arg("replicas"), py::arg("max_steps"),
        py::arg("threshold"), py::arg("seed"), py::arg("threads") = 1);
  m.def("failure_probability", &failure_probability, py::arg("z"), py::arg("gamma"), py::arg("ctilde"),
        py::arg("samples"), py::arg("seed"));
  m.def("eigenvalue_lemma_check", &lemma_check, py::arg("kind"), py::arg("params"), py::arg("m"));
  m.def("tps_constants", [](double tau, std::size_t d, double M_G, double L_G, double T) {
    return to_json(tps_constants(tau, d, M_G, L_G, T)).dump();
  });
  m.def("pimd_constants", [](double beta, double a, std::size_t d, double M_G, double L_G, double T) {
    return to_json(pimd_constants(beta, a, d, M_G, L_G, T)).dump();
  });
  m.def("contraction_constants", &contraction, py::arg("L"), py::arg("K"), py::arg("A"), py::arg("n"),
        py::arg("sigma_min"), py::arg("sigma_max"), py::arg("trace"), py::arg("T"), py::arg("R") = py::none());
  m.def("run_experiment", &run, py::arg("config"), py::arg("out"), py::arg("seed") = py::none(),
        py::arg("threads") = 0);
}
