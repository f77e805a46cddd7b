#include "phmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "phmc/config.hpp"
#include "phmc/error.hpp"
#include "phmc/io.hpp"
#include "phmc/models.hpp"
#include "phmc/parallel.hpp"

namespace phmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream paths below the master seed used by the runner.
constexpr std::uint64_t kStreamInitial = 0;
constexpr std::uint64_t kStreamChain = 1;
constexpr std::uint64_t kStreamTrajectory = 2;
constexpr std::uint64_t kStreamCouple = 3;
constexpr std::uint64_t kStreamDecay = 4;
constexpr std::uint64_t kStreamCouplingTimes = 5;
constexpr std::uint64_t kStreamTune = 6;

nlohmann::json rng_documentation() {
  return {{"engine", "mt19937_64"},
          {"uniform", "((e() >> 11) + 0.5) * 2^-53"},
          {"normal", "std::normal_distribution<double>"},
          {"derivation", "s0 = splitmix64(master); s_{i+1} = splitmix64(s_i xor path[i])"},
          {"streams",
           {{"initial.x", "{0, 0}"},
            {"initial.y", "{0, 1}"},
            {"chain", "{1}"},
            {"trajectory", "{2}"},
            {"couple", "{3}"},
            {"decay", "master' = derive_seed(master, {4}); replica r uses {r}"},
            {"coupling-times", "master' = derive_seed(master, {5}); T index t, replica r use {t, r}"},
            {"tune", "derive_seed(master, {6}); every trial restarts this stream"}}}};
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& prefix) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(prefix + key, "has the wrong type");
  }
}

const nlohmann::json& section(const nlohmann::json& cfg, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!cfg.contains(key)) return empty;
  const auto& s = cfg.at(key);
  if (!s.is_object() && !s.is_string()) throw ConfigError(key, "must be an object");
  return s;
}

const PointPotential& model_potential(const Model& m) {
  if (const auto* t = dynamic_cast<const TpsModel*>(&m)) return t->params().G;
  if (const auto* p = dynamic_cast<const PimdModel*>(&m)) return p->params().G;
  throw ConfigError("model", "theory constants need a tps or pimd model");
}

std::vector<double> T_grid_from(const nlohmann::json& cfg) {
  if (!cfg.contains("T_grid")) throw ConfigError("T_grid", "required field missing");
  const auto& g = cfg.at("T_grid");
  std::vector<double> out;
  if (g.is_array()) {
    for (const auto& v : g) out.push_back(v.get<double>());
  } else if (g.is_object()) {
    const double lo = get_or(g, "min", 0.0, "T_grid."), hi = get_or(g, "max", 0.0, "T_grid.");
    const auto n = get_or(g, "count", std::size_t{0}, "T_grid.");
    if (n < 1 || !(lo > 0.0) || hi < lo) throw ConfigError("T_grid", "need count >= 1 and 0 < min <= max");
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  } else {
    throw ConfigError("T_grid", "must be an array or {min, max, count}");
  }
  for (double T : out)
    if (!(T > 0.0)) throw ConfigError("T_grid", "entries must be positive");
  return out;
}

TheoremConstants as_theorem(const ModelConstants& mc) {
  TheoremConstants t;
  t.L = mc.L;
  t.K = mc.K;
  t.A = mc.A;
  t.n = mc.n;
  t.T = mc.T;
  t.alpha = mc.alpha;
  t.gamma = mc.gamma;
  t.a = mc.a;
  t.R = mc.R;
  t.eps = mc.eps;
  t.log_eps = mc.log_eps;
  t.c = mc.c;
  t.log_c = mc.log_c;
  t.C_cor = mc.C;
  t.log_C = mc.log_C;
  t.condition = mc.condition;
  return t;
}

struct DiscreteSigma {
  double sigma_min = 0.0, sigma_max = 0.0, trace = 0.0;
};

DiscreteSigma discrete_sigma(const Model& m, std::size_t n) {
  const auto& C = m.covariance();
  DiscreteSigma d;
  d.trace = C.trace();
  if (n == 0) return d;
  d.sigma_min = 1.0 / std::sqrt(C[0]);
  d.sigma_max = 1.0 / std::sqrt(C[n - 1]);
  return d;
}

CouplingKernel coupling_from_config(ModelPtr model, const nlohmann::json& cfg, const PhmcKernel& base) {
  const auto& c = section(cfg, "coupling");
  CouplingKernel k;
  k.base = base;
  k.gamma = GammaSpec::parse(get_or<std::string>(c, "gamma", "one-over-T", "coupling."));
  k.meet_threshold = get_or(c, "threshold", 1e-8, "coupling.");
  k.alpha = get_or(c, "alpha", 1.0, "coupling.");
  k.shared_uniform = get_or(c, "shared_uniform", true, "coupling.");
  std::size_t n = 1;
  if (c.contains("n")) {
    if (c.at("n").is_string() && c.at("n").get<std::string>() == "theory") {
      n = std::max<std::size_t>(1, model_constants(*model, base.T, section(cfg, "theory")).n);
    } else {
      n = get_or(c, "n", std::size_t{1}, "coupling.");
    }
  }
  if (n < 1 || n > model->dimension()) throw ConfigError("coupling.n", "must lie in [1, dimension]");
  k.split.n = n;
  if (k.gamma.rule == GammaRule::theorem)
    k.gamma.R = model_constants(*model, base.T, section(cfg, "theory")).R;
  k.validate();
  return k;
}

class CsvChainSink final : public ChainSink {
 public:
  CsvChainSink(CsvWriter& w, std::size_t thin) : w_(w), thin_(std::max<std::size_t>(1, thin)) {}
  void record(const ChainRecord& r) override {
    if (r.step % thin_ != 0) return;
    std::vector<std::string> cells{std::to_string(r.step), r.accepted ? "1" : "0", std::to_string(r.k),
                                   format_double(r.energy)};
    for (double c : r.coordinates) cells.push_back(format_double(c));
    w_.row(cells);
  }

 private:
  CsvWriter& w_;
  std::size_t thin_;
};

std::vector<std::string> mode_columns(const std::vector<std::string>& head, std::size_t n) {
  auto cols = head;
  for (std::size_t j = 0; j < n; ++j) cols.push_back("mode_" + std::to_string(j));
  return cols;
}

// --- commands --------------------------------------------------------------------------

struct Context {
  nlohmann::json cfg;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  OutputSet* out = nullptr;
  std::ostream* log = nullptr;
  nlohmann::json results = nlohmann::json::object();
};

ModelPtr context_model(const Context& c) {
  if (!c.cfg.contains("model") || !c.cfg.at("model").is_object())
    throw ConfigError("model", "required section missing");
  return build_model(c.cfg.at("model"));
}

std::pair<SpectralVector, SpectralVector> context_initial(const Context& c, const Model& m) {
  const auto& init = section(c.cfg, "initial");
  RngStream rx = RngStream::derive(c.seed, {kStreamInitial, 0});
  RngStream ry = RngStream::derive(c.seed, {kStreamInitial, 1});
  const nlohmann::json xs = init.contains("x") ? init.at("x") : nlohmann::json("zero");
  const nlohmann::json ys = init.contains("y") ? init.at("y") : xs;
  return {initial_state(m, xs, rx), initial_state(m, ys, ry)};
}

PhmcKernel context_kernel(Context& c, ModelPtr model, const SpectralVector& x0) {
  if (!c.cfg.contains("kernel")) throw ConfigError("kernel", "required section missing");
  auto& kcfg = c.cfg["kernel"];
  if (get_or(kcfg, "tune", false, "kernel.")) {
    const double T = get_or(kcfg, "T", 0.0, "kernel.");
    if (!(T > 0.0)) throw ConfigError("kernel.T", "must be positive");
    const double target = get_or(kcfg, "target_acceptance", 0.99, "kernel.");
    const auto tr = tune_stepsize(model, T, x0, target, derive_seed(c.seed, {kStreamTune}),
                                  get_or(kcfg, "tune_steps", std::size_t{1000}, "kernel."));
    *c.log << "tuned dt = " << format_double(tr.dt) << " (acceptance " << tr.acceptance << ")\n";
    kcfg["dt"] = tr.dt;
    kcfg["tune"] = false;
    kcfg["tuned_from"] = {{"target_acceptance", target}, {"acceptance", tr.acceptance}};
  }
  return kernel_from_config(std::move(model), kcfg);
}

int cmd_sample(Context& c) {
  auto model = context_model(c);
  auto [x0, y0] = context_initial(c, *model);
  (void)y0;
  const PhmcKernel k = context_kernel(c, model, x0);
  const auto steps = get_or(c.cfg, "steps", std::size_t{1000}, "");
  const auto thin = get_or(c.cfg, "thin", std::size_t{1}, "");
  if (thin < 1) throw ConfigError("thin", "must be at least 1");

  if (get_or(c.cfg, "trajectory", false, "")) {
    CsvWriter tw(c.out->file("trajectory.csv"), "trajectory", {"step", "t", "mode", "q", "v"});
    RngStream rng = RngStream::derive(c.seed, {kStreamTrajectory});
    const Model& m = *model;
    const SpectralVector xi = sample_gaussian(k.Ctilde(), rng);
    const PhasePoint z{m.to_grid(x0), m.to_grid(SpectralVector::eigen(xi.data(), m.weight()))};
    const Drift drift = Drift::from_model(m, k.linear);
    std::vector<double> qe(m.dimension()), ve(m.dimension());
    flow_ode(z, k.T, k.integrator, drift, [&](std::size_t step, double t, std::span<const double> q, std::span<const double> v) {
      m.basis().to_eigen(q, qe);
      m.basis().to_eigen(v, ve);
      for (std::size_t j = 0; j < qe.size(); ++j)
        tw.row({std::to_string(step), format_double(t), std::to_string(j), format_double(qe[j]),
                format_double(ve[j])});
    });
    tw.close();
  }

  CsvWriter w(c.out->file("chain.csv"), "chain",
              mode_columns({"step", "accepted", "k", "energy"}, model->dimension()));
  CsvChainSink sink(w, thin);
  RngStream rng = RngStream::derive(c.seed, {kStreamChain});
  const ChainStats st = run_chain(x0, k, steps, rng, &sink);
  w.close();
  nlohmann::json summary = to_json(st);
  summary["kernel"] = to_json(k);
  summary["model"] = model->describe();
  summary["prior_variance"] = std::vector<double>(model->covariance().eigenvalues().begin(),
                                                  model->covariance().eigenvalues().end());
  write_json(c.out->file("summary.json"), summary);
  *c.log << "sample: " << steps << " steps, acceptance " << st.acceptance_rate << "\n";
  c.results = {{"acceptance_rate", st.acceptance_rate}, {"mean_k", st.mean_k}};
  return exit_ok;
}

int cmd_couple(Context& c) {
  auto model = context_model(c);
  auto [x0, y0] = context_initial(c, *model);
  const PhmcKernel base = context_kernel(c, model, x0);
  const CouplingKernel ck = coupling_from_config(model, c.cfg, base);
  const auto steps = get_or(c.cfg, "steps", std::size_t{100}, "");

  CoupledEngine eng(ck);
  ChainState x = eng.chain().make_state(x0.coefficients());
  ChainState y = eng.chain().make_state(y0.coefficients());
  RngStream rng = RngStream::derive(c.seed, {kStreamCouple});
  bool met = eng.distance(x, y) <= ck.meet_threshold;
  if (met) y = x;
  CsvWriter w(c.out->file("couple.csv"), "couple",
              {"step", "distance", "shift_event", "accepted_x", "accepted_y", "coalesced"});
  CsvWriter plot(c.out->file("distance_plot.csv"), "plot", {"x", "y", "series"});
  SvgChart chart{"Distance between coupled chains", "step", "alpha-norm distance", true, {}};
  SvgSeries series{ck.gamma.name(), {}, {}};
  std::size_t meet_step = 0;
  const double d0 = eng.distance(x, y);
  w.row({"0", format_double(d0), "0", "1", "1", met ? "1" : "0"});
  plot.row({"0", format_double(d0), ck.gamma.name()});
  series.x.push_back(0);
  series.y.push_back(d0);
  for (std::size_t i = 1; i <= steps; ++i) {
    const bool was = met;
    CoupledInfo info;
    try {
      info = eng.step(x, y, met, rng);
    } catch (const DivergenceError& e) {
      throw DivergenceError(i, std::string("coupled step: ") + e.what());
    }
    const double d = met ? 0.0 : info.distance;
    if (met && !was) meet_step = i;
    w.row({std::to_string(i), format_double(was ? 0.0 : info.distance), info.shift_event ? "1" : "0",
           info.accepted_x ? "1" : "0", info.accepted_y ? "1" : "0", met ? "1" : "0"});
    plot.row({std::to_string(i), format_double(d), ck.gamma.name()});
    series.x.push_back(static_cast<double>(i));
    series.y.push_back(d);
  }
  w.close();
  plot.close();
  chart.series.push_back(series);
  write_svg(c.out->file("distance.svg"), chart);

  const auto replicas = get_or(c.cfg, "replicas", std::size_t{1}, "");
  if (replicas > 1) {
    const SpectralVector xg = x0, yg = y0;
    const auto decay = empirical_wasserstein_decay(
        ck, [&](RngStream&) { return xg; }, [&](RngStream&) { return yg; }, steps, replicas,
        derive_seed(c.seed, {kStreamDecay}), c.threads);
    CsvWriter dw(c.out->file("decay.csv"), "decay", {"step", "mean_distance", "se", "log_mean"});
    for (const auto& p : decay)
      dw.row({std::to_string(p.step), format_double(p.mean_distance), format_double(p.se),
              format_double(p.log_mean)});
    dw.close();
    c.results["decay_slope"] = decay_slope(decay);
  }
  c.results["meet_step"] = met ? nlohmann::json(meet_step) : nlohmann::json(nullptr);
  c.results["gamma"] = resolve_gamma(ck.gamma, ck.base.T);
  *c.log << "couple: " << (met ? "met at step " + std::to_string(meet_step) : std::string("no meeting"))
         << "\n";
  return exit_ok;
}

int cmd_coupling_times(Context& c) {
  auto model = context_model(c);
  auto [x0, y0] = context_initial(c, *model);
  const PhmcKernel base = context_kernel(c, model, x0);
  CouplingTimeConfig tc;
  tc.T_grid = T_grid_from(c.cfg);
  const auto& cc = section(c.cfg, "coupling");
  std::vector<std::string> names = {"zero", "one-over-T", "cot-T"};
  if (cc.contains("gamma_rules")) names = cc.at("gamma_rules").get<std::vector<std::string>>();
  for (const auto& n : names) tc.rules.push_back(GammaSpec::parse(n));
  tc.replicas = get_or(c.cfg, "replicas", std::size_t{100}, "");
  tc.max_steps = get_or(c.cfg, "max_steps", std::size_t{10000}, "");
  tc.seed = derive_seed(c.seed, {kStreamCouplingTimes});
  tc.threads = c.threads;
  CouplingKernel templ = coupling_from_config(model, c.cfg, base);
  for (auto& r : tc.rules)
    if (r.rule == GammaRule::theorem) r.R = templ.gamma.R > 0 ? templ.gamma.R : model_constants(*model, base.T).R;

  const auto res = coupling_time_experiment(x0, y0, templ, tc);
  CsvWriter w(c.out->file("coupling_times.csv"), "coupling-times",
              {"gamma_rule", "T", "replica", "meet_steps", "censored"});
  for (const auto& r : res.rows)
    w.row({r.gamma_rule, format_double(r.T), std::to_string(r.replica), std::to_string(r.meet_steps),
           r.censored ? "1" : "0"});
  w.close();
  CsvWriter s(c.out->file("coupling_times_summary.csv"), "coupling-times-summary",
              {"gamma_rule", "T", "mean", "median", "se", "censored", "replicas"});
  CsvWriter p(c.out->file("coupling_times_plot.csv"), "plot", {"x", "y", "series"});
  SvgChart chart{"Mean coupling time", "T", "mean meeting step", false, {}};
  for (const auto& g : tc.rules) chart.series.push_back({g.name(), {}, {}});
  nlohmann::json minima = nlohmann::json::object();
  for (const auto& r : res.summary) {
    s.row({r.gamma_rule, format_double(r.T), format_double(r.mean), format_double(r.median),
           format_double(r.se), std::to_string(r.censored), std::to_string(r.replicas)});
    p.row({format_double(r.T), format_double(r.mean), r.gamma_rule});
    for (auto& ser : chart.series)
      if (ser.name == r.gamma_rule) {
        ser.x.push_back(r.T);
        ser.y.push_back(r.mean);
      }
    if (!minima.contains(r.gamma_rule) || minima[r.gamma_rule]["mean"].get<double>() > r.mean)
      minima[r.gamma_rule] = {{"T", r.T}, {"mean", r.mean}, {"se", r.se}};
  }
  s.close();
  p.close();
  write_svg(c.out->file("coupling_times.svg"), chart);
  c.results["minima"] = minima;
  *c.log << "coupling-times: " << res.rows.size() << " rows\n";
  return exit_ok;
}

double theory_T(const Context& c) {
  const auto& th = section(c.cfg, "theory");
  if (th.contains("T")) return get_or(th, "T", 0.0, "theory.");
  const auto& k = section(c.cfg, "kernel");
  if (k.contains("T")) return get_or(k, "T", 0.0, "kernel.");
  throw ConfigError("theory.T", "T is required (theory.T or kernel.T)");
}

nlohmann::json general_bundle(const Model& m, const ModelConstants& mc) {
  if (mc.n == 0) return {{"skipped", "no low modes (L_G = 0)"}};
  const DiscreteSigma ds = discrete_sigma(m, mc.n);
  const DriftConstants dc(mc.L, mc.K, mc.A, mc.n);
  nlohmann::json j = {{"sigma_min", ds.sigma_min}, {"sigma_max", ds.sigma_max}, {"trace", ds.trace}};
  try {
    j["constants"] = to_json(contraction_constants(dc, ds.sigma_min, ds.sigma_max, ds.trace, mc.T, mc.R));
  } catch (const ConditionError& e) {
    j["error"] = e.what();
    j["contraction_condition"] = to_json(contraction_condition(dc, ds.sigma_min, ds.sigma_max, mc.R, mc.T));
  }
  return j;
}

int cmd_constants(Context& c) {
  auto model = context_model(c);
  const double T = theory_T(c);
  const auto& th = section(c.cfg, "theory");
  const ModelConstants mc = model_constants(*model, T, th);
  nlohmann::json j = to_json(mc);
  const std::size_t m = model->describe().at("m").get<std::size_t>();
  j["m"] = m;
  j["m_exceeds_m_star"] = m > mc.m_star;
  j["general"] = general_bundle(*model, mc);
  if (th.contains("delta")) {
    const double delta = get_or(th, "delta", 0.0, "theory.");
    const double M1 = get_or(th, "M1", 0.0, "theory.");
    try {
      const MixingTime mt = mixing_time(as_theorem(mc), delta, M1);
      j["mixing_time"] = {{"bound", mt.bound},
                          {"log10_bound", mt.log10_bound},
                          {"log_numerator", mt.log_numerator},
                          {"steps", mt.steps ? nlohmann::json(*mt.steps) : nlohmann::json(nullptr)}};
    } catch (const ConditionError& e) {
      j["mixing_time"] = {{"error", e.what()}};
    }
  }
  write_json(c.out->file("constants.json"), j);
  c.results = {{"condition_ok", mc.condition_ok}};
  *c.log << "constants: " << mc.model << " condition " << (mc.condition_ok ? "holds" : "fails") << "\n";
  return exit_ok;
}

int cmd_check_conditions(Context& c) {
  auto model = context_model(c);
  const double T = theory_T(c);
  const ModelConstants mc = model_constants(*model, T, section(c.cfg, "theory"));
  const std::size_t m = model->describe().at("m").get<std::size_t>();
  const DriftConstants dc(mc.L, mc.K, mc.A, mc.n);
  std::vector<ConditionReport> reps;
  reps.push_back(lyapunov_condition(dc, T));
  reps.push_back(mc.condition);
  ConditionReport mstar{"m > m_star", static_cast<double>(mc.m_star), static_cast<double>(m), m > mc.m_star};
  reps.push_back(mstar);
  if (mc.n > 0) {
    const DiscreteSigma ds = discrete_sigma(*model, mc.n);
    reps.push_back(contraction_condition(dc, ds.sigma_min, ds.sigma_max, mc.R, T));
    const double rmin = minimal_R(dc, ds.sigma_max, ds.trace);
    reps.push_back({"R_min <= R", rmin, mc.R, rmin <= mc.R * (1.0 + 1e-12)});
  }
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reps) {
    arr.push_back(to_json(r));
    all = all && r.ok;
    *c.log << (r.ok ? "ok   " : "FAIL ") << r.name << ": " << format_double(r.lhs) << " vs "
           << format_double(r.rhs) << "\n";
  }
  write_json(c.out->file("conditions.json"), {{"conditions", arr}, {"all_ok", all}});
  c.results = {{"all_ok", all}};
  return all ? exit_ok : exit_validation;
}

int cmd_validate(Context& c) {
  const bool quick = get_or(section(c.cfg, "validate"), "quick", false, "validate.");
  const auto checks = validation_suite(c.seed, c.threads, quick);
  nlohmann::json arr = nlohmann::json::array();
  CsvWriter w(c.out->file("validate.csv"), "validate", {"check", "ok"});
  bool all = true;
  for (const auto& ch : checks) {
    arr.push_back({{"name", ch.name}, {"ok", ch.ok}, {"detail", ch.detail}});
    w.row({ch.name, ch.ok ? "1" : "0"});
    all = all && ch.ok;
    *c.log << (ch.ok ? "PASS " : "FAIL ") << ch.name << "\n";
  }
  w.close();
  write_json(c.out->file("validate.json"), {{"checks", arr}, {"all_ok", all}});
  c.results = {{"all_ok", all}};
  return all ? exit_ok : exit_validation;
}

int cmd_tune(Context& c) {
  auto model = context_model(c);
  auto [x0, y0] = context_initial(c, *model);
  (void)y0;
  const auto& k = section(c.cfg, "kernel");
  const double T = get_or(k, "T", 0.0, "kernel.");
  if (!(T > 0.0)) throw ConfigError("kernel.T", "must be positive");
  const double target = get_or(k, "target_acceptance", 0.99, "kernel.");
  const auto tr = tune_stepsize(model, T, x0, target, derive_seed(c.seed, {kStreamTune}),
                                get_or(k, "tune_steps", std::size_t{1000}, "kernel."));
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : tr.trace) trace.push_back({{"dt", t.dt}, {"acceptance", t.acceptance}});
  write_json(c.out->file("tune.json"), {{"dt", tr.dt}, {"acceptance", tr.acceptance}, {"trace", trace}});
  c.results = {{"dt", tr.dt}, {"acceptance", tr.acceptance}};
  *c.log << "tune: dt = " << format_double(tr.dt) << "\n";
  return exit_ok;
}

}  // namespace

std::string library_version() { return PHMC_VERSION; }

PhmcKernel kernel_from_config(ModelPtr model, const nlohmann::json& k) {
  const std::string p = "kernel.";
  PhmcKernel kr;
  kr.model = std::move(model);
  kr.T = get_or(k, "T", 0.0, p);
  kr.integrator.dt = get_or(k, "dt", 0.0, p);
  kr.integrator.scheme = scheme_from_string(get_or<std::string>(k, "scheme", "symmetric-splitting", p));
  kr.metropolis = get_or(k, "metropolis", true, p);
  const std::string dur = get_or<std::string>(k, "duration", kr.metropolis ? "geometric" : "deterministic", p);
  kr.duration.kind = duration_kind_from_string(dur);
  if (kr.duration.kind == DurationRule::Kind::geometric_steps) {
    if (!(kr.T > 0.0) || !(kr.integrator.dt > 0.0)) throw ConfigError("kernel.dt", "must be positive");
    kr.duration.mean_steps = get_or(k, "mean_steps", std::max(1.0, kr.T / kr.integrator.dt), p);
  }
  const std::string lin = get_or<std::string>(k, "linear", "harmonic", p);
  if (lin == "harmonic") {
    kr.linear = LinearPart::harmonic;
  } else if (lin == "free") {
    kr.linear = LinearPart::free;
  } else {
    throw ConfigError("kernel.linear", "must be harmonic or free");
  }
  kr.validate();
  return kr;
}

SpectralVector initial_state(const Model& m, const nlohmann::json& spec, RngStream& rng) {
  const std::size_t N = m.dimension();
  const double w = m.weight();
  if (spec.is_string()) {
    const auto s = spec.get<std::string>();
    if (s == "zero") return SpectralVector::zeros(N, w, Representation::grid);
    if (s == "prior") return m.to_grid(SpectralVector::eigen(sample_gaussian(m.covariance(), rng).data(), w));
    throw ConfigError("initial", "unknown initial state '" + s + "'");
  }
  if (!spec.is_object()) throw ConfigError("initial", "must be a string or an object");
  auto vec = [&](const char* key) {
    auto v = spec.at(key).get<std::vector<double>>();
    if (v.size() != N) throw DimensionError(std::string("initial.") + key, N, v.size());
    return v;
  };
  if (spec.contains("grid")) return SpectralVector::grid(vec("grid"), w);
  if (spec.contains("eigen")) return m.to_grid(SpectralVector::eigen(vec("eigen"), w));
  const auto desc = m.describe();
  const std::size_t d = desc.at("d").get<std::size_t>(), pts = desc.at("m").get<std::size_t>();
  if (spec.contains("constant")) {
    const auto p = spec.at("constant").get<std::vector<double>>();
    if (p.size() != d) throw DimensionError("initial.constant", d, p.size());
    std::vector<double> g(N);
    for (std::size_t j = 0; j < pts; ++j)
      for (std::size_t i = 0; i < d; ++i) g[j * d + i] = p[i];
    return SpectralVector::grid(std::move(g), w);
  }
  if (spec.contains("circle")) {
    const auto& c = spec.at("circle");
    const auto center = c.at("center").get<std::vector<double>>();
    const double r = c.value("radius", 1.0);
    if (d != 2 || center.size() != 2) throw ConfigError("initial.circle", "needs d = 2 and a 2D center");
    std::vector<double> g(N);
    for (std::size_t j = 0; j < pts; ++j) {
      const double th = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(pts);
      g[2 * j] = center[0] + r * std::cos(th);
      g[2 * j + 1] = center[1] + r * std::sin(th);
    }
    return SpectralVector::grid(std::move(g), w);
  }
  throw ConfigError("initial", "expected one of grid, eigen, constant, circle");
}

ModelConstants model_constants(const Model& m, double T, const nlohmann::json& overrides) {
  const PointPotential& G = model_potential(m);
  const double M_G = get_or(overrides, "M_G", G.M_G, "theory.");
  const double L_G = get_or(overrides, "L_G", G.L_G, "theory.");
  if (!std::isfinite(M_G) || !std::isfinite(L_G))
    throw ConfigError("theory", "potential '" + G.name + "' has unbounded M_G/L_G; set theory.M_G and theory.L_G");
  if (const auto* t = dynamic_cast<const TpsModel*>(&m))
    return tps_constants(t->params().tau, t->params().d, M_G, L_G, T);
  const auto* p = dynamic_cast<const PimdModel*>(&m);
  return pimd_constants(p->params().beta, p->params().a, p->params().d, M_G, L_G, T);
}

TuneResult tune_stepsize(ModelPtr model, double T, const SpectralVector& x0, double target,
                         std::uint64_t seed, std::size_t trial_steps) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("target_acceptance", "must lie in (0, 1)");
  if (!(T > 1e-6)) throw ConfigError("kernel.T", "must exceed 1e-6");
  TuneResult res;
  auto measure = [&](double dt) {
    const PhmcKernel k = PhmcKernel::randomized(model, T, dt);
    RngStream rng(seed);
    const ChainStats st = run_chain(x0, k, trial_steps, rng);
    res.trace.push_back({dt, st.acceptance_rate});
    return st.acceptance_rate;
  };
  auto inside = [&](double a) { return a >= target && a <= target + 0.005; };
  double hi = T;
  const double a_hi = measure(hi);
  if (a_hi >= target) {
    res.dt = hi;
    res.acceptance = a_hi;
    return res;
  }
  double lo = hi, a_lo = a_hi;
  while (a_lo < target) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-6) throw Error("tune_stepsize: acceptance below target even at dt = 1e-6");
    a_lo = measure(lo);
  }
  double best = lo, best_acc = a_lo;
  if (inside(a_lo)) {
    res.dt = lo;
    res.acceptance = a_lo;
    return res;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double a = measure(mid);
    if (inside(a)) {
      res.dt = mid;
      res.acceptance = a;
      return res;
    }
    if (a >= target) {
      lo = mid;
      best = mid;
      best_acc = a;
    } else {
      hi = mid;
    }
    if (hi / lo < 1.0 + 1e-3) break;
  }
  res.dt = best;
  res.acceptance = best_acc;
  return res;
}

std::vector<KsModeResult> coupling_marginal_check(const CouplingKernel& kernel,
                                                  const SpectralVector& x, const SpectralVector& y,
                                                  const std::vector<std::size_t>& modes,
                                                  std::size_t samples, std::uint64_t seed,
                                                  std::size_t threads) {
  kernel.validate();
  const Model& m = *kernel.base.model;
  const std::size_t N = m.dimension();
  for (std::size_t j : modes)
    if (j >= N) throw ConfigError("modes", "mode index out of range");
  const SpectralVector xg = m.to_grid(x), yg = m.to_grid(y);
  const std::size_t nm = modes.size();
  std::vector<double> cx(samples * nm), cy(samples * nm), ix(samples * nm), iy(samples * nm);
  parallel_for(samples, threads, [&](std::size_t i) {
    std::vector<double> e(N);
    CoupledEngine eng(kernel);
    ChainState a = eng.chain().make_state(xg.coefficients());
    ChainState b = eng.chain().make_state(yg.coefficients());
    RngStream r0 = RngStream::derive(seed, {0, i});
    bool met = false;
    eng.step(a, b, met, r0);
    m.basis().to_eigen(a.q, e);
    for (std::size_t k = 0; k < nm; ++k) cx[k * samples + i] = e[modes[k]];
    m.basis().to_eigen(b.q, e);
    for (std::size_t k = 0; k < nm; ++k) cy[k * samples + i] = e[modes[k]];

    TransitionEngine te(kernel.base);
    ChainState s = te.make_state(xg.coefficients());
    RngStream r1 = RngStream::derive(seed, {1, i});
    te.step(s, r1);
    m.basis().to_eigen(s.q, e);
    for (std::size_t k = 0; k < nm; ++k) ix[k * samples + i] = e[modes[k]];
    s = te.make_state(yg.coefficients());
    RngStream r2 = RngStream::derive(seed, {2, i});
    te.step(s, r2);
    m.basis().to_eigen(s.q, e);
    for (std::size_t k = 0; k < nm; ++k) iy[k * samples + i] = e[modes[k]];
  });
  const double crit = ks_critical_value(samples, samples, 0.01);
  std::vector<KsModeResult> out;
  auto slice = [&](const std::vector<double>& v, std::size_t k) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(k * samples),
                               v.begin() + static_cast<std::ptrdiff_t>((k + 1) * samples));
  };
  for (std::size_t k = 0; k < nm; ++k) {
    const double sx = ks_statistic(slice(cx, k), slice(ix, k));
    const double sy = ks_statistic(slice(cy, k), slice(iy, k));
    out.push_back({"X", modes[k], sx, crit, sx < crit});
    out.push_back({"Y", modes[k], sy, crit, sy < crit});
  }
  return out;
}

// --- validation suite ------------------------------------------------------------------

namespace {

CheckResult check_eigen_lemmas(std::size_t m_max) {
  double worst = 0.0;
  std::size_t checked = 0;
  bool ok = true;
  for (double tau : {0.5, kPi, 4.0})
    for (std::size_t m = 1; m <= m_max; ++m) {
      const auto r = eigenvalue_lemma_check("tps", {{"tau", tau}}, m);
      worst = std::max({worst, r.max_violation_bracket, r.max_violation_ratio});
      checked += r.checked;
      ok = ok && r.ok();
    }
  for (auto [beta, a] : {std::pair{1.0, 0.1}, std::pair{2.0 * kPi, 1.0}, std::pair{3.0, 2.0}})
    for (std::size_t m = 1; m <= m_max; ++m) {
      const auto r = eigenvalue_lemma_check("pimd", {{"beta", beta}, {"a", a}}, m);
      worst = std::max({worst, r.max_violation_bracket, r.max_violation_ratio});
      checked += r.checked;
      ok = ok && r.ok();
    }
  return {"eigenvalue lemmas (tps, pimd)", ok, {{"m_max", m_max}, {"checked", checked}, {"max_violation", worst}}};
}

CheckResult check_matrix_formula(std::size_t m_max) {
  double worst = 0.0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    const double tau = 1.7;
    const auto A = TpsModel::laplacian_matrix(tau, m);
    Eigen::MatrixXd M = Eigen::Map<const Eigen::MatrixXd>(A.data(), static_cast<Eigen::Index>(m),
                                                          static_cast<Eigen::Index>(m));
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues();
    std::vector<double> got(m);
    for (std::size_t i = 0; i < m; ++i) got[i] = 1.0 / ev[static_cast<Eigen::Index>(i)];
    std::sort(got.rbegin(), got.rend());
    const auto want = TpsModel::discrete_eigenvalues(tau, m);
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(got[i] - want[i]) / want[i]);

    const double beta = 2.3, a = 0.4;
    const auto P = PimdModel::precision_matrix(beta, a, m);
    Eigen::MatrixXd Q = Eigen::Map<const Eigen::MatrixXd>(P.data(), static_cast<Eigen::Index>(m),
                                                          static_cast<Eigen::Index>(m));
    Eigen::VectorXd pv = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues();
    std::vector<double> pg(m), pw(m);
    for (std::size_t i = 0; i < m; ++i) {
      pg[i] = 1.0 / pv[static_cast<Eigen::Index>(i)];
      pw[i] = PimdModel::discrete_eigenvalue(beta, a, m, i + 1);
    }
    std::sort(pg.begin(), pg.end());
    std::sort(pw.begin(), pw.end());
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(pg[i] - pw[i]) / pw[i]);
  }
  return {"assembled matrix eigenvalues match formulas", worst <= 1e-10, {{"m_max", m_max}, {"max_rel_error", worst}}};
}

CheckResult check_roundtrip(RngStream& rng) {
  double worst = 0.0;
  for (const char* kind : {"tps", "pimd"})
    for (std::size_t m : {7, 16, 17}) {
      nlohmann::json cfg = {{"model", kind}, {"tau", 2.0}, {"beta", 1.5}, {"a", 0.5}, {"d", 2}, {"m", m},
                            {"potential", "zero"}};
      const auto model = build_model(cfg);
      std::vector<double> g(model->dimension());
      for (double& v : g) v = rng.normal();
      const auto back = model->to_grid(model->to_eigen(SpectralVector::grid(g, model->weight())));
      for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(back[i] - g[i]));
    }
  return {"grid/eigen round trip", worst <= 1e-12, {{"max_abs_error", worst}}};
}

CheckResult check_potentials(RngStream& rng, std::size_t samples) {
  nlohmann::json detail = nlohmann::json::object();
  bool ok = true;
  const std::vector<std::pair<std::string, nlohmann::json>> lib = {
      {"quadratic", {{"curvature", 1.5}}},
      {"quadratic_cosine", {{"curvature", 0.5}, {"amplitude", 0.3}, {"frequency", 2.0}}},
      {"normal_mixture", {{"components", 5}, {"seed", 3}, {"quadratic_shift", 1.0}}},
      {"laplace_mixture", {{"components", 4}, {"seed", 5}}},
      {"banana", {}},
      {"three_well", {}}};
  for (const auto& [name, params] : lib) {
    const auto G = potential_library(name, params, 2);
    const auto rep = validate_point_potential(G, rng, samples);
    const bool pass = rep.fd_ok && rep.bound_ok && rep.lipschitz_ok;
    detail[name] = to_json(rep);
    ok = ok && pass;
  }
  return {"potential gradients and declared bounds", ok, detail};
}

CheckResult check_sweeps(std::size_t points, std::uint64_t seed) {
  const auto t = tps_implication_sweep(points, seed);
  const auto p = pimd_implication_sweep(points, seed + 1);
  nlohmann::json d = {{"tps", {{"points", t.points}, {"held", t.model_condition_held},
                               {"failures", t.implication_failures}, {"R_failures", t.R_failures},
                               {"worst_ratio", t.worst_ratio}}},
                      {"pimd", {{"points", p.points}, {"held", p.model_condition_held},
                                {"failures", p.implication_failures}, {"R_failures", p.R_failures},
                                {"worst_ratio", p.worst_ratio}}}};
  return {"model conditions imply the general condition", t.ok() && p.ok(), d};
}

CheckResult check_dimension_free() {
  nlohmann::json ref;
  bool ok = true;
  for (std::size_t m : {64, 256, 1024}) {
    nlohmann::json cfg = {{"model", "tps"}, {"tau", 2.0}, {"d", 1}, {"m", m},
                          {"potential", {{"name", "normal_mixture"},
                                         {"params", {{"means", {{-1.0}, {1.0}}}, {"quadratic_shift", 1.0}}}}}};
    const auto model = build_model(cfg);
    const auto j = to_json(model_constants(*model, 0.01));
    if (ref.is_null()) ref = j;
    ok = ok && j.dump() == ref.dump();
  }
  return {"constant bundles independent of m", ok, {}};
}

CheckResult check_failure_law(RngStream& rng, std::size_t samples) {
  bool ok = true;
  nlohmann::json arr = nlohmann::json::array();
  const SpectralOperator Ct({2.0, 1.0, 0.5});
  for (int i = 0; i < 4; ++i) {
    const double gamma = 0.2 + 1.5 * rng.uniform();
    SpectralVector z = SpectralVector::eigen({rng.normal(), rng.normal(), rng.normal()});
    const auto r = coupling_failure_probability(z, gamma, Ct, samples, rng);
    const bool pass = std::abs(r.empirical - r.tv_exact) <= 3.0 * r.se + 1e-12 &&
                      r.empirical <= r.bound + 3.0 * r.se && r.tv_exact <= r.bound;
    ok = ok && pass;
    arr.push_back({{"h", r.h}, {"empirical", r.empirical}, {"tv_exact", r.tv_exact}, {"bound", r.bound}, {"se", r.se}});
  }
  return {"coupling failure law", ok, arr};
}

CheckResult check_reflection(RngStream& rng) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> lam{3.0 * rng.uniform() + 0.1, rng.uniform() + 0.1, 0.5 * rng.uniform() + 0.05};
    std::sort(lam.rbegin(), lam.rend());
    const SpectralOperator Ct(lam);
    const SpectralVector z = SpectralVector::eigen({rng.normal(), rng.normal(), rng.normal()});
    const SpectralVector u = SpectralVector::eigen({rng.normal(), rng.normal(), rng.normal()});
    const auto Rz = reflection_apply(z, z, Ct);
    const auto RRu = reflection_apply(reflection_apply(u, z, Ct), z, Ct);
    for (std::size_t j = 0; j < 3; ++j) {
      worst = std::max(worst, std::abs(Rz[j] + z[j]));
      worst = std::max(worst, std::abs(RRu[j] - u[j]));
    }
  }
  return {"reflection identities", worst <= 1e-12, {{"max_error", worst}}};
}

CheckResult check_flow(RngStream& rng) {
  nlohmann::json cfg = {{"model", "tps"}, {"tau", 1.0}, {"d", 1}, {"m", 16},
                        {"potential", {{"name", "quadratic_cosine"},
                                       {"params", {{"curvature", 0.5}, {"amplitude", 0.5}, {"frequency", 2.0}}}}}};
  const auto model = build_model(cfg);
  const Drift drift = Drift::from_model(*model);
  const std::size_t N = model->dimension();
  std::vector<double> q(N), v(N);
  for (auto& x : q) x = rng.normal();
  for (auto& x : v) x = rng.normal();
  const PhasePoint z{SpectralVector::grid(q, model->weight()), SpectralVector::grid(v, model->weight())};
  IntegratorConfig ic{0.05, Scheme::symmetric_splitting};
  PhasePoint a = splitting_step(z, ic, drift);
  for (auto& x : a.v.data()) x = -x;
  PhasePoint b = splitting_step(a, ic, drift);
  double rev = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    rev = std::max(rev, std::abs(b.q[i] - z.q[i]));
    rev = std::max(rev, std::abs(-b.v[i] - z.v[i]));
  }
  std::vector<double> errs;
  std::vector<PhasePoint> sols;
  for (int j = 0; j < 5; ++j) sols.push_back(flow_ode(z, 1.0, {0.1 / std::pow(2.0, j), Scheme::symmetric_splitting}, drift));
  for (int j = 0; j + 1 < 5; ++j) {
    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i) e += std::pow(sols[j].q[i] - sols[j + 1].q[i], 2);
    errs.push_back(std::sqrt(e * model->weight()));
  }
  std::vector<double> orders;
  bool order_ok = true;
  for (std::size_t j = 0; j + 1 < errs.size(); ++j) {
    orders.push_back(std::log2(errs[j] / errs[j + 1]));
    order_ok = order_ok && orders.back() >= 1.7 && orders.back() <= 2.3;
  }
  const auto free_model = build_model({{"model", "tps"}, {"tau", 1.0}, {"d", 1}, {"m", 16}, {"potential", "zero"}});
  const Drift lin = Drift::from_model(*free_model);
  const PhasePoint exact = flow_rotation(z, 3.7);
  const PhasePoint num = flow_ode(z, 3.7, {0.3, Scheme::symmetric_splitting}, lin);
  double ex = 0.0;
  for (std::size_t i = 0; i < N; ++i) ex = std::max({ex, std::abs(exact.q[i] - num.q[i]), std::abs(exact.v[i] - num.v[i])});
  return {"splitting integrator contracts", rev <= 1e-10 && ex <= 1e-12 && order_ok,
          {{"reversibility_error", rev}, {"exactness_error", ex}, {"orders", orders}}};
}

CheckResult check_marginals(std::size_t samples, std::uint64_t seed, std::size_t threads) {
  nlohmann::json cfg = {{"model", "tps"}, {"tau", 2.0}, {"d", 1}, {"m", 32},
                        {"potential", {{"name", "normal_mixture"},
                                       {"params", {{"means", {{-1.0}, {1.0}}}, {"quadratic_shift", 1.0}}}}}};
  const auto model = build_model(cfg);
  CouplingKernel ck;
  ck.base = PhmcKernel::randomized(model, 0.5, 0.05);
  ck.gamma = {GammaRule::one_over_T};
  ck.split.n = 4;
  ck.meet_threshold = 0.0;
  RngStream rng = RngStream::derive(seed, {99});
  const auto x = model->to_eigen(initial_state(*model, "prior", rng));
  const auto y = model->to_eigen(initial_state(*model, "prior", rng));
  const auto res = coupling_marginal_check(ck, x, y, {0, 1, 2, 20, 25, 31}, samples, seed, threads);
  bool ok = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : res) {
    ok = ok && r.ok;
    arr.push_back({{"component", r.component}, {"mode", r.mode}, {"ks", r.statistic}, {"critical", r.critical}});
  }
  return {"coupled marginals match the single-chain kernel", ok, arr};
}

CheckResult check_free_acceptance(std::uint64_t seed) {
  const auto model = build_model({{"model", "pimd"}, {"beta", 1.0}, {"a", 1.0}, {"d", 2}, {"m", 8}, {"potential", "zero"}});
  const auto k = PhmcKernel::randomized(model, 1.0, 0.1);
  RngStream rng(seed);
  const auto st = run_chain(SpectralVector::zeros(model->dimension(), model->weight(), Representation::grid), k, 200, rng);
  return {"acceptance is exactly one without a potential", st.accepted == st.steps, {{"acceptance_rate", st.acceptance_rate}}};
}

}  // namespace

std::vector<CheckResult> validation_suite(std::uint64_t seed, std::size_t threads, bool quick) {
  RngStream rng = RngStream::derive(seed, {7});
  std::vector<CheckResult> out;
  out.push_back(check_eigen_lemmas(512));
  out.push_back(check_matrix_formula(quick ? 12 : 32));
  out.push_back(check_roundtrip(rng));
  out.push_back(check_potentials(rng, quick ? 2000 : 10000));
  out.push_back(check_sweeps(1000, seed));
  out.push_back(check_dimension_free());
  out.push_back(check_failure_law(rng, quick ? 20000 : 100000));
  out.push_back(check_reflection(rng));
  out.push_back(check_flow(rng));
  out.push_back(check_marginals(quick ? 2000 : 10000, derive_seed(seed, {8}), threads));
  out.push_back(check_free_acceptance(seed));
  return out;
}

int run_experiment(const nlohmann::json& config, const RunOptions& options, std::ostream& log) {
  std::optional<OutputSet> outputs;
  try {
    if (!config.is_object()) throw ConfigError("", "config must be an object");
    Context c;
    c.cfg = config;
    c.log = &log;
    const std::string command = get_or<std::string>(config, "command", "", "");
    if (command.empty()) throw ConfigError("command", "required field missing");
    if (options.seed) {
      c.seed = *options.seed;
    } else if (config.contains("seed")) {
      c.seed = get_or(config, "seed", std::uint64_t{0}, "");
    } else {
      throw ConfigError("seed", "a seed is mandatory (config field or --seed)");
    }
    c.cfg["seed"] = c.seed;
    const std::size_t requested = options.threads ? options.threads : get_or(config, "threads", std::size_t{0}, "");
    c.threads = resolve_threads(requested);

    using Cmd = int (*)(Context&);
    const std::vector<std::pair<std::string, Cmd>> table = {
        {"sample", cmd_sample},       {"couple", cmd_couple},
        {"coupling-times", cmd_coupling_times}, {"constants", cmd_constants},
        {"check-conditions", cmd_check_conditions}, {"validate", cmd_validate},
        {"tune", cmd_tune}};
    Cmd fn = nullptr;
    for (const auto& [name, f] : table)
      if (name == command) fn = f;
    if (!fn) throw ConfigError("command", "unknown command '" + command + "'");

    outputs.emplace(options.out);
    c.out = &*outputs;
    const int code = fn(c);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outputs->files()) files.push_back(f.filename().string());
    files.push_back("manifest.json");
    const nlohmann::json manifest = {{"library", "phmc"},
                                     {"version", library_version()},
                                     {"command", command},
                                     {"seed", c.seed},
                                     {"config", c.cfg},
                                     {"rng", rng_documentation()},
                                     {"results", c.results},
                                     {"exit_code", code},
                                     {"outputs", files}};
    write_json(outputs->file("manifest.json"), manifest);
    return code;
  } catch (const DivergenceError& e) {
    log << "error: " << e.what() << "\n";
    if (outputs) outputs->discard();
    return exit_divergence;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    if (outputs) outputs->discard();
    return exit_config;
  } catch (const DimensionError& e) {
    log << "config error: " << e.what() << "\n";
    if (outputs) outputs->discard();
    return exit_config;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << "\n";
    if (outputs) outputs->discard();
    return exit_config;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    if (outputs) outputs->discard();
    return exit_validation;
  }
}

}  // namespace phmc
