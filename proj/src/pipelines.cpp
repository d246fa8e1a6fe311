#include "maxbloch/pipelines.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <set>

#include "json.hpp"
#include "maxbloch/errors.hpp"
#include "maxbloch/harness.hpp"
#include "maxbloch/io.hpp"

namespace maxbloch {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const std::set<std::string> kSubcommands = {"simulate", "profile", "residual", "converge",
                                            "spectral-info"};

struct Context {
  const RunConfig& cfg;
  fs::path out;
  LevelSystem sys;
  PhaseLattice lat;
  std::vector<std::string> outputs;
  std::ostream& log;

  void save(const std::string& name, const io::Csv& csv) {
    csv.save(out / name);
    outputs.push_back(name);
  }
  void save_json(const std::string& name, const ojson& j) {
    io::write_text(out / name, j.dump(2) + "\n");
    outputs.push_back(name);
  }
};

void require_tm(const Context& c, const std::string& what) {
  if (c.cfg.mode == "reduced3d") throw Error(what + " requires a TM mode");
}

std::string eps_tag(std::size_t i) { return "eps" + std::to_string(i); }

ProfileSet lifted(const Context& c) { return lift_initial_data(c.sys, c.lat, c.cfg.initial_data()); }

TmApproximation make_approx(const Context& c) {
  require_tm(c, "the profile hierarchy");
  const double h = c.cfg.slow_step;
  if (std::abs(std::round(c.cfg.t_star / h) * h - c.cfg.t_star) > 1e-12 * c.cfg.t_star)
    throw Error("solver.t_star must be a multiple of solver.slow_step");
  ProfileSet p0 = lifted(c);
  return TmApproximation(c.sys, c.lat, reduced_from_leading(p0), h, c.cfg.t_star);
}

ojson fit_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"ci95", {f.ci_low, f.ci_high}}, {"intercept", f.intercept}};
}

void simulate(Context& c) {
  const RunConfig& cfg = c.cfg;
  const double t_final = cfg.t_final > 0 ? cfg.t_final : cfg.t_star;
  if (cfg.mode == "reduced3d") {
    const Grid g = cfg.xy_grid();
    ReducedModel model(c.sys, c.lat, g);
    ReducedState s = reduced_from_leading(lifted(c));
    const long steps = std::lround(std::ceil(t_final / cfg.slow_step - 1e-9));
    const double h = t_final / steps;
    for (long i = 0; i <= steps; ++i) {
      if (i > 0) model.step(s, h);
      if (i % cfg.observer_stride != 0 && i != steps) continue;
      const std::string base = "snapshot_" + std::to_string(i);
      static const char* comp[3] = {"ex", "ey", "ez"};
      ojson files = ojson::array();
      for (int q = 0; q < 3; ++q) {
        const std::string name = base + "_" + comp[q] + ".csv";
        c.save(name, io::snapshot_csv(s, q));
        files.push_back(name);
      }
      c.save_json(base + ".json", {{"t", i * h},
                                   {"files", files},
                                   {"total_population", total_population(s)},
                                   {"grid_hash", io::grid_hash(g)}});
    }
    c.log << "reduced run: " << steps << " steps of " << h << "\n";
    return;
  }
  if (cfg.epsilons.empty()) throw Error("simulate needs at least one entry in epsilons");
  const bool unprepared = cfg.mode == "tm_unprepared";
  if (!unprepared && !cfg.coherences.empty())
    throw Error("initial_data.coherences: prepared mode requires zero coherences");
  ProfileSet p0 = lifted(c);
  if (!unprepared) {
    build_corrector1_tm(p0);
    build_corrector2_tm(p0);
  }
  const Grid sg = cfg.singular_grid();
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    const double eps = cfg.epsilons[e];
    StiffOptions opt;
    opt.c_cfl = cfg.c_cfl;
    StiffSolver solver(c.sys, c.lat, sg, eps, opt);
    SingularState delta = cfg.coherence_state(eps);
    SingularState s = solver.initialize(p0, unprepared ? &delta : nullptr,
                                        unprepared ? InitMode::Unprepared : InitMode::Prepared);
    strip_nyquist(s);
    const double dt = std::min(solver.dt_max(), cfg.dt_over_eps * eps);
    std::vector<Diagnostics> rows{solver.diagnose(s)};
    for (auto& d : solver.run(s, t_final, dt, cfg.observer_stride)) rows.push_back(d);
    c.save("observer_" + eps_tag(e) + ".csv", io::observer_csv(rows));
    c.log << "simulate eps=" << eps << " dt=" << dt << " final sup|E|=" << rows.back().sup_norm_e
          << "\n";
  }
}

void profile(Context& c) {
  TmApproximation approx = make_approx(c);
  const int last = approx.index_of(c.cfg.t_star);
  for (auto [name, i] : {std::pair<std::string, int>{"profile_t0", 0}, {"profile_tstar", last}}) {
    const ProfileSet& p = approx.profiles(i);
    p.check_polarizations(1e-10);
    io::write_profile_set(c.out / name, p);
    c.outputs.push_back(name + "/manifest.json");
  }
}

std::vector<int> sample_steps(const TmApproximation& approx, double t_star, int every) {
  const int last = approx.index_of(t_star);
  std::vector<int> out;
  for (int i = 0; i <= last; i += every) out.push_back(i);
  if (out.back() != last) out.push_back(last);
  return out;
}

void residual(Context& c) {
  TmApproximation approx = make_approx(c);
  if (c.cfg.epsilons.empty()) throw Error("residual needs at least one entry in epsilons");
  const auto steps = sample_steps(approx, c.cfg.t_star, c.cfg.observer_stride);
  io::Csv csv({"epsilon", "t", "sup", "l2"});
  std::vector<double> sup;
  for (double eps : c.cfg.epsilons) {
    double m = 0.0;
    for (const auto& r : residual_norms(approx, eps, steps, c.cfg.ntheta)) {
      csv.row({io::num(eps), io::num(r.t), io::num(r.sup), io::num(r.l2)});
      m = std::max(m, r.sup);
    }
    sup.push_back(m);
  }
  c.save("residual.csv", csv);
  ojson rep{{"epsilons", c.cfg.epsilons}, {"residual_sup", sup}};
  if (sup.size() >= 3) rep["fit"] = fit_json(fit_loglog(c.cfg.epsilons, sup));
  c.save_json("report.json", rep);
}

int converge(Context& c) {
  TmApproximation approx = make_approx(c);
  ConvergenceOptions opt;
  opt.epsilons = c.cfg.epsilons;
  opt.t_star = c.cfg.t_star;
  opt.ntheta = c.cfg.ntheta;
  opt.dt_over_eps = c.cfg.dt_over_eps;
  opt.delta_amplitude = c.cfg.delta_amplitude;
  opt.seed = c.cfg.seed;
  opt.sample_every = c.cfg.observer_stride;
  opt.c_cfl = c.cfg.c_cfl;
  const ConvergenceReport rep = convergence_study(approx, opt);

  io::Csv csv({"epsilon", "residual_sup", "error_sup", "dt", "steps", "diverged"});
  ojson rows = ojson::array(), timing = ojson::array();
  for (const auto& r : rep.rows) {
    csv.row({io::num(r.epsilon), io::num(r.residual_sup), io::num(r.error_sup), io::num(r.dt),
             std::to_string(r.steps), r.diverged ? "1" : "0"});
    rows.push_back({{"epsilon", r.epsilon},
                    {"residual_sup", r.residual_sup},
                    {"error_sup", r.error_sup},
                    {"dt", r.dt},
                    {"steps", r.steps},
                    {"diverged", r.diverged}});
    timing.push_back({{"epsilon", r.epsilon}, {"runtime_s", r.runtime_s}});
  }
  auto within = [](double v, const std::optional<std::array<double, 2>>& b) {
    return !b || ((*b)[0] <= v && v <= (*b)[1]);
  };
  const bool any_diverged =
      std::any_of(rep.rows.begin(), rep.rows.end(), [](const EpsilonRow& r) { return r.diverged; });
  const bool res_ok = within(rep.residual_fit.slope, c.cfg.residual_slope);
  const bool err_ok = !any_diverged && within(rep.error_fit.slope, c.cfg.error_slope);
  ojson thresholds = ojson::object();
  if (c.cfg.residual_slope)
    thresholds["residual_slope"] = {(*c.cfg.residual_slope)[0], (*c.cfg.residual_slope)[1]};
  if (c.cfg.error_slope)
    thresholds["error_slope"] = {(*c.cfg.error_slope)[0], (*c.cfg.error_slope)[1]};
  c.save("convergence.csv", csv);
  c.save_json("report.json", {{"rows", rows},
                              {"residual_fit", fit_json(rep.residual_fit)},
                              {"error_fit", fit_json(rep.error_fit)},
                              {"thresholds", thresholds},
                              {"residual_ok", res_ok},
                              {"error_ok", err_ok}});
  io::write_text(c.out / "timing.json", ojson{{"runs", timing}}.dump(2) + "\n");
  c.log << "residual slope " << rep.residual_fit.slope << " error slope " << rep.error_fit.slope
        << "\n";
  return res_ok && err_ok ? kExitOk : kExitThreshold;
}

void spectral_info(Context& c) {
  const auto res = resonant_set(c.sys, c.lat);
  io::Csv csv({"alpha0", "alpha1", "class", "v", "a_coeff", "resonant_pairs"});
  auto pairs_for = [&](const IntVec& a1) {
    std::string s;
    for (const auto& r : res)
      if (r.alpha1 == a1) {
        if (!s.empty()) s += ';';
        s += "(" + std::to_string(r.m + 1) + " " + std::to_string(r.n + 1) + ")";
      }
    return s;
  };
  auto emit = [&](const ModeIndex& m) {
    const ModeClass k = classify_mode(c.lat, m);
    std::string v, a;
    if (k == ModeClass::CPlus || k == ModeClass::CMinus || k == ModeClass::CZero) {
      v = io::num(group_velocity(c.lat, m));
      a = io::num(diffraction_coeff(c.lat, m));
    }
    csv.row({io::join(m.alpha0), io::join(m.alpha1), std::string(to_string(k)), v, a,
             pairs_for(m.alpha1)});
  };
  const int d = c.lat.d();
  std::set<ModeIndex> rows;
  // Characteristic modes over the α₀ box.
  IntVec b(d, -c.lat.a_max());
  while (true) {
    IntVec minus = b;
    for (auto& x : minus) x = -x;
    for (const IntVec& a1 : {IntVec(d, 0), b, minus}) {
      ModeIndex m{b, a1, 0};
      if (c.lat.in_truncation(m)) rows.insert(m);
    }
    int q = 0;
    while (q < d && ++b[q] > c.lat.a_max()) b[q++] = -c.lat.a_max();
    if (q == d) break;
  }
  for (const auto& r : res) rows.insert(ModeIndex{IntVec(d, 0), r.alpha1, 0});
  for (const auto& m : rows) emit(m);
  c.save("spectral_info.csv", csv);
}

}  // namespace

bool is_subcommand(const std::string& name) { return kSubcommands.count(name) > 0; }

int dispatch(const std::string& subcommand, const RunConfig& cfg, const RunFlags& flags,
             std::ostream& log) {
  if (!is_subcommand(subcommand)) throw std::invalid_argument("unknown subcommand " + subcommand);
  if (flags.threads < 1) throw Error("--threads must be positive");
  omp_set_num_threads(flags.threads);
  Context c{cfg, fs::path(flags.out_dir.value_or(cfg.output_dir)), cfg.system(), cfg.lattice(), {},
            log};
  io::ensure_dir(c.out);
  int code = kExitOk;
  if (subcommand == "simulate") simulate(c);
  else if (subcommand == "profile") profile(c);
  else if (subcommand == "residual") residual(c);
  else if (subcommand == "converge") code = converge(c);
  else spectral_info(c);

  ojson grids{{"xy", io::grid_hash(cfg.xy_grid())}};
  if (cfg.mode != "reduced3d") grids["singular"] = io::grid_hash(cfg.singular_grid());
  ojson man{{"subcommand", subcommand},
            {"code_version", std::string(io::kCodeVersion)},
            {"config_hash", io::hex64(io::fnv1a(cfg.source_text))},
            {"seed", cfg.seed},
            {"threads", flags.threads},
            {"grids", grids},
            {"outputs", c.outputs}};
  io::write_text(c.out / "manifest.json", man.dump(2) + "\n");
  return code;
}

}  // namespace maxbloch
