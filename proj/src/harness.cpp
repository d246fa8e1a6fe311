#include "maxbloch/harness.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "maxbloch/errors.hpp"
#include "maxbloch/fft.hpp"

namespace maxbloch {

TmApproximation::TmApproximation(LevelSystem sys, PhaseLattice lat, ReducedState initial,
                                 double h, double t_final, int max_order)
    : sys_(std::move(sys)), lat_(std::move(lat)), h_(h), max_order_(max_order) {
  if (!(h_ > 0.0)) throw std::invalid_argument("TmApproximation: h must be positive");
  if (!(t_final >= 0.0)) throw std::invalid_argument("TmApproximation: negative horizon");
  steps_ = static_cast<int>(std::ceil(t_final / h_ - 1e-9));
  ReducedModel model(sys_, lat_, initial.grid);
  initial.t = 0.0;
  states_.reserve(steps_ + 3);
  states_.push_back(std::move(initial));
  // Two extra states so central differences reach the last grid time.
  for (int i = 1; i <= steps_ + 2; ++i) {
    ReducedState next = states_.back();
    model.step(next, h_);
    next.t = i * h_;
    states_.push_back(std::move(next));
  }
}

int TmApproximation::index_of(double t) const {
  const long i = std::lround(t / h_);
  if (std::abs(i * h_ - t) > 1e-9 * std::max(1.0, std::abs(t)) || i < 0 || i > steps_)
    throw std::invalid_argument("TmApproximation: time is not on the slow grid");
  return static_cast<int>(i);
}

const ProfileSet& TmApproximation::profiles(int i) {
  auto it = profiles_.find(i);
  if (it != profiles_.end()) return it->second;
  ProfileSet p = leading_from_reduced(sys_, lat_, states_.at(i));
  if (max_order_ >= 1) build_corrector1_tm(p);
  if (max_order_ >= 2) build_corrector2_tm(p);
  p.t = time(i);
  return profiles_.emplace(i, std::move(p)).first->second;
}

const ProfileSet& TmApproximation::profiles_dt(int i) {
  auto it = profiles_dt_.find(i);
  if (it != profiles_dt_.end()) return it->second;
  const double w = 1.0 / (12.0 * h_);
  std::vector<std::pair<double, int>> stencil;
  if (i >= 2)
    stencil = {{w, i - 2}, {-8 * w, i - 1}, {8 * w, i + 1}, {-w, i + 2}};
  else if (i == 1)
    stencil = {{-3 * w, 0}, {-10 * w, 1}, {18 * w, 2}, {-6 * w, 3}, {w, 4}};
  else
    stencil = {{-25 * w, 0}, {48 * w, 1}, {-36 * w, 2}, {16 * w, 3}, {-3 * w, 4}};
  std::vector<std::pair<double, const ProfileSet*>> terms;
  for (const auto& [c, j] : stencil) terms.emplace_back(c, &profiles(j));
  ProfileSet d = combine(terms);
  d.t = time(i);
  return profiles_dt_.emplace(i, std::move(d)).first->second;
}

SingularState TmApproximation::assemble(int i, double epsilon, int ntheta) {
  return assemble_uapp(profiles(i), epsilon, time(i), ntheta, max_order_);
}

SingularState TmApproximation::assemble_dt(int i, double epsilon, int ntheta) {
  const double gamma = sys_.gamma();
  SingularState slow = assemble_uapp(profiles_dt(i), epsilon, time(i), ntheta, max_order_);
  SingularState fast = assemble_uapp(
      profiles(i), epsilon, time(i), ntheta, max_order_, [&](int, const ModeIndex& m) {
        return cplx(-m.kappa * gamma / epsilon, -lat_.dot(m.alpha1) / epsilon);
      });
  axpy(slow.bx, 1.0, fast.bx);
  axpy(slow.by, 1.0, fast.by);
  axpy(slow.e, 1.0, fast.e);
  for (std::size_t q = 0; q < slow.rho.size(); ++q) axpy(slow.rho[q], 1.0, fast.rho[q]);
  return slow;
}

namespace {

// ∂x + (k/ε)∂θ₀ (axis 0 / 2) or (1/√ε)∂y (axis 1) spectrally.
Field singular_derivative(const Field& f, const Grid& g, int which, double k, double epsilon) {
  Field h = to_fourier(f, g);
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j)
      for (int l = 0; l < g.n(2); ++l) {
        const double w = which == 0
                             ? g.wavenumber(0, i) + k * g.wavenumber(2, l) / epsilon
                             : g.wavenumber(1, j) / std::sqrt(epsilon);
        h[g.index(i, j, l)] *= cplx(0.0, w);
      }
  return to_physical(std::move(h), g);
}

}  // namespace

SingularState tm_residual(const LevelSystem& sys, const PhaseLattice& lat, const SingularState& u,
                          const SingularState& ut) {
  const Grid& g = u.grid;
  const double eps = u.epsilon;
  const double k = lat.k()[0];
  const int n = sys.n_levels();
  const double se = std::sqrt(eps);
  SingularState r = ut;
  const Field dye = singular_derivative(u.e, g, 1, k, eps);
  const Field dxe = singular_derivative(u.e, g, 0, k, eps);
  const Field dxby = singular_derivative(u.by, g, 0, k, eps);
  const Field dybx = singular_derivative(u.bx, g, 1, k, eps);
  axpy(r.bx, 1.0, dye);
  axpy(r.by, -1.0, dxe);
  axpy(r.e, -1.0, dxby);
  axpy(r.e, 1.0, dybx);
  const Eigen::MatrixXcd gz = sys.dipole_component(2);
  for (std::size_t p = 0; p < g.size(); ++p) {
    DensityMatrix rho(n, n);
    for (int q = 0; q < n * n; ++q) rho(q / n, q % n) = u.rho[q][p];
    const auto [rd, rc] = split_diag_offdiag(rho);
    const DensityMatrix oc = omega_gamma_apply(sys, rc);
    const DensityMatrix wn = pauli_sharp(sys, rd);
    const cplx src = (gz * oc).trace();
    const cplx trw = (gz * wn).trace();
    r.e[p] -= I / se * src - se * trw;
    const DensityMatrix f = -I / eps * oc + I / se * u.e[p] * commutator(gz, rho) + wn;
    for (int q = 0; q < n * n; ++q) r.rho[q][p] -= f(q / n, q % n);
  }
  return r;
}

double sup_norm(const SingularState& s) {
  double m = std::max({sup_abs(s.bx), sup_abs(s.by), sup_abs(s.e)});
  for (const auto& f : s.rho) m = std::max(m, sup_abs(f));
  return m;
}

double l2_norm(const SingularState& s) {
  double acc = sum_sq(s.bx) + sum_sq(s.by) + sum_sq(s.e);
  for (const auto& f : s.rho) acc += sum_sq(f);
  return std::sqrt(acc * s.grid.cell_volume());
}

double l2_norm(const Field& f, const Grid& g) { return std::sqrt(sum_sq(f) * g.cell_volume()); }

SingularState difference(const SingularState& a, const SingularState& b) {
  if (!(a.grid == b.grid) || a.rho.size() != b.rho.size())
    throw std::invalid_argument("difference: state shapes differ");
  SingularState d = a;
  axpy(d.bx, -1.0, b.bx);
  axpy(d.by, -1.0, b.by);
  axpy(d.e, -1.0, b.e);
  for (std::size_t q = 0; q < d.rho.size(); ++q) axpy(d.rho[q], -1.0, b.rho[q]);
  return d;
}

std::vector<ResidualSample> residual_norms(TmApproximation& approx, double epsilon,
                                           const std::vector<int>& sample_steps, int ntheta) {
  std::vector<ResidualSample> out;
  for (int i : sample_steps) {
    SingularState u = approx.assemble(i, epsilon, ntheta);
    SingularState ut = approx.assemble_dt(i, epsilon, ntheta);
    SingularState r = tm_residual(approx.system(), approx.lattice(), u, ut);
    out.push_back({approx.time(i), sup_norm(r), l2_norm(r)});
  }
  return out;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("fit_loglog: at least 3 points are required");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: nonpositive value");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    sse += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  const double se = dof > 0 ? std::sqrt(sse / dof / sxx) : 0.0;
  const double tq =
      dof > 0 ? boost::math::quantile(boost::math::students_t(dof), 0.975) : 0.0;
  f.ci_low = f.slope - tq * se;
  f.ci_high = f.slope + tq * se;
  return f;
}

SingularState seeded_perturbation(const Grid& g, int n_levels, double epsilon, std::uint64_t seed,
                                  int max_mode) {
  SingularState s = SingularState::zeros(g, n_levels, epsilon);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  for (Field* f : {&s.bx, &s.by, &s.e}) {
    for (int a = -max_mode; a <= max_mode; ++a)
      for (int b = -max_mode; b <= max_mode; ++b)
        for (int c = -max_mode; c <= max_mode; ++c) {
          const double A = amp(rng) / (1.0 + a * a + b * b + c * c);
          const double P = ph(rng);
          for (int i = 0; i < g.n(0); ++i)
            for (int j = 0; j < g.n(1); ++j)
              for (int l = 0; l < g.n(2); ++l) {
                const double arg = a * 2.0 * std::numbers::pi * i / g.n(0) +
                                   b * 2.0 * std::numbers::pi * j / g.n(1) +
                                   c * 2.0 * std::numbers::pi * l / g.n(2) + P;
                (*f)[g.index(i, j, l)] += A * std::cos(arg);
              }
        }
    const double m = sup_abs(*f);
    if (m > 0)
      for (auto& v : *f) v /= m;
  }
  return s;
}

double commensurate_step(double h, double target) {
  if (!(h > 0.0) || !(target > 0.0)) throw std::invalid_argument("commensurate_step: bad input");
  const double m = std::ceil(h / target - 1e-12);
  return h / m;
}

ConvergenceReport convergence_study(TmApproximation& approx, const ConvergenceOptions& opt,
                                    bool run_stiff) {
  const auto& eps = opt.epsilons;
  if (eps.size() < 3) throw std::invalid_argument("convergence_study: at least 3 epsilons required");
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1]))
      throw std::invalid_argument("convergence_study: epsilons must be strictly decreasing");
  const int last = approx.index_of(opt.t_star);
  std::vector<int> samples;
  for (int i = 0; i <= last; i += opt.sample_every) samples.push_back(i);
  if (samples.back() != last) samples.push_back(last);

  ConvergenceReport rep;
  rep.epsilons = eps;
  const LevelSystem& sys = approx.system();
  const PhaseLattice& lat = approx.lattice();
  const int n = sys.n_levels();
  for (double e : eps) {
    EpsilonRow row;
    row.epsilon = e;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& r : residual_norms(approx, e, samples, opt.ntheta))
      row.residual_sup = std::max(row.residual_sup, r.sup);
    if (run_stiff) {
      const Grid& pg = approx.profiles(0).grid();
      const Grid sg({pg.n(0), pg.n(1), opt.ntheta},
                    {pg.length(0), pg.length(1), 2.0 * std::numbers::pi});
      StiffOptions so;
      so.c_cfl = opt.c_cfl;
      StiffSolver solver(sys, lat, sg, e, so);
      const double target = std::min(solver.dt_max(), opt.dt_over_eps * e);
      const double dt = commensurate_step(approx.h(), target);
      row.dt = dt;
      SingularState delta = seeded_perturbation(sg, n, e, opt.seed);
      const double scale = opt.delta_amplitude * std::sqrt(e);
      for (Field* f : {&delta.bx, &delta.by, &delta.e})
        for (auto& v : *f) v *= scale;
      SingularState s = solver.initialize(approx.profiles(0), &delta, InitMode::Prepared);
      strip_nyquist(s);
      const long per_h = std::lround(approx.h() / dt);
      try {
        int prev = 0;
        for (int i : samples) {
          if (i > prev) {
            solver.run(s, approx.time(i), dt, static_cast<int>(per_h * (i - prev)));
            row.steps += per_h * (i - prev);
            prev = i;
          }
          SingularState a = approx.assemble(i, e, opt.ntheta);
          row.error_sup = std::max(row.error_sup, sup_norm(difference(s, a)));
        }
      } catch (const StepError&) {
        row.diverged = true;
      }
    }
    row.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.rows.push_back(row);
  }
  std::vector<double> fe, fr, ferr, fe2;
  for (const auto& r : rep.rows) {
    rep.residual_norms.push_back(r.residual_sup);
    rep.error_norms.push_back(r.error_sup);
    fe.push_back(r.epsilon);
    fr.push_back(r.residual_sup);
    if (run_stiff && !r.diverged) {
      fe2.push_back(r.epsilon);
      ferr.push_back(r.error_sup);
    }
  }
  rep.residual_fit = fit_loglog(fe, fr);
  if (run_stiff && fe2.size() >= 3) rep.error_fit = fit_loglog(fe2, ferr);
  return rep;
}

double decay_fit(const std::vector<double>& times, const std::vector<double>& norms,
                 const LevelSystem& sys, double epsilon) {
  (void)sys;
  (void)epsilon;
  if (times.size() != norms.size()) throw std::invalid_argument("decay_fit: length mismatch");
  if (norms.empty() || !(norms.front() > 0.0))
    throw Error("decay_fit: no coherence signal (prepared data?)");
  std::vector<double> t, l;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > std::numeric_limits<double>::min()) || !std::isfinite(norms[i])) break;
    t.push_back(times[i]);
    l.push_back(std::log(norms[i]));
  }
  if (t.size() < 3) throw Error("decay_fit: fewer than 3 samples before underflow");
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    ml += l[i];
  }
  mt /= t.size();
  ml /= t.size();
  double stt = 0, stl = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stl += (t[i] - mt) * (l[i] - ml);
  }
  return stl / stt;
}

std::vector<double> sublinearity_diagnostic(Branch k, const std::vector<Field>& samples,
                                            double dt_sample, const std::vector<double>& s_values,
                                            const Grid& g) {
  std::vector<double> out;
  for (double S : s_values) out.push_back(l2_norm(birkhoff_average(k, samples, dt_sample, S, g), g));
  return out;
}

}  // namespace maxbloch
