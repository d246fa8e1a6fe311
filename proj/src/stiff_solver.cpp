#include "maxbloch/stiff_solver.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "maxbloch/errors.hpp"
#include "maxbloch/fft.hpp"
#include "maxbloch/profile_builder.hpp"

namespace maxbloch {

int SingularState::n_levels() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(rho.size()))));
}

SingularState SingularState::zeros(const Grid& g, int n_levels, double epsilon) {
  SingularState s;
  s.grid = g;
  s.bx = maxbloch::zeros(g);
  s.by = maxbloch::zeros(g);
  s.e = maxbloch::zeros(g);
  s.rho.assign(static_cast<std::size_t>(n_levels) * n_levels, maxbloch::zeros(g));
  s.epsilon = epsilon;
  return s;
}

void strip_nyquist(SingularState& s) {
  const Grid& g = s.grid;
  auto strip = [&](Field& f) {
    Field h = to_fourier(f, g);
    for (int i = 0; i < g.n(0); ++i)
      for (int j = 0; j < g.n(1); ++j)
        for (int l = 0; l < g.n(2); ++l)
          if (g.is_nyquist(0, i) || g.is_nyquist(1, j) || g.is_nyquist(2, l))
            h[g.index(i, j, l)] = cplx{};
    f = to_physical(std::move(h), g);
  };
  strip(s.bx);
  strip(s.by);
  strip(s.e);
  for (auto& r : s.rho) strip(r);
}

struct StiffSolver::Cache {
  double dt = 0.0;
  kernels::MaxwellPropagator half;
  kernels::BlochStepCoeffs bloch;
  std::vector<cplx> decay_half;  // per (m,n)
  std::mutex mutex;
};

StiffSolver::StiffSolver(LevelSystem sys, PhaseLattice lat, Grid grid, double epsilon,
                         StiffOptions opts)
    : sys_(std::move(sys)), lat_(std::move(lat)), grid_(grid), epsilon_(epsilon), opts_(opts) {
  std::vector<std::string> bad;
  if (!(epsilon_ > 0.0)) bad.push_back("epsilon: must be positive");
  if (lat_.d() != 1) bad.push_back("lattice.d: the stiff solver handles a single phase");
  if (!sys_.is_tm()) bad.push_back("dipole: TM runs use the z component only");
  for (int a = 0; a < 3; ++a)
    if (grid_.n(a) & (grid_.n(a) - 1)) bad.push_back("grids: sizes must be powers of two");
  if (std::abs(grid_.length(2) - 2.0 * std::numbers::pi) > 1e-12)
    bad.push_back("grids: the theta axis must have length 2*pi");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  cache_ = std::make_shared<Cache>();
}

double StiffSolver::dt_max() const {
  const double se = std::sqrt(epsilon_);
  return opts_.c_cfl * std::min({se, grid_.spacing(0), se * grid_.spacing(1)});
}

const StiffSolver::Cache& StiffSolver::cache_for(double dt) const {
  std::lock_guard lock(cache_->mutex);
  if (cache_->dt != dt || cache_->half.mats.empty()) {
    cache_->dt = dt;
    cache_->half = kernels::make_tm_propagator(grid_, lat_.k()[0], epsilon_, 0.5 * dt);
    cache_->bloch = kernels::make_bloch_step(sys_, epsilon_, dt);
    const int n = sys_.n_levels();
    cache_->decay_half.assign(n * n, 1.0);
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q)
        if (m != q)
          cache_->decay_half[m * n + q] =
              std::exp(cplx(-sys_.gamma(), -omega_diff(sys_, m, q)) * (0.5 * dt / epsilon_));
  }
  return *cache_;
}

void StiffSolver::check_state(const SingularState& s) const {
  if (!(s.grid == grid_)) throw std::invalid_argument("state grid does not match the solver");
  if (s.n_levels() != sys_.n_levels()) throw std::invalid_argument("state level count mismatch");
}

SingularState StiffSolver::initialize(const ProfileSet& profiles, const SingularState* delta,
                                      InitMode mode) const {
  if (!(profiles.grid().n(0) == grid_.n(0) && profiles.grid().n(1) == grid_.n(1) &&
        profiles.grid().length(0) == grid_.length(0) &&
        profiles.grid().length(1) == grid_.length(1)))
    throw std::invalid_argument("initialize: profile grid does not match the solver grid");
  if (mode == InitMode::Prepared) {
    const int n = sys_.n_levels();
    for (const auto& [key, c] : profiles.slots())
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (key.order == 0 && a != b && !c.rho[a * n + b].empty() &&
              !all_zero(c.rho[a * n + b]))
            throw std::invalid_argument("initialize: prepared mode requires zero coherences");
  }
  SingularState s = assemble_uapp(profiles, epsilon_, 0.0, grid_.n(2));
  if (delta) {
    check_state(*delta);
    axpy(s.bx, 1.0, delta->bx);
    axpy(s.by, 1.0, delta->by);
    axpy(s.e, 1.0, delta->e);
    for (std::size_t q = 0; q < s.rho.size(); ++q) axpy(s.rho[q], 1.0, delta->rho[q]);
  }
  s.time = 0.0;
  return s;
}

void StiffSolver::step(SingularState& s, double dt) const {
  check_state(s);
  if (!(std::abs(dt) <= dt_max() * (1.0 + 1e-12)) || dt == 0.0) {
    std::ostringstream os;
    os << "step: |dt| = " << std::abs(dt) << " violates the CFL bound " << dt_max();
    throw StepError(os.str());
  }
  const Cache& c = cache_for(dt);
  const auto& plan = plan_for(grid_);
  const int n = sys_.n_levels();
  const auto backend = opts_.backend;

  auto linear_half = [&]() {
    plan.forward(s.bx);
    plan.forward(s.by);
    plan.forward(s.e);
    kernels::apply_propagator(backend, c.half, s.bx, s.by, s.e);
    plan.inverse(s.bx);
    plan.inverse(s.by);
    plan.inverse(s.e);
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q) {
        if (m == q) continue;
        const cplx f = c.decay_half[m * n + q];
        for (auto& v : s.rho[m * n + q]) v *= f;
      }
  };

  linear_half();
  if (opts_.dealias) {
    Field e0 = s.e;
    std::vector<Field> r0 = s.rho;
    kernels::bloch_step(backend, c.bloch, s.e, s.rho);
    auto filter = [&](Field& now, const Field& before) {
      Field d(now.size());
      for (std::size_t p = 0; p < d.size(); ++p) d[p] = now[p] - before[p];
      plan.forward(d);
      dealias_fourier(d, grid_);
      plan.inverse(d);
      for (std::size_t p = 0; p < d.size(); ++p) now[p] = before[p] + d[p];
    };
    filter(s.e, e0);
    for (int q = 0; q < n * n; ++q) filter(s.rho[q], r0[q]);
  } else {
    kernels::bloch_step(backend, c.bloch, s.e, s.rho);
  }
  linear_half();
  s.time += dt;

  double probe = 0.0;  // any inf/nan poisons the sum
  for (const auto& v : s.e) probe += v.real() + v.imag();
  for (const auto& r : s.rho)
    for (const auto& v : r) probe += v.real() + v.imag();
  if (!std::isfinite(probe)) {
    std::ostringstream os;
    os << "step: non-finite values at t = " << s.time;
    throw StepError(os.str());
  }
}

std::vector<Diagnostics> StiffSolver::run(SingularState& s, double t_final, double dt, int stride,
                                          const Observer& observer) const {
  if (!(t_final > s.time)) throw std::invalid_argument("run: t_final must exceed the state time");
  if (!(dt > 0.0)) throw std::invalid_argument("run: dt must be positive");
  if (stride < 1) throw std::invalid_argument("run: observer stride must be positive");
  const double span = t_final - s.time;
  const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
  const double h = span / steps;
  const double t0 = s.time;
  std::vector<Diagnostics> out;
  for (long i = 1; i <= steps; ++i) {
    step(s, h);
    s.time = t0 + i * h;  // avoid drift from repeated addition
    if (i % stride == 0 || i == steps) {
      Diagnostics d = diagnose(s);
      out.push_back(d);
      if (observer) observer(s, d);
    }
  }
  return out;
}

double StiffSolver::divergence_defect(const SingularState& s) const {
  check_state(s);
  const auto& plan = plan_for(grid_);
  Field bx = s.bx, by = s.by;
  plan.forward(bx);
  plan.forward(by);
  const double k = lat_.k()[0];
  const double rs = 1.0 / std::sqrt(epsilon_);
  double acc = 0.0;
  for (int i = 0; i < grid_.n(0); ++i)
    for (int j = 0; j < grid_.n(1); ++j)
      for (int l = 0; l < grid_.n(2); ++l) {
        const std::size_t q = grid_.index(i, j, l);
        const double kx = grid_.wavenumber(0, i) + k * grid_.wavenumber(2, l) / epsilon_;
        const double ky = grid_.wavenumber(1, j) * rs;
        acc += std::norm(I * kx * bx[q] + I * ky * by[q]);
      }
  // Parseval: Σ|f|² = Σ|f̂|²/N.
  return std::sqrt(acc / static_cast<double>(grid_.size()) * grid_.cell_volume());
}

Diagnostics StiffSolver::diagnose(const SingularState& s) const {
  check_state(s);
  Diagnostics d;
  d.t = s.time;
  const int n = sys_.n_levels();
  const double dv = grid_.cell_volume();
  double energy = 0.0, coh = 0.0, trace = 0.0, herm = 0.0;
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    d.sup_norm_e = std::max(d.sup_norm_e, std::abs(s.e[p]));
    energy += std::norm(s.bx[p]) + std::norm(s.by[p]) + std::norm(s.e[p]);
    for (int a = 0; a < n; ++a) {
      trace += s.rho[a * n + a][p].real();
      for (int b = 0; b < n; ++b) {
        if (a != b) coh += std::norm(s.rho[a * n + b][p]);
        herm = std::max(herm, std::abs(s.rho[a * n + b][p] - std::conj(s.rho[b * n + a][p])));
      }
    }
  }
  d.l2_energy = energy * dv;
  d.trace_rho = trace / static_cast<double>(grid_.size());
  d.herm_defect = herm;
  d.coh_norm = std::sqrt(coh * dv);
  d.div_defect = divergence_defect(s);
  return d;
}

}  // namespace maxbloch
