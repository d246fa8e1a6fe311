#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/kernels.hpp"
#include "maxbloch/quantum.hpp"
#include "maxbloch/spectral.hpp"

namespace maxbloch {

// TM unknowns on the periodic (x, y, θ₀) grid. Fields are stored as complex
// samples of real functions; rho holds N² entry fields, (m,n) at m*N+n.
struct SingularState {
  Grid grid;
  Field bx, by, e;
  std::vector<Field> rho;
  double epsilon = 0.0;
  double time = 0.0;

  int n_levels() const;
  static SingularState zeros(const Grid& g, int n_levels, double epsilon);
};

struct Diagnostics {
  double t = 0.0;
  double sup_norm_e = 0.0;
  double l2_energy = 0.0;
  double trace_rho = 0.0;
  double herm_defect = 0.0;
  double coh_norm = 0.0;
  double div_defect = 0.0;
};

struct StiffOptions {
  double c_cfl = 0.5;
  bool dealias = true;
  kernels::Backend backend = kernels::Backend::OpenMP;
};

class ProfileSet;

enum class InitMode { Prepared, Unprepared };

class StiffSolver {
 public:
  StiffSolver(LevelSystem sys, PhaseLattice lat, Grid grid, double epsilon,
              StiffOptions opts = {});

  double epsilon() const { return epsilon_; }
  const Grid& grid() const { return grid_; }
  double dt_max() const;

  // Samples the profile data at t = 0 (plus an optional perturbation of the
  // same shape). Prepared mode rejects nonzero coherences.
  SingularState initialize(const ProfileSet& profiles, const SingularState* delta,
                           InitMode mode) const;

  void step(SingularState& s, double dt) const;

  using Observer = std::function<void(const SingularState&, const Diagnostics&)>;
  // Steps to t_final with a uniform step no larger than dt. Diagnostics are
  // recorded every `stride` steps and always at the final step.
  std::vector<Diagnostics> run(SingularState& s, double t_final, double dt, int stride,
                               const Observer& observer = {}) const;

  Diagnostics diagnose(const SingularState& s) const;
  double divergence_defect(const SingularState& s) const;

 private:
  struct Cache;
  const Cache& cache_for(double dt) const;
  void check_state(const SingularState& s) const;

  LevelSystem sys_;
  PhaseLattice lat_;
  Grid grid_;
  double epsilon_;
  StiffOptions opts_;
  mutable std::shared_ptr<Cache> cache_;
};

// Zero every Nyquist index of every component (done once at start).
void strip_nyquist(SingularState& s);

}  // namespace maxbloch
