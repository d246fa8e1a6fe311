#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "maxbloch/profile_builder.hpp"
#include "maxbloch/reduced_model.hpp"
#include "maxbloch/spectral.hpp"
#include "maxbloch/stiff_solver.hpp"

namespace maxbloch {

// Limiting-model trajectory on a uniform slow-time grid t_i = i·h together
// with the TM profile hierarchy built from it. Profiles do not depend on ε.
class TmApproximation {
 public:
  TmApproximation(LevelSystem sys, PhaseLattice lat, ReducedState initial, double h,
                  double t_final, int max_order = 2);

  double h() const { return h_; }
  int steps() const { return steps_; }
  double time(int i) const { return i * h_; }
  int index_of(double t) const;  // throws unless t is a grid time

  const ProfileSet& profiles(int i);
  // Slow time derivative of every profile slot (4th-order differences).
  const ProfileSet& profiles_dt(int i);
  const ReducedState& reduced(int i) const { return states_.at(i); }

  SingularState assemble(int i, double epsilon, int ntheta);
  // d/dt of the assembled field including the fast phases and κ decay.
  SingularState assemble_dt(int i, double epsilon, int ntheta);

  const LevelSystem& system() const { return sys_; }
  const PhaseLattice& lattice() const { return lat_; }
  int max_order() const { return max_order_; }

 private:
  LevelSystem sys_;
  PhaseLattice lat_;
  double h_;
  int steps_;
  int max_order_;
  std::vector<ReducedState> states_;
  std::map<int, ProfileSet> profiles_;
  std::map<int, ProfileSet> profiles_dt_;
};

struct ResidualSample {
  double t = 0.0;
  double sup = 0.0;
  double l2 = 0.0;
};

// Singular TM operator minus the nonlinearity applied to (U, ∂tU).
SingularState tm_residual(const LevelSystem& sys, const PhaseLattice& lat, const SingularState& u,
                          const SingularState& ut);
double sup_norm(const SingularState& s);
double l2_norm(const SingularState& s);
SingularState difference(const SingularState& a, const SingularState& b);

std::vector<ResidualSample> residual_norms(TmApproximation& approx, double epsilon,
                                           const std::vector<int>& sample_steps, int ntheta);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;  // 95% interval on the slope
  double ci_high = 0.0;
};
// Least squares on (log x, log y); needs at least 3 points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Smooth seeded field on the singular grid with sup norm 1 in each of
// Bx, By and E (ρ untouched).
SingularState seeded_perturbation(const Grid& g, int n_levels, double epsilon, std::uint64_t seed,
                                  int max_mode = 2);

struct ConvergenceOptions {
  std::vector<double> epsilons;
  double t_star = 0.5;
  int ntheta = 16;
  double dt_over_eps = 0.05;
  double delta_amplitude = 1.0;  // δ^ε = amplitude·√ε·field
  std::uint64_t seed = 1;
  int sample_every = 8;          // slow-time steps between error samples
  double c_cfl = 0.5;
};

struct EpsilonRow {
  double epsilon = 0.0;
  double residual_sup = 0.0;
  double error_sup = 0.0;
  double dt = 0.0;
  long steps = 0;
  bool diverged = false;
  double runtime_s = 0.0;
};

struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<double> residual_norms;
  std::vector<double> error_norms;
  SlopeFit residual_fit;
  SlopeFit error_fit;
  std::vector<EpsilonRow> rows;
};

ConvergenceReport convergence_study(TmApproximation& approx, const ConvergenceOptions& opt,
                                    bool run_stiff = true);

// Largest uniform step ≤ target that divides h.
double commensurate_step(double h, double target);

// Least-squares slope of log(norms) against times.
double decay_fit(const std::vector<double>& times, const std::vector<double>& norms,
                 const LevelSystem& sys, double epsilon);

// ‖G_k^S u‖ (L² over the grid) for each S.
std::vector<double> sublinearity_diagnostic(Branch k, const std::vector<Field>& samples,
                                            double dt_sample, const std::vector<double>& s_values,
                                            const Grid& g);

double l2_norm(const Field& f, const Grid& g);

}  // namespace maxbloch
