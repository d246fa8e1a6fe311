#pragma once

#include <array>
#include <map>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/kernels.hpp"
#include "maxbloch/mode_algebra.hpp"
#include "maxbloch/quantum.hpp"
#include "maxbloch/spectral.hpp"

namespace maxbloch {

struct CoherenceKey {
  int m = 0;
  int n = 0;
  ModeIndex alpha;  // κ = 1
  auto operator<=>(const CoherenceKey&) const = default;
};

// Leading-order unknowns of the limiting model on an (x, y, z) grid; the TM
// path uses nz = 1 and only the z components of E.
struct ReducedState {
  Grid grid;
  std::map<ModeIndex, std::array<Field, 3>> e_modes;    // α ∈ C±
  std::map<ModeIndex, std::array<Field, 6>> c0_fields;  // α ∈ C₀, π⁰ range
  std::array<Field, 6> field_means;                     // α = 0
  std::map<ModeIndex, std::vector<Field>> pop_modes;    // α ∈ C₀ ∪ {0}, N entries
  std::map<CoherenceKey, Field> coh;                    // resonant, m ≠ n
  double t = 0.0;
  double T = 0.0;

  static ReducedState empty(const Grid& g);
};

using PopulationRates = std::map<ModeIndex, std::vector<Field>>;

class ReducedModel {
 public:
  ReducedModel(LevelSystem sys, PhaseLattice lat, Grid grid,
               kernels::Backend backend = kernels::Backend::OpenMP);

  const LevelSystem& system() const { return sys_; }
  const PhaseLattice& lattice() const { return lat_; }
  const Grid& grid() const { return grid_; }

  // Quadratic-in-E population rates on C₀ ∪ {0}.
  PopulationRates nonlinear_pauli_rates(const ReducedState& s) const;
  PopulationRates nonlinear_pauli_rates(const std::map<ModeIndex, std::array<Field, 3>>& e,
                                        const std::array<Field, 3>& e_mean,
                                        const std::map<ModeIndex, std::vector<Field>>& pops) const;

  // E-part of π(0, S) for each C± mode, S = i Tr(Γ Ω_γ C¹).
  std::map<ModeIndex, std::array<Field, 3>> field_source(
      const std::map<ModeIndex, std::array<Field, 3>>& e, const std::array<Field, 3>& e_mean,
      const std::map<ModeIndex, std::vector<Field>>& pops) const;

  void step_populations(ReducedState& s, double dt) const;
  void step_field(ReducedState& s, double dt) const;
  void step_coherence_T(ReducedState& s, double dT) const;
  void evolve_mean_T(ReducedState& s, double dT) const;
  // Coupled slow-time step: field(dt/2), populations(dt), field(dt/2).
  void step(ReducedState& s, double dt) const;

  // 2·sup_x Σ_α ‖E_α·Γ‖_op
  double gronwall_constant(const ReducedState& s) const;
  // Largest stored magnitude on forbidden slots (should stay exactly 0).
  double polarization_defect(const ReducedState& s) const;

  bool tm_path() const { return tm_; }

 private:
  void transport(ReducedState& s, double dt) const;
  bool is_resonant(int m, int n, const ModeIndex& alpha) const;

  LevelSystem sys_;
  PhaseLattice lat_;
  Grid grid_;
  kernels::Backend backend_;
  bool tm_;
  std::map<std::pair<int, int>, IntVec> resonances_;
};

// Total population Σ_n ∫ N⁰_0(n) / volume.
double total_population(const ReducedState& s);

}  // namespace maxbloch
