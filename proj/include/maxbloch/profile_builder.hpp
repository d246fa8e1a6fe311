#pragma once

#include <array>
#include <functional>
#include <map>
#include <string_view>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/quantum.hpp"
#include "maxbloch/reduced_model.hpp"
#include "maxbloch/spectral.hpp"

namespace maxbloch {

struct SingularState;

// Component slots of the 6-vector u = (B, E).
enum : int { kBx = 0, kBy = 1, kBz = 2, kEx = 3, kEy = 4, kEz = 5 };

struct SlotKey {
  int order = 0;  // j
  ModeIndex mode;
  auto operator<=>(const SlotKey&) const = default;
};

// One coefficient of U^{j,κ}_α over the (x, y, z) grid. Empty fields are 0.
struct ProfileCoeff {
  std::array<Field, 6> u;
  std::vector<Field> rho;  // N² entries
};

enum class Provenance { Lifted, ClosedForm, Evolved, ZeroFreeChoice };
std::string_view to_string(Provenance p);

class ProfileSet {
 public:
  ProfileSet() = default;
  ProfileSet(LevelSystem sys, PhaseLattice lat, Grid grid);

  const LevelSystem& system() const { return sys_; }
  const PhaseLattice& lattice() const { return lat_; }
  const Grid& grid() const { return grid_; }
  double t = 0.0;

  ProfileCoeff& slot(int j, const ModeIndex& alpha, Provenance p);
  const ProfileCoeff* find(int j, const ModeIndex& alpha) const;
  const std::map<SlotKey, ProfileCoeff>& slots() const { return slots_; }
  Provenance provenance(const SlotKey& k) const { return provenance_.at(k); }
  void mark(int j, Provenance p);
  void erase_order(int j);

  // Throws if a forbidden slot holds a nonzero value (tolerance on sup-norm).
  void check_polarizations(double tol = 0.0) const;
  // Sup over all stored values with |α| beyond a_max - margin.
  double tail_mass(int margin) const;

 private:
  LevelSystem sys_;
  PhaseLattice lat_;
  Grid grid_;
  std::map<SlotKey, ProfileCoeff> slots_;
  std::map<SlotKey, Provenance> provenance_;
};

// θ₀-Fourier data u(x,y,θ₀) = Σ_β u_β(x,y) e^{iβ·θ₀}.
struct InitialData {
  Grid grid;                                        // (x, y, z)
  std::map<IntVec, std::array<Field, 6>> fields;    // by β
  std::map<IntVec, std::vector<Field>> rho;         // by β, N² entries
};

ProfileSet lift_initial_data(const LevelSystem& sys, const PhaseLattice& lat,
                             const InitialData& data);

// Conversions between the leading profile and the limiting-model state.
ReducedState reduced_from_leading(const ProfileSet& p);
ProfileSet leading_from_reduced(const LevelSystem& sys, const PhaseLattice& lat,
                                const ReducedState& s);

void build_corrector1_tm(ProfileSet& p);
void build_corrector2_tm(ProfileSet& p);

// Σ_j √ε^j Σ_{κ,α} w(j,α) U^{j,κ}_α e^{i(α₀·θ₀ − α₁·k t/ε)} e^{−κγt/ε} on the
// (x, y, θ₀) grid (TM components only). `weight` defaults to 1.
using SlotWeight = std::function<cplx(int j, const ModeIndex&)>;
SingularState assemble_uapp(const ProfileSet& p, double epsilon, double t, int ntheta,
                            int max_order = 2, const SlotWeight& weight = {});

// Linear combination Σ c_i P_i slot by slot (all sets share sys/lat/grid).
ProfileSet combine(const std::vector<std::pair<double, const ProfileSet*>>& terms);

}  // namespace maxbloch
