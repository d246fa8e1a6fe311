#pragma once

#include <Eigen/Dense>
#include <array>
#include <compare>
#include <optional>
#include <string_view>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/quantum.hpp"

namespace maxbloch {

using IntVec = std::vector<int>;

struct ModeIndex {
  IntVec alpha0;
  IntVec alpha1;
  int kappa = 0;

  auto operator<=>(const ModeIndex&) const = default;
  bool is_zero() const;
  ModeIndex negated() const;
  ModeIndex operator+(const ModeIndex& o) const;
};

// d=1 shorthand used throughout the TM path.
ModeIndex mode1(int a0, int a1, int kappa = 0);

enum class ModeClass { Mean, CPlus, CMinus, CZero, NonCharacteristic };
std::string_view to_string(ModeClass c);

class PhaseLattice {
 public:
  PhaseLattice() = default;
  // Throws ValidationError if k is not positive or if the Diophantine bound
  // |β·k| ≥ c|β|^(-a) fails for some 0 < |β| ≤ 2 a_max.
  PhaseLattice(std::vector<double> k, double a, double c_dioph, int a_max);

  int d() const { return static_cast<int>(k_.size()); }
  const std::vector<double>& k() const { return k_; }
  double exponent() const { return a_; }
  double c_dioph() const { return c_; }
  int a_max() const { return a_max_; }
  double dot(const IntVec& beta) const;
  bool in_truncation(const ModeIndex& m) const;
  // Smallest |β·k|·|β|^a over the checked range.
  double diophantine_margin() const;
  // Lower bound c|β|^(-a) used as the small-divisor floor for this β.
  double divisor_floor(const IntVec& beta) const;

 private:
  std::vector<double> k_;
  double a_ = 1.0;
  double c_ = 0.0;
  int a_max_ = 8;
};

ModeClass classify_mode(const PhaseLattice& lat, const ModeIndex& alpha);

struct Resonance {
  int m = 0;
  int n = 0;
  IntVec alpha1;
  auto operator<=>(const Resonance&) const = default;
};
double default_resonance_tol(const LevelSystem& sys);
std::vector<Resonance> resonant_set(const LevelSystem& sys, const PhaseLattice& lat,
                                    std::optional<double> tol = std::nullopt);
// Unique resonant α₁ for (m,n), if any.
std::optional<IntVec> resonant_alpha1(const LevelSystem& sys, const PhaseLattice& lat,
                                      int m, int n, std::optional<double> tol = std::nullopt);

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat6c = Eigen::Matrix<std::complex<double>, 6, 6>;
using Vec6c = Eigen::Matrix<std::complex<double>, 6, 1>;

// Components ordered (Bx, By, Bz, Ex, Ey, Ez); A(ξ)(B,E) = (ξ×E, −ξ×B).
Mat6 maxwell_symbol(double xi_x, double xi_y, double xi_z);
const Mat6& maxwell_ax();
const Mat6& maxwell_ay();
const Mat6& maxwell_az();

Mat6 pi_projector(const PhaseLattice& lat, const ModeIndex& alpha);
Mat6c m1_symbol(const PhaseLattice& lat, const ModeIndex& alpha);
Mat6c m1_pseudo_inverse(const PhaseLattice& lat, const ModeIndex& alpha);
double group_velocity(const PhaseLattice& lat, const ModeIndex& alpha);
double diffraction_coeff(const PhaseLattice& lat, const ModeIndex& alpha);

cplx mode_inverse_omega_gamma(const LevelSystem& sys, const PhaseLattice& lat, int m, int n,
                              const IntVec& alpha1, int kappa,
                              std::optional<double> tol = std::nullopt);

enum class Branch { Zero, Plus, Minus };
struct M2Branch {
  double lambda = 0.0;
  Mat6 projector;
};
// Ordered (Zero, Plus, Minus).
std::array<M2Branch, 3> m2_spectral(double eta, double zeta);
double branch_lambda(Branch b, double eta, double zeta);

// exp(−dT·M₂(0,∂y,∂z)) on a 6-component field; axis 1 is y, axis 2 is z.
void semigroup_m2(std::array<Field, 6>& u, const Grid& grid, double dT);

// Finite-S Birkhoff average along branch k of samples u(T0 + i·dt_sample),
// trapezoid rule in s. Uses the first round(S/dt_sample)+1 samples.
Field birkhoff_average(Branch k, const std::vector<Field>& samples, double dt_sample, double S,
                       const Grid& grid);

}  // namespace maxbloch
