#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

namespace maxbloch {

using DensityMatrix = Eigen::MatrixXcd;
using Vec3c = Eigen::Vector3cd;

// Atomic species: energies, dipole entries, Pauli rates, coherence damping
// and temperature. Levels are 0-based here.
class LevelSystem {
 public:
  struct Spec {
    Eigen::VectorXd omega;
    std::vector<Vec3c> dipole;  // row-major N×N, entry (m,n) at m*N+n
    double gamma = 1.0;
    double temperature = 1.0;
    // Either the strict upper triangle (lower part filled by detailed
    // balance) or the full matrix (validated).
    Eigen::MatrixXd pauli;
    bool pauli_is_upper = true;
  };

  LevelSystem() = default;
  explicit LevelSystem(const Spec& spec);

  // Two-level-or-more TM system; dipole has only a z component.
  static LevelSystem tm(Eigen::VectorXd omega, const Eigen::MatrixXcd& gamma_z,
                        Eigen::MatrixXd pauli_upper, double gamma,
                        double temperature);

  int n_levels() const { return static_cast<int>(omega_.size()); }
  const Eigen::VectorXd& omega() const { return omega_; }
  double omega(int n) const { return omega_(n); }
  const Eigen::MatrixXd& pauli() const { return pauli_; }
  double gamma() const { return gamma_; }
  double temperature() const { return temperature_; }
  const Vec3c& dipole(int m, int n) const { return dipole_[m * n_levels() + n]; }
  // N×N matrix of one Cartesian component of Γ.
  Eigen::MatrixXcd dipole_component(int axis) const;
  bool is_tm() const;

  // Human-readable list of violated invariants; empty when valid.
  static std::vector<std::string> check(const Spec& spec);

 private:
  Eigen::VectorXd omega_;
  std::vector<Vec3c> dipole_;
  Eigen::MatrixXd pauli_;
  double gamma_ = 1.0;
  double temperature_ = 1.0;
};

// Detailed-balance partner of an upward/downward rate.
double detailed_balance_partner(double w_kn, double omega_n, double omega_k,
                                double temperature);

double omega_diff(const LevelSystem& sys, int m, int n);
std::pair<DensityMatrix, DensityMatrix> split_diag_offdiag(const DensityMatrix& rho);
DensityMatrix pauli_sharp(const LevelSystem& sys, const DensityMatrix& rho_d);
Eigen::VectorXd pauli_sharp(const LevelSystem& sys, const Eigen::VectorXd& pops);
DensityMatrix relaxation_q(const LevelSystem& sys, const DensityMatrix& rho);
DensityMatrix omega_gamma_apply(const LevelSystem& sys, const DensityMatrix& c);
DensityMatrix dipole_couple(const LevelSystem& sys, const Vec3c& e);
DensityMatrix gibbs_state(const LevelSystem& sys);
DensityMatrix commutator(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix free_hamiltonian(const LevelSystem& sys);
// -i[Ω - E·Γ, ρ] + Q(ρ)
DensityMatrix bloch_rhs(const LevelSystem& sys, const Vec3c& e, const DensityMatrix& rho);

}  // namespace maxbloch
