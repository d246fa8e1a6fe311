#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/quantum.hpp"

namespace maxbloch::kernels {

enum class Backend { Serial, OpenMP };

// Pointwise coupling substep of length tau for the TM Bloch side:
//   E kick  (i/√ε)Tr(Γ Ω_γ C)
//   ρ ← U ρ U†,  U = exp(i E Γ τ/√ε)
//   N ← exp(τ W♯) N  with E −= √ε Tr(Γ ΔN)
// composed symmetrically as a(τ/2) b(τ/2) c(τ) b(τ/2) a(τ/2).
struct BlochStepCoeffs {
  int n = 0;
  double tau = 0.0;
  double inv_sqrt_eps = 0.0;
  double sqrt_eps = 0.0;
  std::vector<cplx> gamma;         // Γ_z(m,n), row-major
  std::vector<cplx> omega_gamma;   // ω(m,n) − iγ, zero on the diagonal
  Eigen::VectorXd gamma_eigs;      // Γ_z = V diag(eigs) V†
  Eigen::MatrixXcd gamma_vecs;
  Eigen::MatrixXd pauli_exp;       // exp(τ W♯) on population vectors
};

BlochStepCoeffs make_bloch_step(const LevelSystem& sys, double epsilon, double tau);

// rho holds n*n fields, entry (m,k) at m*n+k.
void bloch_step_serial(const BlochStepCoeffs& c, Field& e, std::vector<Field>& rho);
void bloch_step_omp(const BlochStepCoeffs& c, Field& e, std::vector<Field>& rho);
void bloch_step(Backend b, const BlochStepCoeffs& c, Field& e, std::vector<Field>& rho);

// Exact Fourier-space propagator of the linear TM Maxwell part over tau,
// one 3×3 complex matrix per mode of the (x, y, θ₀) grid.
struct MaxwellPropagator {
  Grid grid;
  std::vector<std::array<cplx, 9>> mats;
};

MaxwellPropagator make_tm_propagator(const Grid& g, double k, double epsilon, double tau);

// Inputs are Fourier coefficients of (Bx, By, E).
void apply_propagator_serial(const MaxwellPropagator& p, Field& bx, Field& by, Field& e);
void apply_propagator_omp(const MaxwellPropagator& p, Field& bx, Field& by, Field& e);
void apply_propagator(Backend b, const MaxwellPropagator& p, Field& bx, Field& by, Field& e);

// Population rates of the limiting model at one spatial point: for each
// output mode, −Σ [EΓ_a, Y_b]_d with Y = D⁻¹[EΓ, N]_od precomputed by the
// caller. Flattened inputs keep the kernel free of map lookups.
struct RateTerm {
  int out = 0;      // output mode slot
  int e_slot = 0;   // E·Γ mode slot
  int y_slot = 0;   // Y mode slot
};
struct RateProblem {
  int n = 0;
  std::size_t points = 0;
  // eg[s][(m*n+k)*points + p] : (E·Γ)_s(m,k) at point p
  std::vector<Field> eg;
  std::vector<Field> y;
  std::vector<RateTerm> terms;
  int n_out = 0;
};
// out[o][k*points + p] : rate of level k at point p for output slot o
void pauli_rates_serial(const RateProblem& prob, std::vector<Field>& out);
void pauli_rates_omp(const RateProblem& prob, std::vector<Field>& out);
void pauli_rates(Backend b, const RateProblem& prob, std::vector<Field>& out);

}  // namespace maxbloch::kernels
