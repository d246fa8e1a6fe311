#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/quantum.hpp"
#include "maxbloch/spectral.hpp"

namespace maxbloch {

// N×N matrix of fields, entry (m,k) at m*N+k. Empty entries are zero.
using MatrixField = std::vector<Field>;
// Mode-indexed matrix fields; κ is ignored in keys built here (κ = 0).
using ModeMatrices = std::map<ModeIndex, MatrixField>;

MatrixField zero_matrix_field(int n);
bool is_zero(const MatrixField& a);

// (E·Γ)(m,k) from a Cartesian E (entries may be empty).
MatrixField e_dot_gamma(const LevelSystem& sys, const std::array<Field, 3>& e);

MatrixField commutator(const MatrixField& a, const MatrixField& b, int n);
void keep_offdiag(MatrixField& a, int n);
void keep_diag(MatrixField& a, int n);
void add_to(MatrixField& dst, const MatrixField& src, cplx scale = 1.0);

// Σ_{α'+β=α} [a_α', b_β] for every α accepted by `keep`.
ModeMatrices mode_commutator(const ModeMatrices& a, const ModeMatrices& b, int n,
                             const std::function<bool(const ModeIndex&)>& keep);

// Entrywise X(m,k) ← inv_α(m,k) X(m,k) with the κ-inverse of (iΩ_γ − k·∂θ₁).
void apply_mode_inverse(const LevelSystem& sys, const PhaseLattice& lat, const ModeIndex& alpha,
                        int kappa, MatrixField& x);

// Tr(Γ_j Ω_γ C) for j = x, y, z.
std::array<Field, 3> trace_gamma_omega(const LevelSystem& sys, const MatrixField& c);

}  // namespace maxbloch
