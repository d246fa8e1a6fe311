#include "maxbloch/mode_algebra.hpp"

#include <stdexcept>

namespace maxbloch {

MatrixField zero_matrix_field(int n) { return MatrixField(static_cast<std::size_t>(n) * n); }

bool is_zero(const MatrixField& a) {
  for (const auto& f : a)
    if (!f.empty() && !all_zero(f)) return false;
  return true;
}

MatrixField e_dot_gamma(const LevelSystem& sys, const std::array<Field, 3>& e) {
  const int n = sys.n_levels();
  MatrixField out = zero_matrix_field(n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < 3; ++j) axpy(out[m * n + k], sys.dipole(m, k)(j), e[j]);
  return out;
}

MatrixField commutator(const MatrixField& a, const MatrixField& b, int n) {
  MatrixField out = zero_matrix_field(n);
  for (int m = 0; m < n; ++m)
    for (int q = 0; q < n; ++q)
      for (int k = 0; k < n; ++k) {
        const Field& a1 = a[m * n + k];
        const Field& b1 = b[k * n + q];
        const Field& b2 = b[m * n + k];
        const Field& a2 = a[k * n + q];
        Field& o = out[m * n + q];
        if (!a1.empty() && !b1.empty()) {
          if (o.empty()) o.assign(a1.size(), cplx{});
          for (std::size_t p = 0; p < a1.size(); ++p) o[p] += a1[p] * b1[p];
        }
        if (!b2.empty() && !a2.empty()) {
          if (o.empty()) o.assign(b2.size(), cplx{});
          for (std::size_t p = 0; p < b2.size(); ++p) o[p] -= b2[p] * a2[p];
        }
      }
  return out;
}

void keep_offdiag(MatrixField& a, int n) {
  for (int m = 0; m < n; ++m) a[m * n + m].clear();
}

void keep_diag(MatrixField& a, int n) {
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      if (m != k) a[m * n + k].clear();
}

void add_to(MatrixField& dst, const MatrixField& src, cplx scale) {
  if (dst.size() != src.size()) throw std::invalid_argument("add_to: size mismatch");
  for (std::size_t q = 0; q < src.size(); ++q) axpy(dst[q], scale, src[q]);
}

ModeMatrices mode_commutator(const ModeMatrices& a, const ModeMatrices& b, int n,
                             const std::function<bool(const ModeIndex&)>& keep) {
  ModeMatrices out;
  for (const auto& [ma, fa] : a)
    for (const auto& [mb, fb] : b) {
      ModeIndex m = ma + mb;
      m.kappa = 0;
      if (!keep(m)) continue;
      MatrixField c = commutator(fa, fb, n);
      auto it = out.find(m);
      if (it == out.end())
        out.emplace(m, std::move(c));
      else
        add_to(it->second, c);
    }
  return out;
}

void apply_mode_inverse(const LevelSystem& sys, const PhaseLattice& lat, const ModeIndex& alpha,
                        int kappa, MatrixField& x) {
  const int n = sys.n_levels();
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      Field& f = x[m * n + k];
      if (f.empty()) continue;
      const cplx inv = mode_inverse_omega_gamma(sys, lat, m, k, alpha.alpha1, kappa);
      for (auto& v : f) v *= inv;
    }
}

std::array<Field, 3> trace_gamma_omega(const LevelSystem& sys, const MatrixField& c) {
  const int n = sys.n_levels();
  std::array<Field, 3> out;
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      if (m == k) continue;
      const cplx og(omega_diff(sys, m, k), -sys.gamma());
      for (int j = 0; j < 3; ++j) axpy(out[j], sys.dipole(k, m)(j) * og, c[m * n + k]);
    }
  return out;
}

}  // namespace maxbloch
