#pragma once

#include <complex>
#include <type_traits>

#include "maxbloch/kernels.hpp"

namespace maxbloch::kernels::detail {

constexpr int kMaxLevels = 8;

// Coupling substep at a single grid point. Scratch lives on the stack so
// the same body serves the serial and threaded loops.
template <int N>
inline void bloch_point(const BlochStepCoeffs& c, cplx& e, cplx* r) {
  const int n = N > 0 ? N : c.n;
  const double half = 0.5 * c.tau;
  const cplx* gam = c.gamma.data();
  const cplx* og = c.omega_gamma.data();
  const cplx* vec = c.gamma_vecs.data();  // column-major
  const double* eig = c.gamma_eigs.data();
  const double* pexp = c.pauli_exp.data();

  auto kick_source = [&](double t) {
    cplx tr{};
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k)
        if (m != k) tr += gam[k * n + m] * og[m * n + k] * r[m * n + k];
    e += t * cplx(0.0, c.inv_sqrt_eps) * tr;
  };

  cplx u[kMaxLevels * kMaxLevels];
  cplx tmp[kMaxLevels * kMaxLevels];
  auto rotate = [&](double t) {
    const double th = e.real() * t * c.inv_sqrt_eps;
    cplx ph[kMaxLevels];
    for (int j = 0; j < n; ++j) ph[j] = std::polar(1.0, th * eig[j]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx s{};
        for (int j = 0; j < n; ++j) s += vec[a + j * n] * ph[j] * std::conj(vec[b + j * n]);
        u[a * n + b] = s;
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx s{};
        for (int j = 0; j < n; ++j) s += u[a * n + j] * r[j * n + b];
        tmp[a * n + b] = s;
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx s{};
        for (int j = 0; j < n; ++j) s += tmp[a * n + j] * std::conj(u[b * n + j]);
        r[a * n + b] = s;
      }
  };

  auto relax = [&]() {
    cplx old[kMaxLevels];
    for (int a = 0; a < n; ++a) old[a] = r[a * n + a];
    cplx tr{};
    for (int a = 0; a < n; ++a) {
      cplx s{};
      for (int b = 0; b < n; ++b) s += pexp[a + b * n] * old[b];
      r[a * n + a] = s;
      tr += gam[a * n + a] * (s - old[a]);
    }
    e -= c.sqrt_eps * tr;
  };

  kick_source(half);
  rotate(half);
  relax();
  rotate(half);
  kick_source(half);
}

// Calls f(std::integral_constant<int, N>) with N = n for small n, else N = 0.
template <class F>
inline void with_levels(int n, F&& f) {
  switch (n) {
    case 2: f(std::integral_constant<int, 2>{}); break;
    case 3: f(std::integral_constant<int, 3>{}); break;
    case 4: f(std::integral_constant<int, 4>{}); break;
    default: f(std::integral_constant<int, 0>{});
  }
}

inline void propagate_mode(const std::array<cplx, 9>& m, cplx& bx, cplx& by, cplx& e) {
  const cplx x = bx, y = by, z = e;
  bx = m[0] * x + m[1] * y + m[2] * z;
  by = m[3] * x + m[4] * y + m[5] * z;
  e = m[6] * x + m[7] * y + m[8] * z;
}

inline void rate_point(const RateProblem& pr, std::size_t p, std::vector<Field>& out) {
  const int n = pr.n;
  const std::size_t np = pr.points;
  for (const auto& t : pr.terms) {
    const Field& a = pr.eg[t.e_slot];
    const Field& y = pr.y[t.y_slot];
    Field& o = out[t.out];
    for (int q = 0; q < n; ++q) {
      cplx s{};
      for (int k = 0; k < n; ++k)
        s += a[(q * n + k) * np + p] * y[(k * n + q) * np + p] -
             y[(q * n + k) * np + p] * a[(k * n + q) * np + p];
      o[q * np + p] -= s;
    }
  }
}

}  // namespace maxbloch::kernels::detail
