#pragma once
// Reference computations written independently of the library code paths:
// superoperators built from Kronecker products, dense matrix exponentials,
// closed-form thermal states.

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Vec vec(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }
inline Mat unvec(const Vec& v, int n) { return Eigen::Map<const Mat>(v.data(), n, n); }

// vec(AX − XA) = ad(A) vec(X), column-major vec.
inline Mat ad(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  const Mat id = Mat::Identity(n, n);
  return Eigen::kroneckerProduct(id, a).eval() - Eigen::kroneckerProduct(a.transpose(), id).eval();
}

// Projector onto off-diagonal entries in vec space.
inline Mat offdiag_projector(int n) {
  Mat p = Mat::Identity(n * n, n * n);
  for (int a = 0; a < n; ++a) p(a + a * n, a + a * n) = 0.0;
  return p;
}

struct RateMode {
  double detuning_shift;  // k·α₁ of the mode
  Mat eg;                 // E_α·Γ
};

// Population rates of the α = 0 output: for every mode α with partner −α,
//   −[E_{−α}Γ, L_α⁻¹ P_od [E_αΓ, N]]_d,
// L_α X = (γ + i(ad Ω − k·α₁)) X on the off-diagonal block.
inline Eigen::VectorXd dense_rates(const Eigen::VectorXd& omega, double gamma,
                                   const std::vector<RateMode>& modes,
                                   const std::vector<int>& partner,
                                   const Eigen::VectorXd& pops) {
  const int n = static_cast<int>(omega.size());
  const Mat om = omega.cast<cplx>().asDiagonal();
  const Mat pod = offdiag_projector(n);
  const Mat nmat = pops.cast<cplx>().asDiagonal();
  Vec acc = Vec::Zero(n * n);
  for (std::size_t a = 0; a < modes.size(); ++a) {
    if (partner[a] < 0) continue;
    const Mat l = gamma * Mat::Identity(n * n, n * n) +
                  cplx(0, 1) * (ad(om) - modes[a].detuning_shift * Mat::Identity(n * n, n * n));
    // Restrict to the off-diagonal block: diagonal rows are identity there.
    Mat lod = pod * l * pod + (Mat::Identity(n * n, n * n) - pod);
    const Vec x = pod * ad(modes[a].eg) * vec(nmat);
    const Vec y = pod * lod.fullPivLu().solve(x);
    acc -= ad(modes[partner[a]].eg) * y;
  }
  Eigen::VectorXd out(n);
  const Mat r = unvec(acc, n);
  for (int q = 0; q < n; ++q) out(q) = r(q, q).real();
  return out;
}

// Thermal populations ∝ exp(−ω/T).
inline Eigen::VectorXd gibbs(const Eigen::VectorXd& omega, double t) {
  Eigen::VectorXd p = (-(omega.array() - omega.minCoeff()) / t).exp();
  return p / p.sum();
}

inline Mat random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(d(rng), d(rng));
  return scale * 0.5 * (a + a.adjoint());
}

inline Mat random_density(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(d(rng), d(rng));
  Mat r = a * a.adjoint();
  return r / r.trace();
}

// exp(iτS) for the per-mode linear TM block, by dense matrix exponential.
inline Mat tm_mode_exp(double kk, double hs, double tau) {
  Mat s(3, 3);
  s << 0, 0, -hs, 0, 0, kk, -hs, kk, 0;
  return (cplx(0, tau) * s).exp();
}

}  // namespace oracle
