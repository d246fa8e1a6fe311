#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kernels_common.hpp"

namespace maxbloch::kernels {

BlochStepCoeffs make_bloch_step(const LevelSystem& sys, double epsilon, double tau) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("make_bloch_step: epsilon must be positive");
  const int n = sys.n_levels();
  if (n > detail::kMaxLevels) throw std::invalid_argument("make_bloch_step: too many levels");
  BlochStepCoeffs c;
  c.n = n;
  c.tau = tau;
  c.sqrt_eps = std::sqrt(epsilon);
  c.inv_sqrt_eps = 1.0 / c.sqrt_eps;
  const Eigen::MatrixXcd g = sys.dipole_component(2);
  c.gamma.resize(n * n);
  c.omega_gamma.resize(n * n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      c.gamma[m * n + k] = g(m, k);
      c.omega_gamma[m * n + k] = m == k ? cplx{} : cplx(omega_diff(sys, m, k), -sys.gamma());
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
  c.gamma_eigs = es.eigenvalues();
  c.gamma_vecs = es.eigenvectors();
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
  const auto& w = sys.pauli();
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) {
      gen(a, k) += w(k, a);
      gen(a, a) -= w(a, k);
    }
  c.pauli_exp = (tau * gen).exp();
  return c;
}

void bloch_step_serial(const BlochStepCoeffs& c, Field& e, std::vector<Field>& rho) {
  const int n = c.n;
  const std::size_t np = e.size();
  detail::with_levels(n, [&](auto lv) {
    cplx r[detail::kMaxLevels * detail::kMaxLevels];
    for (std::size_t p = 0; p < np; ++p) {
      for (int q = 0; q < n * n; ++q) r[q] = rho[q][p];
      detail::bloch_point<decltype(lv)::value>(c, e[p], r);
      for (int q = 0; q < n * n; ++q) rho[q][p] = r[q];
    }
  });
}

void bloch_step(Backend b, const BlochStepCoeffs& c, Field& e, std::vector<Field>& rho) {
  if (static_cast<int>(rho.size()) != c.n * c.n) throw std::invalid_argument("bloch_step: rho size");
  for (const auto& f : rho)
    if (f.size() != e.size()) throw std::invalid_argument("bloch_step: field size mismatch");
  if (b == Backend::OpenMP)
    bloch_step_omp(c, e, rho);
  else
    bloch_step_serial(c, e, rho);
}

MaxwellPropagator make_tm_propagator(const Grid& g, double k, double epsilon, double tau) {
  MaxwellPropagator p;
  p.grid = g;
  p.mats.resize(g.size());
  const double rs = 1.0 / std::sqrt(epsilon);
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j)
      for (int l = 0; l < g.n(2); ++l) {
        const double kk = g.wavenumber(0, i) + k * g.wavenumber(2, l) * g.length(2) /
                                                   (2.0 * std::numbers::pi) / epsilon;
        const double hs = g.wavenumber(1, j) * rs;
        // exp(iτS), S = [[0,0,-hs],[0,0,kk],[-hs,kk,0]], S³ = ρ²S.
        const double s[9] = {0, 0, -hs, 0, 0, kk, -hs, kk, 0};
        double s2[9];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            double v = 0;
            for (int q = 0; q < 3; ++q) v += s[a * 3 + q] * s[q * 3 + b];
            s2[a * 3 + b] = v;
          }
        const double r2 = kk * kk + hs * hs;
        const double r = std::sqrt(r2);
        double c1 = tau, c2 = -0.5 * tau * tau;  // small-ρ limits
        if (r * tau > 1e-8) {
          c1 = std::sin(r * tau) / r;
          c2 = (std::cos(r * tau) - 1.0) / r2;
        }
        auto& m = p.mats[g.index(i, j, l)];
        for (int q = 0; q < 9; ++q)
          m[q] = cplx((q % 4 == 0 ? 1.0 : 0.0) + c2 * s2[q], c1 * s[q]);
      }
  return p;
}

void apply_propagator_serial(const MaxwellPropagator& p, Field& bx, Field& by, Field& e) {
  const std::size_t np = p.mats.size();
  for (std::size_t q = 0; q < np; ++q) detail::propagate_mode(p.mats[q], bx[q], by[q], e[q]);
}

void apply_propagator(Backend b, const MaxwellPropagator& p, Field& bx, Field& by, Field& e) {
  if (bx.size() != p.mats.size() || by.size() != p.mats.size() || e.size() != p.mats.size())
    throw std::invalid_argument("apply_propagator: grid mismatch");
  if (b == Backend::OpenMP)
    apply_propagator_omp(p, bx, by, e);
  else
    apply_propagator_serial(p, bx, by, e);
}

void pauli_rates_serial(const RateProblem& prob, std::vector<Field>& out) {
  out.assign(prob.n_out, Field(prob.n * prob.points, cplx{}));
  for (std::size_t p = 0; p < prob.points; ++p) detail::rate_point(prob, p, out);
}

void pauli_rates(Backend b, const RateProblem& prob, std::vector<Field>& out) {
  if (b == Backend::OpenMP)
    pauli_rates_omp(prob, out);
  else
    pauli_rates_serial(prob, out);
}

}  // namespace maxbloch::kernels
