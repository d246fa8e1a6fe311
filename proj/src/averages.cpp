#include <cmath>
#include <stdexcept>

#include "maxbloch/errors.hpp"
#include "maxbloch/fft.hpp"
#include "maxbloch/spectral.hpp"

namespace maxbloch {

std::array<M2Branch, 3> m2_spectral(double eta, double zeta) {
  const double r = std::hypot(eta, zeta);
  if (r == 0.0) throw std::invalid_argument("m2_spectral: zero frequency");
  using V6 = Eigen::Matrix<double, 6, 1>;
  const Eigen::Vector3d ex(1, 0, 0);
  const Eigen::Vector3d z(0, eta / r, zeta / r);
  const Eigen::Vector3d zp(0, -zeta / r, eta / r);
  auto pack = [](const Eigen::Vector3d& b, const Eigen::Vector3d& e) {
    V6 v;
    v << b, e;
    return v;
  };
  auto proj2 = [](const V6& u, const V6& v) -> Mat6 {
    // u and v are orthogonal with norm √2.
    return 0.5 * (u * u.transpose() + v * v.transpose());
  };
  std::array<M2Branch, 3> out;
  out[0].lambda = 0.0;
  out[0].projector = proj2(pack(Eigen::Vector3d::Zero(), z) * std::sqrt(2.0),
                           pack(z, Eigen::Vector3d::Zero()) * std::sqrt(2.0));
  out[1].lambda = r;
  out[1].projector = proj2(pack(ex, zp), pack(zp, -ex));
  out[2].lambda = -r;
  out[2].projector = proj2(pack(ex, -zp), pack(zp, ex));
  return out;
}

double branch_lambda(Branch b, double eta, double zeta) {
  switch (b) {
    case Branch::Zero: return 0.0;
    case Branch::Plus: return std::hypot(eta, zeta);
    case Branch::Minus: return -std::hypot(eta, zeta);
  }
  return 0.0;
}

void semigroup_m2(std::array<Field, 6>& u, const Grid& g, double dT) {
  if (dT == 0.0) return;
  const auto& plan = plan_for(g);
  for (auto& c : u) {
    if (c.size() != g.size()) throw std::invalid_argument("semigroup_m2: grid mismatch");
    plan.forward(c);
  }
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j)
      for (int l = 0; l < g.n(2); ++l) {
        const double eta = g.wavenumber(1, j);
        const double zeta = g.wavenumber(2, l);
        if (eta == 0.0 && zeta == 0.0) continue;
        const auto br = m2_spectral(eta, zeta);
        Mat6c prop = Mat6c::Zero();
        for (const auto& b : br) prop += std::exp(-I * dT * b.lambda) * b.projector.cast<cplx>();
        const std::size_t idx = g.index(i, j, l);
        Vec6c v;
        for (int c = 0; c < 6; ++c) v(c) = u[c][idx];
        v = prop * v;
        for (int c = 0; c < 6; ++c) u[c][idx] = v(c);
      }
  for (auto& c : u) plan.inverse(c);
}

Field birkhoff_average(Branch k, const std::vector<Field>& samples, double dt_sample, double S,
                       const Grid& g) {
  if (!(dt_sample > 0.0)) throw std::invalid_argument("birkhoff_average: bad sample step");
  if (S < 2.0 * dt_sample) throw std::invalid_argument("birkhoff_average: S below two grid steps");
  const long m = std::lround(S / dt_sample);
  if (std::abs(m * dt_sample - S) > 1e-9 * S)
    throw std::invalid_argument("birkhoff_average: S is not a multiple of the sample step");
  if (static_cast<long>(samples.size()) < m + 1)
    throw std::invalid_argument("birkhoff_average: samples do not cover [T, T+S]");
  const auto& plan = plan_for(g);
  Field acc = zeros(g);
  for (long s = 0; s <= m; ++s) {
    Field h = samples[s];
    if (h.size() != g.size()) throw std::invalid_argument("birkhoff_average: grid mismatch");
    plan.forward(h);
    const double w = (s == 0 || s == m) ? 0.5 : 1.0;
    const double ts = s * dt_sample;
    for (int i = 0; i < g.n(0); ++i)
      for (int j = 0; j < g.n(1); ++j)
        for (int l = 0; l < g.n(2); ++l) {
          const double lam = branch_lambda(k, g.wavenumber(1, j), g.wavenumber(2, l));
          const std::size_t idx = g.index(i, j, l);
          acc[idx] += w * std::exp(I * ts * lam) * h[idx];
        }
  }
  plan.inverse(acc);
  for (auto& v : acc) v *= dt_sample / S;
  return acc;
}

}  // namespace maxbloch
