#include "maxbloch/quantum.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "maxbloch/errors.hpp"

namespace maxbloch {

double detailed_balance_partner(double w_kn, double omega_n, double omega_k,
                                double temperature) {
  // W(n,k) = W(k,n) exp((ω(n) - ω(k))/T): the Gibbs state is stationary.
  return w_kn * std::exp((omega_n - omega_k) / temperature);
}

std::vector<std::string> LevelSystem::check(const Spec& s) {
  std::vector<std::string> bad;
  const auto n = s.omega.size();
  if (n < 2) bad.push_back("omega: need at least 2 levels");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(s.omega(i))) bad.push_back("omega: non-finite entry");
    if (i == 0 && s.omega(0) < 0.0) bad.push_back("omega: energies must be nonnegative");
    if (i > 0 && s.omega(i) < s.omega(i - 1)) {
      bad.push_back("omega: energies must be sorted ascending");
      break;
    }
  }
  if (!(s.gamma > 0.0)) bad.push_back("gamma: must be positive");
  if (!(s.temperature > 0.0)) bad.push_back("temperature: must be positive");
  if (s.dipole.size() != static_cast<std::size_t>(n * n)) {
    bad.push_back("dipole: expected N*N entries");
  } else {
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index k = 0; k < n; ++k) {
        const Vec3c& a = s.dipole[m * n + k];
        const Vec3c& b = s.dipole[k * n + m];
        if ((a - b.conjugate()).norm() > 1e-12) {
          std::ostringstream os;
          os << "dipole(" << m + 1 << "," << k + 1 << "): not Hermitian";
          bad.push_back(os.str());
        }
      }
  }
  if (s.pauli.rows() != n || s.pauli.cols() != n) {
    bad.push_back("pauli: expected an N×N matrix");
    return bad;
  }
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      std::ostringstream os;
      os << "(" << a + 1 << "," << b + 1 << ")";
      const double w = s.pauli(a, b);
      if (a == b) {
        if (!s.pauli_is_upper && w != 0.0) bad.push_back("pauli" + os.str() + ": diagonal must be zero");
        continue;
      }
      if (s.pauli_is_upper && a > b) continue;
      if (!(w >= 0.0) || !std::isfinite(w)) bad.push_back("pauli" + os.str() + ": must be nonnegative");
    }
  if (!s.pauli_is_upper && bad.empty() && s.temperature > 0.0) {
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const double expect = detailed_balance_partner(s.pauli(b, a), s.omega(a),
                                                       s.omega(b), s.temperature);
        const double got = s.pauli(a, b);
        if (std::abs(got - expect) > 1e-9 * std::max({std::abs(expect), std::abs(got), 1e-300})) {
          std::ostringstream os;
          os << "pauli(" << a + 1 << "," << b + 1 << "): violates micro-reversibility (got "
             << got << ", expected " << expect << ")";
          bad.push_back(os.str());
        }
      }
  }
  return bad;
}

LevelSystem::LevelSystem(const Spec& s) {
  auto bad = check(s);
  if (!bad.empty()) throw ValidationError(std::move(bad));
  omega_ = s.omega;
  dipole_ = s.dipole;
  gamma_ = s.gamma;
  temperature_ = s.temperature;
  const auto n = omega_.size();
  pauli_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      if (!s.pauli_is_upper || a < b) pauli_(a, b) = s.pauli(a, b);
    }
  if (s.pauli_is_upper)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b)
        pauli_(b, a) = detailed_balance_partner(pauli_(a, b), omega_(b), omega_(a), temperature_);
}

LevelSystem LevelSystem::tm(Eigen::VectorXd omega, const Eigen::MatrixXcd& gamma_z,
                            Eigen::MatrixXd pauli_upper, double gamma,
                            double temperature) {
  Spec s;
  s.omega = std::move(omega);
  const auto n = s.omega.size();
  if (gamma_z.rows() != n || gamma_z.cols() != n)
    throw ValidationError({"dipole: expected an N×N matrix"});
  s.dipole.resize(n * n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) s.dipole[m * n + k] = Vec3c(0, 0, gamma_z(m, k));
  s.pauli = std::move(pauli_upper);
  s.pauli_is_upper = true;
  s.gamma = gamma;
  s.temperature = temperature;
  return LevelSystem(s);
}

Eigen::MatrixXcd LevelSystem::dipole_component(int axis) const {
  const int n = n_levels();
  Eigen::MatrixXcd g(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) g(m, k) = dipole(m, k)(axis);
  return g;
}

bool LevelSystem::is_tm() const {
  for (const auto& v : dipole_)
    if (v(0) != 0.0 || v(1) != 0.0) return false;
  return true;
}

double omega_diff(const LevelSystem& sys, int m, int n) {
  if (m < 0 || n < 0 || m >= sys.n_levels() || n >= sys.n_levels())
    throw std::out_of_range("omega_diff: level index out of range");
  return sys.omega(m) - sys.omega(n);
}

std::pair<DensityMatrix, DensityMatrix> split_diag_offdiag(const DensityMatrix& rho) {
  DensityMatrix d = DensityMatrix::Zero(rho.rows(), rho.cols());
  d.diagonal() = rho.diagonal();
  return {d, rho - d};
}

Eigen::VectorXd pauli_sharp(const LevelSystem& sys, const Eigen::VectorXd& p) {
  const auto& w = sys.pauli();
  const int n = sys.n_levels();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) out(a) += w(k, a) * p(k) - w(a, k) * p(a);
  return out;
}

DensityMatrix pauli_sharp(const LevelSystem& sys, const DensityMatrix& rho_d) {
  const int n = sys.n_levels();
  const auto& w = sys.pauli();
  DensityMatrix out = DensityMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    std::complex<double> s{};
    for (int k = 0; k < n; ++k) s += w(k, a) * rho_d(k, k) - w(a, k) * rho_d(a, a);
    out(a, a) = s;
  }
  return out;
}

DensityMatrix relaxation_q(const LevelSystem& sys, const DensityMatrix& rho) {
  auto [d, od] = split_diag_offdiag(rho);
  return pauli_sharp(sys, d) - sys.gamma() * od;
}

DensityMatrix omega_gamma_apply(const LevelSystem& sys, const DensityMatrix& c) {
  const int n = sys.n_levels();
  DensityMatrix out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out(a, b) = std::complex<double>(omega_diff(sys, a, b), -sys.gamma()) * c(a, b);
  return out;
}

DensityMatrix dipole_couple(const LevelSystem& sys, const Vec3c& e) {
  const int n = sys.n_levels();
  DensityMatrix out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out(a, b) = e.transpose() * sys.dipole(a, b);
  return out;
}

DensityMatrix gibbs_state(const LevelSystem& sys) {
  const int n = sys.n_levels();
  Eigen::VectorXd p(n);
  const double w0 = sys.omega(0);
  for (int a = 0; a < n; ++a) p(a) = std::exp(-(sys.omega(a) - w0) / sys.temperature());
  p /= p.sum();
  return p.cast<std::complex<double>>().asDiagonal();
}

DensityMatrix commutator(const DensityMatrix& a, const DensityMatrix& b) {
  return a * b - b * a;
}

DensityMatrix free_hamiltonian(const LevelSystem& sys) {
  return sys.omega().cast<std::complex<double>>().asDiagonal();
}

DensityMatrix bloch_rhs(const LevelSystem& sys, const Vec3c& e, const DensityMatrix& rho) {
  const std::complex<double> i(0, 1);
  return -i * commutator(free_hamiltonian(sys) - dipole_couple(sys, e), rho) +
         relaxation_q(sys, rho);
}

}  // namespace maxbloch
