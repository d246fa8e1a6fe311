#include <random>

#include "doctest.h"
#include "maxbloch/errors.hpp"
#include "maxbloch/quantum.hpp"
#include "oracles.hpp"

using namespace maxbloch;

namespace {

LevelSystem random_system(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Eigen::VectorXd om(n);
  for (int a = 0; a < n; ++a) om(a) = u(rng);
  std::sort(om.data(), om.data() + n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) w(a, b) = u(rng);
  return LevelSystem::tm(om, oracle::random_hermitian(n, rng), w, 0.5 + u(rng), 0.3 + u(rng));
}

std::vector<std::string> issues_of(const LevelSystem::Spec& s) {
  try {
    LevelSystem sys(s);
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

LevelSystem::Spec two_level() {
  LevelSystem::Spec s;
  s.omega = Eigen::Vector2d(0.0, 1.0);
  s.dipole = {Vec3c::Zero(), Vec3c(0, 0, 1), Vec3c(0, 0, 1), Vec3c::Zero()};
  s.pauli = Eigen::MatrixXd::Zero(2, 2);
  s.pauli(0, 1) = 0.3;
  return s;
}

}  // namespace

TEST_CASE("thermal state and detailed balance") {
  std::mt19937_64 rng(1);
  for (int n : {2, 3, 5}) {
    const LevelSystem sys = random_system(n, rng);
    const DensityMatrix g = gibbs_state(sys);
    const Eigen::VectorXd ref = oracle::gibbs(sys.omega(), sys.temperature());
    for (int a = 0; a < n; ++a) CHECK(g(a, a).real() == doctest::Approx(ref(a)).epsilon(1e-13));
    CHECK(relaxation_q(sys, g).cwiseAbs().maxCoeff() < 1e-12);
    // Stationarity of each pair, not just of the sum.
    const auto& w = sys.pauli();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        CHECK(w(b, a) * ref(b) == doctest::Approx(w(a, b) * ref(a)).epsilon(1e-12));
  }
}

TEST_CASE("pauli_sharp, commutators and relaxation are trace free and Hermitian") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const LevelSystem sys = random_system(n, rng);
    const DensityMatrix rho = oracle::random_density(n, rng);
    CHECK(std::abs(pauli_sharp(sys, split_diag_offdiag(rho).first).trace()) < 1e-14);
    const DensityMatrix q = relaxation_q(sys, rho);
    CHECK((q - q.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(bloch_rhs(sys, Vec3c(0, 0, 0.7), rho).trace()) < 1e-13);
  }
}

TEST_CASE("omega_gamma_apply with zero damping is the free commutator") {
  std::mt19937_64 rng(3);
  LevelSystem::Spec s = two_level();
  s.omega = Eigen::Vector3d(0.0, 0.4, 1.3);
  s.dipole.assign(9, Vec3c::Zero());
  s.pauli = Eigen::MatrixXd::Zero(3, 3);
  s.gamma = 1e-300;  // validation needs γ > 0
  const LevelSystem sys(s);
  const oracle::Mat c = oracle::random_hermitian(3, rng);
  const DensityMatrix h = free_hamiltonian(sys);
  const DensityMatrix lhs = omega_gamma_apply(sys, c);
  const DensityMatrix rhs = h * c - c * h;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Bloch right-hand side matches the Liouville superoperator") {
  std::mt19937_64 rng(4);
  const LevelSystem sys = random_system(3, rng);
  const DensityMatrix rho = oracle::random_density(3, rng);
  const Vec3c e(0, 0, 0.9);
  const oracle::Mat h = free_hamiltonian(sys) - e(2) * sys.dipole_component(2);
  const oracle::Vec lv = oracle::cplx(0, -1) * oracle::ad(h) * oracle::vec(rho);
  const DensityMatrix ref = oracle::unvec(lv, 3) + relaxation_q(sys, rho);
  CHECK((bloch_rhs(sys, e, rho) - ref).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("validation collects every violation") {
  auto s = two_level();
  s.omega = Eigen::Vector2d(1.0, 0.5);
  s.gamma = -1.0;
  const auto issues = issues_of(s);
  CHECK(issues.size() >= 2);
  bool omega = false;
  for (const auto& i : issues) omega = omega || i.rfind("omega", 0) == 0;
  CHECK(omega);
}

TEST_CASE("full Pauli matrices are checked for micro-reversibility") {
  auto s = two_level();
  s.pauli_is_upper = false;
  s.pauli(0, 1) = 0.3;
  s.pauli(1, 0) = detailed_balance_partner(0.3, s.omega(1), s.omega(0), s.temperature);
  CHECK(issues_of(s).empty());
  s.pauli(1, 0) *= 1.001;
  const auto issues = issues_of(s);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("(1,2)") != std::string::npos);
}

TEST_CASE("degenerate levels are accepted") {
  auto s = two_level();
  s.omega = Eigen::Vector2d(0.5, 0.5);
  CHECK(issues_of(s).empty());
  const LevelSystem sys(s);
  CHECK(gibbs_state(sys)(0, 0).real() == doctest::Approx(0.5));
}
