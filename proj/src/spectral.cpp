#include "maxbloch/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "maxbloch/errors.hpp"

namespace maxbloch {

namespace {

int sup_norm(const IntVec& v) {
  int m = 0;
  for (int x : v) m = std::max(m, std::abs(x));
  return m;
}

bool is_zero_vec(const IntVec& v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
}

// Visit every integer vector of length d with entries in [-r, r].
void for_each_in_box(int d, int r, const std::function<void(const IntVec&)>& f) {
  IntVec v(d, -r);
  while (true) {
    f(v);
    int i = 0;
    while (i < d && v[i] == r) v[i++] = -r;
    if (i == d) return;
    ++v[i];
  }
}

Mat6 cross_block(double x, double y, double z) {
  Mat6 a = Mat6::Zero();
  Eigen::Matrix3d c;
  c << 0, -z, y, z, 0, -x, -y, x, 0;
  a.block<3, 3>(0, 3) = c;
  a.block<3, 3>(3, 0) = -c;
  return a;
}

Mat6 eigenprojector_ax(int lambda) {
  const Mat6& a = maxwell_ax();
  const Mat6 a2 = a * a;
  if (lambda == 0) return Mat6::Identity() - a2;
  return 0.5 * (a2 + lambda * a);
}

}  // namespace

bool ModeIndex::is_zero() const { return is_zero_vec(alpha0) && is_zero_vec(alpha1); }

ModeIndex ModeIndex::negated() const {
  ModeIndex m = *this;
  for (auto& x : m.alpha0) x = -x;
  for (auto& x : m.alpha1) x = -x;
  return m;
}

ModeIndex ModeIndex::operator+(const ModeIndex& o) const {
  if (alpha0.size() != o.alpha0.size()) throw std::invalid_argument("mode dimension mismatch");
  ModeIndex m = *this;
  for (std::size_t i = 0; i < alpha0.size(); ++i) {
    m.alpha0[i] += o.alpha0[i];
    m.alpha1[i] += o.alpha1[i];
  }
  m.kappa = kappa + o.kappa;
  return m;
}

ModeIndex mode1(int a0, int a1, int kappa) { return ModeIndex{{a0}, {a1}, kappa}; }

std::string_view to_string(ModeClass c) {
  switch (c) {
    case ModeClass::Mean: return "mean";
    case ModeClass::CPlus: return "C+";
    case ModeClass::CMinus: return "C-";
    case ModeClass::CZero: return "C0";
    case ModeClass::NonCharacteristic: return "noncharacteristic";
  }
  return "?";
}

PhaseLattice::PhaseLattice(std::vector<double> k, double a, double c_dioph, int a_max)
    : k_(std::move(k)), a_(a), c_(c_dioph), a_max_(a_max) {
  std::vector<std::string> bad;
  if (k_.empty()) bad.push_back("k: need at least one phase");
  for (double x : k_)
    if (!(x > 0.0) || !std::isfinite(x)) bad.push_back("k: components must be positive");
  if (a_max_ < 0) bad.push_back("a_max: must be nonnegative");
  if (!(c_ >= 0.0)) bad.push_back("c_dioph: must be nonnegative");
  if (!(a_ >= 0.0)) bad.push_back("a: must be nonnegative");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  for_each_in_box(d(), 2 * a_max_, [&](const IntVec& b) {
    if (is_zero_vec(b) || !bad.empty()) return;
    if (std::abs(dot(b)) < divisor_floor(b)) {
      std::ostringstream os;
      os << "k: Diophantine bound fails at beta=(";
      for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
      os << ")";
      bad.push_back(os.str());
    }
  });
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

double PhaseLattice::dot(const IntVec& beta) const {
  if (beta.size() != k_.size()) throw std::invalid_argument("lattice dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < k_.size(); ++i) s += k_[i] * beta[i];
  return s;
}

bool PhaseLattice::in_truncation(const ModeIndex& m) const {
  return sup_norm(m.alpha0) <= a_max_ && sup_norm(m.alpha1) <= a_max_;
}

double PhaseLattice::divisor_floor(const IntVec& beta) const {
  const int n = sup_norm(beta);
  if (n == 0) return 0.0;
  return c_ * std::pow(static_cast<double>(n), -a_);
}

double PhaseLattice::diophantine_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for_each_in_box(d(), 2 * a_max_, [&](const IntVec& b) {
    if (is_zero_vec(b)) return;
    m = std::min(m, std::abs(dot(b)) * std::pow(static_cast<double>(sup_norm(b)), a_));
  });
  return m;
}

ModeClass classify_mode(const PhaseLattice&, const ModeIndex& alpha) {
  const auto& a0 = alpha.alpha0;
  const auto& a1 = alpha.alpha1;
  if (a0.size() != a1.size()) throw std::invalid_argument("classify_mode: dimension mismatch");
  const bool z0 = is_zero_vec(a0);
  const bool z1 = is_zero_vec(a1);
  if (z0 && z1) return ModeClass::Mean;
  if (z0) return ModeClass::NonCharacteristic;
  if (a1 == a0) return ModeClass::CPlus;
  bool minus = true;
  for (std::size_t i = 0; i < a0.size(); ++i) minus = minus && a1[i] == -a0[i];
  if (minus) return ModeClass::CMinus;
  if (z1) return ModeClass::CZero;
  return ModeClass::NonCharacteristic;
}

double default_resonance_tol(const LevelSystem& sys) {
  return 1e-9 * sys.omega().cwiseAbs().maxCoeff();
}

std::vector<Resonance> resonant_set(const LevelSystem& sys, const PhaseLattice& lat,
                                    std::optional<double> tol) {
  const double t = tol.value_or(default_resonance_tol(sys));
  if (t < 0.0) throw std::invalid_argument("resonance tolerance must be nonnegative");
  const int n = sys.n_levels();
  std::vector<Resonance> out;
  std::map<std::pair<int, int>, int> count;
  for_each_in_box(lat.d(), lat.a_max(), [&](const IntVec& a1) {
    const double ka = lat.dot(a1);
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q)
        if (std::abs(ka - omega_diff(sys, m, q)) <= t) {
          out.push_back({m, q, a1});
          ++count[{m, q}];
        }
  });
  for (const auto& [mn, c] : count)
    if (c > 1) {
      std::ostringstream os;
      os << "resonant_set: levels (" << mn.first + 1 << "," << mn.second + 1
         << ") resonate with " << c << " distinct alpha1";
      throw Error(os.str());
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<IntVec> resonant_alpha1(const LevelSystem& sys, const PhaseLattice& lat, int m,
                                      int n, std::optional<double> tol) {
  for (const auto& r : resonant_set(sys, lat, tol))
    if (r.m == m && r.n == n) return r.alpha1;
  return std::nullopt;
}

Mat6 maxwell_symbol(double x, double y, double z) { return cross_block(x, y, z); }

const Mat6& maxwell_ax() {
  static const Mat6 a = cross_block(1, 0, 0);
  return a;
}
const Mat6& maxwell_ay() {
  static const Mat6 a = cross_block(0, 1, 0);
  return a;
}
const Mat6& maxwell_az() {
  static const Mat6 a = cross_block(0, 0, 1);
  return a;
}

Mat6 pi_projector(const PhaseLattice& lat, const ModeIndex& alpha) {
  switch (classify_mode(lat, alpha)) {
    case ModeClass::Mean: return Mat6::Identity();
    case ModeClass::CPlus: return eigenprojector_ax(1);
    case ModeClass::CMinus: return eigenprojector_ax(-1);
    case ModeClass::CZero: return eigenprojector_ax(0);
    case ModeClass::NonCharacteristic: return Mat6::Zero();
  }
  return Mat6::Zero();
}

Mat6c m1_symbol(const PhaseLattice& lat, const ModeIndex& alpha) {
  const double a0 = lat.dot(alpha.alpha0);
  const double a1 = lat.dot(alpha.alpha1);
  const Mat6 real = -a1 * Mat6::Identity() + a0 * maxwell_ax();
  return I * real.cast<cplx>();
}

Mat6c m1_pseudo_inverse(const PhaseLattice& lat, const ModeIndex& alpha) {
  const double a0 = lat.dot(alpha.alpha0);
  const double a1 = lat.dot(alpha.alpha1);
  const Mat6 pi = pi_projector(lat, alpha);
  Mat6c out = Mat6c::Zero();
  for (int lam : {-1, 0, 1}) {
    const Mat6 p = eigenprojector_ax(lam);
    // Skip the eigenspace carried by the kernel projector; the class logic
    // decides exact zeros so rounding in k·α never produces huge divisors.
    if ((p - pi).norm() < 1e-12 || pi.isIdentity(1e-12)) continue;
    const cplx s = I * (-a1 + a0 * lam);
    out += p.cast<cplx>() / s;
  }
  return out;
}

double group_velocity(const PhaseLattice& lat, const ModeIndex& alpha) {
  switch (classify_mode(lat, alpha)) {
    case ModeClass::CPlus: return 1.0;
    case ModeClass::CMinus: return -1.0;
    case ModeClass::CZero: return 0.0;
    case ModeClass::Mean: throw std::invalid_argument("group_velocity: mean mode");
    case ModeClass::NonCharacteristic:
      throw std::invalid_argument("group_velocity: non-characteristic mode");
  }
  return 0.0;
}

double diffraction_coeff(const PhaseLattice& lat, const ModeIndex& alpha) {
  switch (classify_mode(lat, alpha)) {
    case ModeClass::CPlus: return 1.0 / (2.0 * lat.dot(alpha.alpha0));
    case ModeClass::CMinus: return -1.0 / (2.0 * lat.dot(alpha.alpha0));
    case ModeClass::CZero: return 0.0;
    case ModeClass::Mean: throw std::invalid_argument("diffraction_coeff: mean mode");
    case ModeClass::NonCharacteristic:
      throw std::invalid_argument("diffraction_coeff: non-characteristic mode");
  }
  return 0.0;
}

cplx mode_inverse_omega_gamma(const LevelSystem& sys, const PhaseLattice& lat, int m, int n,
                              const IntVec& alpha1, int kappa, std::optional<double> tol) {
  if (kappa < 0) throw std::invalid_argument("mode_inverse_omega_gamma: negative kappa");
  const double detune = omega_diff(sys, m, n) - lat.dot(alpha1);
  if (kappa == 1 && std::abs(detune) <= tol.value_or(default_resonance_tol(sys)))
    throw ResonantDivisionError("division on resonant mode");
  return 1.0 / cplx(sys.gamma() * (1 - kappa), detune);
}

}  // namespace maxbloch
