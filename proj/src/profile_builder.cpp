#include "maxbloch/profile_builder.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "maxbloch/errors.hpp"
#include "maxbloch/fft.hpp"
#include "maxbloch/mode_algebra.hpp"
#include "maxbloch/stiff_solver.hpp"

namespace maxbloch {

namespace {

ModeIndex zero_mode(int d) { return ModeIndex{IntVec(d, 0), IntVec(d, 0), 0}; }

bool nonzero(const Field& f) { return !f.empty() && !all_zero(f); }

std::array<Field, 6> project(const Mat6& pi, const std::array<Field, 6>& u, std::size_t np) {
  std::array<Field, 6> out;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c)
      if (pi(r, c) != 0.0 && !u[c].empty()) {
        if (out[r].empty()) out[r].assign(np, cplx{});
        axpy(out[r], pi(r, c), u[c]);
      }
  for (auto& f : out)
    if (!f.empty() && all_zero(f)) f.clear();
  return out;
}

std::string beta_str(const IntVec& b) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
  os << ")";
  return os.str();
}

void require_divisor(const PhaseLattice& lat, const IntVec& beta, double value) {
  const double floor = lat.divisor_floor(beta);
  if (!(std::abs(value) >= floor) || value == 0.0)
    throw Error("small divisor below the Diophantine floor at " + beta_str(beta));
}

// E⁰ as matrix fields (E·Γ) per wave mode, and N⁰ as diagonal matrix fields.
ModeMatrices leading_e_gamma(const ProfileSet& p) {
  ModeMatrices out;
  const auto& lat = p.lattice();
  for (const auto& [key, c] : p.slots()) {
    if (key.order != 0 || key.mode.kappa != 0) continue;
    const auto cls = classify_mode(lat, key.mode);
    const bool has_e = nonzero(c.u[kEx]) || nonzero(c.u[kEy]) || nonzero(c.u[kEz]);
    if (!has_e || cls == ModeClass::CZero) continue;
    MatrixField g = e_dot_gamma(p.system(), {c.u[kEx], c.u[kEy], c.u[kEz]});
    if (!is_zero(g)) out.emplace(key.mode, std::move(g));
  }
  return out;
}

ModeMatrices leading_pops(const ProfileSet& p) {
  ModeMatrices out;
  const int n = p.system().n_levels();
  for (const auto& [key, c] : p.slots()) {
    if (key.order != 0 || key.mode.kappa != 0 || c.rho.empty()) continue;
    MatrixField d = zero_matrix_field(n);
    bool any = false;
    for (int q = 0; q < n; ++q)
      if (nonzero(c.rho[q * n + q])) {
        d[q * n + q] = c.rho[q * n + q];
        any = true;
      }
    if (any) out.emplace(key.mode, std::move(d));
  }
  return out;
}

ModeMatrices order_rho(const ProfileSet& p, int j) {
  ModeMatrices out;
  for (const auto& [key, c] : p.slots())
    if (key.order == j && key.mode.kappa == 0 && !c.rho.empty() && !is_zero(c.rho))
      out.emplace(key.mode, c.rho);
  return out;
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Lifted: return "lifted";
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::Evolved: return "evolved";
    case Provenance::ZeroFreeChoice: return "zero-free-choice";
  }
  return "?";
}

ProfileSet::ProfileSet(LevelSystem sys, PhaseLattice lat, Grid grid)
    : sys_(std::move(sys)), lat_(std::move(lat)), grid_(grid) {}

ProfileCoeff& ProfileSet::slot(int j, const ModeIndex& alpha, Provenance p) {
  if (j < 0 || j > 2) throw std::invalid_argument("profile order must be 0, 1 or 2");
  if (!lat_.in_truncation(alpha)) throw std::out_of_range("profile mode outside truncation");
  SlotKey key{j, alpha};
  auto it = slots_.find(key);
  if (it == slots_.end()) {
    it = slots_.emplace(key, ProfileCoeff{}).first;
    it->second.rho.resize(static_cast<std::size_t>(sys_.n_levels()) * sys_.n_levels());
  }
  provenance_[key] = p;
  return it->second;
}

const ProfileCoeff* ProfileSet::find(int j, const ModeIndex& alpha) const {
  auto it = slots_.find(SlotKey{j, alpha});
  return it == slots_.end() ? nullptr : &it->second;
}

void ProfileSet::mark(int j, Provenance p) {
  for (auto& [k, v] : provenance_)
    if (k.order == j) v = p;
}

void ProfileSet::erase_order(int j) {
  for (auto it = slots_.begin(); it != slots_.end();) {
    if (it->first.order == j) {
      provenance_.erase(it->first);
      it = slots_.erase(it);
    } else {
      ++it;
    }
  }
}

void ProfileSet::check_polarizations(double tol) const {
  std::vector<std::string> bad;
  const int n = sys_.n_levels();
  for (const auto& [key, c] : slots_) {
    const int j = key.order;
    const int kappa = key.mode.kappa;
    const auto cls = classify_mode(lat_, key.mode);
    std::ostringstream where;
    where << "U^" << j << " kappa=" << kappa << " alpha0=" << beta_str(key.mode.alpha0)
          << " alpha1=" << beta_str(key.mode.alpha1);
    double u_mag = 0.0, c_mag = 0.0, n_mag = 0.0;
    for (const auto& f : c.u) u_mag = std::max(u_mag, sup_abs(f));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double v = sup_abs(c.rho[a * n + b]);
        (a == b ? n_mag : c_mag) = std::max(a == b ? n_mag : c_mag, v);
      }
    const int u_max = j == 0 ? 0 : 1;
    const int c_max = j == 0 ? 1 : (j == 1 ? 1 : 2);
    const int n_max = j == 0 ? 0 : (j == 1 ? 1 : 2);
    if (kappa > u_max && u_mag > tol) bad.push_back(where.str() + ": field at forbidden kappa");
    if (kappa > c_max && c_mag > tol) bad.push_back(where.str() + ": coherence at forbidden kappa");
    if (kappa > n_max && n_mag > tol) bad.push_back(where.str() + ": population at forbidden kappa");
    if (j == 0) {
      if (kappa == 0) {
        const Mat6 pi = pi_projector(lat_, key.mode);
        auto res = project(Mat6::Identity() - pi, c.u, grid_.size());
        double r = 0.0;
        for (const auto& f : res) r = std::max(r, sup_abs(f));
        if (r > tol) bad.push_back(where.str() + ": field outside the kernel projector");
        if (c_mag > tol) bad.push_back(where.str() + ": leading coherence at kappa=0");
        if (n_mag > tol && cls != ModeClass::Mean && cls != ModeClass::CZero)
          bad.push_back(where.str() + ": leading population off C0 and mean");
      }
      if (kappa == 1) {
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            if (a == b || !nonzero(c.rho[a * n + b])) continue;
            auto a1 = resonant_alpha1(sys_, lat_, a, b);
            if (!a1 || *a1 != key.mode.alpha1)
              bad.push_back(where.str() + ": non-resonant leading coherence");
          }
      }
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

double ProfileSet::tail_mass(int margin) const {
  double m = 0.0;
  const int lim = lat_.a_max() - margin;
  for (const auto& [key, c] : slots_) {
    int s = 0;
    for (int x : key.mode.alpha0) s = std::max(s, std::abs(x));
    for (int x : key.mode.alpha1) s = std::max(s, std::abs(x));
    if (s <= lim) continue;
    for (const auto& f : c.u) m = std::max(m, sup_abs(f));
    for (const auto& f : c.rho) m = std::max(m, sup_abs(f));
  }
  return m;
}

ProfileSet lift_initial_data(const LevelSystem& sys, const PhaseLattice& lat,
                             const InitialData& data) {
  ProfileSet p(sys, lat, data.grid);
  const std::size_t np = data.grid.size();
  const int n = sys.n_levels();
  std::vector<std::string> bad;
  for (const auto& [beta, u] : data.fields) {
    if (static_cast<int>(beta.size()) != lat.d()) throw std::invalid_argument("beta dimension");
    for (const auto& f : u)
      if (!f.empty() && f.size() != np) throw std::invalid_argument("initial field grid mismatch");
    const IntVec zero(lat.d(), 0);
    if (beta == zero) {
      bool any = false;
      for (const auto& f : u) any = any || nonzero(f);
      if (any) p.slot(0, zero_mode(lat.d()), Provenance::Lifted).u = u;
      continue;
    }
    IntVec minus = beta;
    for (auto& x : minus) x = -x;
    for (const ModeIndex& alpha :
         {ModeIndex{beta, beta, 0}, ModeIndex{beta, minus, 0}, ModeIndex{beta, zero, 0}}) {
      auto v = project(pi_projector(lat, alpha), u, np);
      bool any = false;
      for (const auto& f : v) any = any || nonzero(f);
      if (any) p.slot(0, alpha, Provenance::Lifted).u = std::move(v);
    }
  }
  for (const auto& [beta, r] : data.rho) {
    if (static_cast<int>(r.size()) != n * n) throw std::invalid_argument("initial rho size");
    const ModeIndex pop{beta, IntVec(lat.d(), 0), 0};
    for (int q = 0; q < n; ++q)
      if (nonzero(r[q * n + q])) p.slot(0, pop, Provenance::Lifted).rho[q * n + q] = r[q * n + q];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b || !nonzero(r[a * n + b])) continue;
        auto a1 = resonant_alpha1(sys, lat, a, b);
        if (!a1) {
          std::ostringstream os;
          os << "rho(" << a + 1 << "," << b + 1 << ") at beta=" << beta_str(beta)
             << ": coherence on a non-resonant transition cannot be lifted";
          bad.push_back(os.str());
          continue;
        }
        p.slot(0, ModeIndex{beta, *a1, 1}, Provenance::Lifted).rho[a * n + b] = r[a * n + b];
      }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return p;
}

ReducedState reduced_from_leading(const ProfileSet& p) {
  ReducedState s = ReducedState::empty(p.grid());
  const auto& lat = p.lattice();
  const int n = p.system().n_levels();
  auto full = [&](const Field& f) { return f.empty() ? zeros(p.grid()) : f; };
  for (const auto& [key, c] : p.slots()) {
    if (key.order != 0) continue;
    if (key.mode.kappa == 1) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b && nonzero(c.rho[a * n + b]))
            s.coh[CoherenceKey{a, b, key.mode}] = c.rho[a * n + b];
      continue;
    }
    if (key.mode.kappa != 0) continue;
    switch (classify_mode(lat, key.mode)) {
      case ModeClass::CPlus:
      case ModeClass::CMinus:
        s.e_modes[key.mode] = {full(c.u[kEx]), full(c.u[kEy]), full(c.u[kEz])};
        break;
      case ModeClass::CZero: {
        bool any = false;
        for (const auto& f : c.u) any = any || nonzero(f);
        if (any) {
          std::array<Field, 6> u;
          for (int q = 0; q < 6; ++q) u[q] = full(c.u[q]);
          s.c0_fields[key.mode] = std::move(u);
        }
        break;
      }
      case ModeClass::Mean:
        for (int q = 0; q < 6; ++q) s.field_means[q] = full(c.u[q]);
        break;
      case ModeClass::NonCharacteristic:
        break;
    }
    bool any_pop = false;
    for (int q = 0; q < n; ++q) any_pop = any_pop || nonzero(c.rho[q * n + q]);
    if (any_pop) {
      std::vector<Field> lv(n);
      for (int q = 0; q < n; ++q) lv[q] = full(c.rho[q * n + q]);
      s.pop_modes[key.mode] = std::move(lv);
    }
  }
  return s;
}

ProfileSet leading_from_reduced(const LevelSystem& sys, const PhaseLattice& lat,
                                const ReducedState& s) {
  ProfileSet p(sys, lat, s.grid);
  p.t = s.t;
  const int n = sys.n_levels();
  for (const auto& [m, e] : s.e_modes) {
    const double sign = classify_mode(lat, m) == ModeClass::CPlus ? 1.0 : -1.0;
    auto& c = p.slot(0, m, Provenance::Evolved);
    c.u[kEy] = e[1];
    c.u[kEz] = e[2];
    c.u[kBy] = scaled(e[2], -sign);
    c.u[kBz] = scaled(e[1], sign);
    for (auto& f : c.u)
      if (!f.empty() && all_zero(f)) f.clear();
  }
  for (const auto& [m, u] : s.c0_fields) {
    auto& c = p.slot(0, m, Provenance::Evolved);
    c.u = u;
  }
  {
    bool any = false;
    for (const auto& f : s.field_means) any = any || nonzero(f);
    if (any) {
      auto& c = p.slot(0, zero_mode(lat.d()), Provenance::Evolved);
      for (int q = 0; q < 6; ++q)
        if (nonzero(s.field_means[q])) c.u[q] = s.field_means[q];
    }
  }
  for (const auto& [m, lv] : s.pop_modes) {
    auto& c = p.slot(0, m, Provenance::Evolved);
    for (int q = 0; q < n; ++q)
      if (nonzero(lv[q])) c.rho[q * n + q] = lv[q];
  }
  for (const auto& [k, f] : s.coh) p.slot(0, k.alpha, Provenance::Evolved).rho[k.m * n + k.n] = f;
  return p;
}

void build_corrector1_tm(ProfileSet& p) {
  const auto& lat = p.lattice();
  const auto& sys = p.system();
  const Grid& g = p.grid();
  const int n = sys.n_levels();
  if (lat.d() != 1) throw Error("TM correctors require a single phase");
  if (g.n(2) != 1) throw Error("TM correctors require a flat (x, y) grid");
  std::vector<std::string> bad;
  for (const auto& [key, c] : p.slots()) {
    if (key.order != 0) continue;
    if (key.mode.kappa == 1 && !is_zero(c.rho))
      bad.push_back("prepared data required: leading coherences must vanish");
    for (int q : {kBz, kEx, kEy})
      if (nonzero(c.u[q])) bad.push_back("TM polarization: only Bx, By, Ez may be nonzero");
    if (key.mode.is_zero() && (nonzero(c.u[kBx]) || nonzero(c.u[kEz])))
      bad.push_back("TM polarization: mean Bx and E must vanish");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  p.erase_order(1);
  p.erase_order(2);

  // Field parts.
  std::map<ModeIndex, ProfileCoeff> add;
  for (const auto& [key, c] : p.slots()) {
    if (key.order != 0 || key.mode.kappa != 0) continue;
    const double a0 = lat.dot(key.mode.alpha0);
    const double a1 = lat.dot(key.mode.alpha1);
    switch (classify_mode(lat, key.mode)) {
      case ModeClass::CPlus:
      case ModeClass::CMinus:
        if (nonzero(c.u[kEz])) {
          require_divisor(lat, key.mode.alpha1, a1);
          add[key.mode].u[kBx] = scaled(derivative(c.u[kEz], g, 1), 1.0 / (I * a1));
        }
        break;
      case ModeClass::CZero:
        if (nonzero(c.u[kBx])) {
          require_divisor(lat, key.mode.alpha0, a0);
          add[key.mode].u[kBy] = scaled(derivative(c.u[kBx], g, 1), 1.0 / (I * a0));
        }
        break;
      case ModeClass::Mean:
        if (nonzero(c.u[kBy])) {
          Field dx = derivative(c.u[kBy], g, 0);
          // y-average of ∂x By must vanish at every x.
          double worst = 0.0;
          const double scale = std::max(1.0, sup_abs(dx));
          for (int i = 0; i < g.n(0); ++i) {
            cplx s{};
            for (int j = 0; j < g.n(1); ++j) s += dx[g.index(i, j, 0)];
            worst = std::max(worst, std::abs(s) / g.n(1));
          }
          if (worst > 1e-10 * scale)
            throw ValidationError({"mean By: its x-derivative must have zero y-average"});
          Field bx = antiderivative(dx, g, 1);
          if (nonzero(bx)) add[key.mode].u[kBx] = std::move(bx);
        }
        break;
      case ModeClass::NonCharacteristic:
        break;
    }
  }

  // C¹ = i (iΩ_γ − k·∂θ₁)⁻¹ E⁰[Γ, N⁰] on every reachable mode.
  ModeMatrices x = mode_commutator(leading_e_gamma(p), leading_pops(p), n,
                                   [&](const ModeIndex& m) { return lat.in_truncation(m); });
  for (auto& [m, mat] : x) {
    keep_offdiag(mat, n);
    apply_mode_inverse(sys, lat, m, 0, mat);
    if (is_zero(mat)) continue;
    auto& rho = add[m].rho;
    rho.resize(static_cast<std::size_t>(n) * n);
    for (int q = 0; q < n * n; ++q)
      if (!mat[q].empty()) rho[q] = scaled(mat[q], I);
  }
  for (auto& [m, c] : add) {
    auto& dst = p.slot(1, m, Provenance::ClosedForm);
    for (int q = 0; q < 6; ++q)
      if (!c.u[q].empty()) dst.u[q] = std::move(c.u[q]);
    for (std::size_t q = 0; q < c.rho.size(); ++q)
      if (!c.rho[q].empty()) dst.rho[q] = std::move(c.rho[q]);
  }
}

void build_corrector2_tm(ProfileSet& p) {
  const auto& lat = p.lattice();
  const auto& sys = p.system();
  const Grid& g = p.grid();
  const int n = sys.n_levels();
  p.erase_order(2);

  // R_α = S_α − ∂y Bx¹_α with S = i Tr(Γ Ω_γ C¹).
  std::map<ModeIndex, Field> r;
  for (const auto& [key, c] : p.slots()) {
    if (key.order != 1 || key.mode.kappa != 0) continue;
    Field acc;
    if (!c.rho.empty() && !is_zero(c.rho)) {
      auto tr = trace_gamma_omega(sys, c.rho);
      axpy(acc, I, tr[2]);
    }
    if (nonzero(c.u[kBx])) axpy(acc, -1.0, derivative(c.u[kBx], g, 1));
    if (nonzero(acc)) r[key.mode] = std::move(acc);
  }

  std::map<ModeIndex, ProfileCoeff> add;
  for (auto& [m, rr] : r) {
    const double a0 = lat.dot(m.alpha0);
    const double a1 = lat.dot(m.alpha1);
    switch (classify_mode(lat, m)) {
      case ModeClass::CPlus:
      case ModeClass::CMinus: {
        require_divisor(lat, m.alpha1, a1);
        Field e2 = scaled(rr, I / (4.0 * a1));
        add[m].u[kBy] = scaled(e2, group_velocity(lat, m));
        add[m].u[kEz] = std::move(e2);
        break;
      }
      case ModeClass::CZero:
        require_divisor(lat, m.alpha0, a0);
        add[m].u[kBy] = scaled(rr, I / a0);
        break;
      case ModeClass::NonCharacteristic: {
        IntVec dm(m.alpha1.size()), dp(m.alpha1.size());
        for (std::size_t i = 0; i < dm.size(); ++i) {
          dm[i] = m.alpha1[i] - m.alpha0[i];
          dp[i] = m.alpha1[i] + m.alpha0[i];
        }
        require_divisor(lat, dm, a1 - a0);
        require_divisor(lat, dp, a1 + a0);
        const cplx f = I / (a1 * a1 - a0 * a0);
        add[m].u[kBy] = scaled(rr, -f * a0);
        add[m].u[kEz] = scaled(rr, f * a1);
        break;
      }
      case ModeClass::Mean:
        break;
    }
  }

  // E⁰[Γ, C¹]: off-diagonal part feeds C², diagonal part feeds N² on α₁ ≠ 0.
  ModeMatrices x = mode_commutator(leading_e_gamma(p), order_rho(p, 1), n,
                                   [&](const ModeIndex& m) { return lat.in_truncation(m); });
  for (auto& [m, mat] : x) {
    MatrixField diag = mat;
    keep_diag(diag, n);
    keep_offdiag(mat, n);
    apply_mode_inverse(sys, lat, m, 0, mat);
    auto& rho = add[m].rho;
    rho.resize(static_cast<std::size_t>(n) * n);
    for (int q = 0; q < n * n; ++q)
      if (!mat[q].empty()) rho[q] = scaled(mat[q], I);
    bool time_mode = false;
    for (int v : m.alpha1) time_mode = time_mode || v != 0;
    if (time_mode) {
      const double a1 = lat.dot(m.alpha1);
      require_divisor(lat, m.alpha1, a1);
      for (int q = 0; q < n; ++q)
        if (!diag[q * n + q].empty()) rho[q * n + q] = scaled(diag[q * n + q], -1.0 / a1);
    }
  }
  for (auto& [m, c] : add) {
    bool any = false;
    for (const auto& f : c.u) any = any || nonzero(f);
    for (const auto& f : c.rho) any = any || nonzero(f);
    if (!any) continue;
    auto& dst = p.slot(2, m, Provenance::ClosedForm);
    for (int q = 0; q < 6; ++q)
      if (!c.u[q].empty()) dst.u[q] = std::move(c.u[q]);
    for (std::size_t q = 0; q < c.rho.size(); ++q)
      if (!c.rho[q].empty()) dst.rho[q] = std::move(c.rho[q]);
  }
}

SingularState assemble_uapp(const ProfileSet& p, double epsilon, double t, int ntheta,
                            int max_order, const SlotWeight& weight) {
  const Grid& g = p.grid();
  const auto& lat = p.lattice();
  if (lat.d() != 1) throw Error("assembly on a θ₀ grid requires a single phase");
  if (g.n(2) != 1) throw Error("assembly requires a flat (x, y) profile grid");
  const int n = p.system().n_levels();
  const Grid sg({g.n(0), g.n(1), ntheta}, {g.length(0), g.length(1), 2.0 * std::numbers::pi});
  SingularState s = SingularState::zeros(sg, n, epsilon);
  s.time = t;
  for (const auto& [key, c] : p.slots()) {
    if (key.order > max_order) continue;
    const double a1 = lat.dot(key.mode.alpha1);
    cplx amp = std::pow(std::sqrt(epsilon), key.order) * std::exp(-I * a1 * t / epsilon) *
               std::exp(-key.mode.kappa * p.system().gamma() * t / epsilon);
    if (weight) amp *= weight(key.order, key.mode);
    if (amp == cplx{}) continue;
    std::vector<cplx> phase(ntheta);
    for (int l = 0; l < ntheta; ++l)
      phase[l] = amp * std::exp(I * (key.mode.alpha0[0] * sg.coordinate(2, l)));
    auto deposit = [&](Field& dst, const Field& src) {
      if (src.empty()) return;
      for (int i = 0; i < g.n(0); ++i)
        for (int j = 0; j < g.n(1); ++j) {
          const cplx v = src[g.index(i, j, 0)];
          for (int l = 0; l < ntheta; ++l) dst[sg.index(i, j, l)] += v * phase[l];
        }
    };
    deposit(s.bx, c.u[kBx]);
    deposit(s.by, c.u[kBy]);
    deposit(s.e, c.u[kEz]);
    for (int q = 0; q < n * n; ++q) deposit(s.rho[q], c.rho[q]);
  }
  return s;
}

ProfileSet combine(const std::vector<std::pair<double, const ProfileSet*>>& terms) {
  if (terms.empty()) throw std::invalid_argument("combine: no terms");
  const ProfileSet& ref = *terms.front().second;
  ProfileSet out(ref.system(), ref.lattice(), ref.grid());
  for (const auto& [w, ps] : terms)
    for (const auto& [key, c] : ps->slots()) {
      auto& dst = out.slot(key.order, key.mode, Provenance::Evolved);
      for (int q = 0; q < 6; ++q) axpy(dst.u[q], w, c.u[q]);
      for (std::size_t q = 0; q < c.rho.size(); ++q) axpy(dst.rho[q], w, c.rho[q]);
    }
  return out;
}

}  // namespace maxbloch
