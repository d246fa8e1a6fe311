#include "maxbloch/reduced_model.hpp"

#include <cmath>
#include <stdexcept>

#include "maxbloch/fft.hpp"

namespace maxbloch {

namespace {

using EModes = std::map<ModeIndex, std::array<Field, 3>>;
using Pops = std::map<ModeIndex, std::vector<Field>>;

bool is_pop_class(ModeClass c) { return c == ModeClass::Mean || c == ModeClass::CZero; }
bool is_wave_class(ModeClass c) { return c == ModeClass::CPlus || c == ModeClass::CMinus; }

ModeIndex strip_kappa(ModeIndex m) {
  m.kappa = 0;
  return m;
}

// y ← y + a·x over mode maps of fixed-size arrays/vectors; missing keys are
// zero and get created on demand.
template <class Map>
void map_axpy(Map& y, double a, const Map& x) {
  for (const auto& [k, v] : x) {
    auto it = y.find(k);
    if (it == y.end()) {
      typename Map::mapped_type z = v;
      for (auto& f : z)
        for (auto& c : f) c *= a;
      y.emplace(k, std::move(z));
    } else {
      for (std::size_t c = 0; c < v.size(); ++c) axpy(it->second[c], a, v[c]);
    }
  }
}

template <class Map>
Map map_combine(const Map& base, double a, const Map& x) {
  Map out = base;
  map_axpy(out, a, x);
  return out;
}

}  // namespace

ReducedState ReducedState::empty(const Grid& g) {
  ReducedState s;
  s.grid = g;
  for (auto& f : s.field_means) f = zeros(g);
  return s;
}

double total_population(const ReducedState& s) {
  for (const auto& [m, p] : s.pop_modes) {
    if (!m.is_zero()) continue;
    double tot = 0.0;
    for (const auto& f : p)
      for (const auto& v : f) tot += v.real();
    return tot / static_cast<double>(s.grid.size());
  }
  return 0.0;
}

ReducedModel::ReducedModel(LevelSystem sys, PhaseLattice lat, Grid grid, kernels::Backend backend)
    : sys_(std::move(sys)), lat_(std::move(lat)), grid_(grid), backend_(backend) {
  tm_ = sys_.is_tm() && grid_.n(2) == 1;
  for (const auto& r : resonant_set(sys_, lat_))
    if (r.m != r.n) resonances_[{r.m, r.n}] = r.alpha1;
}

bool ReducedModel::is_resonant(int m, int n, const ModeIndex& alpha) const {
  auto it = resonances_.find({m, n});
  return it != resonances_.end() && it->second == alpha.alpha1;
}

namespace {

struct Brackets {
  ModeMatrices eg;  // (E·Γ)_α
  ModeMatrices y;   // D⁻¹[EΓ, N]_od
};

Brackets build_brackets(const LevelSystem& sys, const PhaseLattice& lat, const EModes& e,
                        const std::array<Field, 3>& e_mean, const Pops& pops) {
  const int n = sys.n_levels();
  Brackets b;
  for (const auto& [m, ev] : e) {
    MatrixField g = e_dot_gamma(sys, ev);
    if (!is_zero(g)) b.eg.emplace(strip_kappa(m), std::move(g));
  }
  bool mean_nonzero = false;
  for (const auto& f : e_mean) mean_nonzero = mean_nonzero || (!f.empty() && !all_zero(f));
  if (mean_nonzero) {
    const ModeIndex zero{IntVec(lat.d(), 0), IntVec(lat.d(), 0), 0};
    b.eg.emplace(zero, e_dot_gamma(sys, e_mean));
  }
  ModeMatrices nn;
  for (const auto& [m, p] : pops) {
    MatrixField d = zero_matrix_field(n);
    bool any = false;
    for (int q = 0; q < n; ++q)
      if (!p[q].empty() && !all_zero(p[q])) {
        d[q * n + q] = p[q];
        any = true;
      }
    if (any) nn.emplace(strip_kappa(m), std::move(d));
  }
  b.y = mode_commutator(b.eg, nn, n, [&](const ModeIndex& m) { return lat.in_truncation(m); });
  for (auto& [m, x] : b.y) {
    keep_offdiag(x, n);
    apply_mode_inverse(sys, lat, m, 0, x);
  }
  return b;
}

Field flatten(const MatrixField& a, int n, std::size_t points) {
  Field out(static_cast<std::size_t>(n) * n * points, cplx{});
  for (int q = 0; q < n * n; ++q)
    if (!a[q].empty()) std::copy(a[q].begin(), a[q].end(), out.begin() + q * points);
  return out;
}

}  // namespace

PopulationRates ReducedModel::nonlinear_pauli_rates(const EModes& e,
                                                    const std::array<Field, 3>& e_mean,
                                                    const Pops& pops) const {
  const int n = sys_.n_levels();
  const std::size_t np = grid_.size();
  Brackets b = build_brackets(sys_, lat_, e, e_mean, pops);

  kernels::RateProblem prob;
  prob.n = n;
  prob.points = np;
  std::vector<ModeIndex> eg_keys, y_keys;
  for (const auto& [m, g] : b.eg) {
    eg_keys.push_back(m);
    prob.eg.push_back(flatten(g, n, np));
  }
  for (const auto& [m, y] : b.y) {
    y_keys.push_back(m);
    prob.y.push_back(flatten(y, n, np));
  }
  std::map<ModeIndex, int> out_slot;
  std::vector<ModeIndex> out_keys;
  for (std::size_t a = 0; a < eg_keys.size(); ++a)
    for (std::size_t c = 0; c < y_keys.size(); ++c) {
      const ModeIndex o = eg_keys[a] + y_keys[c];
      if (!lat_.in_truncation(o) || !is_pop_class(classify_mode(lat_, o))) continue;
      auto it = out_slot.find(o);
      if (it == out_slot.end()) {
        it = out_slot.emplace(o, static_cast<int>(out_keys.size())).first;
        out_keys.push_back(o);
      }
      prob.terms.push_back({it->second, static_cast<int>(a), static_cast<int>(c)});
    }
  prob.n_out = static_cast<int>(out_keys.size());
  std::vector<Field> raw;
  kernels::pauli_rates(backend_, prob, raw);

  PopulationRates out;
  for (std::size_t o = 0; o < out_keys.size(); ++o) {
    std::vector<Field> levels(n);
    for (int q = 0; q < n; ++q)
      levels[q] = Field(raw[o].begin() + q * np, raw[o].begin() + (q + 1) * np);
    out.emplace(out_keys[o], std::move(levels));
  }
  return out;
}

PopulationRates ReducedModel::nonlinear_pauli_rates(const ReducedState& s) const {
  return nonlinear_pauli_rates(s.e_modes, {s.field_means[3], s.field_means[4], s.field_means[5]},
                               s.pop_modes);
}

EModes ReducedModel::field_source(const EModes& e, const std::array<Field, 3>& e_mean,
                                  const Pops& pops) const {
  Brackets b = build_brackets(sys_, lat_, e, e_mean, pops);
  EModes out;
  for (auto& [m, y] : b.y) {
    if (!is_wave_class(classify_mode(lat_, m))) continue;
    // S = i Tr(Γ Ω_γ C¹) with C¹ = i Y; the E-part of π±(0,S) is S⊥/2.
    std::array<Field, 3> tr = trace_gamma_omega(sys_, y);
    std::array<Field, 3> src;
    for (int j = 1; j < 3; ++j) {
      src[j] = zeros(grid_);
      axpy(src[j], -0.5, tr[j]);
    }
    src[0] = zeros(grid_);
    out.emplace(m, std::move(src));
  }
  return out;
}

void ReducedModel::transport(ReducedState& s, double dt) const {
  const auto& plan = plan_for(grid_);
  for (auto& [m, ev] : s.e_modes) {
    const double v = group_velocity(lat_, m);
    const double a = diffraction_coeff(lat_, m);
    for (auto& f : ev) {
      if (f.empty()) continue;
      plan.forward(f);
      for (int i = 0; i < grid_.n(0); ++i)
        for (int j = 0; j < grid_.n(1); ++j)
          for (int l = 0; l < grid_.n(2); ++l) {
            const double xi = grid_.wavenumber(0, i);
            const double eta = grid_.wavenumber(1, j);
            const double zeta = grid_.wavenumber(2, l);
            f[grid_.index(i, j, l)] *= std::exp(-I * dt * (v * xi + a * (eta * eta + zeta * zeta)));
          }
      plan.inverse(f);
    }
  }
}

void ReducedModel::step_field(ReducedState& s, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("step_field: dt must be positive");
  transport(s, 0.5 * dt);
  const std::array<Field, 3> mean{s.field_means[3], s.field_means[4], s.field_means[5]};
  auto f = [&](const EModes& e) { return field_source(e, mean, s.pop_modes); };
  const EModes& e0 = s.e_modes;
  EModes k1 = f(e0);
  EModes k2 = f(map_combine(e0, 0.5 * dt, k1));
  EModes k3 = f(map_combine(e0, 0.5 * dt, k2));
  EModes k4 = f(map_combine(e0, dt, k3));
  EModes next = e0;
  map_axpy(next, dt / 6.0, k1);
  map_axpy(next, dt / 3.0, k2);
  map_axpy(next, dt / 3.0, k3);
  map_axpy(next, dt / 6.0, k4);
  s.e_modes = std::move(next);
  transport(s, 0.5 * dt);
}

void ReducedModel::step_populations(ReducedState& s, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("step_populations: dt must be positive");
  const int n = sys_.n_levels();
  const std::array<Field, 3> mean{s.field_means[3], s.field_means[4], s.field_means[5]};
  const auto& w = sys_.pauli();
  auto f = [&](const Pops& p) {
    Pops r = nonlinear_pauli_rates(s.e_modes, mean, p);
    for (const auto& [m, lv] : p) {
      auto it = r.find(m);
      if (it == r.end()) {
        std::vector<Field> z(n);
        for (auto& x : z) x = zeros(grid_);
        it = r.emplace(m, std::move(z)).first;
      }
      for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k) {
          axpy(it->second[a], w(k, a), lv[k]);
          axpy(it->second[a], -w(a, k), lv[a]);
        }
    }
    return r;
  };
  const Pops& p0 = s.pop_modes;
  Pops k1 = f(p0);
  Pops k2 = f(map_combine(p0, 0.5 * dt, k1));
  Pops k3 = f(map_combine(p0, 0.5 * dt, k2));
  Pops k4 = f(map_combine(p0, dt, k3));
  Pops next = p0;
  map_axpy(next, dt / 6.0, k1);
  map_axpy(next, dt / 3.0, k2);
  map_axpy(next, dt / 3.0, k3);
  map_axpy(next, dt / 6.0, k4);
  s.pop_modes = std::move(next);
}

void ReducedModel::step(ReducedState& s, double dt) const {
  step_field(s, 0.5 * dt);
  step_populations(s, dt);
  step_field(s, 0.5 * dt);
  s.t += dt;
}

void ReducedModel::step_coherence_T(ReducedState& s, double dT) const {
  if (s.coh.empty()) {
    s.T += dT;
    return;
  }
  const int n = sys_.n_levels();
  const std::array<Field, 3> mean{s.field_means[3], s.field_means[4], s.field_means[5]};
  ModeMatrices eg;
  for (const auto& [m, ev] : s.e_modes) eg.emplace(strip_kappa(m), e_dot_gamma(sys_, ev));
  {
    const ModeIndex zero{IntVec(lat_.d(), 0), IntVec(lat_.d(), 0), 0};
    MatrixField g = e_dot_gamma(sys_, mean);
    if (!is_zero(g)) eg.emplace(zero, std::move(g));
  }
  using Coh = std::map<CoherenceKey, Field>;
  auto f = [&](const Coh& c) {
    ModeMatrices cm;
    for (const auto& [k, v] : c) {
      auto it = cm.find(strip_kappa(k.alpha));
      if (it == cm.end()) it = cm.emplace(strip_kappa(k.alpha), zero_matrix_field(n)).first;
      it->second[k.m * n + k.n] = v;
    }
    ModeMatrices out =
        mode_commutator(eg, cm, n, [&](const ModeIndex& m) { return lat_.in_truncation(m); });
    Coh r;
    for (auto& [m, mat] : out)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          if (mat[a * n + b].empty() || !is_resonant(a, b, m)) continue;
          ModeIndex key = m;
          key.kappa = 1;
          r.emplace(CoherenceKey{a, b, key}, scaled(mat[a * n + b], I));
        }
    return r;
  };
  auto comb = [&](const Coh& base, double a, const Coh& x) {
    Coh o = base;
    for (const auto& [k, v] : x) axpy(o[k], a, v);
    return o;
  };
  const Coh& c0 = s.coh;
  Coh k1 = f(c0);
  Coh k2 = f(comb(c0, 0.5 * dT, k1));
  Coh k3 = f(comb(c0, 0.5 * dT, k2));
  Coh k4 = f(comb(c0, dT, k3));
  Coh next = comb(c0, dT / 6.0, k1);
  next = comb(next, dT / 3.0, k2);
  next = comb(next, dT / 3.0, k3);
  next = comb(next, dT / 6.0, k4);
  s.coh = std::move(next);
  s.T += dT;
}

void ReducedModel::evolve_mean_T(ReducedState& s, double dT) const {
  if (!tm_) semigroup_m2(s.field_means, grid_, dT);
  s.T += dT;
}

double ReducedModel::gronwall_constant(const ReducedState& s) const {
  const int n = sys_.n_levels();
  std::vector<double> acc(grid_.size(), 0.0);
  auto add = [&](const std::array<Field, 3>& ev) {
    MatrixField g = e_dot_gamma(sys_, ev);
    for (std::size_t p = 0; p < grid_.size(); ++p) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
      for (int q = 0; q < n * n; ++q)
        if (!g[q].empty()) m(q / n, q % n) = g[q][p];
      acc[p] += Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
    }
  };
  for (const auto& [m, ev] : s.e_modes) add(ev);
  add({s.field_means[3], s.field_means[4], s.field_means[5]});
  double sup = 0.0;
  for (double v : acc) sup = std::max(sup, v);
  return 2.0 * sup;
}

double ReducedModel::polarization_defect(const ReducedState& s) const {
  double d = 0.0;
  for (const auto& [m, ev] : s.e_modes) {
    const bool ok = is_wave_class(classify_mode(lat_, m));
    for (int j = 0; j < 3; ++j) {
      const bool forbidden = !ok || j == 0 || (tm_ && j != 2);
      if (forbidden && !ev[j].empty()) d = std::max(d, sup_abs(ev[j]));
    }
  }
  for (const auto& [m, p] : s.pop_modes)
    if (!is_pop_class(classify_mode(lat_, m)))
      for (const auto& f : p) d = std::max(d, sup_abs(f));
  for (const auto& [m, u] : s.c0_fields) {
    const bool ok = classify_mode(lat_, m) == ModeClass::CZero;
    for (int c = 0; c < 6; ++c)
      if ((!ok || (c != 0 && c != 3)) && !u[c].empty()) d = std::max(d, sup_abs(u[c]));
  }
  for (const auto& [k, f] : s.coh) {
    if (!is_resonant(k.m, k.n, k.alpha)) d = std::max(d, sup_abs(f));
  }
  return d;
}

}  // namespace maxbloch
