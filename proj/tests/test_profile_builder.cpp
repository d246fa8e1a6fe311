#include <numbers>

#include "doctest.h"
#include "maxbloch/errors.hpp"
#include "maxbloch/harness.hpp"
#include "maxbloch/profile_builder.hpp"

using namespace maxbloch;

namespace {

const double tp = 2 * std::numbers::pi;
const PhaseLattice lat({std::numbers::sqrt2}, 1.0, 0.1, 8);

LevelSystem system() {
  Eigen::MatrixXcd gz(2, 2);
  gz << 0, 1, 1, 0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 1) = 0.2;
  return LevelSystem::tm(Eigen::Vector2d(1.0, 2.0), gz, w, 1.0, 1.0);
}

Field bump(const Grid& g, double cx, double cy, double w) {
  Field f(g.size());
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j) {
      const double dx = std::remainder(g.coordinate(0, i) - cx, tp);
      const double dy = std::remainder(g.coordinate(1, j) - cy, tp);
      f[g.index(i, j, 0)] = std::exp(-(dx * dx + dy * dy) / (w * w));
    }
  return f;
}

InitialData data(const Grid& g, const LevelSystem& sys, bool mixed) {
  InitialData d;
  d.grid = g;
  const Field f = bump(g, std::numbers::pi, std::numbers::pi, 0.8);
  for (int beta : {1, -1}) {
    auto& u = d.fields[IntVec{beta}];
    u[kBy] = scaled(f, -0.5);
    u[kEz] = scaled(f, 0.5);
    if (mixed) {
      u[kBx] = scaled(bump(g, 2.0, 4.0, 0.7), 0.3);
      u[kEz] = scaled(bump(g, 4.0, 2.0, 0.6), cplx(0.2, beta * 0.1));
    }
  }
  const auto gb = gibbs_state(sys);
  auto& r = d.rho[IntVec{0}];
  r.assign(4, Field{});
  r[0] = Field(g.size(), gb(0, 0));
  r[3] = Field(g.size(), gb(1, 1));
  return d;
}

}  // namespace

TEST_CASE("lifting respects polarizations and reconstructs the data") {
  const Grid g({16, 16, 1}, {tp, tp, tp});
  const LevelSystem sys = system();
  const InitialData d = data(g, sys, true);
  const ProfileSet p = lift_initial_data(sys, lat, d);
  CHECK_NOTHROW(p.check_polarizations(1e-12));
  for (const auto& [k, c] : p.slots()) CHECK(p.provenance(k) == Provenance::Lifted);

  const int nt = 8;
  const SingularState u = assemble_uapp(p, 0.01, 0.0, nt, 0);
  double err = 0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int l = 0; l < nt; ++l) {
        const double th = tp * l / nt;
        const auto q = u.grid.index(i, j, l), q0 = g.index(i, j, 0);
        cplx bx = 0, by = 0, e = 0;
        for (const auto& [beta, f] : d.fields) {
          const cplx ph = std::exp(I * (beta[0] * th));
          bx += f[kBx][q0] * ph;
          by += f[kBy][q0] * ph;
          e += f[kEz][q0] * ph;
        }
        err = std::max({err, std::abs(u.bx[q] - bx), std::abs(u.by[q] - by), std::abs(u.e[q] - e)});
      }
  CHECK(err < 1e-13);
}

TEST_CASE("non-resonant coherences cannot be lifted") {
  const Grid g({8, 8, 1}, {tp, tp, tp});
  const LevelSystem sys = system();
  InitialData d = data(g, sys, false);
  d.rho[IntVec{0}][1] = Field(g.size(), 0.05);
  d.rho[IntVec{0}][2] = Field(g.size(), 0.05);
  CHECK_THROWS_AS(lift_initial_data(sys, lat, d), ValidationError);
}

TEST_CASE("correctors keep their polarizations and report provenance") {
  const Grid g({16, 16, 1}, {tp, tp, tp});
  const LevelSystem sys = system();
  ProfileSet p = lift_initial_data(sys, lat, data(g, sys, false));
  build_corrector1_tm(p);
  build_corrector2_tm(p);
  CHECK_NOTHROW(p.check_polarizations(1e-10));
  bool has1 = false, has2 = false;
  for (const auto& [k, c] : p.slots()) {
    if (k.order == 1) has1 = true;
    if (k.order == 2) has2 = true;
  }
  CHECK(has1);
  CHECK(has2);
  CHECK(to_string(Provenance::ClosedForm) != to_string(Provenance::Evolved));

  const ProfileSet twice = combine({{2.0, &p}});
  const ProfileSet back = combine({{1.0, &twice}, {-1.0, &p}});
  double diff = 0;
  for (const auto& [k, c] : p.slots()) {
    const ProfileCoeff* b = back.find(k.order, k.mode);
    REQUIRE(b != nullptr);
    for (int q = 0; q < 6; ++q)
      for (std::size_t i = 0; i < c.u[q].size(); ++i) diff = std::max(diff, std::abs(b->u[q][i] - c.u[q][i]));
  }
  CHECK(diff < 1e-15);
}

TEST_CASE("higher profile orders shrink the residual") {
  const Grid g({16, 16, 1}, {tp, tp, tp});
  const LevelSystem sys = system();
  const ReducedState r0 = reduced_from_leading(lift_initial_data(sys, lat, data(g, sys, false)));
  const double h = 1.0 / 64;
  const std::vector<double> eps{0.04, 0.01, 0.0025};
  std::vector<double> full, lead;
  TmApproximation a2(sys, lat, r0, h, 0.25, 2), a0(sys, lat, r0, h, 0.25, 0);
  for (double e : eps) {
    full.push_back(residual_norms(a2, e, {8, 16}, 8)[1].sup);
    lead.push_back(residual_norms(a0, e, {8, 16}, 8)[1].sup);
  }
  const SlopeFit f2 = fit_loglog(eps, full), f0 = fit_loglog(eps, lead);
  MESSAGE("order 2 slope " << f2.slope << ", order 0 slope " << f0.slope);
  CHECK(f2.slope == doctest::Approx(0.5).epsilon(0.2));
  CHECK(f0.slope < 0.0);
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(full[i] < lead[i]);
}
