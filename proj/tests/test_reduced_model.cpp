#include <numbers>

#include "doctest.h"
#include "maxbloch/reduced_model.hpp"

using namespace maxbloch;

namespace {

const double tp = 2 * std::numbers::pi;
const PhaseLattice lat({std::numbers::sqrt2}, 1.0, 0.1, 8);

LevelSystem system(double coupling) {
  Eigen::MatrixXcd gz(2, 2);
  gz << 0, coupling, coupling, 0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 1) = 0.3;
  return LevelSystem::tm(Eigen::Vector2d(1.0, 2.0), gz, w, 1.0, 1.0);
}

ReducedState with_pops(const Grid& g, double p0, double p1) {
  ReducedState s = ReducedState::empty(g);
  s.pop_modes[mode1(0, 0)] = {Field(g.size(), p0), Field(g.size(), p1)};
  return s;
}

}  // namespace

TEST_CASE("without field the populations relax to Gibbs, monotonically in relative entropy") {
  const Grid g({2, 2, 1}, {tp, tp, tp});
  const LevelSystem sys = system(0.0);
  ReducedModel model(sys, lat, g);
  ReducedState s = with_pops(g, 0.1, 0.9);
  const auto gb = gibbs_state(sys);
  const double q0 = gb(0, 0).real(), q1 = gb(1, 1).real();
  auto kl = [&](const ReducedState& r) {
    const double a = r.pop_modes.at(mode1(0, 0))[0][0].real();
    const double b = r.pop_modes.at(mode1(0, 0))[1][0].real();
    return a * std::log(a / q0) + b * std::log(b / q1);
  };
  double prev = kl(s);
  for (int i = 0; i < 200; ++i) {
    model.step_populations(s, 0.05);
    const double now = kl(s);
    CHECK(now <= prev + 1e-15);
    prev = now;
  }
  CHECK(prev < 1e-6);
  CHECK(total_population(s) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS(model.step_populations(s, 0.0));
  CHECK_THROWS(model.step_field(s, -1.0));
}

TEST_CASE("C+ envelopes are transported at unit speed") {
  const Grid g({64, 1, 1}, {tp, 1.0, 1.0});
  ReducedModel model(system(0.0), lat, g);
  ReducedState s = with_pops(g, 0.5, 0.5);
  Field e(g.size());
  for (int i = 0; i < 64; ++i) e[i] = std::exp(-4.0 * std::pow(std::remainder(g.coordinate(0, i) - 3.0, tp), 2));
  s.e_modes[mode1(1, 1)] = {Field{}, Field{}, e};
  const double shift = 5 * g.spacing(0);
  for (int k = 0; k < 5; ++k) model.step_field(s, shift / 5);
  const Field& out = s.e_modes.at(mode1(1, 1))[2];
  double err = 0;
  for (int i = 0; i < 64; ++i) err = std::max(err, std::abs(out[(i + 5) % 64] - e[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("transverse modes pick up the diffraction phase") {
  const Grid g({1, 16, 1}, {1.0, tp, 1.0});
  ReducedModel model(system(0.0), lat, g);
  ReducedState s = with_pops(g, 0.5, 0.5);
  Field e(g.size());
  for (int j = 0; j < 16; ++j) e[j] = std::exp(I * (3.0 * g.coordinate(1, j)));
  s.e_modes[mode1(-1, 1)] = {Field{}, Field{}, e};
  const double t = 0.3;
  model.step_field(s, t);
  const double a = diffraction_coeff(lat, mode1(-1, 1));
  const cplx ref = e[4] * std::exp(-I * t * (a * 9.0));
  CHECK(std::abs(s.e_modes.at(mode1(-1, 1))[2][4] - ref) < 1e-12);
}

TEST_CASE("coupled steps conserve total population and keep Gibbs fixed at zero field") {
  const Grid g({16, 16, 1}, {tp, tp, tp});
  const LevelSystem sys = system(1.0);
  ReducedModel model(sys, lat, g);
  const auto gb = gibbs_state(sys);
  ReducedState s = with_pops(g, gb(0, 0).real(), gb(1, 1).real());
  const ReducedState s0 = s;
  for (int i = 0; i < 10; ++i) model.step(s, 0.01);
  for (int q = 0; q < 2; ++q) CHECK(s.pop_modes.at(mode1(0, 0))[q] == s0.pop_modes.at(mode1(0, 0))[q]);

  Field e(g.size());
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      e[g.index(i, j, 0)] = std::exp(-std::pow(g.coordinate(0, i) - 3, 2) - std::pow(g.coordinate(1, j) - 3, 2));
  s.e_modes[mode1(1, 1)] = {Field{}, Field{}, e};
  Field ec = e;
  for (auto& v : ec) v = std::conj(v);
  s.e_modes[mode1(-1, -1)] = {Field{}, Field{}, ec};
  const double p0 = total_population(s);
  for (int i = 0; i < 50; ++i) model.step(s, 0.01);
  CHECK(std::abs(total_population(s) - p0) < 1e-12);
  CHECK(model.polarization_defect(s) == 0.0);
  // The field drives the populations away from equilibrium.
  CHECK(std::abs(s.pop_modes.at(mode1(0, 0))[0][g.index(8, 8, 0)] - gb(0, 0)) > 1e-3);
}
