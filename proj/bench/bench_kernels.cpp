#include <benchmark/benchmark.h>

#include <random>

#include "maxbloch/kernels.hpp"

namespace {

using namespace maxbloch;
using kernels::Backend;

const Grid& bench_grid() {
  static const Grid g({32, 32, 16}, {6.283185307179586, 6.283185307179586, 6.283185307179586});
  return g;
}

Field noise(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  Field f(n);
  for (auto& v : f) v = cplx(d(rng), d(rng));
  return f;
}

LevelSystem bench_system(int n) {
  Eigen::VectorXd omega(n);
  Eigen::MatrixXcd gz = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    omega(a) = 1.0 + a;
    for (int b = a + 1; b < n; ++b) {
      gz(a, b) = gz(b, a) = 1.0;
      w(a, b) = 0.2;
    }
  }
  return LevelSystem::tm(omega, gz, w, 1.0, 1.0);
}

void BM_BlochStep(benchmark::State& st) {
  const auto backend = static_cast<Backend>(st.range(0));
  const int n = static_cast<int>(st.range(1));
  const auto c = kernels::make_bloch_step(bench_system(n), 1e-2, 1e-4);
  const auto np = bench_grid().size();
  Field e = noise(np, 1);
  std::vector<Field> rho(n * n);
  for (int q = 0; q < n * n; ++q) rho[q] = noise(np, 2 + q);
  for (auto _ : st) {
    kernels::bloch_step(backend, c, e, rho);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(np));
}

void BM_Propagator(benchmark::State& st) {
  const auto backend = static_cast<Backend>(st.range(0));
  const auto p = kernels::make_tm_propagator(bench_grid(), 1.4142135623730951, 1e-2, 1e-4);
  const auto np = bench_grid().size();
  Field bx = noise(np, 1), by = noise(np, 2), e = noise(np, 3);
  for (auto _ : st) {
    kernels::apply_propagator(backend, p, bx, by, e);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(np));
}

void BM_PauliRates(benchmark::State& st) {
  const auto backend = static_cast<Backend>(st.range(0));
  const int n = 3;
  kernels::RateProblem prob;
  prob.n = n;
  prob.points = 32 * 32;
  for (int s = 0; s < 4; ++s) {
    prob.eg.push_back(noise(n * n * prob.points, 10 + s));
    prob.y.push_back(noise(n * n * prob.points, 20 + s));
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) prob.terms.push_back({(a + b) % 2, a, b});
  prob.n_out = 2;
  std::vector<Field> out;
  for (auto _ : st) {
    kernels::pauli_rates(backend, prob, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(prob.points));
}

}  // namespace

BENCHMARK(BM_BlochStep)->ArgsProduct({{0, 1}, {2, 3}})->ArgNames({"omp", "levels"});
BENCHMARK(BM_Propagator)->Arg(0)->Arg(1)->ArgName("omp");
BENCHMARK(BM_PauliRates)->Arg(0)->Arg(1)->ArgName("omp");

BENCHMARK_MAIN();
