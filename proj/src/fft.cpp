#include "maxbloch/fft.hpp"

#include <fftw3.h>
#include <omp.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace maxbloch {

namespace {
std::mutex& planner_mutex() {
  static auto* m = new std::mutex;  // outlives the static plan cache
  return *m;
}
}  // namespace

struct FftPlan::Impl {
  Grid grid;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

FftPlan::FftPlan(const Grid& grid) : impl_(std::make_unique<Impl>()) {
  impl_->grid = grid;
  Field scratch(grid.size());
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  static bool threads_ready = [] { return fftw_init_threads() != 0; }();
  if (threads_ready) fftw_plan_with_nthreads(omp_get_max_threads());
  impl_->fwd = fftw_plan_dft_3d(grid.n(0), grid.n(1), grid.n(2), p, p,
                                FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_3d(grid.n(0), grid.n(1), grid.n(2), p, p,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->inv) throw std::runtime_error("fftw planning failed");
}

FftPlan::~FftPlan() {
  if (!impl_) return;
  std::lock_guard lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->inv) fftw_destroy_plan(impl_->inv);
}

FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

const Grid& FftPlan::grid() const { return impl_->grid; }

void FftPlan::forward(Field& f) const {
  if (f.size() != impl_->grid.size()) throw std::invalid_argument("fft: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(f.data());
  fftw_execute_dft(impl_->fwd, p, p);
}

void FftPlan::inverse(Field& f) const {
  if (f.size() != impl_->grid.size()) throw std::invalid_argument("fft: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(f.data());
  fftw_execute_dft(impl_->inv, p, p);
  const double s = 1.0 / static_cast<double>(f.size());
  for (auto& v : f) v *= s;
}

const FftPlan& plan_for(const Grid& grid) {
  using Key = std::tuple<int, int, int, int>;
  static std::map<Key, std::unique_ptr<FftPlan>> cache;
  static std::mutex m;
  Key key{grid.n(0), grid.n(1), grid.n(2), omp_get_max_threads()};
  std::lock_guard lock(m);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<FftPlan>(grid)).first;
  return *it->second;
}

Field to_fourier(Field f, const Grid& g) {
  plan_for(g).forward(f);
  return f;
}

Field to_physical(Field f, const Grid& g) {
  plan_for(g).inverse(f);
  return f;
}

Field derivative(const Field& f, const Grid& g, int axis) {
  Field h = to_fourier(f, g);
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j)
      for (int l = 0; l < g.n(2); ++l) {
        const int idx[3] = {i, j, l};
        h[g.index(i, j, l)] *= cplx(0.0, g.wavenumber(axis, idx[axis]));
      }
  return to_physical(std::move(h), g);
}

Field antiderivative(const Field& f, const Grid& g, int axis) {
  Field h = to_fourier(f, g);
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j)
      for (int l = 0; l < g.n(2); ++l) {
        const int idx[3] = {i, j, l};
        const double kk = g.wavenumber(axis, idx[axis]);
        auto& v = h[g.index(i, j, l)];
        v = kk == 0.0 ? cplx{} : v / cplx(0.0, kk);
      }
  return to_physical(std::move(h), g);
}

void dealias_fourier(Field& fhat, const Grid& g) {
  auto keep = [&](int axis, int idx) {
    const int n = g.n(axis);
    if (n <= 2) return true;
    return 3 * std::abs(g.signed_mode(axis, idx)) < n;
  };
  for (int i = 0; i < g.n(0); ++i) {
    const bool ki = keep(0, i);
    for (int j = 0; j < g.n(1); ++j) {
      const bool kj = ki && keep(1, j);
      for (int l = 0; l < g.n(2); ++l)
        if (!(kj && keep(2, l))) fhat[g.index(i, j, l)] = cplx{};
    }
  }
}

}  // namespace maxbloch
