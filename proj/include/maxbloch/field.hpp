#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

namespace maxbloch {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + Align - 1) / Align) * Align;
    void* p = std::aligned_alloc(Align, bytes == 0 ? Align : bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept {
    return true;
  }
};

// Complex samples on a Grid, row-major (axis 0 slowest). An empty Field is
// used as a cheap exact zero in sparse profile tables.
using Field = std::vector<cplx, AlignedAllocator<cplx>>;

// Periodic box with up to three axes. The third axis is θ₀ for singular
// states and z (often of extent 1) for reduced ones.
class Grid {
 public:
  Grid() = default;
  Grid(std::array<int, 3> n, std::array<double, 3> length);

  int n(int axis) const { return n_[axis]; }
  double length(int axis) const { return length_[axis]; }
  double spacing(int axis) const { return length_[axis] / n_[axis]; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }
  std::size_t index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * n_[1] + j) * n_[2] + l;
  }
  double coordinate(int axis, int idx) const { return idx * spacing(axis); }
  double cell_volume() const {
    return spacing(0) * spacing(1) * spacing(2);
  }

  // Signed Fourier index in (-n/2, n/2].
  int signed_mode(int axis, int idx) const;
  bool is_nyquist(int axis, int idx) const {
    return n_[axis] % 2 == 0 && n_[axis] > 1 && idx == n_[axis] / 2;
  }
  // Angular wavenumber 2πm/L; the Nyquist index maps to 0 so that odd
  // derivatives stay real.
  double wavenumber(int axis, int idx) const;

  Grid with_axis(int axis, int n, double length) const;

  bool operator==(const Grid&) const = default;

 private:
  std::array<int, 3> n_{1, 1, 1};
  std::array<double, 3> length_{1.0, 1.0, 1.0};
};

Field zeros(const Grid& g);
void axpy(Field& y, cplx a, const Field& x);  // y += a x, empty-aware
Field scaled(const Field& x, cplx a);
double sup_abs(const Field& f);
double sum_sq(const Field& f);
double max_imag(const Field& f);
bool all_zero(const Field& f);

}  // namespace maxbloch
