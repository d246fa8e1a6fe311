#include "maxbloch/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "maxbloch/errors.hpp"

namespace maxbloch {

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error([&] {
        std::string msg = "validation failed:";
        for (const auto& s : issues) msg += "\n  " + s;
        return msg;
      }()),
      issues_(std::move(issues)) {}

Grid::Grid(std::array<int, 3> n, std::array<double, 3> length)
    : n_(n), length_(length) {
  for (int a = 0; a < 3; ++a) {
    if (n_[a] < 1) throw std::invalid_argument("grid size must be positive");
    if (!(length_[a] > 0.0))
      throw std::invalid_argument("grid length must be positive");
  }
}

int Grid::signed_mode(int axis, int idx) const {
  int n = n_[axis];
  return idx <= n / 2 ? idx : idx - n;
}

double Grid::wavenumber(int axis, int idx) const {
  if (is_nyquist(axis, idx)) return 0.0;
  return 2.0 * std::numbers::pi * signed_mode(axis, idx) / length_[axis];
}

Grid Grid::with_axis(int axis, int n, double length) const {
  auto nn = n_;
  auto ll = length_;
  nn[axis] = n;
  ll[axis] = length;
  return Grid(nn, ll);
}

Field zeros(const Grid& g) { return Field(g.size(), cplx{}); }

void axpy(Field& y, cplx a, const Field& x) {
  if (x.empty() || a == cplx{}) return;
  if (y.empty()) y.assign(x.size(), cplx{});
  if (y.size() != x.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Field scaled(const Field& x, cplx a) {
  Field out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i];
  return out;
}

double sup_abs(const Field& f) {
  double m = 0.0;
  for (const auto& v : f) m = std::max(m, std::abs(v));
  return m;
}

double sum_sq(const Field& f) {
  double s = 0.0;
  for (const auto& v : f) s += std::norm(v);
  return s;
}

double max_imag(const Field& f) {
  double m = 0.0;
  for (const auto& v : f) m = std::max(m, std::abs(v.imag()));
  return m;
}

bool all_zero(const Field& f) {
  return std::all_of(f.begin(), f.end(), [](cplx v) { return v == cplx{}; });
}

}  // namespace maxbloch
