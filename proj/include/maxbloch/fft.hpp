#pragma once

#include <memory>

#include "maxbloch/field.hpp"

namespace maxbloch {

// In-place 3D complex transform over a Grid. Forward is unnormalized, the
// inverse divides by the number of points.
class FftPlan {
 public:
  explicit FftPlan(const Grid& grid);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  const Grid& grid() const;
  void forward(Field& f) const;
  void inverse(Field& f) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Shared plan cache keyed by grid shape. Plans are created once per shape.
const FftPlan& plan_for(const Grid& grid);

// Spectral operators. Fields are in physical space unless noted.
Field derivative(const Field& f, const Grid& g, int axis);
Field to_fourier(Field f, const Grid& g);
Field to_physical(Field f, const Grid& g);

// Zero all modes outside the 2/3 band on every axis with n > 2.
void dealias_fourier(Field& fhat, const Grid& g);

// Solve ∂_axis u = f for zero-mean f; the kernel mode is set to zero.
Field antiderivative(const Field& f, const Grid& g, int axis);

}  // namespace maxbloch
