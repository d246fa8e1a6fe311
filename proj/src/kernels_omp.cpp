#include <omp.h>

#include "kernels_common.hpp"

namespace maxbloch::kernels {

void bloch_step_omp(const BlochStepCoeffs& c, Field& e, std::vector<Field>& rho) {
  const int n = c.n;
  const auto np = static_cast<std::ptrdiff_t>(e.size());
  detail::with_levels(n, [&](auto lv) {
#pragma omp parallel
    {
      cplx r[detail::kMaxLevels * detail::kMaxLevels];
#pragma omp for schedule(static)
      for (std::ptrdiff_t p = 0; p < np; ++p) {
        for (int q = 0; q < n * n; ++q) r[q] = rho[q][p];
        detail::bloch_point<decltype(lv)::value>(c, e[p], r);
        for (int q = 0; q < n * n; ++q) rho[q][p] = r[q];
      }
    }
  });
}

void apply_propagator_omp(const MaxwellPropagator& p, Field& bx, Field& by, Field& e) {
  const auto np = static_cast<std::ptrdiff_t>(p.mats.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < np; ++q) detail::propagate_mode(p.mats[q], bx[q], by[q], e[q]);
}

void pauli_rates_omp(const RateProblem& prob, std::vector<Field>& out) {
  out.assign(prob.n_out, Field(prob.n * prob.points, cplx{}));
  const auto np = static_cast<std::ptrdiff_t>(prob.points);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < np; ++p) detail::rate_point(prob, p, out);
}

}  // namespace maxbloch::kernels
