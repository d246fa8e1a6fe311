#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maxbloch/profile_builder.hpp"
#include "maxbloch/quantum.hpp"
#include "maxbloch/spectral.hpp"
#include "maxbloch/stiff_solver.hpp"

namespace maxbloch {

struct EnvelopeSpec {
  std::string shape = "gaussian";  // "gaussian" | "file"
  std::array<double, 2> center{0.0, 0.0};
  double width = 1.0;
  cplx amplitude{1.0, 0.0};
  std::string file;  // CSV: i,j,re,im on the (nx, ny) grid
};

// u_β(x,y) = envelope(x,y)·(bx, by, e).
struct FieldInit {
  IntVec beta;
  EnvelopeSpec envelope;
  std::array<cplx, 3> weights{};  // bx, by, e
};

// ρ(m,n) at phase β (1-based levels); the (n,m) entry gets the conjugate.
struct CoherenceInit {
  IntVec beta;
  int m = 1;
  int n = 2;
  EnvelopeSpec envelope;
};

struct RunConfig {
  LevelSystem::Spec level_system;
  int lattice_d = 1;
  std::vector<double> lattice_k;
  double lattice_a = 1.0;
  double c_dioph = 0.1;
  int a_max = 8;

  int nx = 32, ny = 32, ntheta = 16;
  int nz = 1;  // reduced3d only
  double lx = 0.0, ly = 0.0;  // 0 means 2π

  double c_cfl = 0.5;
  double t_star = 0.5;
  int observer_stride = 10;
  double slow_step = 1.0 / 256.0;
  double dt_over_eps = 0.05;
  double t_final = 0.0;  // simulate horizon; 0 means t_star

  std::string mode = "tm_prepared";
  std::vector<double> epsilons;

  std::vector<FieldInit> fields;
  std::string populations = "gibbs";  // "gibbs" or "explicit"
  std::vector<double> population_values;
  std::vector<CoherenceInit> coherences;

  double delta_amplitude = 1.0;
  int delta_max_mode = 2;

  std::optional<std::array<double, 2>> residual_slope;
  std::optional<std::array<double, 2>> error_slope;

  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::string source_text;  // canonical JSON dump, hashed into the manifest

  LevelSystem system() const;
  PhaseLattice lattice() const;
  Grid xy_grid() const;        // (nx, ny, nz)
  Grid singular_grid() const;  // (nx, ny, ntheta) with θ₀ ∈ [0, 2π)
  InitialData initial_data() const;  // fields + populations (no coherences)
  // Coherence data sampled on the singular grid (zero fields).
  SingularState coherence_state(double epsilon) const;
};

// Throws ValidationError with every violation, each prefixed by its field path.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace maxbloch
