#include "maxbloch/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "maxbloch/errors.hpp"

namespace maxbloch {

using nlohmann::json;

namespace {

// Walks one JSON object, records violations under a dotted path and flags
// keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& bad)
      : j_(j), path_(std::move(path)), bad_(bad) {
    if (!j_.is_object()) fail("", "expected an object");
  }
  ~Reader() {
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(k, "unknown key");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const std::string& key, const std::string& msg) const {
    const std::string p = key.empty() ? path_ : at(key);
    bad_.push_back((p.empty() ? std::string("<root>") : p) + ": " + msg);
  }

  const json* get(const std::string& key, bool required) {
    seen_.insert(key);
    if (!j_.is_object()) return nullptr;
    auto it = j_.find(key);
    if (it == j_.end()) {
      if (required) fail(key, "missing");
      return nullptr;
    }
    return &*it;
  }

  template <class T>
  void read(const std::string& key, T& out, bool required = false) {
    const json* v = get(key, required);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type");
    }
  }

  void read_number(const std::string& key, double& out, bool required = false) {
    const json* v = get(key, required);
    if (!v) return;
    if (!v->is_number()) return fail(key, "expected a number");
    out = v->get<double>();
  }

  void read_int(const std::string& key, int& out, bool required = false) {
    const json* v = get(key, required);
    if (!v) return;
    if (!v->is_number_integer()) return fail(key, "expected an integer");
    out = v->get<int>();
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& bad_;
  std::set<std::string> seen_;
};

bool as_complex(const json& v, cplx& out) {
  if (v.is_number()) {
    out = cplx(v.get<double>(), 0.0);
    return true;
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    out = cplx(v[0].get<double>(), v[1].get<double>());
    return true;
  }
  return false;
}

bool as_matrix(const json& v, int n, Eigen::MatrixXd& out) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) return false;
  out.resize(n, n);
  for (int a = 0; a < n; ++a) {
    if (!v[a].is_array() || static_cast<int>(v[a].size()) != n) return false;
    for (int b = 0; b < n; ++b) {
      if (!v[a][b].is_number()) return false;
      out(a, b) = v[a][b].get<double>();
    }
  }
  return true;
}

void read_level_system(const json& j, RunConfig& c, std::vector<std::string>& bad) {
  Reader r(j, "level_system", bad);
  int n = 0;
  r.read_int("N", n, true);
  std::vector<double> omega;
  r.read("omega", omega, true);
  if (n >= 2 && !omega.empty() && static_cast<int>(omega.size()) != n)
    r.fail("omega", "expected N entries");
  auto& s = c.level_system;
  s.omega = Eigen::Map<Eigen::VectorXd>(omega.data(), static_cast<Eigen::Index>(omega.size()));
  r.read_number("gamma", s.gamma, true);
  r.read_number("temperature", s.temperature, true);
  if (n < 2) {
    r.fail("N", "need at least 2 levels");
    return;
  }

  const json* up = r.get("pauli_upper", false);
  const json* full = r.get("pauli", false);
  if (up && full) r.fail("pauli", "give either pauli or pauli_upper, not both");
  if (!up && !full) r.fail("pauli", "missing (pauli or pauli_upper)");
  if (const json* w = up ? up : full) {
    s.pauli_is_upper = up != nullptr;
    if (!as_matrix(*w, n, s.pauli)) r.fail(up ? "pauli_upper" : "pauli", "expected an N×N numeric matrix");
  }

  const json* dz = r.get("dipole_z", false);
  const json* dv = r.get("dipole", false);
  if (dz && dv) r.fail("dipole", "give either dipole or dipole_z, not both");
  if (!dz && !dv) r.fail("dipole", "missing (dipole or dipole_z)");
  s.dipole.assign(static_cast<std::size_t>(n * n), Vec3c::Zero());
  if (dz) {
    bool ok = dz->is_array() && static_cast<int>(dz->size()) == n;
    for (int a = 0; ok && a < n; ++a) {
      ok = (*dz)[a].is_array() && static_cast<int>((*dz)[a].size()) == n;
      for (int b = 0; ok && b < n; ++b) {
        cplx z;
        ok = as_complex((*dz)[a][b], z);
        s.dipole[a * n + b](2) = z;
      }
    }
    if (!ok) r.fail("dipole_z", "expected an N×N matrix of numbers or [re, im] pairs");
  } else if (dv) {
    bool ok = dv->is_array() && static_cast<int>(dv->size()) == n;
    for (int a = 0; ok && a < n; ++a) {
      ok = (*dv)[a].is_array() && static_cast<int>((*dv)[a].size()) == n;
      for (int b = 0; ok && b < n; ++b) {
        const json& e = (*dv)[a][b];
        ok = e.is_array() && e.size() == 3;
        for (int x = 0; ok && x < 3; ++x) ok = as_complex(e[x], s.dipole[a * n + b](x));
      }
    }
    if (!ok) r.fail("dipole", "expected an N×N matrix of 3-vectors");
  }
  if (s.omega.size() == n && s.pauli.rows() == n)
    for (const auto& msg : LevelSystem::check(s)) bad.push_back("level_system." + msg);
}

void read_envelope(const json& j, const std::string& path, EnvelopeSpec& e,
                   std::vector<std::string>& bad) {
  Reader r(j, path, bad);
  r.read("shape", e.shape);
  if (e.shape == "gaussian") {
    std::vector<double> c{0.0, 0.0};
    r.read("center", c);
    if (c.size() != 2) r.fail("center", "expected [x, y]");
    else e.center = {c[0], c[1]};
    r.read_number("width", e.width);
    if (!(e.width > 0.0)) r.fail("width", "must be positive");
    if (const json* a = r.get("amplitude", false))
      if (!as_complex(*a, e.amplitude)) r.fail("amplitude", "expected a number or [re, im]");
  } else if (e.shape == "file") {
    r.read("file", e.file, true);
    if (const json* a = r.get("amplitude", false))
      if (!as_complex(*a, e.amplitude)) r.fail("amplitude", "expected a number or [re, im]");
  } else {
    r.fail("shape", "expected \"gaussian\" or \"file\"");
  }
}

void read_initial(const json& j, RunConfig& c, std::vector<std::string>& bad) {
  Reader r(j, "initial_data", bad);
  if (const json* f = r.get("fields", false)) {
    if (!f->is_array()) r.fail("fields", "expected an array");
    else
      for (std::size_t i = 0; i < f->size(); ++i) {
        const std::string p = "initial_data.fields[" + std::to_string(i) + "]";
        Reader fr((*f)[i], p, bad);
        FieldInit fi;
        fr.read("beta", fi.beta, true);
        if (static_cast<int>(fi.beta.size()) != c.lattice_d) fr.fail("beta", "expected d entries");
        if (const json* e = fr.get("envelope", true)) read_envelope(*e, p + ".envelope", fi.envelope, bad);
        const char* names[3] = {"bx", "by", "e"};
        if (const json* w = fr.get("weights", true)) {
          Reader wr(*w, p + ".weights", bad);
          for (int q = 0; q < 3; ++q)
            if (const json* v = wr.get(names[q], false))
              if (!as_complex(*v, fi.weights[q])) wr.fail(names[q], "expected a number or [re, im]");
        }
        c.fields.push_back(std::move(fi));
      }
  }
  if (const json* p = r.get("populations", false)) {
    if (p->is_string()) {
      c.populations = p->get<std::string>();
      if (c.populations != "gibbs") r.fail("populations", "expected \"gibbs\" or an array");
    } else if (p->is_array()) {
      c.populations = "explicit";
      try {
        c.population_values = p->get<std::vector<double>>();
      } catch (const json::exception&) {
        r.fail("populations", "expected numbers");
      }
      if (static_cast<Eigen::Index>(c.population_values.size()) != c.level_system.omega.size())
        r.fail("populations", "expected N entries");
    } else {
      r.fail("populations", "expected \"gibbs\" or an array");
    }
  }
  if (const json* co = r.get("coherences", false)) {
    if (!co->is_array()) r.fail("coherences", "expected an array");
    else
      for (std::size_t i = 0; i < co->size(); ++i) {
        const std::string p = "initial_data.coherences[" + std::to_string(i) + "]";
        Reader cr((*co)[i], p, bad);
        CoherenceInit ci;
        cr.read("beta", ci.beta, true);
        if (static_cast<int>(ci.beta.size()) != c.lattice_d) cr.fail("beta", "expected d entries");
        cr.read_int("m", ci.m, true);
        cr.read_int("n", ci.n, true);
        const int n = static_cast<int>(c.level_system.omega.size());
        if (ci.m < 1 || ci.n < 1 || ci.m > n || ci.n > n || ci.m == ci.n)
          cr.fail("m", "expected distinct levels in 1..N");
        if (const json* e = cr.get("envelope", true)) read_envelope(*e, p + ".envelope", ci.envelope, bad);
        c.coherences.push_back(std::move(ci));
      }
  }
}

void read_slope(Reader& r, const std::string& key, std::optional<std::array<double, 2>>& out) {
  std::vector<double> v;
  if (!r.get(key, false)) return;
  r.read(key, v);
  if (v.size() != 2 || !(v[0] <= v[1])) return r.fail(key, "expected [low, high]");
  out = std::array<double, 2>{v[0], v[1]};
}

RunConfig from_json(const json& root) {
  RunConfig c;
  std::vector<std::string> bad;
  {
    Reader r(root, "", bad);
    if (const json* l = r.get("lattice", true)) {
      Reader lr(*l, "lattice", bad);
      lr.read_int("d", c.lattice_d, true);
      lr.read("k", c.lattice_k, true);
      lr.read_number("a", c.lattice_a);
      lr.read_number("c_dioph", c.c_dioph);
      lr.read_int("a_max", c.a_max);
      if (static_cast<int>(c.lattice_k.size()) != c.lattice_d) lr.fail("k", "expected d entries");
      if (!(c.lattice_a > 0.0)) lr.fail("a", "must be positive");
      if (!(c.c_dioph > 0.0)) lr.fail("c_dioph", "must be positive");
      if (c.a_max < 1) lr.fail("a_max", "must be positive");
    }
    if (const json* l = r.get("level_system", true)) read_level_system(*l, c, bad);
    if (const json* g = r.get("grids", true)) {
      Reader gr(*g, "grids", bad);
      gr.read_int("nx", c.nx, true);
      gr.read_int("ny", c.ny, true);
      gr.read_int("ntheta", c.ntheta);
      gr.read_int("nz", c.nz);
      gr.read_number("lx", c.lx);
      gr.read_number("ly", c.ly);
      for (auto [name, v] : {std::pair{"nx", c.nx}, {"ny", c.ny}, {"ntheta", c.ntheta}, {"nz", c.nz}})
        if (v < 1) gr.fail(name, "must be positive");
      if (c.lx < 0.0) gr.fail("lx", "must be positive");
      if (c.ly < 0.0) gr.fail("ly", "must be positive");
    }
    if (const json* s = r.get("solver", false)) {
      Reader sr(*s, "solver", bad);
      sr.read_number("dt_cfl", c.c_cfl);
      sr.read_number("t_star", c.t_star);
      sr.read_int("observer_stride", c.observer_stride);
      sr.read_number("slow_step", c.slow_step);
      sr.read_number("dt_over_eps", c.dt_over_eps);
      sr.read_number("t_final", c.t_final);
      if (!(c.c_cfl > 0.0 && c.c_cfl <= 1.0)) sr.fail("dt_cfl", "must lie in (0, 1]");
      if (!(c.t_star > 0.0)) sr.fail("t_star", "must be positive");
      if (c.observer_stride < 1) sr.fail("observer_stride", "must be positive");
      if (!(c.slow_step > 0.0)) sr.fail("slow_step", "must be positive");
      if (!(c.dt_over_eps > 0.0)) sr.fail("dt_over_eps", "must be positive");
      if (c.t_final < 0.0) sr.fail("t_final", "must be nonnegative");
    }
    r.read("mode", c.mode);
    if (c.mode != "tm_prepared" && c.mode != "tm_unprepared" && c.mode != "reduced3d")
      r.fail("mode", "expected tm_prepared, tm_unprepared or reduced3d");
    r.read("epsilons", c.epsilons);
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
      if (!(c.epsilons[i] > 0.0)) r.fail("epsilons", "entries must be positive");
      if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) r.fail("epsilons", "must be strictly decreasing");
    }
    if (const json* i = r.get("initial_data", false)) read_initial(*i, c, bad);
    if (const json* p = r.get("perturbation", false)) {
      Reader pr(*p, "perturbation", bad);
      pr.read_number("amplitude", c.delta_amplitude);
      pr.read_int("max_mode", c.delta_max_mode);
      if (c.delta_max_mode < 0) pr.fail("max_mode", "must be nonnegative");
    }
    if (const json* t = r.get("thresholds", false)) {
      Reader tr(*t, "thresholds", bad);
      read_slope(tr, "residual_slope", c.residual_slope);
      read_slope(tr, "error_slope", c.error_slope);
    }
    r.read("output_dir", c.output_dir);
    r.read("seed", c.seed);
  }
  if (c.mode != "reduced3d" && c.lattice_d != 1) bad.push_back("lattice.d: TM modes require d = 1");
  if (c.mode != "reduced3d" && c.nz != 1) bad.push_back("grids.nz: TM modes require nz = 1");
  if (c.mode != "reduced3d")
    for (auto [name, v] : {std::pair{"nx", c.nx}, {"ny", c.ny}, {"ntheta", c.ntheta}})
      if (v >= 1 && (v & (v - 1)) != 0)
        bad.push_back(std::string("grids.") + name + ": TM modes need a power of two");
  if (c.mode != "reduced3d" && c.level_system.omega.size() >= 2 && bad.empty()) {
    if (!LevelSystem(c.level_system).is_tm())
      bad.push_back("level_system.dipole: TM modes require dipole entries along z only");
  }
  if (bad.empty()) {
    try {
      (void)c.lattice();
    } catch (const std::exception& e) {
      bad.push_back(std::string("lattice: ") + e.what());
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  c.source_text = root.dump(2);
  return c;
}

Field sample_envelope(const EnvelopeSpec& e, const Grid& g, const Grid& xy) {
  Field f = zeros(g);
  if (e.shape == "file") {
    std::ifstream in(e.file);
    if (!in) throw Error("cannot read envelope file " + e.file);
    Field plane(static_cast<std::size_t>(xy.n(0) * xy.n(1)), cplx{});
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'i') continue;
      std::istringstream ls(line);
      int i, j;
      double re, im;
      char c1, c2, c3;
      if (!(ls >> i >> c1 >> j >> c2 >> re >> c3 >> im) || i < 0 || j < 0 || i >= xy.n(0) ||
          j >= xy.n(1))
        throw Error("malformed envelope file line: " + line);
      plane[i * xy.n(1) + j] = cplx(re, im);
    }
    for (int i = 0; i < g.n(0); ++i)
      for (int j = 0; j < g.n(1); ++j)
        for (int l = 0; l < g.n(2); ++l) f[g.index(i, j, l)] = e.amplitude * plane[i * g.n(1) + j];
    return f;
  }
  // Gaussian in the minimum-image distance, so the envelope stays periodic.
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j) {
      const double dx = std::remainder(g.coordinate(0, i) - e.center[0], g.length(0));
      const double dy = std::remainder(g.coordinate(1, j) - e.center[1], g.length(1));
      const cplx v = e.amplitude * std::exp(-(dx * dx + dy * dy) / (e.width * e.width));
      for (int l = 0; l < g.n(2); ++l) f[g.index(i, j, l)] = v;
    }
  return f;
}

}  // namespace

LevelSystem RunConfig::system() const { return LevelSystem(level_system); }

PhaseLattice RunConfig::lattice() const { return PhaseLattice(lattice_k, lattice_a, c_dioph, a_max); }

Grid RunConfig::xy_grid() const {
  const double tp = 2.0 * std::numbers::pi;
  return Grid({nx, ny, nz}, {lx > 0 ? lx : tp, ly > 0 ? ly : tp, tp});
}

Grid RunConfig::singular_grid() const {
  const Grid g = xy_grid();
  return Grid({nx, ny, ntheta}, {g.length(0), g.length(1), 2.0 * std::numbers::pi});
}

InitialData RunConfig::initial_data() const {
  InitialData d;
  d.grid = xy_grid();
  const LevelSystem sys = system();
  const int n = sys.n_levels();
  for (const auto& fi : fields) {
    const Field env = sample_envelope(fi.envelope, d.grid, d.grid);
    auto& u = d.fields[fi.beta];
    const int slots[3] = {kBx, kBy, kEz};
    for (int q = 0; q < 3; ++q) {
      if (fi.weights[q] == cplx{}) continue;
      if (u[slots[q]].empty()) u[slots[q]] = zeros(d.grid);
      axpy(u[slots[q]], fi.weights[q], env);
    }
  }
  Eigen::VectorXd pops(n);
  if (populations == "gibbs") {
    const DensityMatrix g = gibbs_state(sys);
    for (int a = 0; a < n; ++a) pops(a) = g(a, a).real();
  } else {
    for (int a = 0; a < n; ++a) pops(a) = population_values[a];
  }
  auto& r = d.rho[IntVec(lattice_d, 0)];
  r.assign(static_cast<std::size_t>(n * n), Field{});
  for (int a = 0; a < n; ++a)
    if (pops(a) != 0.0) r[a * n + a] = Field(d.grid.size(), cplx(pops(a), 0.0));
  return d;
}

SingularState RunConfig::coherence_state(double epsilon) const {
  const Grid g = singular_grid();
  const int n = static_cast<int>(level_system.omega.size());
  SingularState s = SingularState::zeros(g, n, epsilon);
  for (const auto& ci : coherences) {
    Field env = sample_envelope(ci.envelope, g, xy_grid());
    for (int i = 0; i < g.n(0); ++i)
      for (int j = 0; j < g.n(1); ++j)
        for (int l = 0; l < g.n(2); ++l)
          env[g.index(i, j, l)] *= std::exp(I * (ci.beta[0] * g.coordinate(2, l)));
    const int a = ci.m - 1, b = ci.n - 1;
    if (s.rho[a * n + b].empty()) s.rho[a * n + b] = zeros(g);
    if (s.rho[b * n + a].empty()) s.rho[b * n + a] = zeros(g);
    axpy(s.rho[a * n + b], 1.0, env);
    for (auto& v : env) v = std::conj(v);
    axpy(s.rho[b * n + a], 1.0, env);
  }
  return s;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("<root>: invalid JSON: ") + e.what()});
  }
  return from_json(j);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str());
}

}  // namespace maxbloch
