#include "maxbloch/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "maxbloch/errors.hpp"
#include "maxbloch/fft.hpp"

namespace maxbloch::io {

std::string num(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("num: formatting failed");
  return std::string(buf, end);
}

std::string join(const IntVec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string grid_hash(const Grid& g) {
  std::ostringstream os;
  for (int a = 0; a < 3; ++a) os << g.n(a) << ':' << num(g.length(a)) << '|';
  return hex64(fnv1a(os.str()));
}

std::string field_hash(const Field& f) {
  std::string bytes(f.size() * sizeof(cplx), '\0');
  if (!f.empty()) std::memcpy(bytes.data(), f.data(), bytes.size());
  return hex64(fnv1a(bytes));
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error("output directory " + dir.string() + " cannot be created: " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for " + path.string());
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::invalid_argument("Csv: row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

Csv observer_csv(const std::vector<Diagnostics>& rows) {
  Csv c({"t", "sup_norm_E", "l2_energy", "trace_rho", "herm_defect", "coh_norm", "div_defect"});
  for (const auto& d : rows)
    c.row({num(d.t), num(d.sup_norm_e), num(d.l2_energy), num(d.trace_rho), num(d.herm_defect),
           num(d.coh_norm), num(d.div_defect)});
  return c;
}

Csv snapshot_csv(const ReducedState& s, int component) {
  Csv c({"alpha0", "alpha1", "kx_index", "ky_index", "re", "im"});
  const Grid& g = s.grid;
  for (const auto& [alpha, u] : s.e_modes) {
    const Field& f = u.at(component);
    if (f.empty()) continue;
    const Field h = to_fourier(f, g);
    for (int i = 0; i < g.n(0); ++i)
      for (int j = 0; j < g.n(1); ++j) {
        const cplx v = h[g.index(i, j, 0)];
        if (v == cplx{}) continue;
        c.row({join(alpha.alpha0), join(alpha.alpha1), std::to_string(g.signed_mode(0, i)),
               std::to_string(g.signed_mode(1, j)), num(v.real()), num(v.imag())});
      }
  }
  return c;
}

void write_profile_set(const std::filesystem::path& dir, const ProfileSet& p) {
  ensure_dir(dir);
  static const char* names[6] = {"bx", "by", "bz", "ex", "ey", "ez"};
  const Grid& g = p.grid();
  const int n = p.system().n_levels();
  nlohmann::ordered_json man;
  man["grid"] = {{"n", {g.n(0), g.n(1), g.n(2)}},
                 {"length", {num(g.length(0)), num(g.length(1)), num(g.length(2))}},
                 {"hash", grid_hash(g)}};
  man["lattice"] = {{"k", p.lattice().k()},
                    {"a", p.lattice().exponent()},
                    {"c_dioph", p.lattice().c_dioph()},
                    {"a_max", p.lattice().a_max()}};
  man["t"] = num(p.t);
  auto& slots = man["slots"] = nlohmann::ordered_json::array();
  int idx = 0;
  for (const auto& [key, coeff] : p.slots()) {
    std::ostringstream name;
    name << "slot_" << idx++ << ".csv";
    std::vector<std::string> header{"i", "j", "l"};
    std::vector<const Field*> cols;
    for (int q = 0; q < 6; ++q)
      if (!coeff.u[q].empty()) {
        header.push_back(std::string(names[q]) + "_re");
        header.push_back(std::string(names[q]) + "_im");
        cols.push_back(&coeff.u[q]);
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (!coeff.rho[a * n + b].empty()) {
          const std::string r = "rho" + std::to_string(a + 1) + std::to_string(b + 1);
          header.push_back(r + "_re");
          header.push_back(r + "_im");
          cols.push_back(&coeff.rho[a * n + b]);
        }
    Csv csv(header);
    for (int i = 0; i < g.n(0); ++i)
      for (int j = 0; j < g.n(1); ++j)
        for (int l = 0; l < g.n(2); ++l) {
          std::vector<std::string> cells{std::to_string(i), std::to_string(j), std::to_string(l)};
          const auto at = g.index(i, j, l);
          for (const Field* f : cols) {
            cells.push_back(num((*f)[at].real()));
            cells.push_back(num((*f)[at].imag()));
          }
          csv.row(cells);
        }
    csv.save(dir / name.str());
    slots.push_back({{"order", key.order},
                     {"alpha0", key.mode.alpha0},
                     {"alpha1", key.mode.alpha1},
                     {"kappa", key.mode.kappa},
                     {"class", std::string(to_string(classify_mode(p.lattice(), key.mode)))},
                     {"provenance", std::string(to_string(p.provenance(key)))},
                     {"file", name.str()}});
  }
  write_text(dir / "manifest.json", man.dump(2) + "\n");
}

}  // namespace maxbloch::io
