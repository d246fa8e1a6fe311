#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "maxbloch/field.hpp"
#include "maxbloch/profile_builder.hpp"
#include "maxbloch/reduced_model.hpp"
#include "maxbloch/stiff_solver.hpp"

namespace maxbloch::io {

inline constexpr std::string_view kCodeVersion = "0.3.0";

// Shortest round-trip decimal form; fixed so outputs are byte-stable.
std::string num(double v);
std::string join(const IntVec& v);  // "1;-2"

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t h);
std::string grid_hash(const Grid& g);
// Hash of every value of a field (bitwise), for manifests.
std::string field_hash(const Field& f);

// Creates the directory (and parents); throws Error when it cannot be written.
void ensure_dir(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, std::string_view text);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }
  void save(const std::filesystem::path& path) const { write_text(path, text_); }

 private:
  std::size_t width_;
  std::string text_;
};

Csv observer_csv(const std::vector<Diagnostics>& rows);

// Fourier coefficients of one component of every stored C± mode.
Csv snapshot_csv(const ReducedState& s, int component);

// One coefficient CSV per slot plus manifest.json with provenance.
void write_profile_set(const std::filesystem::path& dir, const ProfileSet& p);

}  // namespace maxbloch::io
