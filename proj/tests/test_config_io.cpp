#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "maxbloch/config.hpp"
#include "maxbloch/errors.hpp"
#include "maxbloch/io.hpp"

using namespace maxbloch;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "level_system": { "N": 2, "omega": [1.0, 2.0], "gamma": 1.0, "temperature": 1.0,
                      "pauli_upper": [[0.0, 0.2], [0.0, 0.0]],
                      "dipole_z": [[0.0, 1.0], [1.0, 0.0]] },
    "lattice": { "d": 1, "k": [1.4142135623730951], "a": 1.0, "c_dioph": 0.1, "a_max": 8 },
    "grids": { "nx": 8, "ny": 8, "ntheta": 8 },
    "solver": { "dt_cfl": 0.5, "t_star": 0.25, "observer_stride": 4, "slow_step": 0.015625,
                "dt_over_eps": 0.05 },
    "mode": "tm_prepared",
    "epsilons": [0.04, 0.01, 0.0025],
    "initial_data": { "fields": [], "populations": "gibbs" },
    "output_dir": "out/x",
    "seed": 3
  })");
}

std::vector<std::string> issues_of(const json& j) {
  try {
    parse_config_text(j.dump());
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& s : issues)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("a minimal config parses") {
  const RunConfig c = parse_config_text(minimal().dump());
  CHECK(c.system().n_levels() == 2);
  CHECK(c.nx == 8);
  CHECK(c.seed == 3);
  CHECK(c.epsilons.size() == 3);
  CHECK(c.singular_grid().n(2) == 8);
}

TEST_CASE("validation names the offending field") {
  json j = minimal();
  j["level_system"]["omega"] = {2.0, 1.0};
  CHECK(mentions(issues_of(j), "level_system.omega"));

  j = minimal();
  j["level_system"]["pauli"] = {{0.0, 0.2}, {0.2, 0.0}};
  j["level_system"].erase("pauli_upper");
  const auto mr = issues_of(j);
  CHECK(mentions(mr, "level_system"));
  CHECK(mentions(mr, "(1,2)"));

  j = minimal();
  j["solver"]["dtt"] = 1.0;
  CHECK(mentions(issues_of(j), "solver.dtt"));

  j = minimal();
  j["grids"]["nx"] = 12;
  j["lattice"]["c_dioph"] = -1.0;
  j["seed"] = "x";
  const auto many = issues_of(j);
  CHECK(many.size() >= 3);
  CHECK(mentions(many, "grids.nx"));
  CHECK(mentions(many, "lattice.c_dioph"));
  CHECK(mentions(many, "seed"));

  CHECK_THROWS_AS(parse_config_text("{ not json"), ValidationError);
  CHECK_THROWS_AS(parse_config("/nonexistent/cfg.json"), Error);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0}) {
    const std::string s = io::num(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::num(-0.0) == "0");
  CHECK(io::join({1, -2}) == "1;-2");
}

TEST_CASE("hashes and CSV output are stable") {
  CHECK(io::hex64(io::fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(io::hex64(io::fnv1a("")) == "cbf29ce484222325");
  io::Csv csv({"a", "b"});
  csv.row({"1", "2"});
  CHECK(csv.text() == "a,b\n1,2\n");
  CHECK_THROWS(csv.row({"1"}));

  const auto dir = std::filesystem::temp_directory_path() / "maxbloch_io_test";
  std::filesystem::remove_all(dir);
  io::ensure_dir(dir / "sub");
  csv.save(dir / "sub" / "t.csv");
  std::ifstream in(dir / "sub" / "t.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == csv.text());
  std::filesystem::remove_all(dir);
}
