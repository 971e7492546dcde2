#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "logkg/io.hpp"

using namespace logkg;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    path = fs::temp_directory_path() / ("logkg_io_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<DiagnosticsRecord> sample_records() {
  std::vector<DiagnosticsRecord> recs;
  for (int i = 0; i < 3; ++i) {
    DiagnosticsRecord r;
    r.t = 0.1 * i;
    r.E = 11.98 + 1e-15 * i;
    r.J0 = 11.98;
    r.K0 = -4.4 - i / 3.0;
    r.l2 = std::sqrt(2.0) * (1 + i);
    r.h1 = std::acos(-1.0) + i;
    r.sup_abs_u = 6.5 * (i + 1);
    r.strauss_ratio = 0.17;
    recs.push_back(r);
  }
  return recs;
}

bool same(const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
  return a.t == b.t && a.E == b.E && a.J0 == b.J0 && a.K0 == b.K0 && a.l2 == b.l2 && a.h1 == b.h1 &&
         a.sup_abs_u == b.sup_abs_u && a.strauss_ratio == b.strauss_ratio;
}

}  // namespace

TEST_CASE("numbers round-trip through text") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::sqrt(2.0)}) {
    CHECK(std::stod(io::format_number(x)) == x);
  }
}

TEST_CASE("field csv") {
  ScratchDir dir;
  const RadialGrid g(7.0, 70);
  const RadialField u = RadialField::sample(g, [](double r) { return std::exp(-r * r / 3.0); });
  const RadialField v = RadialField::sample(g, [](double r) { return std::sin(r) / 7.0; });

  SUBCASE("u only") {
    io::write_field_csv(dir.path / "u.csv", u);
    CHECK(slurp(dir.path / "u.csv").rfind("r,u\n", 0) == 0);
    const io::FieldData back = io::read_field_csv(dir.path / "u.csv");
    CHECK(back.u.grid() == g);
    CHECK(back.u.values() == u.values());
    CHECK_FALSE(back.v.has_value());
  }
  SUBCASE("u and v") {
    io::write_field_csv(dir.path / "uv.csv", u, &v);
    const io::FieldData back = io::read_field_csv(dir.path / "uv.csv");
    REQUIRE(back.v.has_value());
    CHECK(back.v->values() == v.values());
  }
  SUBCASE("malformed input") {
    spit(dir.path / "bad_header.csv", "x,y\n0,1\n");
    CHECK_THROWS_AS(io::read_field_csv(dir.path / "bad_header.csv"), io::CsvError);
    spit(dir.path / "bad_cell.csv", "r,u\n0,1\n0.5,abc\n");
    CHECK_THROWS_AS(io::read_field_csv(dir.path / "bad_cell.csv"), io::CsvError);
    std::string uneven = "r,u\n";
    for (int i = 0; i <= 20; ++i) uneven += std::to_string(i * i * 0.01) + ",1\n";
    spit(dir.path / "uneven.csv", uneven);
    CHECK_THROWS_AS(io::read_field_csv(dir.path / "uneven.csv"), io::CsvError);
    CHECK_THROWS_AS(io::read_field_csv(dir.path / "missing.csv"), io::CsvError);
  }
}

TEST_CASE("diagnostics csv") {
  ScratchDir dir;
  const auto recs = sample_records();
  io::write_diagnostics_csv(dir.path / "d.csv", recs);
  const std::string text = slurp(dir.path / "d.csv");
  CHECK(text.rfind(std::string(io::kDiagnosticsHeader) + "\n", 0) == 0);
  const auto back = io::read_diagnostics_csv(dir.path / "d.csv");
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(same(back[i], recs[i]));

  io::write_diagnostics_csv(dir.path / "d2.csv", back);
  CHECK(slurp(dir.path / "d2.csv") == text);

  spit(dir.path / "empty.csv", "");
  CHECK_THROWS_AS(io::read_diagnostics_csv(dir.path / "empty.csv"), io::CsvError);
  spit(dir.path / "header_only.csv", std::string(io::kDiagnosticsHeader) + "\n");
  CHECK_THROWS_AS(io::read_diagnostics_csv(dir.path / "header_only.csv"), io::CsvError);
  spit(dir.path / "short.csv", std::string(io::kDiagnosticsHeader) + "\n0,1,2\n");
  CHECK_THROWS_AS(io::read_diagnostics_csv(dir.path / "short.csv"), io::CsvError);
}

TEST_CASE("long format reshape") {
  const auto recs = sample_records();
  const auto rows = io::to_long(recs);
  CHECK(rows.size() == 21);
  CHECK(rows[0].quantity == "E");
  CHECK(rows[0].t == recs[0].t);
  CHECK(rows[20].t == recs[2].t);

  const auto back = io::pivot(rows);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same(back[i], recs[i]));

  ScratchDir dir;
  io::write_long_csv(dir.path / "long.csv", rows);
  CHECK(slurp(dir.path / "long.csv").rfind("t,quantity,value\n", 0) == 0);
  CHECK(io::read_long_csv(dir.path / "long.csv") == rows);

  auto dup = rows;
  dup[1].quantity = dup[0].quantity;
  CHECK_THROWS_AS(io::pivot(dup), io::CsvError);
  auto missing = rows;
  missing.pop_back();
  CHECK_THROWS_AS(io::pivot(missing), io::CsvError);
  auto unknown = rows;
  unknown[2].quantity = "bogus";
  CHECK_THROWS_AS(io::pivot(unknown), io::CsvError);
}

TEST_CASE("ground state persistence") {
  ScratchDir dir;
  const GroundState gs = find_ground_state(ModelParams(3.0));
  io::write_field_csv(dir.path / "shoot.csv", gs.profile);
  const nlohmann::json side = io::ground_state_sidecar(gs);
  for (const char* key : {"p", "omega", "d_omega", "residual_norm", "K_value", "method", "grid"}) {
    CHECK(side.contains(key));
  }
  CHECK(side["grid"]["n"] == 4000);
  io::write_json(dir.path / "shoot.json", side);
  const GroundState back = io::load_ground_state(dir.path, "shoot");
  CHECK(back.profile.values() == gs.profile.values());
  CHECK(back.d_omega == gs.d_omega);
  CHECK(back.params.p() == 3.0);
  CHECK(back.method == GroundStateMethod::shooting);

  spit(dir.path / "broken.json", "{\"p\": 3");
  io::write_field_csv(dir.path / "broken.csv", gs.profile);
  CHECK_THROWS_AS(io::load_ground_state(dir.path, "broken"), DomainError);
  spit(dir.path / "wrongp.json", "{\"p\": 5, \"omega\": 0, \"method\": \"shooting\", \"d_omega\": 1, "
                                 "\"K_value\": 0, \"residual_norm\": 0}");
  io::write_field_csv(dir.path / "wrongp.csv", gs.profile);
  CHECK_THROWS_AS(io::load_ground_state(dir.path, "wrongp"), DomainError);
}

TEST_CASE("membership report json") {
  R1Report r;
  r.d0 = 12.0;
  r.energy_E = 11.0;
  r.is_member = true;
  CHECK_FALSE(io::r1_json(r).contains("lambda"));
  r.lambda = 1.2;
  const nlohmann::json j = io::r1_json(r);
  CHECK(j["lambda"] == 1.2);
  CHECK(j["is_member"] == true);
  CHECK(io::evolve_config_json(EvolveConfig{})["bc"] == "dirichlet_zero");
}
