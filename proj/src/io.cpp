#include "logkg/io.hpp"

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "logkg/experiments.hpp"

namespace logkg::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const std::filesystem::path& path, std::size_t line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    std::ostringstream msg;
    msg << path.string() << ":" << line_no << ": not a number: '" << cell << "'";
    throw CsvError(msg.str());
  }
  return x;
}

// Reads a CSV with the given header; returns numeric rows (all columns numeric
// unless `text_column` names a column kept verbatim).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected " << t.header.size() << " columns, found "
          << cells.size();
      throw CsvError(msg.str());
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw CsvError(path.string() + ": empty file");
  return t;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  return out;
}

constexpr std::array<const char*, 7> kQuantities{"E", "J0", "K0", "l2", "h1", "sup_abs_u", "strauss_ratio"};

std::array<double, 7> values_of(const DiagnosticsRecord& r) {
  return {r.E, r.J0, r.K0, r.l2, r.h1, r.sup_abs_u, r.strauss_ratio};
}

DiagnosticsRecord from_values(double t, const std::array<double, 7>& v) {
  return DiagnosticsRecord{t, v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_field_csv(const std::filesystem::path& path, const RadialField& u, const RadialField* v) {
  if (v && !(v->grid() == u.grid())) throw DomainError("write_field_csv: u and v live on different grids");
  std::ofstream out = open_out(path);
  out << (v ? "r,u,v\n" : "r,u\n");
  for (std::size_t i = 0; i < u.size(); ++i) {
    out << format_number(u.grid().node(i)) << ',' << format_number(u[i]);
    if (v) out << ',' << format_number((*v)[i]);
    out << '\n';
  }
}

FieldData read_field_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  const bool has_v = t.header == std::vector<std::string>{"r", "u", "v"};
  if (!has_v && t.header != std::vector<std::string>{"r", "u"}) {
    throw CsvError(path.string() + ": header must be r,u or r,u,v");
  }
  std::vector<double> r, u, v;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    r.push_back(parse_number(t.rows[k][0], path, k + 2));
    u.push_back(parse_number(t.rows[k][1], path, k + 2));
    if (has_v) v.push_back(parse_number(t.rows[k][2], path, k + 2));
  }
  RadialGrid grid = [&] {
    try {
      return RadialGrid::from_nodes(r);
    } catch (const DomainError& e) {
      throw CsvError(path.string() + ": " + e.what());
    }
  }();
  FieldData data{RadialField(grid, std::move(u)), std::nullopt};
  if (has_v) data.v = RadialField(grid, std::move(v));
  return data;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out = open_out(path);
  out << kDiagnosticsHeader << '\n';
  for (const DiagnosticsRecord& r : records) {
    out << format_number(r.t);
    for (double x : values_of(r)) out << ',' << format_number(x);
    out << '\n';
  }
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.header != split(kDiagnosticsHeader)) {
    throw CsvError(path.string() + ": header must be " + std::string(kDiagnosticsHeader));
  }
  if (t.rows.empty()) throw CsvError(path.string() + ": no records");
  std::vector<DiagnosticsRecord> records;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    std::array<double, 7> v{};
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = parse_number(t.rows[k][c + 1], path, k + 2);
    records.push_back(from_values(parse_number(t.rows[k][0], path, k + 2), v));
  }
  return records;
}

std::vector<LongRow> to_long(const std::vector<DiagnosticsRecord>& records) {
  std::vector<LongRow> rows;
  rows.reserve(records.size() * kQuantities.size());
  for (const DiagnosticsRecord& r : records) {
    const auto v = values_of(r);
    for (std::size_t c = 0; c < kQuantities.size(); ++c) rows.push_back(LongRow{r.t, kQuantities[c], v[c]});
  }
  return rows;
}

std::vector<DiagnosticsRecord> pivot(const std::vector<LongRow>& rows) {
  // Rows are grouped by consecutive equal t, which to_long produces.
  std::vector<DiagnosticsRecord> records;
  std::size_t i = 0;
  while (i < rows.size()) {
    const double t = rows[i].t;
    std::array<double, 7> v{};
    std::array<bool, 7> seen{};
    for (; i < rows.size() && rows[i].t == t; ++i) {
      std::size_t c = 0;
      while (c < kQuantities.size() && rows[i].quantity != kQuantities[c]) ++c;
      if (c == kQuantities.size()) throw CsvError("pivot: unknown quantity '" + rows[i].quantity + "'");
      if (seen[c]) throw CsvError("pivot: duplicated quantity '" + rows[i].quantity + "'");
      seen[c] = true;
      v[c] = rows[i].value;
    }
    for (std::size_t c = 0; c < seen.size(); ++c) {
      if (!seen[c]) throw CsvError("pivot: quantity '" + std::string(kQuantities[c]) + "' missing at t = " +
                                   format_number(t));
    }
    records.push_back(from_values(t, v));
  }
  return records;
}

void write_long_csv(const std::filesystem::path& path, const std::vector<LongRow>& rows) {
  std::ofstream out = open_out(path);
  out << kLongHeader << '\n';
  for (const LongRow& r : rows) out << format_number(r.t) << ',' << r.quantity << ',' << format_number(r.value) << '\n';
}

std::vector<LongRow> read_long_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.header != split(kLongHeader)) throw CsvError(path.string() + ": header must be " + std::string(kLongHeader));
  std::vector<LongRow> rows;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    rows.push_back(
        LongRow{parse_number(t.rows[k][0], path, k + 2), t.rows[k][1], parse_number(t.rows[k][2], path, k + 2)});
  }
  return rows;
}

nlohmann::json grid_json(const RadialGrid& grid) {
  return {{"R", grid.radius()}, {"n", grid.intervals()}, {"dr", grid.spacing()}};
}

nlohmann::json ground_state_sidecar(const GroundState& gs) {
  nlohmann::json j{{"p", gs.params.p()},
                   {"omega", gs.params.omega()},
                   {"d_omega", gs.d_omega},
                   {"residual_norm", gs.residual_norm},
                   {"K_value", gs.K_value},
                   {"method", to_string(gs.method)},
                   {"grid", grid_json(gs.profile.grid())},
                   {"amplitude", gs.amplitude},
                   {"iterations", gs.iterations}};
  if (gs.method == GroundStateMethod::shooting) {
    j["candidate_amplitudes"] = gs.candidate_amplitudes;
    j["ambiguous"] = gs.ambiguous;
  }
  return j;
}

nlohmann::json evolve_config_json(const EvolveConfig& cfg) {
  return {{"dt", cfg.dt},
          {"T", cfg.T},
          {"bc", "dirichlet_zero"},
          {"blowup_cap", cfg.blowup_cap},
          {"newton_tol", cfg.newton_tol},
          {"newton_max", cfg.newton_max},
          {"sample_every", cfg.sample_every},
          {"cfl_limit", cfg.cfl_limit},
          {"linear_only", cfg.linear_only},
          {"stiffness_limit", cfg.stiffness_limit},
          {"max_refinements", cfg.max_refinements}};
}

nlohmann::json record_json(const DiagnosticsRecord& r) {
  return {{"t", r.t},   {"E", r.E},   {"J0", r.J0}, {"K0", r.K0}, {"l2", r.l2}, {"h1", r.h1},
          {"sup_abs_u", r.sup_abs_u}, {"strauss_ratio", r.strauss_ratio}};
}

nlohmann::json r1_json(const R1Report& r) {
  nlohmann::json j{{"energy_E", r.energy_E},         {"d0", r.d0},
                   {"K0_u0", r.K0_u0},               {"grad_third", r.grad_third},
                   {"nonzero", r.nonzero},           {"energy_below", r.energy_below},
                   {"K_negative", r.K_negative},     {"is_member", r.is_member},
                   {"energy_margin", r.energy_margin}, {"K_margin", r.K_margin},
                   {"grad_above", r.grad_above}};
  if (r.lambda) {
    j["lambda"] = *r.lambda;
    j["predicted_E"] = r.predicted_E;
    j["predicted_K0"] = r.predicted_K0;
  }
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

GroundState load_ground_state(const std::filesystem::path& dir, const std::string& stem) {
  const FieldData field = read_field_csv(dir / (stem + ".csv"));
  const nlohmann::json side = read_json(dir / (stem + ".json"));
  try {
    const ModelParams params(side.at("p").get<double>(), side.at("omega").get<double>());
    const std::string method = side.at("method").get<std::string>();
    GroundState gs{field.u,
                   params,
                   method == "nehari_min" ? GroundStateMethod::nehari_min : GroundStateMethod::shooting,
                   side.at("d_omega").get<double>(),
                   side.at("K_value").get<double>(),
                   side.at("residual_norm").get<double>(),
                   field.u[0],
                   side.value("iterations", 0),
                   {},
                   side.value("ambiguous", false)};
    return gs;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError((dir / (stem + ".json")).string() + ": " + e.what());
  }
}

}  // namespace logkg::io
