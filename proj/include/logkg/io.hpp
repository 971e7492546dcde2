#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logkg/dynamics.hpp"
#include "logkg/error.hpp"
#include "logkg/experiments.hpp"
#include "logkg/ground_state.hpp"

namespace logkg::io {

/// Unreadable or malformed CSV input.
class CsvError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// 17 significant digits, so values round-trip exactly.
std::string format_number(double x);

inline constexpr const char* kDiagnosticsHeader = "t,E,J0,K0,l2,h1,sup_abs_u,strauss_ratio";
inline constexpr const char* kLongHeader = "t,quantity,value";

/// Field CSV with columns r,u or r,u,v.
void write_field_csv(const std::filesystem::path& path, const RadialField& u, const RadialField* v = nullptr);

struct FieldData {
  RadialField u;
  std::optional<RadialField> v;
};

/// Rejects missing columns, non-numeric cells and non-uniform grids.
FieldData read_field_csv(const std::filesystem::path& path);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path);

struct LongRow {
  double t;
  std::string quantity;
  double value;
  friend bool operator==(const LongRow&, const LongRow&) = default;
};

/// One row per (sample, quantity): seven rows per record.
std::vector<LongRow> to_long(const std::vector<DiagnosticsRecord>& records);
/// Inverse of to_long. Throws CsvError on missing or duplicated quantities.
std::vector<DiagnosticsRecord> pivot(const std::vector<LongRow>& rows);

void write_long_csv(const std::filesystem::path& path, const std::vector<LongRow>& rows);
std::vector<LongRow> read_long_csv(const std::filesystem::path& path);

nlohmann::json grid_json(const RadialGrid& grid);
nlohmann::json ground_state_sidecar(const GroundState& gs);
nlohmann::json evolve_config_json(const EvolveConfig& cfg);
nlohmann::json record_json(const DiagnosticsRecord& r);
nlohmann::json r1_json(const R1Report& r);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Reads <dir>/<stem>.csv and its sidecar <dir>/<stem>.json.
GroundState load_ground_state(const std::filesystem::path& dir, const std::string& stem);

}  // namespace logkg::io
