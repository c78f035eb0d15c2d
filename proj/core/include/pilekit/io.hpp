#pragma once

#include "pilekit/evidence.hpp"
#include "pilekit/solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pilekit {

// CSV with a header row; floats at 17 significant digits, stable column order.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Quadrature rule export: columns z_1..z_d, w.
void write_rule_csv(const std::filesystem::path& path, const QuadratureRule& rule);

// Observation CSV: columns x_1..x_d, y in any order (matched by header).
// Rows containing non-finite values are dropped; their count is returned.
struct ObservationCsv {
  ObservationSet obs;
  int rejected = 0;
};
ObservationCsv read_observations_csv(const std::filesystem::path& path, int dim);

// Plain point table (x_1..x_d) for prediction queries.
Matrix read_points_csv(const std::filesystem::path& path, int dim);

// Binary matrix dump: magic "PKMB", u32 version, u64 rows, u64 cols, then
// row-major little-endian f64 payload.
void write_matrix(const std::filesystem::path& path, const Matrix& M);
Matrix read_matrix(const std::filesystem::path& path);

// FNV-1a 64-bit content hash, hex-encoded (manifest spec_hash).
std::string fnv1a_hex(const std::string& content);

// manifest.json with the spec hash, seeds, versions, and the command line.
void write_manifest(const std::filesystem::path& dir, const std::string& spec_text,
                    const std::vector<std::uint64_t>& seeds, const std::string& command);

// Fit serialization: kernel, temperatures, coefficients, conditioning nodes,
// and jitter provenance. Loading re-assembles the Gram blocks.
void save_model_json(const std::filesystem::path& path, const FitCoefficients& fit);
FitCoefficients load_model_json(const std::filesystem::path& path);

std::string pile_report_json(const PileReport& report);
std::string data_free_report_json(const DataFreeReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace pilekit
