#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/graph.hpp"
#include "qgraph/solver.hpp"

namespace qgraph {

inline constexpr const char* kVersion = "0.1.0";

/// Graph description in JSON:
///
///   {"vertices": ["a", "b"],
///    "edges": [{"id": "e1", "from": "a", "to": "b", "length": 1.0,
///               "c": 1.0, "p": 0.0, "c_profile": [...], "p_profile": [...]}]}
///
/// "id", "c", "p" and the profiles are optional. Unknown keys are rejected
/// with ParseError.
GraphSpec parse_graph_spec(const std::string& json_text);
MetricGraph load_graph(const std::filesystem::path& path);
std::string graph_to_json(const MetricGraph& g);

/// Shortest round-trip representation of a double.
std::string format_number(double v);

/// Small CSV table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& row);
  void add_row(const std::vector<std::string>& row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> lines_;
};

/// 64-bit FNV-1a hash, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Writes `manifest.json` into `dir`: command, config, its hash, seed,
/// library versions, output file names and a UTC timestamp.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& config_json,
                    const std::vector<std::string>& outputs, const std::string& seed);

/// Comma separated numbers. Throws ParseError.
std::vector<double> parse_number_list(const std::string& text);

enum class NoiseKind { None, Kirchhoff, Full };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  Eigen::MatrixXd covariance;  // n x n (Kirchhoff) or 2m x 2m (full)
};

/// none | kirchhoff | kirchhoff-diag:q1,...,qn | full | full-continuity |
/// full-diag:q1,...,q2m. full-continuity drives the continuity block only.
NoiseSpec parse_noise_spec(const std::string& text, const MetricGraph& g);

/// zero | linear:a | sine[:L] | cubic | poly:a0,a1,...,ad (ascending).
Drift parse_drift_spec(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace qgraph
