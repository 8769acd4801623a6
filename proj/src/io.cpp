#include "qgraph/io.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "json.hpp"
#include "qgraph/error.hpp"

namespace qgraph {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::ParseError, "unknown key '" + key + "' in " + where);
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw Error(ErrorKind::ParseError, std::string(key) + " must be a number in " + where);
  return obj[key].get<double>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorKind::ParseError, std::string(key) + " must be a string in " + where);
  }
  return obj[key].get<std::string>();
}

std::vector<double> samples(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return {};
  const json& arr = obj[key];
  if (!arr.is_array()) throw Error(ErrorKind::ParseError, std::string(key) + " must be an array in " + where);
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string(key) + " must hold numbers in " + where);
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

GraphSpec parse_graph_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "graph description must be an object");
  reject_unknown(doc, {"vertices", "edges"}, "graph");
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) {
    throw Error(ErrorKind::ParseError, "graph needs a 'vertices' array");
  }
  if (!doc.contains("edges") || !doc["edges"].is_array()) throw Error(ErrorKind::ParseError, "graph needs an 'edges' array");

  GraphSpec spec;
  for (const auto& v : doc["vertices"]) {
    if (!v.is_string()) throw Error(ErrorKind::ParseError, "vertex ids must be strings");
    spec.vertices.push_back(v.get<std::string>());
  }
  std::size_t index = 0;
  for (const auto& e : doc["edges"]) {
    const std::string where = "edge " + std::to_string(index++);
    if (!e.is_object()) throw Error(ErrorKind::ParseError, where + " must be an object");
    reject_unknown(e, {"id", "from", "to", "length", "c", "p", "c_profile", "p_profile"}, where);
    GraphSpec::EdgeSpec es;
    if (e.contains("id")) es.id = text(e, "id", where);
    es.from = text(e, "from", where);
    es.to = text(e, "to", where);
    if (!e.contains("length")) throw Error(ErrorKind::ParseError, where + " needs a length");
    es.length = number(e, "length", 1.0, where);
    es.conductance = number(e, "c", 1.0, where);
    es.potential = number(e, "p", 0.0, where);
    es.conductance_profile = samples(e, "c_profile", where);
    es.potential_profile = samples(e, "p_profile", where);
    spec.edges.push_back(std::move(es));
  }
  return spec;
}

MetricGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read graph file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return MetricGraph::validate(parse_graph_spec(ss.str()));
}

std::string graph_to_json(const MetricGraph& g) {
  json doc;
  doc["vertices"] = json::array();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) doc["vertices"].push_back(g.vertex_id(v));
  doc["edges"] = json::array();
  for (const auto& e : g.edges()) {
    json je{{"id", e.id},
            {"from", g.vertex_id(e.tail)},
            {"to", g.vertex_id(e.head)},
            {"length", e.length},
            {"c", e.coeffs.conductance},
            {"p", e.coeffs.potential}};
    if (!e.coeffs.conductance_profile.empty()) je["c_profile"] = e.coeffs.conductance_profile;
    if (!e.coeffs.potential_profile.empty()) je["p_profile"] = e.coeffs.potential_profile;
    doc["edges"].push_back(je);
  }
  return doc.dump(2);
}

std::string format_number(double v) { return fmt::format("{}", v); }

void CsvTable::add_row(const std::vector<double>& row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& row) {
  if (row.size() != header_.size()) throw Error(ErrorKind::InvalidArgument, "row width does not match the header");
  lines_.push_back(fmt::format("{}", fmt::join(row, ",")));
}

std::string CsvTable::str() const {
  std::string out = fmt::format("{}\n", fmt::join(header_, ","));
  for (const auto& l : lines_) out += l + "\n";
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& config_json,
                    const std::vector<std::string>& outputs, const std::string& seed) {
  const json config = json::parse(config_json);
  const std::string canonical = config.dump();
  json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = fnv1a_hex(canonical);
  m["seed"] = seed;
  m["outputs"] = outputs;
  m["versions"] = {{"qgraph", kVersion},
                   {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                   {"fmt", FMT_VERSION},
                   {"compiler", __VERSION__}};
  m["timestamp"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                            std::chrono::system_clock::now())));
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::ParseError, "not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::ParseError, "empty number list");
  return out;
}

NoiseSpec parse_noise_spec(const std::string& text, const MetricGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  const auto ends = static_cast<Eigen::Index>(2 * g.edge_count());
  const auto nc = static_cast<Eigen::Index>(g.continuity_row_count());
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto diagonal = [&](Eigen::Index size) {
    const auto q = parse_number_list(tail);
    if (static_cast<Eigen::Index>(q.size()) != size) {
      throw Error(ErrorKind::ParseError, head + " needs " + std::to_string(size) + " entries");
    }
    return Eigen::VectorXd::Map(q.data(), size).asDiagonal().toDenseMatrix();
  };
  NoiseSpec spec;
  if (head == "none" && tail.empty()) return spec;
  if (head == "kirchhoff" && tail.empty()) {
    spec.kind = NoiseKind::Kirchhoff;
    spec.covariance = Eigen::MatrixXd::Identity(n, n);
  } else if (head == "kirchhoff-diag") {
    spec.kind = NoiseKind::Kirchhoff;
    spec.covariance = diagonal(n);
  } else if (head == "full" && tail.empty()) {
    spec.kind = NoiseKind::Full;
    spec.covariance = Eigen::MatrixXd::Identity(ends, ends);
  } else if (head == "full-continuity" && tail.empty()) {
    spec.kind = NoiseKind::Full;
    spec.covariance = Eigen::MatrixXd::Zero(ends, ends);
    spec.covariance.topLeftCorner(nc, nc).setIdentity();
  } else if (head == "full-diag") {
    spec.kind = NoiseKind::Full;
    spec.covariance = diagonal(ends);
  } else {
    throw Error(ErrorKind::ParseError, "unknown noise spec '" + text + "'");
  }
  if ((spec.covariance.diagonal().array() < 0.0).any()) {
    throw Error(ErrorKind::ParseError, "noise variances must be nonnegative");
  }
  return spec;
}

Drift parse_drift_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto single = [&] {
    const auto v = parse_number_list(tail);
    if (v.size() != 1) throw Error(ErrorKind::ParseError, head + " takes one number");
    return v.front();
  };
  if (head == "zero" && tail.empty()) return Drift::zero();
  if (head == "linear") return Drift::linear(single());
  if (head == "sine") return Drift::sine(tail.empty() ? 1.0 : single());
  if (head == "cubic" && tail.empty()) return Drift::cubic();
  if (head == "poly") return Drift::polynomial(parse_number_list(tail));
  throw Error(ErrorKind::ParseError, "unknown drift spec '" + text + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace qgraph
