#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mpsrg/circuit.hpp"
#include "mpsrg/fixed_point.hpp"
#include "mpsrg/variational.hpp"
#include "mpsrg/verifier.hpp"

namespace mpsrg::io {

using json = nlohmann::json;

/// Parse with "source:line:col: message" diagnostics (ParseError).
json parse_json(std::string_view text, std::string_view source = "<input>");
json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Shortest decimal that round-trips.
std::string format_double(double x);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, std::string_view where = "matrix");
json to_json(const Vector& v);
Vector vector_from_json(const json& j, std::string_view where = "vector");

/// {"d", "D_l", "D_r", "re", "im"}, entries row-major in (i, j, k).
json to_json(const SiteTensor& t);
SiteTensor tensor_from_json(const json& j, std::string_view where = "tensor");

/// {"boundary", "sites": [tensor + optional "repeat"], "left", "right"}.
json to_json(const MpsChain& c);
MpsChain chain_from_json(const json& j);

json to_json(const CircuitIR& c);
CircuitIR circuit_from_json(const json& j);

json to_json(const CanonicalDecomposition& d);
CanonicalDecomposition decomposition_from_json(const json& j);

json to_json(const PairGateSet& g);
PairGateSet gates_from_json(const json& j);

json to_json(const SpectralReport& r);
json to_json(const ErrorFit& f);
json to_json(const DepthReport& r);

/// Command parameters; every report starts with "# config <json>" so runs can be replayed.
struct RunConfig {
  std::string command;
  json params = json::object();

  json to_json() const;
  static RunConfig from_json(const json& j);
  std::string header() const;
  /// Recover the config from a report written with header().
  static RunConfig from_report(std::string_view text);
};

std::string depth_csv(const std::vector<DepthReport>& rows);
std::string error_scan_csv(const std::vector<const ErrorScan*>& scans);
std::string sweep_csv(const SweepReport& r);

}  // namespace mpsrg::io
