#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nnfir/diagnostics.hpp"
#include "nnfir/nonneg.hpp"
#include "nnfir/oracles.hpp"
#include "nnfir/solver.hpp"
#include "nnfir/stats.hpp"

namespace nnfir {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr std::size_t kMaxTraceEntries = 10000;

/// CSV matrix: one line per time index (top line t = 0), one column per
/// experiment, plain decimal numbers with '.' as separator. A single leading
/// header line is allowed. Errors name the offending line and column.
NonnegMatrix parse_matrix_csv(std::string_view text, std::string_view source = "<input>");
NonnegMatrix read_matrix_csv(const std::string& path);
std::string format_matrix_csv(const NonnegMatrix& M);
std::string read_file(const std::string& path);

std::string sha256_hex(std::string_view bytes);

/// Keeps at most `limit` entries, always including the first and last.
struct DownsampledTrace {
  std::size_t length = 0;
  std::vector<std::size_t> iterations;
  std::vector<double> values;
};
DownsampledTrace downsample(const std::vector<double>& trace, std::size_t limit = kMaxTraceEntries);

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const KktResidual& kkt);
nlohmann::json to_json(const VerificationSummary& v);
nlohmann::json to_json(const DownsampledTrace& t);
nlohmann::json to_json(const ConsistencyCurve& c);
nlohmann::json to_json(const ScaledErrorSample& s);
nlohmann::json to_json(const NormalityResult& r);
nlohmann::json to_json(const DecompositionCheck& d);

/// Serializable form of a solver configuration (init echoed as text).
nlohmann::json config_json(const SolverConfig& config, const std::string& init_text);

/// Input file descriptor: path, digest and shape.
nlohmann::json input_json(const std::string& path, const std::string& bytes, const NonnegMatrix& M);

/// Body of an estimate report (everything except inputs, config and timing).
nlohmann::json run_report_body(const NonnegMatrix& Y, const NonnegMatrix& U, const SolverReport& rep);

struct ReportValidation {
  bool ok = false;
  double stored_violation = 0.0;
  double recomputed_violation = 0.0;
  std::string message;
};

/// Re-reads h_final from an estimate report and recomputes its KKT residual
/// against the data; agreement within 1e-9 (relative to 1 + value) passes.
ReportValidation revalidate_run_report(const nlohmann::json& report, const NonnegMatrix& Y,
                                       const NonnegMatrix& U);

/// "gamma:4", "lognormal:0.5", "two-point:0.5,1.5", "point-mass".
NoiseModel parse_noise(const std::string& text);

}  // namespace nnfir
