#include "nnfir/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"

namespace nnfir {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, out, std::chars_format::general);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

NonnegMatrix parse_matrix_csv(std::string_view text, std::string_view source) {
  const std::string src(source);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool header_allowed = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);

    std::vector<double> parsed(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t c = 0; c < fields.size() && bad == fields.size(); ++c) {
      if (!parse_number(fields[c], parsed[c])) bad = c;
    }
    if (bad != fields.size()) {
      if (header_allowed) {
        header_allowed = false;
        cols = fields.size();
        continue;
      }
      throw InputError(src + ": line " + std::to_string(line_no) + " (time row " + std::to_string(rows) +
                       "), column " + std::to_string(bad) + ": '" + std::string(fields[bad]) +
                       "' is not a decimal number");
    }
    header_allowed = false;
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw InputError(src + ": line " + std::to_string(line_no) + " (time row " + std::to_string(rows) +
                       ") has " + std::to_string(fields.size()) + " columns, expected " +
                       std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!std::isfinite(parsed[c]) || parsed[c] < 0.0) {
        throw InputError(src + ": line " + std::to_string(line_no) + " (time row " +
                         std::to_string(rows) + "), column " + std::to_string(c) +
                         ": value must be finite and nonnegative");
      }
      values.push_back(parsed[c]);
    }
    ++rows;
  }
  if (rows == 0) throw InputError(src + ": no data rows");
  return NonnegMatrix(rows, cols, std::move(values));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NonnegMatrix read_matrix_csv(const std::string& path) { return parse_matrix_csv(read_file(path), path); }

std::string format_matrix_csv(const NonnegMatrix& M) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < M.rows(); ++i) {
    for (std::size_t j = 0; j < M.cols(); ++j) os << (j ? "," : "") << M(i, j);
    os << '\n';
  }
  return os.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

DownsampledTrace downsample(const std::vector<double>& trace, std::size_t limit) {
  DownsampledTrace out;
  out.length = trace.size();
  if (trace.empty()) return out;
  limit = std::max<std::size_t>(limit, 2);
  if (trace.size() <= limit) {
    for (std::size_t t = 0; t < trace.size(); ++t) out.iterations.push_back(t);
  } else {
    const double step = static_cast<double>(trace.size() - 1) / static_cast<double>(limit - 1);
    for (std::size_t s = 0; s < limit; ++s) {
      const auto t = static_cast<std::size_t>(std::llround(step * static_cast<double>(s)));
      if (out.iterations.empty() || t != out.iterations.back()) out.iterations.push_back(t);
    }
    out.iterations.back() = trace.size() - 1;
  }
  for (std::size_t t : out.iterations) out.values.push_back(trace[t]);
  return out;
}

namespace {

json fragment_json(const ConditionFragment& f) {
  json w = json::array();
  for (const auto& wit : f.witnesses) {
    json e = {{"row", wit.row}};
    if (wit.col) e["col"] = *wit.col;
    w.push_back(e);
  }
  return {{"holds", f.holds}, {"witnesses", w}};
}

json vec(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

json to_json(const ConditionReport& report) {
  return {{"well_posed", report.well_posed},
          {"strictly_convex", report.strictly_convex},
          {"condition_1", fragment_json(report.condition_1)},
          {"condition_2", fragment_json(report.condition_2)}};
}

json to_json(const KktResidual& kkt) {
  return {{"gradient", kkt.gradient},
          {"max_violation", kkt.max_violation},
          {"active_set", kkt.active_set},
          {"tol_active", kkt.tol_active}};
}

json to_json(const VerificationSummary& v) {
  return {{"lifted_checks_enabled", v.enabled},
          {"steps_checked", v.steps_checked},
          {"max_objective_increase", v.max_objective_increase},
          {"max_gain_residual", v.max_gain_residual},
          {"max_gain_w_residual", v.max_gain_w_residual},
          {"max_pythagoras_y", v.max_pythagoras_Y},
          {"max_pythagoras_w", v.max_pythagoras_W},
          {"pythagoras_skipped", v.pythagoras_skipped},
          {"max_simplex_residual", v.max_simplex_residual},
          {"max_gradient_form_gap", v.max_gradient_form_gap},
          {"min_gain", v.min_gain},
          {"positivity_preserved", v.positivity_preserved},
          {"all_pass", v.all_pass()}};
}

json to_json(const DownsampledTrace& t) {
  return {{"length", t.length}, {"iterations", t.iterations}, {"values", t.values}};
}

json to_json(const ConsistencyCurve& c) {
  json errors = json::array();
  for (const auto& row : c.errors) {
    json r = json::array();
    for (double e : row) r.push_back(std::isnan(e) ? json(nullptr) : json(e));
    errors.push_back(r);
  }
  return {{"m_grid", c.m_grid},       {"replicates", c.replicates},
          {"errors", errors},         {"median_error", c.median_error},
          {"missing", c.missing},     {"inversions", c.inversions},
          {"shrink_factor", c.shrink_factor}, {"trend_ok", c.trend_ok},
          {"diagnostics", c.diagnostics}};
}

json to_json(const ScaledErrorSample& s) {
  return {{"m", s.m},
          {"kept", s.draws.size()},
          {"excluded_boundary", s.excluded_boundary},
          {"failed", s.failed},
          {"mean", s.mean},
          {"standard_error", s.standard_error},
          {"covariance", s.covariance},
          {"skewness", s.skewness},
          {"excess_kurtosis", s.excess_kurtosis}};
}

json to_json(const NormalityResult& r) {
  return {{"at_m", to_json(r.at_m)},
          {"at_4m", to_json(r.at_4m)},
          {"mean_ok", r.mean_ok},
          {"covariance_gap", r.covariance_gap},
          {"covariance_ok", r.covariance_ok},
          {"shape_ok", r.shape_ok}};
}

json to_json(const DecompositionCheck& d) {
  return {{"lhs_mean", d.lhs_mean},   {"rhs_mean", d.rhs_mean},
          {"residual", d.residual},   {"standard_error", d.standard_error},
          {"e_delta_log_delta", d.e_delta_log_delta}, {"samples", d.samples},
          {"passes", d.passes}};
}

json config_json(const SolverConfig& config, const std::string& init_text) {
  return {{"max_iters", config.max_iters},
          {"tol_kkt", config.tol_kkt},
          {"tol_objective", config.tol_objective},
          {"stall_window", config.stall_window},
          {"init", init_text},
          {"verify", config.verify_mode},
          {"history", config.record_history}};
}

json input_json(const std::string& path, const std::string& bytes, const NonnegMatrix& M) {
  return {{"path", path}, {"sha256", sha256_hex(bytes)}, {"rows", M.rows()}, {"cols", M.cols()}};
}

json run_report_body(const NonnegMatrix& Y, const NonnegMatrix& U, const SolverReport& rep) {
  json body;
  body["conditions"] = to_json(check_conditions(Y, U));
  body["h_final"] = vec(rep.h_final.values());
  body["objective_final"] = rep.objective_trace.empty() ? 0.0 : rep.objective_trace.back();
  body["objective_trace"] = to_json(downsample(rep.objective_trace));
  body["kkt"] = to_json(rep.kkt_final);
  body["termination"] = to_string(rep.termination);
  body["iterations_used"] = rep.iterations_used;
  body["S"] = rep.S;
  body["dropped_columns"] = rep.dropped_columns;
  body["frozen_coordinates"] = rep.frozen_coordinates;
  body["suspect_active_set"] = rep.suspect_active_set;
  body["possibly_suboptimal"] = !rep.suspect_active_set.empty();
  body["invariants"] = to_json(rep.verification);
  if (!rep.history.empty()) {
    json hist = json::array();
    const DownsampledTrace idx = downsample(std::vector<double>(rep.history.size(), 0.0));
    for (std::size_t t : idx.iterations) hist.push_back({{"t", t}, {"h", vec(rep.history[t].values())}});
    body["history"] = hist;
    if (rep.S > 0.0) {
      body["lyapunov_trace"] = to_json(downsample(monotone_lyapunov_trace(rep.history, rep.h_final, U, rep.S)));
    }
  }
  return body;
}

ReportValidation revalidate_run_report(const json& report, const NonnegMatrix& Y, const NonnegMatrix& U) {
  ReportValidation v;
  try {
    if (report.at("schema_version").get<std::string>() != kSchemaVersion) {
      v.message = "unsupported schema_version";
      return v;
    }
    const ImpulseResponse h(report.at("h_final").get<std::vector<double>>());
    v.stored_violation = report.at("kkt").at("max_violation").get<double>();
    const double tol = report.at("kkt").at("tol_active").get<double>();
    v.recomputed_violation = kkt_residual(Y, U, h, tol).max_violation;
    v.ok = std::abs(v.recomputed_violation - v.stored_violation) <= 1e-9 * (1.0 + v.stored_violation);
    v.message = v.ok ? "ok" : "stored KKT residual does not match h_final";
  } catch (const std::exception& e) {
    v.message = e.what();
  }
  return v;
}

NoiseModel parse_noise(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number = [&](std::string_view s) {
    double v = 0.0;
    if (!parse_number(trim(s), v)) throw ConfigError("noise '" + text + "': bad parameter '" + std::string(s) + "'");
    return v;
  };
  NoiseModel n;
  if (name == "point-mass" || name == "none") {
    n = NoiseModel::point_mass();
  } else if (name == "gamma") {
    n = NoiseModel::gamma(args.empty() ? 4.0 : number(args));
  } else if (name == "lognormal") {
    n = NoiseModel::lognormal(args.empty() ? 0.5 : number(args));
  } else if (name == "two-point") {
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("two-point noise needs 'two-point:LOW,HIGH'");
    n = NoiseModel::two_point(number(std::string_view(args).substr(0, comma)),
                              number(std::string_view(args).substr(comma + 1)));
  } else {
    throw ConfigError("unknown noise family '" + name + "'");
  }
  n.validate();
  return n;
}

}  // namespace nnfir
