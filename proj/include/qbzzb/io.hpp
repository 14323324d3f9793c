#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbzzb/bound.hpp"
#include "qbzzb/oracle.hpp"
#include "qbzzb/prior.hpp"
#include "qbzzb/resource.hpp"
#include "qbzzb/types.hpp"
#include "qbzzb/waveform.hpp"

namespace qbzzb::io {

/// Input file error with 1-based line/column position (0 when unknown, e.g.
/// for semantic errors discovered after parsing).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, int line, int column, const std::string& message)
      : std::runtime_error(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + message),
        path_(std::move(path)),
        line_(line),
        column_(column) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string path_;
  int line_;
  int column_;
};

/// Value and lambda stamped into every output file.
struct Provenance {
  double lambda;
  std::string config_digest;
};

// ---------------------------------------------------------------------------
// formatting helpers

/// Formats with 12 significant digits (round-trip stable for plotting and
/// regression use); infinities print as "inf"/"-inf".
inline std::string format_sig(double value, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

/// JSON value carrying at most 12 significant digits; infinities become
/// strings since JSON has no number for them.
inline nlohmann::ordered_json json_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return std::strtod(format_sig(value).c_str(), nullptr);
}

/// FNV-1a 64-bit digest, hex-encoded; used for config provenance stamps.
inline std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// loading

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path, 0, 0, "cannot open file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void byte_to_line_col(const std::string& text, std::size_t byte, int& line, int& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

inline nlohmann::json parse_json(const std::string& path, const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 0, col = 0;
    byte_to_line_col(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
    throw ParseError(path, line, col, e.what());
  }
}

struct CsvCell {
  std::string text;
  int line;
  int column;  // 1-based character offset of the first cell character
};

/// Splits CSV text into rows of cells with positions; blank lines dropped.
inline std::vector<std::vector<CsvCell>> split_csv(const std::string& text) {
  std::vector<std::vector<CsvCell>> rows;
  std::vector<CsvCell> row;
  CsvCell cell{"", 1, 1};
  int line = 1, col = 1;
  bool cell_open = false;

  const auto flush_cell = [&]() {
    row.push_back(cell);
    cell = CsvCell{"", line, col + 1};
    cell_open = false;
  };
  const auto flush_row = [&]() {
    if (cell_open || !row.empty()) flush_cell();
    bool blank = true;
    for (const auto& c : row) {
      if (!c.text.empty() && c.text.find_first_not_of(" \t\r") != std::string::npos) {
        blank = false;
        break;
      }
    }
    if (!blank) rows.push_back(row);
    row.clear();
  };

  for (char ch : text) {
    if (ch == '\n') {
      flush_row();
      ++line;
      col = 1;
      cell.line = line;
      cell.column = 1;
      continue;
    }
    if (ch == ',') {
      flush_cell();
      cell.column = col + 1;
      ++col;
      continue;
    }
    if (!cell_open && (ch == ' ' || ch == '\t' || ch == '\r')) {
      ++col;
      cell.column = col;
      continue;  // leading whitespace
    }
    cell_open = true;
    cell.text.push_back(ch);
    ++col;
  }
  flush_row();
  return rows;
}

inline bool parse_number(const std::string& s, double& out) {
  std::string t = s;
  while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.pop_back();
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

inline double require_number(const std::string& path, const CsvCell& cell) {
  double v = 0;
  if (!parse_number(cell.text, v)) {
    throw ParseError(path, cell.line, cell.column, "expected a number, got '" + cell.text + "'");
  }
  return v;
}

inline bool is_numeric_row(const std::vector<CsvCell>& row) {
  double v;
  for (const auto& c : row) {
    if (!parse_number(c.text, v)) return false;
  }
  return true;
}

inline VectorX<double> json_vector(const std::string& path, const nlohmann::json& arr,
                                   const std::string& field) {
  if (!arr.is_array()) {
    throw ParseError(path, 0, 0, "field '" + field + "' must be an array of numbers");
  }
  VectorX<double> v(arr.size());
  Index i = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) {
      throw ParseError(path, 0, 0, "field '" + field + "' must contain only numbers");
    }
    v[i++] = x.get<double>();
  }
  return v;
}

}  // namespace detail

/// Prior from JSON: {"mean": [...], "sigma0": [[...], ...]}. The mean is
/// optional and defaults to zero.
inline GaussianPrior<double> load_prior_json(const std::string& path) {
  const std::string text = detail::read_file(path);
  const nlohmann::json j = detail::parse_json(path, text);
  if (!j.is_object() || !j.contains("sigma0")) {
    throw ParseError(path, 0, 0, "prior JSON must be an object with a 'sigma0' field");
  }
  const auto& rows = j["sigma0"];
  if (!rows.is_array() || rows.empty()) {
    throw ParseError(path, 0, 0, "'sigma0' must be a nonempty array of rows");
  }
  const Index k = static_cast<Index>(rows.size());
  MatrixX<double> sigma0(k, k);
  Index r = 0;
  for (const auto& row : rows) {
    const VectorX<double> v = detail::json_vector(path, row, "sigma0");
    if (v.size() != k) {
      throw ParseError(path, 0, 0, "'sigma0' must be square");
    }
    sigma0.row(r++) = v.transpose();
  }
  VectorX<double> mean = VectorX<double>::Zero(k);
  if (j.contains("mean")) {
    mean = detail::json_vector(path, j["mean"], "mean");
    if (mean.size() != k) {
      throw ParseError(path, 0, 0, "'mean' length must match 'sigma0'");
    }
  }
  try {
    return {std::move(mean), std::move(sigma0)};
  } catch (const std::exception& e) {
    throw ParseError(path, 0, 0, e.what());
  }
}

/// Prior from CSV: a K x K row-major covariance matrix, optional header row,
/// zero mean.
inline GaussianPrior<double> load_prior_csv(const std::string& path) {
  auto rows = detail::split_csv(detail::read_file(path));
  if (!rows.empty() && !detail::is_numeric_row(rows.front())) {
    rows.erase(rows.begin());  // header
  }
  if (rows.empty()) {
    throw ParseError(path, 0, 0, "no covariance rows found");
  }
  const Index k = static_cast<Index>(rows.size());
  MatrixX<double> sigma0(k, k);
  for (Index r = 0; r < k; ++r) {
    if (static_cast<Index>(rows[r].size()) != k) {
      throw ParseError(path, rows[r].front().line, rows[r].front().column,
                       "covariance must be square (" + std::to_string(rows[r].size()) +
                           " columns in a " + std::to_string(k) + "-row matrix)");
    }
    for (Index c = 0; c < k; ++c) {
      sigma0(r, c) = detail::require_number(path, rows[r][c]);
    }
  }
  try {
    return GaussianPrior<double>::zero_mean(std::move(sigma0));
  } catch (const std::exception& e) {
    throw ParseError(path, 0, 0, e.what());
  }
}

inline GaussianPrior<double> load_prior(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return load_prior_json(path);
  }
  return load_prior_csv(path);
}

/// Spectrum JSON: {"dimension": K, "support": [{"m": [...], "p": ...}, ...]}.
inline ProbeSpectrum<double> load_spectrum(const std::string& path) {
  const std::string text = detail::read_file(path);
  const nlohmann::json j = detail::parse_json(path, text);
  if (!j.is_object() || !j.contains("dimension") || !j.contains("support")) {
    throw ParseError(path, 0, 0,
                     "spectrum JSON must be an object with 'dimension' and 'support' fields");
  }
  if (!j["dimension"].is_number_integer()) {
    throw ParseError(path, 0, 0, "'dimension' must be an integer");
  }
  const Index k = j["dimension"].get<Index>();
  const auto& support = j["support"];
  if (!support.is_array() || support.empty()) {
    throw ParseError(path, 0, 0, "'support' must be a nonempty array");
  }
  MatrixX<double> m(static_cast<Index>(support.size()), k);
  VectorX<double> p(static_cast<Index>(support.size()));
  Index r = 0;
  for (const auto& atom : support) {
    if (!atom.is_object() || !atom.contains("m") || !atom.contains("p")) {
      throw ParseError(path, 0, 0, "each support atom needs 'm' and 'p' fields");
    }
    const VectorX<double> mv = detail::json_vector(path, atom["m"], "m");
    if (mv.size() != k) {
      throw ParseError(path, 0, 0, "'m' length must equal 'dimension'");
    }
    if (!atom["p"].is_number()) {
      throw ParseError(path, 0, 0, "'p' must be a number");
    }
    m.row(r) = mv.transpose();
    p[r] = atom["p"].get<double>();
    ++r;
  }
  try {
    return {std::move(m), std::move(p)};
  } catch (const std::exception& e) {
    throw ParseError(path, 0, 0, e.what());
  }
}

/// Flux CSV: columns t,flux with an optional header row.
inline FluxProfile<double> load_flux_csv(const std::string& path) {
  auto rows = detail::split_csv(detail::read_file(path));
  if (!rows.empty() && !detail::is_numeric_row(rows.front())) {
    rows.erase(rows.begin());
  }
  if (rows.empty()) {
    throw ParseError(path, 0, 0, "no flux samples found");
  }
  VectorX<double> t(static_cast<Index>(rows.size())), f(static_cast<Index>(rows.size()));
  for (Index r = 0; r < static_cast<Index>(rows.size()); ++r) {
    if (rows[r].size() != 2) {
      throw ParseError(path, rows[r].front().line, rows[r].front().column,
                       "expected two columns: t,flux");
    }
    t[r] = detail::require_number(path, rows[r][0]);
    f[r] = detail::require_number(path, rows[r][1]);
  }
  try {
    return {std::move(t), std::move(f)};
  } catch (const std::exception& e) {
    throw ParseError(path, 0, 0, e.what());
  }
}

// ---------------------------------------------------------------------------
// writing

namespace detail {

inline void csv_provenance(std::ostream& os, const Provenance& prov) {
  os << "# lambda = " << format_sig(prov.lambda) << "\n";
  os << "# config = " << prov.config_digest << "\n";
}

inline nlohmann::ordered_json json_header(const Provenance& prov) {
  nlohmann::ordered_json j;
  j["lambda"] = json_number(prov.lambda);
  j["config_digest"] = prov.config_digest;
  return j;
}

}  // namespace detail

inline void write_bound_csv(std::ostream& os, const BoundResult<double>& r,
                            const Provenance& prov) {
  detail::csv_provenance(os, prov);
  os << "tau0,tau_f,z,prior_limit,asymptotic_limit,regime\n";
  os << format_sig(r.tau0) << ',' << format_sig(r.tau_f) << ',' << format_sig(r.z) << ','
     << format_sig(r.prior_limit) << ',' << format_sig(r.asymptotic_limit) << ','
     << to_string(r.regime) << "\n";
}

inline void write_bound_json(std::ostream& os, const BoundResult<double>& r,
                             const Provenance& prov) {
  nlohmann::ordered_json j = detail::json_header(prov);
  j["tau0"] = json_number(r.tau0);
  j["tau_f"] = json_number(r.tau_f);
  j["z"] = json_number(r.z);
  j["prior_limit"] = json_number(r.prior_limit);
  j["asymptotic_limit"] = json_number(r.asymptotic_limit);
  j["regime"] = to_string(r.regime);
  os << j.dump(2) << "\n";
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow<double>>& rows,
                           const Provenance& prov) {
  detail::csv_provenance(os, prov);
  os << "ratio,z_over_tauf2,z_over_tau02,prior_limit_norm,asymptotic_limit_norm\n";
  for (const auto& r : rows) {
    os << format_sig(r.ratio) << ',' << format_sig(r.z_over_tauf2) << ','
       << format_sig(r.z_over_tau02) << ',' << format_sig(r.prior_limit_norm) << ','
       << format_sig(r.asymptotic_limit_norm) << "\n";
  }
}

inline void write_scan_json(std::ostream& os, const std::vector<ScanRow<double>>& rows,
                            const Provenance& prov) {
  nlohmann::ordered_json j = detail::json_header(prov);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["ratio"] = json_number(r.ratio);
    row["z_over_tauf2"] = json_number(r.z_over_tauf2);
    row["z_over_tau02"] = json_number(r.z_over_tau02);
    row["prior_limit_norm"] = json_number(r.prior_limit_norm);
    row["asymptotic_limit_norm"] = json_number(r.asymptotic_limit_norm);
    arr.push_back(std::move(row));
  }
  j["rows"] = std::move(arr);
  os << j.dump(2) << "\n";
}

/// One output row per time sample: t, H_+ upper bound, asymptotic limit.
struct WaveformRow {
  double t;
  double h_plus_upper;
  double hlimit;
};

inline void write_waveform_csv(std::ostream& os, const std::vector<WaveformRow>& rows,
                               const Provenance& prov) {
  detail::csv_provenance(os, prov);
  os << "t,h_plus_upper,hlimit\n";
  for (const auto& r : rows) {
    os << format_sig(r.t) << ',' << format_sig(r.h_plus_upper) << ',' << format_sig(r.hlimit)
       << "\n";
  }
}

inline void write_waveform_json(std::ostream& os, const std::vector<WaveformRow>& rows,
                                const Provenance& prov) {
  nlohmann::ordered_json j = detail::json_header(prov);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["t"] = json_number(r.t);
    row["h_plus_upper"] = json_number(r.h_plus_upper);
    row["hlimit"] = json_number(r.hlimit);
    arr.push_back(std::move(row));
  }
  j["rows"] = std::move(arr);
  os << j.dump(2) << "\n";
}

inline void write_verify_json(std::ostream& os, const std::vector<OracleReport<double>>& reports,
                              const Provenance& prov) {
  nlohmann::ordered_json j = detail::json_header(prov);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json row;
    row["instance_id"] = r.instance_id;
    row["achieved_mse"] = json_number(r.achieved_mse);
    row["bound"] = json_number(r.bound);
    row["margin"] = json_number(r.margin);
    row["pass"] = r.pass;
    arr.push_back(std::move(row));
  }
  j["reports"] = std::move(arr);
  os << j.dump(2) << "\n";
}

inline void write_verify_csv(std::ostream& os, const std::vector<OracleReport<double>>& reports,
                             const Provenance& prov) {
  detail::csv_provenance(os, prov);
  os << "instance_id,achieved_mse,bound,margin,pass\n";
  for (const auto& r : reports) {
    os << r.instance_id << ',' << format_sig(r.achieved_mse) << ',' << format_sig(r.bound)
       << ',' << format_sig(r.margin) << ',' << (r.pass ? "true" : "false") << "\n";
  }
}

}  // namespace qbzzb::io
