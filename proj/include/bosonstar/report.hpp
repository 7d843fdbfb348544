#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"
#include "bosonstar/snapshot.hpp"

namespace bosonstar {

/// Short %g rendering for messages.
inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// One quantitative check: a measured value compared with a prediction.
struct FitReport {
  std::string name;
  std::string quantity;   // what `fitted` measures (slope, ratio, drift, ...)
  double fitted = std::numeric_limits<double>::quiet_NaN();
  double constant = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double window_lo = std::numeric_limits<double>::quiet_NaN();
  double window_hi = std::numeric_limits<double>::quiet_NaN();
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string comparison;  // "abs", "rel", "at_most", "at_least", "holds"
  std::string reference;   // the claim being checked, in words
  std::vector<std::pair<std::string, double>> candidates;
  std::string note;
  bool pass = false;

  FitReport& window(double lo, double hi) {
    window_lo = lo;
    window_hi = hi;
    return *this;
  }
};

/// |fitted - predicted| <= tol
inline FitReport check_abs(std::string name, std::string quantity, double fitted, double predicted, double tol,
                           std::string reference) {
  FitReport r;
  r.name = std::move(name);
  r.quantity = std::move(quantity);
  r.fitted = fitted;
  r.predicted = predicted;
  r.tolerance = tol;
  r.comparison = "abs";
  r.reference = std::move(reference);
  r.pass = std::isfinite(fitted) && std::abs(fitted - predicted) <= tol;
  return r;
}

/// |fitted - predicted| <= tol |predicted|
inline FitReport check_rel(std::string name, std::string quantity, double fitted, double predicted, double tol,
                           std::string reference) {
  auto r = check_abs(std::move(name), std::move(quantity), fitted, predicted, tol * std::abs(predicted),
                     std::move(reference));
  r.tolerance = tol;
  r.comparison = "rel";
  return r;
}

/// fitted <= limit
inline FitReport check_at_most(std::string name, std::string quantity, double fitted, double limit,
                               std::string reference) {
  FitReport r;
  r.name = std::move(name);
  r.quantity = std::move(quantity);
  r.fitted = fitted;
  r.predicted = limit;
  r.comparison = "at_most";
  r.reference = std::move(reference);
  r.pass = std::isfinite(fitted) && fitted <= limit;
  return r;
}

/// fitted >= limit
inline FitReport check_at_least(std::string name, std::string quantity, double fitted, double limit,
                                std::string reference) {
  auto r = check_at_most(std::move(name), std::move(quantity), -fitted, -limit, std::move(reference));
  r.fitted = fitted;
  r.predicted = limit;
  r.comparison = "at_least";
  r.pass = std::isfinite(fitted) && fitted >= limit;
  return r;
}

/// Boolean property; `fitted` carries a supporting number.
inline FitReport check_holds(std::string name, std::string quantity, bool ok, double value, std::string reference) {
  FitReport r;
  r.name = std::move(name);
  r.quantity = std::move(quantity);
  r.fitted = value;
  r.comparison = "holds";
  r.reference = std::move(reference);
  r.pass = ok;
  return r;
}

inline nlohmann::json to_json_value(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

inline void to_json(nlohmann::json& j, const FitReport& r) {
  j = {{"name", r.name},
       {"quantity", r.quantity},
       {"fitted", to_json_value(r.fitted)},
       {"constant", to_json_value(r.constant)},
       {"residual", to_json_value(r.residual)},
       {"window", {to_json_value(r.window_lo), to_json_value(r.window_hi)}},
       {"predicted", to_json_value(r.predicted)},
       {"tolerance", to_json_value(r.tolerance)},
       {"comparison", r.comparison},
       {"reference", r.reference},
       {"pass", r.pass}};
  if (!r.candidates.empty()) {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [k, v] : r.candidates) c[k] = to_json_value(v);
    j["candidates"] = c;
  }
  if (!r.note.empty()) j["note"] = r.note;
}

inline void from_json(const nlohmann::json& j, FitReport& r) {
  auto num = [&j](const char* k) {
    return j.contains(k) && j.at(k).is_number() ? j.at(k).get<double>() : std::numeric_limits<double>::quiet_NaN();
  };
  r.name = j.value("name", "");
  r.quantity = j.value("quantity", "");
  r.fitted = num("fitted");
  r.constant = num("constant");
  r.residual = num("residual");
  r.predicted = num("predicted");
  r.tolerance = num("tolerance");
  if (j.contains("window") && j["window"].size() == 2) {
    r.window_lo = j["window"][0].is_number() ? j["window"][0].get<double>() : std::numeric_limits<double>::quiet_NaN();
    r.window_hi = j["window"][1].is_number() ? j["window"][1].get<double>() : std::numeric_limits<double>::quiet_NaN();
  }
  r.comparison = j.value("comparison", "");
  r.reference = j.value("reference", "");
  r.note = j.value("note", "");
  r.pass = j.value("pass", false);
  if (j.contains("candidates"))
    for (auto it = j["candidates"].begin(); it != j["candidates"].end(); ++it)
      r.candidates.emplace_back(it.key(), it->is_number() ? it->get<double>() : std::numeric_limits<double>::quiet_NaN());
}

/// Plot-ready table.
struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) throw InvalidArgument("curve row width does not match columns");
    rows.push_back(std::move(row));
  }
  std::vector<double> column(const std::string& c) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k] == c) {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
      }
    throw InvalidArgument("curve has no column \"" + c + "\"");
  }
};

inline void write_csv(std::ostream& os, const Curve& c) {
  for (std::size_t k = 0; k < c.columns.size(); ++k) os << (k ? "," : "") << c.columns[k];
  os << '\n';
  os.precision(17);
  for (const auto& r : c.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << '\n';
  }
}

struct ExperimentResult {
  std::string experiment;
  std::vector<FitReport> reports;
  std::vector<Curve> curves;
  std::vector<std::pair<std::string, SpectralField>> snapshots;
  nlohmann::json info = nlohmann::json::object();

  bool passed() const {
    for (const auto& r : reports)
      if (!r.pass) return false;
    return !reports.empty();
  }
  const FitReport& report(const std::string& name) const {
    for (const auto& r : reports)
      if (r.name == name) return r;
    throw InvalidArgument("no report named \"" + name + "\"");
  }
};

inline nlohmann::json summary_json(const ExperimentResult& res) {
  return {{"experiment", res.experiment}, {"pass", res.passed()}, {"reports", res.reports}, {"info", res.info}};
}

/// Writes report.json, one CSV per curve and one BSSF file per snapshot into dir.
inline void write_outputs(const ExperimentResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << summary_json(res).dump(2) << '\n';
  }
  for (const auto& c : res.curves) {
    std::ofstream out(dir / (c.name + ".csv"));
    write_csv(out, c);
  }
  for (const auto& [name, field] : res.snapshots) save_snapshot((dir / (name + ".bssf")).string(), field);
}

}  // namespace bosonstar
