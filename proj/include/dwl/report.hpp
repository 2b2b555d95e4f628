#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace dwl {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// How `observed` is compared with `tolerance`.
enum class Compare {
  AtMost,       // observed <= tolerance
  AtLeast,      // observed >= tolerance
  Above,        // observed > tolerance
  Below,        // observed < tolerance
  Within,       // |observed - reference| <= tolerance
  RelWithin,    // |observed - reference| <= tolerance * |reference|
  InRange,      // lo <= observed <= hi, lo = reference, hi = tolerance
};

inline std::string to_string(Compare c) {
  switch (c) {
    case Compare::AtMost: return "<=";
    case Compare::AtLeast: return ">=";
    case Compare::Above: return ">";
    case Compare::Below: return "<";
    case Compare::Within: return "abs-within";
    case Compare::RelWithin: return "rel-within";
    case Compare::InRange: return "in-range";
  }
  return "?";
}

inline bool evaluate(Compare c, double observed, double reference, double tolerance) {
  if (std::isnan(observed)) return false;
  switch (c) {
    case Compare::AtMost: return observed <= tolerance;
    case Compare::AtLeast: return observed >= tolerance;
    case Compare::Above: return observed > tolerance;
    case Compare::Below: return observed < tolerance;
    case Compare::Within: return std::abs(observed - reference) <= tolerance;
    case Compare::RelWithin: return std::abs(observed - reference) <= tolerance * std::abs(reference);
    case Compare::InRange: return observed >= reference && observed <= tolerance;
  }
  return false;
}

/// JSON cannot hold NaN or infinities; they are written as strings.
inline json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct Record {
  std::string test;
  json params = json::object();
  double observed = 0.0;
  std::optional<double> reference;
  double tolerance = 0.0;
  Compare compare = Compare::AtMost;
  bool pass = false;
  json detail = json::object();
  json provenance = json::object();

  json to_json() const {
    json j;
    j["test"] = test;
    j["params"] = params;
    j["observed"] = number(observed);
    j["reference"] = reference ? number(*reference) : json(nullptr);
    j["tolerance"] = number(tolerance);
    j["compare"] = to_string(compare);
    j["pass"] = pass;
    if (!detail.empty()) j["detail"] = detail;
    j["provenance"] = provenance;
    return j;
  }
};

/// Builds a record and evaluates it.
inline Record make_record(std::string test, json params, double observed, std::optional<double> reference,
                          double tolerance, Compare compare, json provenance = json::object()) {
  Record r;
  r.test = std::move(test);
  r.params = std::move(params);
  r.observed = observed;
  r.reference = reference;
  r.tolerance = tolerance;
  r.compare = compare;
  r.pass = evaluate(compare, observed, reference.value_or(0.0), tolerance);
  r.provenance = std::move(provenance);
  return r;
}

struct StatsReport {
  std::vector<Record> records;
  json metadata = json::object();  // timestamps, host details; excluded from the payload

  void add(Record r) { records.push_back(std::move(r)); }
  void add(const std::vector<Record>& rs) { records.insert(records.end(), rs.begin(), rs.end()); }

  bool all_pass() const {
    return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.pass; });
  }

  /// The deterministic part of the report.
  json payload() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["records"] = json::array();
    for (const auto& r : records) j["records"].push_back(r.to_json());
    j["all_pass"] = all_pass();
    return j;
  }

  json to_json() const {
    json j = payload();
    j["metadata"] = metadata;
    return j;
  }
};

}  // namespace dwl
