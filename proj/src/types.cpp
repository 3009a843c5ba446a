#include "socdml/types.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "socdml/errors.hpp"

namespace socdml {

using nlohmann::json;

std::vector<double> ClimateRecord::values() const {
  return {air_temperature, soil_temperature, soil_moisture,
          wind_u,          wind_v,           evapotranspiration,
          leaf_area_index, runoff,           precipitation};
}

SegmentVocabulary::SegmentVocabulary(std::vector<SegmentEntry> entries) : entries_(std::move(entries)) {}

SegmentVocabulary SegmentVocabulary::from_counts(const std::unordered_map<std::string, long>& counts,
                                                 int k) {
  std::vector<SegmentEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [code, count] : counts) entries.push_back({code, count});
  std::sort(entries.begin(), entries.end(), [](const SegmentEntry& a, const SegmentEntry& b) {
    if (a.field_count != b.field_count) return a.field_count > b.field_count;
    return a.crop_code < b.crop_code;
  });
  if (k >= 0 && entries.size() > static_cast<std::size_t>(k)) entries.resize(k);
  return SegmentVocabulary(std::move(entries));
}

int SegmentVocabulary::index_of(const std::string& crop_code) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].crop_code == crop_code) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> SegmentVocabulary::codes() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.crop_code);
  return out;
}

ValidationResult validate_unit(const AnalysisUnit& unit) {
  ValidationResult result;
  if (unit.field_id.empty()) result.violations.push_back("empty field_id");
  if (unit.treatment != 0 && unit.treatment != 1) result.violations.push_back("treatment not binary");
  if (!std::isfinite(unit.outcome)) result.violations.push_back("non-finite outcome");

  double one_hot_sum = 0;
  bool binary = true;
  for (double v : unit.modifiers_x) {
    if (v != 0.0 && v != 1.0) binary = false;
    one_hot_sum += v;
  }
  if (unit.modifiers_x.empty()) result.violations.push_back("empty one-hot");
  if (!binary) result.violations.push_back("one-hot entry not in {0,1}");
  if (binary && !unit.modifiers_x.empty() && one_hot_sum != 1.0)
    result.violations.push_back("one-hot sum != 1");

  if (unit.controls_w.size() != static_cast<std::size_t>(ClimateRecord::kVariables))
    result.violations.push_back("controls_w length != 9");
  for (double v : unit.controls_w) {
    if (!std::isfinite(v)) {
      result.violations.push_back("non-finite control");
      break;
    }
  }
  return result;
}

static json unit_to_json(const AnalysisUnit& u) {
  json j{{"field_id", u.field_id}, {"treatment", u.treatment}, {"outcome", u.outcome},
         {"x", u.modifiers_x},     {"w", u.controls_w},        {"fold", u.fold}};
  if (u.geometry_ref)
    j["geometry_ref"] = *u.geometry_ref;
  else
    j["geometry_ref"] = nullptr;
  return j;
}

std::string units_to_json(const std::vector<AnalysisUnit>& units, const SegmentVocabulary& vocab) {
  json segments = json::array();
  for (const auto& e : vocab.entries())
    segments.push_back({{"crop_code", e.crop_code}, {"field_count", e.field_count}});
  json rows = json::array();
  for (const auto& u : units) rows.push_back(unit_to_json(u));
  return json{{"vocabulary", segments}, {"units", rows}}.dump(2);
}

std::pair<std::vector<AnalysisUnit>, SegmentVocabulary> units_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("units") || !j.contains("vocabulary"))
    throw Error(errc::malformed_row, "units file is not valid units JSON");
  std::vector<SegmentEntry> entries;
  for (const auto& e : j["vocabulary"])
    entries.push_back({e.at("crop_code").get<std::string>(), e.at("field_count").get<long>()});
  std::vector<AnalysisUnit> units;
  for (const auto& r : j["units"]) {
    AnalysisUnit u;
    u.field_id = r.at("field_id").get<std::string>();
    u.treatment = r.at("treatment").get<int>();
    u.outcome = r.at("outcome").get<double>();
    u.modifiers_x = r.at("x").get<std::vector<double>>();
    u.controls_w = r.at("w").get<std::vector<double>>();
    u.fold = r.at("fold").get<int>();
    if (r.contains("geometry_ref") && !r.at("geometry_ref").is_null())
      u.geometry_ref = r.at("geometry_ref").get<std::string>();
    units.push_back(std::move(u));
  }
  return {std::move(units), SegmentVocabulary(std::move(entries))};
}

const char* errc_name(errc code) {
  switch (code) {
    case errc::malformed_row: return "MalformedRow";
    case errc::duplicate_key: return "DuplicateKey";
    case errc::missing_column: return "MissingColumn";
    case errc::missing_climate_year: return "MissingClimateYear";
    case errc::empty_result: return "EmptyResult";
    case errc::empty_matrix: return "EmptyMatrix";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::unknown_crop: return "UnknownCrop";
    case errc::degenerate_input: return "DegenerateInput";
    case errc::single_class: return "SingleClass";
    case errc::singular_system: return "SingularSystem";
    case errc::too_few_units: return "TooFewUnits";
    case errc::no_variation: return "NoVariation";
    case errc::invalid_modifier: return "InvalidModifier";
    case errc::invalid_config: return "InvalidConfig";
    case errc::invalid_unit: return "InvalidUnit";
    case errc::invalid_geometry: return "InvalidGeometry";
    case errc::io_error: return "IoError";
    case errc::lock_held: return "LockHeld";
  }
  return "UnknownError";
}

}  // namespace socdml
