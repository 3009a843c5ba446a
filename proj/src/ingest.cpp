#include "socdml/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"
#include "json.hpp"
#include "socdml/preprocess.hpp"

namespace socdml {

using nlohmann::json;

void TreatmentWindow::validate() const {
  if (years.empty()) throw Error(errc::invalid_config, "treatment window is empty");
  for (std::size_t i = 1; i < years.size(); ++i)
    if (years[i] <= years[i - 1])
      throw Error(errc::invalid_config, "treatment window years must be strictly increasing");
}

std::vector<FieldYearRecord> parse_lpis(const std::string& path, const ParseOptions& opts) {
  detail::CsvFile csv(path, {"field_id", "year", "crop_code", "eco", "geometry_ref"});
  std::vector<FieldYearRecord> out;
  std::set<std::pair<std::string, int>> seen;
  for (const auto& [line, f] : csv.rows()) {
    FieldYearRecord rec;
    rec.field_id = f[0];
    if (rec.field_id.empty()) throw Error(errc::malformed_row, "empty field_id", line);
    rec.year = detail::parse_int(f[1], "year", line);
    if (!opts.allow_any_year && (rec.year < kFirstPaperYear || rec.year > kLastPaperYear))
      throw Error(errc::malformed_row,
                  "year " + std::to_string(rec.year) + " outside [2017, 2021] (use --allow-any-year)",
                  line);
    rec.crop_code = f[2];
    if (rec.crop_code.empty()) throw Error(errc::malformed_row, "empty crop_code", line);
    if (f[3] == "0")
      rec.eco_enrolled = false;
    else if (f[3] == "1")
      rec.eco_enrolled = true;
    else
      throw Error(errc::malformed_row, "eco must be 0 or 1, got '" + f[3] + "'", line);
    if (!f[4].empty()) rec.geometry_ref = f[4];
    if (!seen.insert({rec.field_id, rec.year}).second)
      throw Error(errc::duplicate_key,
                  "duplicate (field_id, year) = (" + rec.field_id + ", " + std::to_string(rec.year) + ")");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ClimateRecord> parse_climate(const std::string& path) {
  detail::CsvFile csv(path, {"field_id", "year", "air_temp", "soil_temp", "soil_moisture", "wind_u",
                             "wind_v", "evapotranspiration", "lai", "runoff", "precipitation"});
  std::vector<ClimateRecord> out;
  std::set<std::pair<std::string, int>> seen;
  for (const auto& [line, f] : csv.rows()) {
    ClimateRecord rec;
    rec.field_id = f[0];
    if (rec.field_id.empty()) throw Error(errc::malformed_row, "empty field_id", line);
    rec.year = detail::parse_int(f[1], "year", line);
    rec.air_temperature = detail::parse_double(f[2], "air_temp", line);
    rec.soil_temperature = detail::parse_double(f[3], "soil_temp", line);
    rec.soil_moisture = detail::parse_double(f[4], "soil_moisture", line);
    rec.wind_u = detail::parse_double(f[5], "wind_u", line);
    rec.wind_v = detail::parse_double(f[6], "wind_v", line);
    rec.evapotranspiration = detail::parse_double(f[7], "evapotranspiration", line);
    rec.leaf_area_index = detail::parse_double(f[8], "lai", line);
    rec.runoff = detail::parse_double(f[9], "runoff", line);
    rec.precipitation = detail::parse_double(f[10], "precipitation", line);
    for (double v : rec.values())
      if (!std::isfinite(v)) throw Error(errc::malformed_row, "non-finite climate value", line);
    if (rec.soil_moisture < 0.0 || rec.soil_moisture > 1.0)
      throw Error(errc::malformed_row, "soil_moisture outside [0, 1]", line);
    if (rec.leaf_area_index < 0.0) throw Error(errc::malformed_row, "negative lai", line);
    if (rec.precipitation < 0.0) throw Error(errc::malformed_row, "negative precipitation", line);
    if (!seen.insert({rec.field_id, rec.year}).second)
      throw Error(errc::duplicate_key,
                  "duplicate (field_id, year) = (" + rec.field_id + ", " + std::to_string(rec.year) + ")");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SocRecord> parse_soc(const std::string& path) {
  detail::CsvFile csv(path, {"field_id", "soc_pct"});
  std::vector<SocRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& [line, f] : csv.rows()) {
    SocRecord rec;
    rec.field_id = f[0];
    if (rec.field_id.empty()) throw Error(errc::malformed_row, "empty field_id", line);
    rec.soc_pct = detail::parse_double(f[1], "soc_pct", line);
    if (!std::isfinite(rec.soc_pct) || rec.soc_pct < 0.0 || rec.soc_pct > 100.0)
      throw Error(errc::malformed_row, "soc_pct outside [0, 100]", line);
    if (!seen.insert(rec.field_id).second)
      throw Error(errc::duplicate_key, "duplicate field_id " + rec.field_id);
    out.push_back(std::move(rec));
  }
  return out;
}

std::map<std::string, TreatmentStatus> derive_treatment(const std::vector<FieldYearRecord>& records,
                                                        const TreatmentWindow& window) {
  window.validate();
  // field -> (window years present, window years enrolled)
  std::map<std::string, std::pair<int, int>> tally;
  const std::set<int> window_years(window.years.begin(), window.years.end());
  for (const auto& rec : records) {
    auto& t = tally[rec.field_id];  // ensure every LPIS field gets a status
    if (window_years.count(rec.year)) {
      t.first += 1;
      if (rec.eco_enrolled) t.second += 1;
    }
  }
  std::map<std::string, TreatmentStatus> out;
  const int needed = static_cast<int>(window.years.size());
  for (const auto& [field, t] : tally) {
    if (t.first < needed)
      out[field] = TreatmentStatus::excluded_missing_window_year;
    else if (t.second == needed)
      out[field] = TreatmentStatus::treated;
    else
      out[field] = TreatmentStatus::control;
  }
  return out;
}

std::map<std::string, std::vector<double>> aggregate_climate(const std::vector<ClimateRecord>& records,
                                                             const TreatmentWindow& window) {
  window.validate();
  const std::set<int> window_years(window.years.begin(), window.years.end());
  std::map<std::string, std::pair<std::vector<double>, std::set<int>>> sums;
  for (const auto& rec : records) {
    if (!window_years.count(rec.year)) continue;
    auto& [sum, years] = sums[rec.field_id];
    if (sum.empty()) sum.assign(ClimateRecord::kVariables, 0.0);
    const auto values = rec.values();
    for (int j = 0; j < ClimateRecord::kVariables; ++j) sum[static_cast<std::size_t>(j)] += values[static_cast<std::size_t>(j)];
    years.insert(rec.year);
  }
  std::map<std::string, std::vector<double>> out;
  for (auto& [field, entry] : sums) {
    auto& [sum, years] = entry;
    if (years.size() != window_years.size()) {
      for (int y : window.years)
        if (!years.count(y))
          throw Error(errc::missing_climate_year,
                      "field " + field + " has no climate record for " + std::to_string(y));
    }
    for (double& v : sum) v /= static_cast<double>(window.years.size());
    out[field] = std::move(sum);
  }
  return out;
}

AssembledData assemble(const std::vector<FieldYearRecord>& lpis,
                       const std::vector<ClimateRecord>& climate,
                       const std::vector<SocRecord>& soc,
                       const TreatmentWindow& window,
                       int k_segments) {
  window.validate();
  if (k_segments < 1) throw Error(errc::invalid_config, "k_segments must be >= 1");

  AssembledData out;
  AssemblyReport& report = out.report;
  report.lpis_rows = static_cast<long>(lpis.size());
  report.climate_rows = static_cast<long>(climate.size());
  report.soc_rows = static_cast<long>(soc.size());

  std::set<int> lpis_years;
  for (const auto& rec : lpis) lpis_years.insert(rec.year);
  for (int y : window.years)
    if (!lpis_years.count(y))
      throw Error(errc::invalid_config,
                  "window year " + std::to_string(y) + " absent from the LPIS source");

  // (field, window year) -> record, for crop stability and geometry lookup.
  const std::set<int> window_years(window.years.begin(), window.years.end());
  std::map<std::string, std::map<int, const FieldYearRecord*>> by_field;
  for (const auto& rec : lpis)
    if (window_years.count(rec.year)) by_field[rec.field_id][rec.year] = &rec;

  const auto status = derive_treatment(lpis, window);
  report.lpis_fields = static_cast<long>(status.size());

  // Step b: crop must be identical across all window years.
  std::map<std::string, std::string> stable_crop;  // survivors of steps a+b
  for (const auto& [field, st] : status) {
    if (st == TreatmentStatus::excluded_missing_window_year) {
      ++report.excluded_missing_window_year;
      continue;
    }
    const auto& years = by_field[field];
    const std::string& first_crop = years.begin()->second->crop_code;
    bool changed = false;
    for (const auto& [year, rec] : years)
      if (rec->crop_code != first_crop) changed = true;
    if (changed) {
      ++report.excluded_crop_changed;
      continue;
    }
    stable_crop[field] = first_crop;
  }

  // Step c: top-k vocabulary over step-b survivors.
  std::unordered_map<std::string, long> crop_counts;
  for (const auto& [field, crop] : stable_crop) ++crop_counts[crop];
  out.vocabulary = SegmentVocabulary::from_counts(crop_counts, k_segments);

  // Step d preparation: aggregate climate for fields with full window coverage.
  std::map<std::string, std::set<int>> climate_years;
  std::vector<ClimateRecord> complete_climate;
  for (const auto& rec : climate)
    if (window_years.count(rec.year)) climate_years[rec.field_id].insert(rec.year);
  for (const auto& rec : climate)
    if (climate_years[rec.field_id].size() == window_years.size()) complete_climate.push_back(rec);
  const auto climate_means = aggregate_climate(complete_climate, window);

  std::map<std::string, double> soc_by_field;
  for (const auto& rec : soc) soc_by_field[rec.field_id] = rec.soc_pct;

  std::map<std::string, AssemblyReport::SegmentCount> segment_counts;
  for (const auto& e : out.vocabulary.entries()) segment_counts[e.crop_code].crop_code = e.crop_code;

  for (const auto& [field, crop] : stable_crop) {
    if (out.vocabulary.index_of(crop) < 0) {
      ++report.excluded_crop_outside_top_k;
      continue;
    }
    const auto climate_it = climate_means.find(field);
    if (climate_it == climate_means.end()) {
      ++report.excluded_missing_climate;
      continue;
    }
    const auto soc_it = soc_by_field.find(field);
    if (soc_it == soc_by_field.end()) {
      ++report.excluded_missing_soc;
      continue;
    }

    AnalysisUnit unit;
    unit.field_id = field;
    unit.treatment = status.at(field) == TreatmentStatus::treated ? 1 : 0;
    unit.outcome = soc_it->second;
    unit.modifiers_x = one_hot(crop, out.vocabulary);
    unit.controls_w = climate_it->second;
    for (const auto& [year, rec] : by_field[field]) {
      if (rec->geometry_ref) {
        unit.geometry_ref = rec->geometry_ref;
        break;
      }
    }
    auto& seg = segment_counts[crop];
    ++seg.n;
    ++(unit.treatment ? seg.n_treated : seg.n_control);
    ++report.final_n;
    ++(unit.treatment ? report.n_treated : report.n_control);
    out.units.push_back(std::move(unit));
  }

  if (out.units.empty()) throw Error(errc::empty_result, "no analysis units survived assembly");
  std::sort(out.units.begin(), out.units.end(),
            [](const AnalysisUnit& a, const AnalysisUnit& b) { return a.field_id < b.field_id; });
  for (const auto& e : out.vocabulary.entries()) report.segments.push_back(segment_counts[e.crop_code]);
  return out;
}

std::string AssemblyReport::to_json() const {
  json segs = json::array();
  for (const auto& s : segments)
    segs.push_back({{"crop_code", s.crop_code},
                    {"n", s.n},
                    {"n_treated", s.n_treated},
                    {"n_control", s.n_control}});
  json j{{"read",
          {{"lpis_rows", lpis_rows},
           {"climate_rows", climate_rows},
           {"soc_rows", soc_rows},
           {"lpis_fields", lpis_fields}}},
         {"excluded",
          {{"missing_window_year", excluded_missing_window_year},
           {"crop_changed", excluded_crop_changed},
           {"crop_outside_top_k", excluded_crop_outside_top_k},
           {"missing_climate", excluded_missing_climate},
           {"missing_soc", excluded_missing_soc}}},
         {"final_n", final_n},
         {"n_treated", n_treated},
         {"n_control", n_control},
         {"segments", segs}};
  return j.dump(2);
}

AssemblyReport AssemblyReport::from_json(const std::string& text) {
  json j = json::parse(text);
  AssemblyReport r;
  r.lpis_rows = j.at("read").at("lpis_rows").get<long>();
  r.climate_rows = j.at("read").at("climate_rows").get<long>();
  r.soc_rows = j.at("read").at("soc_rows").get<long>();
  r.lpis_fields = j.at("read").at("lpis_fields").get<long>();
  r.excluded_missing_window_year = j.at("excluded").at("missing_window_year").get<long>();
  r.excluded_crop_changed = j.at("excluded").at("crop_changed").get<long>();
  r.excluded_crop_outside_top_k = j.at("excluded").at("crop_outside_top_k").get<long>();
  r.excluded_missing_climate = j.at("excluded").at("missing_climate").get<long>();
  r.excluded_missing_soc = j.at("excluded").at("missing_soc").get<long>();
  r.final_n = j.at("final_n").get<long>();
  r.n_treated = j.at("n_treated").get<long>();
  r.n_control = j.at("n_control").get<long>();
  for (const auto& s : j.at("segments"))
    r.segments.push_back({s.at("crop_code").get<std::string>(), s.at("n").get<long>(),
                          s.at("n_treated").get<long>(), s.at("n_control").get<long>()});
  return r;
}

}  // namespace socdml
