#pragma once

#include <map>
#include <string>
#include <vector>

#include "socdml/types.hpp"

namespace socdml {

/// Calendar years that define treatment: a field is treated iff it was
/// enrolled in every one of these years.
struct TreatmentWindow {
  std::vector<int> years{2020, 2021};

  /// Throws InvalidConfig unless non-empty and strictly increasing.
  void validate() const;
};

enum class TreatmentStatus {
  treated,
  control,
  excluded_missing_window_year,
};

/// Per-field accounting for one assemble() run. Exclusion counts plus final n
/// always equals the number of distinct field ids in the LPIS source.
struct AssemblyReport {
  long lpis_rows = 0;
  long climate_rows = 0;
  long soc_rows = 0;
  long lpis_fields = 0;

  long excluded_missing_window_year = 0;
  long excluded_crop_changed = 0;
  long excluded_crop_outside_top_k = 0;
  long excluded_missing_climate = 0;
  long excluded_missing_soc = 0;

  long final_n = 0;
  long n_treated = 0;
  long n_control = 0;

  struct SegmentCount {
    std::string crop_code;
    long n = 0;
    long n_treated = 0;
    long n_control = 0;
  };
  std::vector<SegmentCount> segments;

  long excluded_total() const {
    return excluded_missing_window_year + excluded_crop_changed + excluded_crop_outside_top_k +
           excluded_missing_climate + excluded_missing_soc;
  }
  bool conserves() const { return excluded_total() + final_n == lpis_fields; }

  std::string to_json() const;
  static AssemblyReport from_json(const std::string& text);
};

struct ParseOptions {
  /// Accept LPIS years outside [2017, 2021].
  bool allow_any_year = false;
};

// CSV loaders. Headers are exact; rows failing domain checks raise
// MalformedRow with the 1-based line number, duplicate keys raise
// DuplicateKey, absent mandatory columns raise MissingColumn.
std::vector<FieldYearRecord> parse_lpis(const std::string& path, const ParseOptions& opts = {});
std::vector<ClimateRecord> parse_climate(const std::string& path);
std::vector<SocRecord> parse_soc(const std::string& path);

/// Treated iff eco-enrolled in every window year; control iff present in
/// every window year with at least one non-enrolled year; excluded otherwise.
std::map<std::string, TreatmentStatus> derive_treatment(const std::vector<FieldYearRecord>& records,
                                                        const TreatmentWindow& window);

/// Arithmetic mean of each climate variable over the window years, per field.
/// Fields with a record for some but not all window years raise
/// MissingClimateYear; fields with no window-year record are omitted.
std::map<std::string, std::vector<double>> aggregate_climate(const std::vector<ClimateRecord>& records,
                                                             const TreatmentWindow& window);

struct AssembledData {
  std::vector<AnalysisUnit> units;  // sorted by field_id, controls unscaled
  SegmentVocabulary vocabulary;
  AssemblyReport report;
};

/// Joins the three sources into AnalysisUnits. A field is retained iff it has
/// a window treatment status, kept one crop across the window, that crop is in
/// the top-k vocabulary, and both climate and SOC joins succeed. Throws
/// EmptyResult when nothing survives.
AssembledData assemble(const std::vector<FieldYearRecord>& lpis,
                       const std::vector<ClimateRecord>& climate,
                       const std::vector<SocRecord>& soc,
                       const TreatmentWindow& window,
                       int k_segments = 3);

}  // namespace socdml
