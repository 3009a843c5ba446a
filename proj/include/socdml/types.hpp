#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace socdml {

/// One farmer declaration row from the LPIS export.
struct FieldYearRecord {
  std::string field_id;
  int year = 0;
  std::string crop_code;
  bool eco_enrolled = false;
  std::optional<std::string> geometry_ref;
};

/// Per-field, per-year climate covariates. Exactly nine variables.
struct ClimateRecord {
  std::string field_id;
  int year = 0;
  double air_temperature = 0;    // K
  double soil_temperature = 0;   // K
  double soil_moisture = 0;      // m3/m3, in [0, 1]
  double wind_u = 0;             // m/s eastward
  double wind_v = 0;             // m/s northward
  double evapotranspiration = 0; // m water-equivalent
  double leaf_area_index = 0;    // m2/m2, >= 0
  double runoff = 0;             // m
  double precipitation = 0;      // m, >= 0

  static constexpr int kVariables = 9;
  std::vector<double> values() const;
};

/// Single soil organic carbon value per field, percent of topsoil mass (0-10 cm).
struct SocRecord {
  std::string field_id;
  double soc_pct = 0;
};

constexpr int kFirstPaperYear = 2017;
constexpr int kLastPaperYear = 2021;

/// One field ready for estimation: T, Y, crop one-hot X, climate controls W.
struct AnalysisUnit {
  std::string field_id;
  int treatment = 0;                // binary {0,1}
  double outcome = 0;               // SOC percent
  std::vector<double> modifiers_x;  // crop one-hot, ordering fixed by the vocabulary
  std::vector<double> controls_w;   // 9 climate aggregates
  int fold = -1;                    // -1 = unassigned
  std::optional<std::string> geometry_ref;  // pass-through key, never parsed
};

struct SegmentEntry {
  std::string crop_code;
  long field_count = 0;
};

/// Top-K crops ordered by field count descending, ties broken by crop code
/// ascending. The ordering fixes the meaning of every one-hot in the dataset.
class SegmentVocabulary {
 public:
  SegmentVocabulary() = default;
  explicit SegmentVocabulary(std::vector<SegmentEntry> entries);

  /// Builds the vocabulary from per-crop field counts, keeping the top k.
  static SegmentVocabulary from_counts(const std::unordered_map<std::string, long>& counts, int k);

  const std::vector<SegmentEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  /// Position of a crop in the vocabulary, or -1 if absent.
  int index_of(const std::string& crop_code) const;
  std::vector<std::string> codes() const;

 private:
  std::vector<SegmentEntry> entries_;
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every AnalysisUnit invariant and reports all violations, not just
/// the first. Violations are data, not failures: this never throws.
ValidationResult validate_unit(const AnalysisUnit& unit);

// JSON serialization of assembled units (the `units.json` artifact).
// Any unit accepted by validate_unit round-trips losslessly.
std::string units_to_json(const std::vector<AnalysisUnit>& units, const SegmentVocabulary& vocab);
std::pair<std::vector<AnalysisUnit>, SegmentVocabulary> units_from_json(const std::string& text);

}  // namespace socdml
