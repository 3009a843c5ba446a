#pragma once

#include <stdexcept>
#include <string>

namespace socdml {

/// Every failure the pipeline can raise, by identity. Tests match on these.
enum class errc {
  malformed_row,
  duplicate_key,
  missing_column,
  missing_climate_year,
  empty_result,
  empty_matrix,
  dimension_mismatch,
  unknown_crop,
  degenerate_input,
  single_class,
  singular_system,
  too_few_units,
  no_variation,
  invalid_modifier,
  invalid_config,
  invalid_unit,
  invalid_geometry,
  io_error,
  lock_held,
};

/// Coarse category used for CLI exit codes: data = 1, estimation = 2, io = 3.
enum class error_category { data, estimation, io };

constexpr error_category category_of(errc code) {
  switch (code) {
    case errc::single_class:
    case errc::no_variation:
    case errc::too_few_units:
    case errc::degenerate_input:
    case errc::singular_system:
      return error_category::estimation;
    case errc::io_error:
    case errc::lock_held:
      return error_category::io;
    default:
      return error_category::data;
  }
}

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, std::string message, long line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + message
                                     : std::move(message)),
        code_(code),
        line_(line) {}

  errc code() const { return code_; }
  error_category category() const { return category_of(code_); }
  /// 1-based source line for row-level parse errors, -1 otherwise.
  long line() const { return line_; }

 private:
  errc code_;
  long line_;
};

}  // namespace socdml
