#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace marketfc {

enum class ErrorCode {
    invalid_argument,
    index_out_of_range,
    domain,
    degenerate_membership,
    overflow,
    file_not_found,
    missing_column,
    empty_after_cleaning,
    out_of_bounds,
    series_too_short,
    insufficient_history,
    unfitted_model,
    all_fits_failed,
    shape_mismatch,
    empty_dataset,
    gradient_explosion,
    length_mismatch,
    empty_input,
    zero_actual,
    horizon_mismatch,
    invalid_config,
    io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` lets callers (and the CLI
/// exit-status mapping) branch on the failure category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace marketfc
