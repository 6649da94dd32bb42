#include "marketfc/error.hpp"

namespace marketfc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::index_out_of_range: return "index-out-of-range";
        case ErrorCode::domain: return "domain-error";
        case ErrorCode::degenerate_membership: return "degenerate-membership";
        case ErrorCode::overflow: return "overflow";
        case ErrorCode::file_not_found: return "file-not-found";
        case ErrorCode::missing_column: return "missing-column";
        case ErrorCode::empty_after_cleaning: return "empty-after-cleaning";
        case ErrorCode::out_of_bounds: return "out-of-bounds";
        case ErrorCode::series_too_short: return "series-too-short";
        case ErrorCode::insufficient_history: return "insufficient-history";
        case ErrorCode::unfitted_model: return "unfitted-model";
        case ErrorCode::all_fits_failed: return "all-fits-failed";
        case ErrorCode::shape_mismatch: return "shape-mismatch";
        case ErrorCode::empty_dataset: return "empty-dataset";
        case ErrorCode::gradient_explosion: return "gradient-explosion";
        case ErrorCode::length_mismatch: return "length-mismatch";
        case ErrorCode::empty_input: return "empty-input";
        case ErrorCode::zero_actual: return "zero-actual";
        case ErrorCode::horizon_mismatch: return "horizon-mismatch";
        case ErrorCode::invalid_config: return "invalid-config";
        case ErrorCode::io: return "io-error";
    }
    return "unknown";
}

}  // namespace marketfc
