#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace marketfc::forecast {

struct ArimaOrder {
    std::size_t p = 0;
    std::size_t d = 0;
    std::size_t q = 0;

    [[nodiscard]] std::vector<std::string> violations() const;
    [[nodiscard]] std::string to_string() const;
    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

/// ARIMA(p,d,q) in intercept form on the d-times differenced series y:
///   y_t = intercept + sum_i ar[i] y_{t-1-i} + sum_j ma[j] e_{t-1-j} + e_t
struct ArimaModel {
    ArimaOrder order;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double intercept = 0.0;
    /// Conditional residuals on the differenced fit history.
    std::vector<double> residuals;
    double sse = 0.0;
    std::size_t n_obs = 0;  // residuals entering sse
    std::size_t shrink_count = 0;
    bool ridge_fallback = false;
    bool root_rescaled = false;  // shrinking did not suffice; roots were scaled to radius 1/0.99
    bool fitted = false;

    /// N ln(SSE/N) + 2 (p + q + 1).
    [[nodiscard]] double aic() const;
};

std::vector<double> difference(std::span<const double> series, std::size_t d);

/// Hannan-Rissanen estimation: long-AR innovations, then a least-squares
/// regression on own lags and innovation lags. Non-stationary AR (or
/// non-invertible MA) polynomials are shrunk by 0.99 up to 100 times, then
/// rescaled so the companion spectral radius is 0.99 if still outside.
ArimaModel arima_fit(std::span<const double> history, const ArimaOrder& order);

/// Recursive forecast with future innovations at zero, integrated back d times.
std::vector<double> arima_forecast(const ArimaModel& model, std::span<const double> history, std::size_t horizon);

/// AIC-minimizing order; the first grid entry wins ties. AIC is evaluated on
/// the time points covered by every order that fits.
ArimaOrder arima_select_order(std::span<const double> history, std::span<const ArimaOrder> grid);

/// Order minimizing the AIC summed over several histories (one per training
/// series), each scored on its common sample. Orders that fail on any history
/// are skipped.
ArimaOrder arima_select_order(const std::vector<std::vector<double>>& histories, std::span<const ArimaOrder> grid);

/// All (p, d, q) with p, q in [0, max_p|max_q] and d in [0, max_d], excluding (0,0,0).
std::vector<ArimaOrder> order_grid(std::size_t max_p = 3, std::size_t max_d = 2, std::size_t max_q = 3);

/// True when every root of 1 - c_1 z - ... - c_k z^k lies outside the unit circle.
bool is_stationary(std::span<const double> ar_coeffs);

}  // namespace marketfc::forecast
