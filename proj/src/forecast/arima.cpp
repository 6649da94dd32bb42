#include "marketfc/forecast/arima.hpp"

#include "marketfc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace marketfc::forecast {

namespace {

constexpr double kRidgePenalty = 1e-6;
constexpr double kShrinkFactor = 0.99;
constexpr std::size_t kMaxShrinks = 100;
constexpr double kRootRadius = 0.99;

struct LeastSquares {
    Eigen::VectorXd beta;
    bool ridge = false;
};

LeastSquares solve_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() == x.cols()) {
        LeastSquares out{qr.solve(y), false};
        if (out.beta.allFinite()) return out;
    }
    const Eigen::MatrixXd gram =
        x.transpose() * x + kRidgePenalty * Eigen::MatrixXd::Identity(x.cols(), x.cols());
    return LeastSquares{gram.ldlt().solve(x.transpose() * y), true};
}

// Largest eigenvalue modulus of the companion matrix of z^k - c_1 z^{k-1} - ... - c_k.
double companion_radius(std::span<const double> coeffs) {
    const auto k = static_cast<Eigen::Index>(coeffs.size());
    if (k == 0) return 0.0;
    if (k == 1) return std::abs(coeffs[0]);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) companion(0, i) = coeffs[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// c_i <- c_i * lambda^i divides every root of the lag polynomial by lambda.
void scale_roots(std::vector<double>& coeffs, double lambda) {
    double factor = 1.0;
    for (double& c : coeffs) c *= (factor *= lambda);
}

bool is_invertible(std::span<const double> ma_coeffs) {
    std::vector<double> negated(ma_coeffs.size());
    std::transform(ma_coeffs.begin(), ma_coeffs.end(), negated.begin(), [](double v) { return -v; });
    return is_stationary(negated);
}

// Conditional residuals: innovations before max(p, q) are taken as zero.
std::vector<double> conditional_residuals(std::span<const double> y, const ArimaModel& model) {
    const std::size_t p = model.order.p;
    const std::size_t q = model.order.q;
    const std::size_t start = std::max(p, q);
    std::vector<double> e(y.size(), 0.0);
    for (std::size_t t = start; t < y.size(); ++t) {
        double fit = model.intercept;
        for (std::size_t i = 0; i < p; ++i) fit += model.ar_coeffs[i] * y[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) fit += model.ma_coeffs[j] * e[t - 1 - j];
        e[t] = y[t] - fit;
    }
    return e;
}

std::size_t long_ar_order(std::size_t n, const ArimaOrder& order) {
    const auto by_length = static_cast<std::size_t>(std::ceil(10.0 * std::log10(static_cast<double>(n))));
    const std::size_t lower = order.p + order.q + 1;
    const std::size_t upper = std::max<std::size_t>(1, (n - 1) / 3);
    return std::min(std::max(by_length, lower), upper);
}

}  // namespace

std::vector<std::string> ArimaOrder::violations() const {
    std::vector<std::string> out;
    if (p + q == 0 && d == 0) out.emplace_back("ARIMA order needs p + q >= 1 or d >= 1");
    if (p > 5 || q > 5) out.emplace_back("ARIMA p and q must be <= 5");
    if (d > 2) out.emplace_back("ARIMA d must be <= 2");
    return out;
}

std::string ArimaOrder::to_string() const {
    return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
}

double ArimaModel::aic() const {
    if (n_obs == 0) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(n_obs);
    // Perfect fits would give ln(0); floor the variance at a tiny positive value.
    const double variance = std::max(sse / n, 1e-300);
    return n * std::log(variance) + 2.0 * static_cast<double>(order.p + order.q + 1);
}

std::vector<double> difference(std::span<const double> series, std::size_t d) {
    if (series.size() <= d) {
        throw Error(ErrorCode::series_too_short, "series must be longer than the differencing order");
    }
    std::vector<double> out(series.begin(), series.end());
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
        out.pop_back();
    }
    return out;
}

bool is_stationary(std::span<const double> ar_coeffs) {
    return companion_radius(ar_coeffs) < 1.0;
}

ArimaModel arima_fit(std::span<const double> history, const ArimaOrder& order) {
    if (const auto problems = order.violations(); !problems.empty()) {
        throw Error(ErrorCode::invalid_argument, problems.front());
    }
    const std::size_t p = order.p;
    const std::size_t q = order.q;
    const std::size_t needed = 10 * (p + q + 1) + order.d;
    if (history.size() < needed) {
        throw Error(ErrorCode::insufficient_history, "ARIMA" + order.to_string() + " needs " +
                                                          std::to_string(needed) + " observations, got " +
                                                          std::to_string(history.size()));
    }
    const std::vector<double> y = difference(history, order.d);
    const std::size_t n = y.size();

    ArimaModel model;
    model.order = order;

    // Stage 1: innovations proxy from a long autoregression.
    std::vector<double> innovations;
    std::size_t start = p;
    if (q > 0) {
        const std::size_t m = long_ar_order(n, order);
        const auto rows = static_cast<Eigen::Index>(n - m);
        Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(m + 1));
        Eigen::VectorXd target(rows);
        for (std::size_t t = m; t < n; ++t) {
            const auto r = static_cast<Eigen::Index>(t - m);
            x(r, 0) = 1.0;
            for (std::size_t i = 0; i < m; ++i) x(r, static_cast<Eigen::Index>(i + 1)) = y[t - 1 - i];
            target(r) = y[t];
        }
        const LeastSquares long_ar = solve_least_squares(x, target);
        model.ridge_fallback = long_ar.ridge;
        const Eigen::VectorXd resid = target - x * long_ar.beta;
        innovations.assign(n, 0.0);
        for (std::size_t t = m; t < n; ++t) innovations[t] = resid(static_cast<Eigen::Index>(t - m));
        start = std::max(p, m + q);
    }

    // Stage 2: regress on own lags and innovation lags.
    const auto rows = static_cast<Eigen::Index>(n - start);
    const auto cols = static_cast<Eigen::Index>(1 + p + q);
    if (rows <= cols) {
        throw Error(ErrorCode::insufficient_history, "too few observations for ARIMA" + order.to_string());
    }
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd target(rows);
    for (std::size_t t = start; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - start);
        x(r, 0) = 1.0;
        for (std::size_t i = 0; i < p; ++i) x(r, static_cast<Eigen::Index>(1 + i)) = y[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) x(r, static_cast<Eigen::Index>(1 + p + j)) = innovations[t - 1 - j];
        target(r) = y[t];
    }
    const LeastSquares reg = solve_least_squares(x, target);
    model.ridge_fallback = model.ridge_fallback || reg.ridge;
    model.intercept = reg.beta(0);
    for (std::size_t i = 0; i < p; ++i) model.ar_coeffs.push_back(reg.beta(static_cast<Eigen::Index>(1 + i)));
    for (std::size_t j = 0; j < q; ++j) model.ma_coeffs.push_back(reg.beta(static_cast<Eigen::Index>(1 + p + j)));

    while (model.shrink_count < kMaxShrinks && !(is_stationary(model.ar_coeffs) && is_invertible(model.ma_coeffs))) {
        if (!is_stationary(model.ar_coeffs)) {
            for (double& c : model.ar_coeffs) c *= kShrinkFactor;
        }
        if (!is_invertible(model.ma_coeffs)) {
            for (double& c : model.ma_coeffs) c *= kShrinkFactor;
        }
        ++model.shrink_count;
    }
    // Badly explosive fits survive uniform shrinking; pull their roots outside directly.
    if (!is_stationary(model.ar_coeffs)) {
        scale_roots(model.ar_coeffs, kRootRadius / companion_radius(model.ar_coeffs));
        model.root_rescaled = true;
    }
    if (!is_invertible(model.ma_coeffs)) {
        std::vector<double> negated(model.ma_coeffs.size());
        std::transform(model.ma_coeffs.begin(), model.ma_coeffs.end(), negated.begin(), [](double v) { return -v; });
        scale_roots(model.ma_coeffs, kRootRadius / companion_radius(negated));
        model.root_rescaled = true;
    }

    model.residuals = conditional_residuals(y, model);
    model.sse = 0.0;
    for (std::size_t t = start; t < n; ++t) model.sse += model.residuals[t] * model.residuals[t];
    model.n_obs = n - start;
    if (!std::isfinite(model.sse) || !std::isfinite(model.intercept)) {
        throw Error(ErrorCode::domain, "ARIMA" + order.to_string() + " fit produced non-finite values");
    }
    model.fitted = true;
    return model;
}

std::vector<double> arima_forecast(const ArimaModel& model, std::span<const double> history, std::size_t horizon) {
    if (!model.fitted) throw Error(ErrorCode::unfitted_model, "ARIMA model has not been fitted");
    const auto& order = model.order;
    const std::size_t lags = std::max(order.p, order.q);
    if (history.size() < lags + order.d + 1) {
        throw Error(ErrorCode::insufficient_history, "history too short to forecast ARIMA" + order.to_string());
    }

    // levels[k] is the k-times differenced history.
    std::vector<std::vector<double>> levels;
    levels.emplace_back(history.begin(), history.end());
    for (std::size_t k = 0; k < order.d; ++k) levels.push_back(difference(levels.back(), 1));

    std::vector<double> y = levels.back();
    std::vector<double> e = conditional_residuals(y, model);
    const std::size_t n = y.size();
    y.resize(n + horizon);
    e.resize(n + horizon, 0.0);
    for (std::size_t t = n; t < n + horizon; ++t) {
        double value = model.intercept;
        for (std::size_t i = 0; i < order.p; ++i) value += model.ar_coeffs[i] * y[t - 1 - i];
        for (std::size_t j = 0; j < order.q; ++j) value += model.ma_coeffs[j] * e[t - 1 - j];
        y[t] = value;
    }

    std::vector<double> forecast(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
    for (std::size_t k = order.d; k-- > 0;) {
        double level = levels[k].back();
        for (double& step : forecast) {
            level += step;
            step = level;
        }
    }
    return forecast;
}

ArimaOrder arima_select_order(std::span<const double> history, std::span<const ArimaOrder> grid) {
    const std::vector<std::vector<double>> single{std::vector<double>(history.begin(), history.end())};
    return arima_select_order(single, grid);
}

ArimaOrder arima_select_order(const std::vector<std::vector<double>>& histories, std::span<const ArimaOrder> grid) {
    if (grid.empty()) throw Error(ErrorCode::invalid_argument, "ARIMA order grid is empty");
    if (histories.empty()) throw Error(ErrorCode::invalid_argument, "no histories for ARIMA order selection");
    // Orders lose different numbers of leading observations (lags, differencing,
    // long-AR warm-up), so each history is scored on the time points every
    // surviving order covers: the last `common` residuals.
    std::vector<double> totals(grid.size(), 0.0);
    std::vector<bool> usable(grid.size(), true);
    for (const auto& h : histories) {
        std::vector<ArimaModel> fits(grid.size());
        std::size_t common = std::numeric_limits<std::size_t>::max();
        for (std::size_t g = 0; g < grid.size(); ++g) {
            if (!usable[g]) continue;
            try {
                fits[g] = arima_fit(h, grid[g]);
                common = std::min(common, fits[g].n_obs);
            } catch (const Error&) {
                usable[g] = false;
            }
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            if (!usable[g]) continue;
            const auto& r = fits[g].residuals;
            double sse = 0.0;
            for (std::size_t t = r.size() - common; t < r.size(); ++t) sse += r[t] * r[t];
            const double n = static_cast<double>(common);
            const auto k = static_cast<double>(grid[g].p + grid[g].q + 1);
            totals[g] += n * std::log(std::max(sse / n, 1e-300)) + 2.0 * k;
        }
    }
    std::size_t best = grid.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (usable[g] && std::isfinite(totals[g]) && (best == grid.size() || totals[g] < totals[best])) best = g;
    }
    if (best == grid.size()) throw Error(ErrorCode::all_fits_failed, "every ARIMA order in the grid failed to fit");
    return grid[best];
}

std::vector<ArimaOrder> order_grid(std::size_t max_p, std::size_t max_d, std::size_t max_q) {
    std::vector<ArimaOrder> grid;
    for (std::size_t d = 0; d <= max_d; ++d) {
        for (std::size_t p = 0; p <= max_p; ++p) {
            for (std::size_t q = 0; q <= max_q; ++q) {
                if (p + q + d == 0) continue;
                grid.push_back(ArimaOrder{p, d, q});
            }
        }
    }
    return grid;
}

}  // namespace marketfc::forecast
