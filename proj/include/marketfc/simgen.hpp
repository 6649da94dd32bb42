#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace marketfc::simgen {

inline constexpr std::size_t kRuleCount = 7;

/// Seven-rule fuzzy system mapping the moving-average signal to excess demand.
/// Memberships are Gaussian: mu_i(x) = exp(-(x - center_i)^2 / (2 width_i^2)).
struct FuzzyRuleSet {
    std::array<double, kRuleCount> centers{};
    std::array<double, kRuleCount> widths{};
    std::array<double, kRuleCount> consequents{};

    /// Centers evenly spaced over [-span, span], uniform width span/3,
    /// consequents (-3..3) * scale.
    static FuzzyRuleSet evenly_spaced(double span = 0.05, double scale = 1.0);

    /// Throws invalid_argument unless widths > 0 and centers strictly increase.
    void validate() const;
};

struct GeneratorConfig {
    std::size_t m = 1;  // short moving-average length
    std::size_t n = 5;  // long moving-average length
    double influence = 0.01;
    FuzzyRuleSet rules = FuzzyRuleSet::evenly_spaced();
    std::size_t init_steps = 100;
    double init_price = 100.0;
    double init_vol = 0.01;
    std::size_t series_len = 500;

    /// Human-readable list of violated invariants; empty when valid.
    [[nodiscard]] std::vector<std::string> violations() const;
    void validate() const;
};

struct PriceSeries {
    std::string id;
    std::uint64_t seed = 0;
    std::vector<double> prices;
};

/// Trailing mean of prices[t-n+1 .. t].
double moving_average(std::span<const double> prices, std::size_t n, std::size_t t);

/// ln(MA_m(t) / MA_n(t)).
double log_ma_ratio(std::span<const double> prices, std::size_t m, std::size_t n, std::size_t t);

/// Weighted-average defuzzification of the rule consequents at signal x.
double excess_demand(const FuzzyRuleSet& rules, double x);

/// exp(ln(price) + influence * demand).
double step_price(double price, double demand, double influence);

std::vector<double> random_walk_init(std::uint64_t seed, std::size_t steps, double init_price,
                                     double init_vol);

/// Warm-up followed by the generated segment, length init_steps + series_len.
/// generate_series returns the tail of this path.
std::vector<double> simulate_path(const GeneratorConfig& config, std::uint64_t seed);

PriceSeries generate_series(const GeneratorConfig& config, std::uint64_t seed, std::string id);

std::vector<PriceSeries> generate_corpus(const GeneratorConfig& config, std::size_t count,
                                         std::uint64_t base_seed);

/// "syn-000", "syn-001", ...
std::string corpus_id(std::size_t index);

}  // namespace marketfc::simgen
