#include "marketfc/simgen.hpp"

#include "marketfc/error.hpp"
#include "marketfc/rng.hpp"

#include <cmath>
#include <cstdio>

namespace marketfc::simgen {

FuzzyRuleSet FuzzyRuleSet::evenly_spaced(double span, double scale) {
    FuzzyRuleSet rules;
    const double half = static_cast<double>(kRuleCount - 1) / 2.0;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
        const double k = static_cast<double>(i) - half;  // -3 .. 3
        rules.centers[i] = span * k / half;
        rules.widths[i] = span / 3.0;
        rules.consequents[i] = k * scale;
    }
    return rules;
}

void FuzzyRuleSet::validate() const {
    for (std::size_t i = 0; i < kRuleCount; ++i) {
        if (!(widths[i] > 0.0) || !std::isfinite(widths[i])) {
            throw Error(ErrorCode::invalid_argument, "fuzzy rule widths must be positive");
        }
        if (!std::isfinite(centers[i]) || !std::isfinite(consequents[i])) {
            throw Error(ErrorCode::invalid_argument, "fuzzy rule parameters must be finite");
        }
        if (i > 0 && !(centers[i] > centers[i - 1])) {
            throw Error(ErrorCode::invalid_argument, "fuzzy rule centers must be strictly increasing");
        }
    }
}

std::vector<std::string> GeneratorConfig::violations() const {
    std::vector<std::string> out;
    if (m == 0) out.emplace_back("m >= 1 required");
    if (n == 0) out.emplace_back("n >= 1 required");
    if (!(m < n)) out.emplace_back("m < n required");
    if (init_steps < n) out.emplace_back("init_steps >= n required");
    if (series_len < 1) out.emplace_back("series_len >= 1 required");
    if (!(init_price > 0.0)) out.emplace_back("init_price > 0 required");
    if (!(init_vol >= 0.0)) out.emplace_back("init_vol >= 0 required");
    if (!std::isfinite(influence)) out.emplace_back("influence must be finite");
    try {
        rules.validate();
    } catch (const Error& e) {
        out.emplace_back(e.what());
    }
    return out;
}

void GeneratorConfig::validate() const {
    const auto problems = violations();
    if (!problems.empty()) {
        std::string msg = "invalid generator config:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw Error(ErrorCode::invalid_argument, msg);
    }
}

double moving_average(std::span<const double> prices, std::size_t n, std::size_t t) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "moving average length must be >= 1");
    if (t + 1 < n || t >= prices.size()) {
        throw Error(ErrorCode::index_out_of_range, "moving average window out of range");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += prices[t - i];
    return sum / static_cast<double>(n);
}

double log_ma_ratio(std::span<const double> prices, std::size_t m, std::size_t n, std::size_t t) {
    if (m == 0 || !(m < n)) throw Error(ErrorCode::invalid_argument, "log_ma_ratio requires 1 <= m < n");
    if (t + 1 < n || t >= prices.size()) {
        throw Error(ErrorCode::index_out_of_range, "moving average window out of range");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(prices[t - i] > 0.0)) throw Error(ErrorCode::domain, "prices must be positive");
    }
    return std::log(moving_average(prices, m, t) / moving_average(prices, n, t));
}

double excess_demand(const FuzzyRuleSet& rules, double x) {
    std::array<double, kRuleCount> mu{};
    for (std::size_t i = 0; i < kRuleCount; ++i) {
        const double z = (x - rules.centers[i]) / rules.widths[i];
        mu[i] = std::exp(-0.5 * z * z);
    }
    // Accumulate mirrored pairs so antisymmetric rule sets cancel exactly at x = 0.
    double weighted = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0, j = kRuleCount - 1; i <= j; ++i, --j) {
        if (i == j) {
            weighted += rules.consequents[i] * mu[i];
            mass += mu[i];
            break;
        }
        weighted += rules.consequents[i] * mu[i] + rules.consequents[j] * mu[j];
        mass += mu[i] + mu[j];
    }
    if (!(mass > 0.0)) {
        throw Error(ErrorCode::degenerate_membership,
                    "membership mass underflowed; rule coverage does not span the signal");
    }
    return weighted / mass;
}

double step_price(double price, double demand, double influence) {
    if (!(price > 0.0)) throw Error(ErrorCode::domain, "price must be positive");
    const double increment = influence * demand;
    if (increment == 0.0) return price;
    const double next = std::exp(std::log(price) + increment);
    if (!std::isfinite(next) || !(next > 0.0)) {
        throw Error(ErrorCode::overflow, "price update overflowed; influence is misconfigured");
    }
    return next;
}

std::vector<double> random_walk_init(std::uint64_t seed, std::size_t steps, double init_price,
                                     double init_vol) {
    if (steps == 0) throw Error(ErrorCode::invalid_argument, "random walk needs at least one step");
    if (!(init_price > 0.0)) throw Error(ErrorCode::invalid_argument, "init_price must be positive");
    if (!(init_vol >= 0.0)) throw Error(ErrorCode::invalid_argument, "init_vol must be >= 0");
    Rng rng(seed);
    std::vector<double> path;
    path.reserve(steps);
    path.push_back(init_price);
    double log_price = std::log(init_price);
    for (std::size_t t = 1; t < steps; ++t) {
        const double eps = rng.normal(0.0, 1.0) * init_vol;
        log_price += eps;
        // Zero shocks keep the price bit-identical to init_price.
        path.push_back(eps == 0.0 ? path.back() : std::exp(log_price));
    }
    return path;
}

std::vector<double> simulate_path(const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    std::vector<double> path = random_walk_init(seed, config.init_steps, config.init_price, config.init_vol);
    path.reserve(config.init_steps + config.series_len);
    for (std::size_t k = 0; k < config.series_len; ++k) {
        const std::size_t t = path.size() - 1;
        const double x = log_ma_ratio(path, config.m, config.n, t);
        const double demand = excess_demand(config.rules, x);
        path.push_back(step_price(path[t], demand, config.influence));
    }
    return path;
}

PriceSeries generate_series(const GeneratorConfig& config, std::uint64_t seed, std::string id) {
    std::vector<double> path = simulate_path(config, seed);
    PriceSeries series;
    series.id = std::move(id);
    series.seed = seed;
    series.prices.assign(path.end() - static_cast<std::ptrdiff_t>(config.series_len), path.end());
    return series;
}

std::string corpus_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "syn-%03zu", index);
    return buf;
}

std::vector<PriceSeries> generate_corpus(const GeneratorConfig& config, std::size_t count,
                                         std::uint64_t base_seed) {
    if (count == 0) throw Error(ErrorCode::invalid_argument, "corpus count must be >= 1");
    std::vector<PriceSeries> corpus;
    corpus.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        corpus.push_back(generate_series(config, base_seed + i, corpus_id(i)));
    }
    return corpus;
}

}  // namespace marketfc::simgen
