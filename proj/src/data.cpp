#include "marketfc/data.hpp"

#include "marketfc/error.hpp"
#include "marketfc/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace marketfc::data {

namespace {

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n\"");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n\"");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

RawSeries slice(const RawSeries& series, const IndexRange& range, const char* suffix) {
    RawSeries out;
    out.id = series.id + suffix;
    out.source = series.source;
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(range.begin),
                      series.values.begin() + static_cast<std::ptrdiff_t>(range.end));
    return out;
}

}  // namespace

std::string to_string(SeriesSource source) {
    switch (source) {
        case SeriesSource::synthetic: return "synthetic";
        case SeriesSource::banknifty_like: return "banknifty-like";
        case SeriesSource::forex_like: return "forex-like";
    }
    return "synthetic";
}

SeriesSource parse_source(const std::string& text) {
    if (text == "synthetic") return SeriesSource::synthetic;
    if (text == "banknifty-like") return SeriesSource::banknifty_like;
    if (text == "forex-like") return SeriesSource::forex_like;
    throw Error(ErrorCode::invalid_argument, "unknown series source '" + text + "'");
}

SplitSpec SplitSpec::forex() {
    return SplitSpec{{0, 2050}, {2044, 2306}, {2300, 2562}};
}

SplitSpec SplitSpec::banknifty() {
    return SplitSpec{{0, 1050}, {1050, 1194}, {1194, 1338}};
}

std::vector<std::string> SplitSpec::violations(std::size_t series_len) const {
    std::vector<std::string> out;
    const std::pair<const char*, const IndexRange*> named[] = {{"train", &train}, {"val", &val}, {"test", &test}};
    for (const auto& [name, range] : named) {
        if (range->begin > range->end) out.push_back(std::string(name) + " range has begin > end");
        if (range->end > series_len) {
            out.push_back(std::string(name) + " range end " + std::to_string(range->end) +
                          " exceeds series length " + std::to_string(series_len));
        }
    }
    if (val.size() > 0 && val.begin < train.begin) out.emplace_back("val must not start before train");
    if (test.size() > 0 && test.begin < std::max(train.begin, val.size() > 0 ? val.begin : 0)) {
        out.emplace_back("test must not start before train/val");
    }
    return out;
}

void WindowedDataset::append(const WindowedDataset& other) {
    if (other.empty()) return;
    if (empty() && windows.empty() && lookback_len == 0) {
        lookback_len = other.lookback_len;
        horizon = other.horizon;
    }
    if (other.lookback_len != lookback_len || other.horizon != horizon) {
        throw Error(ErrorCode::shape_mismatch, "cannot merge datasets with different lookback/horizon");
    }
    windows.insert(windows.end(), other.windows.begin(), other.windows.end());
    stats.insert(stats.end(), other.stats.begin(), other.stats.end());
}

void WindowedDataset::push_back(Window window) {
    if (window.lookback.size() != lookback_len || window.target.size() != horizon) {
        throw Error(ErrorCode::shape_mismatch, "window shape does not match dataset");
    }
    stats.push_back(compute_stats(window.lookback));
    windows.push_back(std::move(window));
}

CsvLoad load_csv(const std::filesystem::path& path, const std::string& value_column, SeriesSource source) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::file_not_found, "cannot open CSV file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::empty_after_cleaning, "CSV file is empty: " + path.string());
    const auto header = split_fields(line);
    const auto it = std::find(header.begin(), header.end(), value_column);
    if (it == header.end()) {
        throw Error(ErrorCode::missing_column, "column '" + value_column + "' not found in " + path.string());
    }
    const auto column = static_cast<std::size_t>(it - header.begin());

    CsvLoad result;
    result.series.id = path.stem().string();
    result.series.source = source;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        double value = 0.0;
        if (column < fields.size() && parse_double(fields[column], value)) {
            result.series.values.push_back(value);
        } else {
            ++result.dropped_rows;
        }
    }
    if (result.series.values.empty()) {
        throw Error(ErrorCode::empty_after_cleaning, "no parseable values in column '" + value_column + "'");
    }
    return result;
}

SplitSeries split(const RawSeries& series, const SplitSpec& spec) {
    const auto problems = spec.violations(series.values.size());
    if (!problems.empty()) throw Error(ErrorCode::out_of_bounds, "invalid split: " + problems.front());
    return SplitSeries{slice(series, spec.train, "/train"), slice(series, spec.val, "/val"),
                       slice(series, spec.test, "/test")};
}

CorpusSplit split_corpus(const std::vector<RawSeries>& corpus, const SeriesSplitCounts& counts) {
    if (counts.total() > corpus.size()) {
        throw Error(ErrorCode::out_of_bounds, "corpus has " + std::to_string(corpus.size()) +
                                                  " series but the split needs " + std::to_string(counts.total()));
    }
    CorpusSplit out;
    auto it = corpus.begin();
    out.train.assign(it, it + static_cast<std::ptrdiff_t>(counts.train_series));
    it += static_cast<std::ptrdiff_t>(counts.train_series);
    out.val.assign(it, it + static_cast<std::ptrdiff_t>(counts.val_series));
    it += static_cast<std::ptrdiff_t>(counts.val_series);
    out.test.assign(it, it + static_cast<std::ptrdiff_t>(counts.test_series));
    return out;
}

std::pair<RawSeries, RawSeries> split_at(const RawSeries& series, std::size_t train_steps) {
    if (train_steps > series.values.size()) {
        throw Error(ErrorCode::out_of_bounds, "split point beyond series end");
    }
    return {slice(series, {0, train_steps}, "/meta-train"),
            slice(series, {train_steps, series.values.size()}, "/meta-test")};
}

WindowedDataset make_windows(const RawSeries& series, std::size_t lookback, std::size_t horizon,
                             std::size_t stride) {
    if (lookback == 0 || horizon == 0 || stride == 0) {
        throw Error(ErrorCode::invalid_argument, "lookback, horizon and stride must be positive");
    }
    const std::size_t len = series.values.size();
    if (len < lookback + horizon) {
        throw Error(ErrorCode::series_too_short, "series '" + series.id + "' of length " + std::to_string(len) +
                                                     " is shorter than lookback + horizon");
    }
    WindowedDataset ds;
    ds.lookback_len = lookback;
    ds.horizon = horizon;
    const std::size_t count = (len - lookback - horizon) / stride + 1;
    ds.windows.reserve(count);
    ds.stats.reserve(count);
    for (std::size_t origin = lookback; origin + horizon <= len; origin += stride) {
        Window w;
        w.series_id = series.id;
        w.origin = origin;
        const auto* base = series.values.data();
        w.lookback.assign(base + origin - lookback, base + origin);
        w.target.assign(base + origin, base + origin + horizon);
        ds.push_back(std::move(w));
    }
    return ds;
}

NormStats compute_stats(std::span<const double> lookback) {
    if (lookback.empty()) throw Error(ErrorCode::invalid_argument, "lookback must be non-empty");
    const double n = static_cast<double>(lookback.size());
    const double mean = std::accumulate(lookback.begin(), lookback.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : lookback) ss += (v - mean) * (v - mean);
    const double std = std::sqrt(ss / n);
    return NormStats{mean, std < kDegenerateStd ? 1.0 : std};
}

std::vector<double> normalize(std::span<const double> values, const NormStats& stats) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double v) { return (v - stats.mean) / stats.std; });
    return out;
}

std::pair<Window, NormStats> normalize_window(const Window& window) {
    const NormStats stats = compute_stats(window.lookback);
    Window out{window.series_id, window.origin, normalize(window.lookback, stats), normalize(window.target, stats)};
    return {std::move(out), stats};
}

std::vector<double> denormalize(std::span<const double> predictions, const NormStats& stats) {
    std::vector<double> out(predictions.size());
    std::transform(predictions.begin(), predictions.end(), out.begin(),
                   [&](double v) { return v * stats.std + stats.mean; });
    return out;
}

std::vector<double> interpolate_lookback(std::span<const double> lookback, std::size_t target_len) {
    if (lookback.size() < 2 || target_len < 2) {
        throw Error(ErrorCode::invalid_argument, "interpolation needs source and target lengths >= 2");
    }
    const std::size_t last_src = lookback.size() - 1;
    const double scale = static_cast<double>(last_src) / static_cast<double>(target_len - 1);
    std::vector<double> out(target_len);
    out.front() = lookback.front();
    out.back() = lookback.back();
    for (std::size_t k = 1; k + 1 < target_len; ++k) {
        const double pos = static_cast<double>(k) * scale;
        const auto i = std::min(static_cast<std::size_t>(pos), last_src - 1);
        const double frac = pos - static_cast<double>(i);
        out[k] = lookback[i] + frac * (lookback[i + 1] - lookback[i]);
    }
    return out;
}

WindowedDataset interpolate_dataset(const WindowedDataset& dataset, std::size_t target_len) {
    WindowedDataset out;
    out.lookback_len = target_len;
    out.horizon = dataset.horizon;
    out.windows.reserve(dataset.size());
    out.stats.reserve(dataset.size());
    for (const auto& w : dataset.windows) {
        Window iw{w.series_id, w.origin, interpolate_lookback(w.lookback, target_len), w.target};
        out.push_back(std::move(iw));
    }
    return out;
}

WindowedDataset subsample(const WindowedDataset& dataset, std::size_t count, std::uint64_t seed) {
    if (count >= dataset.size()) return dataset;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(count);
    std::sort(order.begin(), order.end());
    WindowedDataset out;
    out.lookback_len = dataset.lookback_len;
    out.horizon = dataset.horizon;
    for (std::size_t i : order) {
        out.windows.push_back(dataset.windows[i]);
        out.stats.push_back(dataset.stats[i]);
    }
    return out;
}

std::vector<std::vector<std::size_t>> batches(const WindowedDataset& dataset, std::size_t batch_size,
                                              std::uint64_t seed) {
    if (batch_size == 0) throw Error(ErrorCode::invalid_argument, "batch_size must be positive");
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t stop = std::min(order.size(), start + batch_size);
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return out;
}

Batch make_batch(const WindowedDataset& dataset, std::span<const std::size_t> indices) {
    Batch batch;
    batch.inputs.resize(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(dataset.lookback_len));
    batch.targets.resize(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(dataset.horizon));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto& w = dataset.windows.at(indices[r]);
        const auto& s = dataset.stats.at(indices[r]);
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t c = 0; c < w.lookback.size(); ++c) {
            batch.inputs(row, static_cast<Eigen::Index>(c)) = (w.lookback[c] - s.mean) / s.std;
        }
        for (std::size_t c = 0; c < w.target.size(); ++c) {
            batch.targets(row, static_cast<Eigen::Index>(c)) = (w.target[c] - s.mean) / s.std;
        }
    }
    return batch;
}

Batch make_batch(const WindowedDataset& dataset) {
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return make_batch(dataset, all);
}

}  // namespace marketfc::data
