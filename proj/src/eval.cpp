#include "marketfc/eval.hpp"

#include "marketfc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/core.h>

namespace marketfc::eval {

namespace {

void check_pair(std::span<const double> predictions, std::span<const double> actuals) {
    if (predictions.size() != actuals.size()) {
        throw Error(ErrorCode::length_mismatch, "predictions and actuals differ in length");
    }
    if (predictions.empty()) throw Error(ErrorCode::empty_input, "metric of an empty sequence");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

template <typename T>
T parse_number(const std::string& text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::invalid_argument, "malformed number '" + text + "' in report");
    }
    return value;
}

std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace

std::string to_string(Bucket bucket) {
    switch (bucket) {
        case Bucket::step1: return "step1";
        case Bucket::step5: return "step5";
        case Bucket::steps6to10: return "steps6to10";
        case Bucket::all10: return "all10";
    }
    return "all10";
}

Bucket parse_bucket(const std::string& text) {
    for (Bucket b : kBuckets) {
        if (to_string(b) == text) return b;
    }
    throw Error(ErrorCode::invalid_argument, "unknown horizon bucket '" + text + "'");
}

std::string display_label(Bucket bucket) {
    switch (bucket) {
        case Bucket::step1: return "OS";
        case Bucket::step5: return "step5";
        case Bucket::steps6to10: return "6-10";
        case Bucket::all10: return "TS";
    }
    return "TS";
}

std::pair<std::size_t, std::size_t> bucket_steps(Bucket bucket) {
    switch (bucket) {
        case Bucket::step1: return {1, 1};
        case Bucket::step5: return {5, 5};
        case Bucket::steps6to10: return {6, 10};
        case Bucket::all10: return {1, 10};
    }
    return {1, 10};
}

double rmse(std::span<const double> predictions, std::span<const double> actuals) {
    check_pair(predictions, actuals);
    double ss = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - actuals[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(predictions.size()));
}

double mape(std::span<const double> predictions, std::span<const double> actuals) {
    check_pair(predictions, actuals);
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!(std::abs(actuals[i]) > 1e-8)) throw Error(ErrorCode::zero_actual, "MAPE undefined for a zero actual");
        sum += std::abs(predictions[i] - actuals[i]) / std::abs(actuals[i]);
    }
    return sum / static_cast<double>(predictions.size());
}

void ForecastRecords::append(const ForecastRecords& other) {
    if (other.size() == 0) return;
    if (size() == 0) horizon = other.horizon;
    if (other.horizon != horizon) throw Error(ErrorCode::horizon_mismatch, "cannot merge records of different horizons");
    predictions.insert(predictions.end(), other.predictions.begin(), other.predictions.end());
    actuals.insert(actuals.end(), other.actuals.begin(), other.actuals.end());
}

std::vector<BucketMetrics> decompose_horizon(const ForecastRecords& records) {
    if (records.horizon != kEvalHorizon) {
        throw Error(ErrorCode::horizon_mismatch, "horizon decomposition requires H = 10, got " +
                                                     std::to_string(records.horizon));
    }
    if (records.size() == 0) throw Error(ErrorCode::empty_input, "no forecasts to decompose");
    std::vector<BucketMetrics> out;
    for (Bucket bucket : kBuckets) {
        const auto [first, last] = bucket_steps(bucket);
        std::vector<double> preds;
        std::vector<double> acts;
        for (std::size_t o = 0; o < records.size(); ++o) {
            if (records.predictions[o].size() != kEvalHorizon || records.actuals[o].size() != kEvalHorizon) {
                throw Error(ErrorCode::horizon_mismatch, "forecast row does not have 10 steps");
            }
            for (std::size_t s = first; s <= last; ++s) {
                preds.push_back(records.predictions[o][s - 1]);
                acts.push_back(records.actuals[o][s - 1]);
            }
        }
        out.push_back(BucketMetrics{bucket, rmse(preds, acts), mape(preds, acts), records.size()});
    }
    return out;
}

ForecastRecords evaluate_rolling(const forecast::Forecaster& forecaster, std::span<const double> series,
                                 std::size_t lookback, std::size_t horizon, std::span<const double> history_prefix,
                                 std::size_t min_history) {
    if (lookback == 0 || horizon == 0) throw Error(ErrorCode::invalid_argument, "lookback and horizon must be positive");
    if (series.size() < lookback + horizon) {
        throw Error(ErrorCode::series_too_short, "test series too short for a single forecast origin");
    }
    const bool normalized = forecaster.input_scale() == forecast::InputScale::normalized;
    std::vector<double> full(history_prefix.begin(), history_prefix.end());
    full.insert(full.end(), series.begin(), series.end());
    const std::size_t offset = history_prefix.size();

    std::size_t first = lookback;
    if (min_history > offset) first = std::max(first, min_history - offset);
    if (first + horizon > series.size()) {
        throw Error(ErrorCode::series_too_short, "test series too short for the required history");
    }

    ForecastRecords records;
    records.horizon = horizon;
    for (std::size_t origin = first; origin + horizon <= series.size(); ++origin) {
        const std::span<const double> raw_lookback = series.subspan(origin - lookback, lookback);
        forecast::ForecastContext ctx;
        ctx.history = std::span<const double>(full.data(), offset + origin);
        ctx.stats = data::compute_stats(raw_lookback);
        std::vector<double> scaled;
        if (normalized) {
            scaled = data::normalize(raw_lookback, ctx.stats);
            ctx.lookback = scaled;
        } else {
            ctx.lookback = raw_lookback;
        }
        std::vector<double> pred = forecaster.predict(ctx, horizon);
        if (pred.size() != horizon) {
            throw Error(ErrorCode::horizon_mismatch, forecaster.name() + " returned the wrong number of steps");
        }
        if (normalized) pred = data::denormalize(pred, ctx.stats);
        records.predictions.push_back(std::move(pred));
        const auto actual = series.subspan(origin, horizon);
        records.actuals.emplace_back(actual.begin(), actual.end());
    }
    return records;
}

ForecastRecords evaluate_windows(const forecast::Forecaster& forecaster, const data::WindowedDataset& windows) {
    const bool normalized = forecaster.input_scale() == forecast::InputScale::normalized;
    ForecastRecords records;
    records.horizon = windows.horizon;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows.windows[i];
        forecast::ForecastContext ctx;
        ctx.history = w.lookback;
        ctx.stats = windows.stats[i];
        std::vector<double> scaled;
        if (normalized) {
            scaled = data::normalize(w.lookback, ctx.stats);
            ctx.lookback = scaled;
        } else {
            ctx.lookback = w.lookback;
        }
        std::vector<double> pred = forecaster.predict(ctx, windows.horizon);
        if (pred.size() != windows.horizon) {
            throw Error(ErrorCode::horizon_mismatch, forecaster.name() + " returned the wrong number of steps");
        }
        if (normalized) pred = data::denormalize(pred, ctx.stats);
        records.predictions.push_back(std::move(pred));
        records.actuals.push_back(w.target);
    }
    return records;
}

void EvalReport::add(const std::string& dataset, const std::string& regime, const std::string& model, bool deep,
                     const std::vector<BucketMetrics>& metrics, double runtime_seconds) {
    for (const auto& m : metrics) {
        rows.push_back(ReportRow{dataset, regime, model, deep, m.bucket, m.rmse, m.mape, m.n_forecasts, runtime_seconds});
    }
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "dataset,regime,model,family,bucket,metric,value,config_hash,seed\n";
    for (const auto& r : report.rows) {
        const std::string prefix = r.dataset + "," + r.regime + "," + r.model + "," + (r.deep ? "deep" : "classical") +
                                   "," + to_string(r.bucket) + ",";
        const std::string suffix = "," + report.config_hash + "," + std::to_string(report.seed) + "\n";
        out << prefix << "rmse," << format_number(r.rmse) << suffix;
        out << prefix << "mape," << format_number(r.mape) << suffix;
        out << prefix << "n_forecasts," << r.n_forecasts << suffix;
    }
    return out.str();
}

EvalReport report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::invalid_argument, "empty report CSV");
    EvalReport report;
    std::map<std::string, std::size_t> index;  // row key -> position in report.rows
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9) throw Error(ErrorCode::invalid_argument, "report CSV row has " + std::to_string(f.size()) + " fields");
        report.config_hash = f[7];
        report.seed = parse_number<std::uint64_t>(f[8]);
        const std::string key = f[0] + "\x1f" + f[1] + "\x1f" + f[2] + "\x1f" + f[4];
        auto [it, inserted] = index.emplace(key, report.rows.size());
        if (inserted) {
            ReportRow row;
            row.dataset = f[0];
            row.regime = f[1];
            row.model = f[2];
            row.deep = f[3] == "deep";
            row.bucket = parse_bucket(f[4]);
            report.rows.push_back(row);
        }
        auto& row = report.rows[it->second];
        if (f[5] == "rmse") {
            row.rmse = parse_number<double>(f[6]);
        } else if (f[5] == "mape") {
            row.mape = parse_number<double>(f[6]);
        } else if (f[5] == "n_forecasts") {
            row.n_forecasts = parse_number<std::size_t>(f[6]);
        } else {
            throw Error(ErrorCode::invalid_argument, "unknown metric '" + f[5] + "'");
        }
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["config_hash"] = report.config_hash;
    doc["seed"] = report.seed;
    nlohmann::json results = nlohmann::json::object();
    std::vector<std::string> deep;
    for (const auto& r : report.rows) {
        results[r.dataset][r.regime][r.model][to_string(r.bucket)] = {
            {"rmse", r.rmse}, {"mape", r.mape}, {"n_forecasts", r.n_forecasts}};
        if (r.deep && std::find(deep.begin(), deep.end(), r.model) == deep.end()) deep.push_back(r.model);
    }
    std::sort(deep.begin(), deep.end());
    doc["results"] = std::move(results);
    doc["deep_models"] = deep;
    return doc;
}

EvalReport report_from_json(const nlohmann::json& doc) {
    EvalReport report;
    report.config_hash = doc.at("config_hash").get<std::string>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    const auto deep = doc.value("deep_models", std::vector<std::string>{});
    for (const auto& [dataset, regimes] : doc.at("results").items()) {
        for (const auto& [regime, models] : regimes.items()) {
            for (const auto& [model, buckets] : models.items()) {
                for (const auto& [bucket, cell] : buckets.items()) {
                    ReportRow row;
                    row.dataset = dataset;
                    row.regime = regime;
                    row.model = model;
                    row.deep = std::find(deep.begin(), deep.end(), model) != deep.end();
                    row.bucket = parse_bucket(bucket);
                    row.rmse = cell.at("rmse").get<double>();
                    row.mape = cell.at("mape").get<double>();
                    row.n_forecasts = cell.at("n_forecasts").get<std::size_t>();
                    report.rows.push_back(row);
                }
            }
        }
    }
    return report;
}

std::string render_table(const EvalReport& report) {
    std::vector<std::string> models;
    struct Group {
        std::string dataset, regime;
        Bucket bucket;
        std::map<std::string, const ReportRow*> cells;
    };
    std::vector<Group> groups;
    for (const auto& r : report.rows) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.dataset == r.dataset && g.regime == r.regime && g.bucket == r.bucket;
        });
        if (it == groups.end()) {
            groups.push_back(Group{r.dataset, r.regime, r.bucket, {}});
            it = std::prev(groups.end());
        }
        it->cells[r.model] = &r;
    }

    std::string out = fmt::format("{:<12} {:<14} {:<6}", "dataset", "regime", "bucket");
    for (const auto& m : models) out += fmt::format(" {:>26}", m + " rmse/mape");
    out += fmt::format(" {:>26} {:>14}\n", "avg DL rmse/mape", "best");
    for (const auto& g : groups) {
        out += fmt::format("{:<12} {:<14} {:<6}", g.dataset, g.regime, display_label(g.bucket));
        double deep_rmse = 0.0;
        double deep_mape = 0.0;
        std::size_t deep_count = 0;
        const ReportRow* best = nullptr;
        for (const auto& m : models) {
            const auto it = g.cells.find(m);
            if (it == g.cells.end()) {
                out += fmt::format(" {:>26}", "-");
                continue;
            }
            const ReportRow& r = *it->second;
            out += fmt::format(" {:>26}", fmt::format("{:.4f}/{:.4f}", r.rmse, r.mape));
            if (r.deep) {
                deep_rmse += r.rmse;
                deep_mape += r.mape;
                ++deep_count;
            }
            if (best == nullptr || r.rmse < best->rmse) best = &r;
        }
        if (deep_count > 0) {
            const double n = static_cast<double>(deep_count);
            out += fmt::format(" {:>26}", fmt::format("{:.4f}/{:.4f}", deep_rmse / n, deep_mape / n));
        } else {
            out += fmt::format(" {:>26}", "-");
        }
        out += fmt::format(" {:>14}\n", best != nullptr ? best->model : "-");
    }
    return out;
}

std::string render_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "report.csv", std::ios::binary);
        if (!csv) throw Error(ErrorCode::io, "cannot write " + (dir / "report.csv").string());
        csv << report_to_csv(report);
    }
    {
        std::ofstream json(dir / "report.json", std::ios::binary);
        if (!json) throw Error(ErrorCode::io, "cannot write " + (dir / "report.json").string());
        json << report_to_json(report).dump(2) << "\n";
    }
    return render_table(report);
}

}  // namespace marketfc::eval
