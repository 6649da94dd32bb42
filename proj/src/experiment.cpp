#include "marketfc/experiment.hpp"

#include "marketfc/error.hpp"
#include "marketfc/forecast/checkpoint.hpp"
#include "marketfc/forecast/forecaster.hpp"
#include "marketfc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>
#include <set>

#include <fmt/core.h>

namespace marketfc::experiment {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Parsing

bool is_count(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

/// Reads typed fields from one JSON object, collecting type errors and
/// rejecting keys that were never consumed.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (!obj_.is_object()) errors_.push_back(path_ + " must be an object");
    }

    ObjectReader(const ObjectReader&) = delete;
    ObjectReader& operator=(const ObjectReader&) = delete;

    ~ObjectReader() {
        if (!obj_.is_object()) return;
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) errors_.push_back("unknown key " + where(key));
        }
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!obj_.is_object()) return nullptr;
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void get(const std::string& key, std::size_t& out) { read(key, out); }
    void get(const std::string& key, double& out) { read(key, out); }
    void get(const std::string& key, std::string& out) { read(key, out); }

    void get(const std::string& key, std::optional<std::size_t>& out) {
        std::size_t v = 0;
        if (find(key) != nullptr && read(key, v)) out = v;
    }

    void get(const std::string& key, std::vector<std::size_t>& out) { read_list(key, out); }
    void get(const std::string& key, std::vector<double>& out) { read_list(key, out); }
    void get(const std::string& key, std::vector<std::string>& out) { read_list(key, out); }

private:
    template <typename T>
    bool check(const json& v) const {
        if constexpr (std::is_same_v<T, double>) return v.is_number();
        if constexpr (std::is_same_v<T, std::string>) return v.is_string();
        if constexpr (std::is_unsigned_v<T>) return is_count(v);
        return false;
    }

    template <typename T>
    bool read(const std::string& key, T& out) {
        const json* v = find(key);
        if (v == nullptr) return false;
        if (!check<T>(*v)) {
            errors_.push_back(where(key) + (std::is_unsigned_v<T> ? " must be a non-negative integer"
                                            : std::is_same_v<T, double> ? " must be a number"
                                                                        : " must be a string"));
            return false;
        }
        out = v->get<T>();
        return true;
    }

    template <typename T>
    void read_list(const std::string& key, std::vector<T>& out) {
        const json* v = find(key);
        if (v == nullptr) return;
        if (!v->is_array() || !std::all_of(v->begin(), v->end(), [this](const json& e) { return check<T>(e); })) {
            errors_.push_back(where(key) + " must be a list of the right element type");
            return;
        }
        out = v->get<std::vector<T>>();
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

void read_rules(const json& doc, const std::string& path, simgen::FuzzyRuleSet& rules, std::vector<std::string>& errors) {
    ObjectReader r(doc, path, errors);
    const std::pair<const char*, std::array<double, simgen::kRuleCount>*> fields[] = {
        {"centers", &rules.centers}, {"widths", &rules.widths}, {"consequents", &rules.consequents}};
    for (const auto& [key, target] : fields) {
        std::vector<double> values(target->begin(), target->end());
        r.get(key, values);
        if (values.size() != simgen::kRuleCount) {
            errors.push_back(r.where(key) + " must have exactly 7 entries");
            continue;
        }
        std::copy(values.begin(), values.end(), target->begin());
    }
}

void read_generator(const json& doc, const std::string& path, simgen::GeneratorConfig& g,
                    std::vector<std::string>& errors) {
    ObjectReader r(doc, path, errors);
    r.get("m", g.m);
    r.get("n", g.n);
    r.get("influence", g.influence);
    r.get("init_steps", g.init_steps);
    r.get("init_price", g.init_price);
    r.get("init_vol", g.init_vol);
    r.get("series_len", g.series_len);
    if (const json* rules = r.find("rules")) read_rules(*rules, r.where("rules"), g.rules, errors);
}

void read_range(ObjectReader& r, const std::string& key, data::IndexRange& range, std::vector<std::string>& errors) {
    std::vector<std::size_t> bounds{range.begin, range.end};
    r.get(key, bounds);
    if (bounds.size() != 2) {
        errors.push_back(r.where(key) + " must be [begin, end]");
        return;
    }
    range = data::IndexRange{bounds[0], bounds[1]};
}

void read_dataset(const json& doc, DatasetConfig& ds, std::vector<std::string>& errors) {
    ObjectReader r(doc, "dataset", errors);
    std::string kind = "synthetic";
    r.get("kind", kind);
    if (kind == "synthetic") {
        ds.kind = DatasetKind::synthetic;
    } else if (kind == "csv") {
        ds.kind = DatasetKind::csv;
    } else {
        errors.push_back("dataset.kind must be \"synthetic\" or \"csv\"");
    }
    ds.name = ds.kind == DatasetKind::synthetic ? "synthetic" : "csv";
    r.get("name", ds.name);

    if (ds.kind == DatasetKind::synthetic) {
        auto& syn = ds.synthetic;
        if (const json* g = r.find("generator")) read_generator(*g, "dataset.generator", syn.generator, errors);
        r.get("count", syn.count);
        std::uint64_t base = 0;
        if (const json* b = r.find("base_seed")) {
            if (is_count(*b)) {
                base = b->get<std::uint64_t>();
                syn.base_seed = base;
            } else {
                errors.emplace_back("dataset.base_seed must be a non-negative integer");
            }
        }
        if (const json* s = r.find("split")) {
            ObjectReader sr(*s, "dataset.split", errors);
            sr.get("train_series", syn.split.train_series);
            sr.get("val_series", syn.split.val_series);
            sr.get("test_series", syn.split.test_series);
        }
        r.get("meta_train_steps", syn.meta_train_steps);
    } else {
        auto& csv = ds.csv;
        r.get("path", csv.path);
        r.get("value_column", csv.value_column);
        std::string source = data::to_string(csv.source);
        r.get("source", source);
        try {
            csv.source = data::parse_source(source);
        } catch (const Error& e) {
            errors.emplace_back(std::string("dataset.source: ") + e.what());
        }
        if (const json* s = r.find("split")) {
            ObjectReader sr(*s, "dataset.split", errors);
            std::string preset;
            sr.get("preset", preset);
            if (preset == "forex") {
                csv.split = data::SplitSpec::forex();
            } else if (preset == "banknifty") {
                csv.split = data::SplitSpec::banknifty();
            } else if (!preset.empty()) {
                errors.push_back("dataset.split.preset must be \"forex\" or \"banknifty\"");
            }
            read_range(sr, "train", csv.split.train, errors);
            read_range(sr, "val", csv.split.val, errors);
            read_range(sr, "test", csv.split.test, errors);
        }
        r.get("meta_train_end", csv.meta_train_end);
    }
}

json rules_to_json(const simgen::FuzzyRuleSet& rules) {
    return json{{"centers", rules.centers}, {"widths", rules.widths}, {"consequents", rules.consequents}};
}

json range_to_json(const data::IndexRange& r) { return json::array({r.begin, r.end}); }

// ---------------------------------------------------------------------------
// Pipeline

struct PreparedData {
    std::vector<data::RawSeries> train;
    std::vector<data::RawSeries> val;
    std::vector<data::RawSeries> test;
    std::vector<std::vector<double>> test_prefix;  // aligned with test
    std::vector<data::RawSeries> meta_train;
    std::vector<data::RawSeries> meta_test;
};

std::vector<data::RawSeries> to_raw(const std::vector<simgen::PriceSeries>& corpus) {
    std::vector<data::RawSeries> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back(data::RawSeries{s.id, s.prices, data::SeriesSource::synthetic});
    return out;
}

PreparedData prepare(const ExperimentConfig& config, bool with_meta) {
    PreparedData out;
    if (config.dataset.kind == DatasetKind::synthetic) {
        const auto& syn = config.dataset.synthetic;
        const auto raw = to_raw(simgen::generate_corpus(syn.generator, syn.count, config.effective_base_seed()));
        auto parts = data::split_corpus(raw, syn.split);
        out.train = std::move(parts.train);
        out.val = std::move(parts.val);
        out.test = std::move(parts.test);
        out.test_prefix.resize(out.test.size());
        for (const auto& s : with_meta ? raw : std::vector<data::RawSeries>{}) {
            auto [head, tail] = data::split_at(s, syn.meta_train_steps);
            out.meta_train.push_back(std::move(head));
            out.meta_test.push_back(std::move(tail));
        }
    } else {
        const auto& csv = config.dataset.csv;
        auto loaded = data::load_csv(csv.path, csv.value_column, csv.source);
        loaded.series.id = config.dataset.name;
        const auto parts = data::split(loaded.series, csv.split);
        out.train.push_back(parts.train);
        out.val.push_back(parts.val);
        out.test.push_back(parts.test);
        const auto& v = loaded.series.values;
        out.test_prefix.emplace_back(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(csv.split.test.begin));
        if (with_meta) {
            auto [head, tail] = data::split_at(loaded.series, csv.meta_train_end.value_or(csv.split.train.end));
            out.meta_train.push_back(std::move(head));
            out.meta_test.push_back(std::move(tail));
        }
    }
    return out;
}

data::WindowedDataset windows_of(const std::vector<data::RawSeries>& series, std::size_t lookback, std::size_t horizon) {
    data::WindowedDataset ds;
    ds.lookback_len = lookback;
    ds.horizon = horizon;
    for (const auto& s : series) {
        if (s.values.size() < lookback + horizon) continue;
        ds.append(data::make_windows(s, lookback, horizon));
    }
    return ds;
}

eval::ForecastRecords evaluate_on_test(const forecast::Forecaster& f, const PreparedData& prepared,
                                       const ExperimentConfig& config) {
    eval::ForecastRecords records;
    records.horizon = config.horizon;
    for (std::size_t i = 0; i < prepared.test.size(); ++i) {
        records.append(eval::evaluate_rolling(f, prepared.test[i].values, config.effective_lookback(), config.horizon,
                                              prepared.test_prefix[i], config.min_history));
    }
    return records;
}

std::vector<std::size_t> mlp_sizes(const ExperimentConfig& config) {
    std::vector<std::size_t> sizes{config.effective_lookback()};
    sizes.insert(sizes.end(), config.mlp.hidden.begin(), config.mlp.hidden.end());
    sizes.push_back(config.horizon);
    return sizes;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_epoch_log(const std::filesystem::path& path, const train::TrainHistory& history, std::uint64_t seed, std::uint64_t cell_seed,
                     const std::string& hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    for (const auto& e : history.epochs) {
        out << json{{"epoch", e.epoch},
                    {"train_loss", finite_or_null(e.train_loss)},
                    {"val_rmse", finite_or_null(e.val_rmse)},
                    {"updates", e.updates},
                    {"elapsed_seconds", e.elapsed_seconds},
                    {"timestamp", timestamp()},
                    {"seed", seed},
                    {"cell_seed", cell_seed},
                    {"config_hash", hash}}
                   .dump()
            << "\n";
    }
}

void write_meta_log(const std::filesystem::path& path, const train::MetaHistory& history, std::uint64_t seed, std::uint64_t cell_seed,
                    const std::string& hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    for (const auto& m : history.iterations) {
        out << json{{"meta_iteration", m.iteration},
                    {"meta_loss", finite_or_null(m.meta_loss)},
                    {"elapsed_seconds", m.elapsed_seconds},
                    {"timestamp", timestamp()},
                    {"seed", seed},
                    {"cell_seed", cell_seed},
                    {"config_hash", hash}}
                   .dump()
            << "\n";
    }
}

void write_checkpoint(const std::filesystem::path& path, const forecast::MlpModel& model, double lr,
                      const forecast::AdamState& state, const std::string& hash) {
    forecast::MlpCheckpoint cp{model, forecast::OptimizerKind::adam, lr, state, hash};
    forecast::save_checkpoint(cp, path);
}

const forecast::MlpModel& as_mlp(const forecast::GradientModel& model) {
    return dynamic_cast<const forecast::MlpModel&>(model);
}

}  // namespace

std::size_t ExperimentConfig::effective_lookback() const {
    if (lookback) return *lookback;
    return dataset.kind == DatasetKind::synthetic ? 5 : 20;
}

std::uint64_t ExperimentConfig::effective_base_seed() const {
    return dataset.synthetic.base_seed.value_or(seed);
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig c;
    std::vector<std::string> errors;
    {
        ObjectReader r(doc, "config", errors);
        if (const json* s = r.find("seed")) {
            if (is_count(*s)) {
                c.seed = s->get<std::uint64_t>();
            } else {
                errors.emplace_back("config.seed must be a non-negative integer");
            }
        }
        r.get("output_dir", c.output_dir);
        if (const json* d = r.find("dataset")) read_dataset(*d, c.dataset, errors);
        r.get("lookback", c.lookback);
        r.get("horizon", c.horizon);
        r.get("min_history", c.min_history);
        r.get("models", c.models);
        r.get("regimes", c.regimes);
        if (const json* a = r.find("arima")) {
            ObjectReader ar(*a, "arima", errors);
            ar.get("max_p", c.arima.max_p);
            ar.get("max_d", c.arima.max_d);
            ar.get("max_q", c.arima.max_q);
        }
        if (const json* m = r.find("mlp")) {
            ObjectReader mr(*m, "mlp", errors);
            mr.get("hidden", c.mlp.hidden);
            std::string act = forecast::to_string(c.mlp.activation);
            mr.get("activation", act);
            if (act == "relu" || act == "tanh") {
                c.mlp.activation = forecast::parse_activation(act);
            } else {
                errors.emplace_back("mlp.activation must be \"relu\" or \"tanh\"");
            }
        }
        if (const json* t = r.find("train")) {
            ObjectReader tr(*t, "train", errors);
            tr.get("epochs", c.train.epochs);
            tr.get("batch_size", c.train.batch_size);
            tr.get("lr", c.train.lr);
            tr.get("patience", c.train.patience);
        }
        if (const json* a = r.find("augment")) {
            ObjectReader ar(*a, "augment", errors);
            if (const json* g = ar.find("generator")) read_generator(*g, "augment.generator", c.augment.generator, errors);
            ar.get("count", c.augment.count);
            if (const json* b = ar.find("base_seed")) {
                if (is_count(*b)) {
                    c.augment.base_seed = b->get<std::uint64_t>();
                } else {
                    errors.emplace_back("augment.base_seed must be a non-negative integer");
                }
            }
            ar.get("synthetic_lookback", c.augment.synthetic_lookback);
        }
        if (const json* m = r.find("meta")) {
            ObjectReader mr(*m, "meta", errors);
            auto& meta = c.meta.meta;
            mr.get("k", meta.k);
            mr.get("r", meta.r);
            mr.get("a", meta.a);
            mr.get("inner_lr", meta.inner_lr);
            mr.get("inner_steps", meta.inner_steps);
            mr.get("meta_lr", meta.meta_lr);
            mr.get("meta_batch", meta.meta_batch);
            mr.get("meta_iterations", meta.meta_iterations);
            std::string outer = forecast::to_string(meta.outer_optimizer);
            mr.get("outer_optimizer", outer);
            if (outer == "adam" || outer == "sgd") {
                meta.outer_optimizer = outer == "adam" ? forecast::OptimizerKind::adam : forecast::OptimizerKind::sgd;
            } else {
                errors.emplace_back("meta.outer_optimizer must be \"adam\" or \"sgd\"");
            }
            mr.get("train_tasks_per_series", c.meta.train_tasks_per_series);
            mr.get("test_tasks_per_series", c.meta.test_tasks_per_series);
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw Error(ErrorCode::invalid_config, msg);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::invalid_config, "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::invalid_config, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const simgen::GeneratorConfig& g) {
    return json{{"m", g.m},
                {"n", g.n},
                {"influence", g.influence},
                {"rules", rules_to_json(g.rules)},
                {"init_steps", g.init_steps},
                {"init_price", g.init_price},
                {"init_vol", g.init_vol},
                {"series_len", g.series_len}};
}

json to_json(const ExperimentConfig& c) {
    json dataset{{"name", c.dataset.name}};
    if (c.dataset.kind == DatasetKind::synthetic) {
        const auto& syn = c.dataset.synthetic;
        dataset["kind"] = "synthetic";
        dataset["generator"] = to_json(syn.generator);
        dataset["count"] = syn.count;
        dataset["base_seed"] = c.effective_base_seed();
        dataset["split"] = {{"train_series", syn.split.train_series},
                            {"val_series", syn.split.val_series},
                            {"test_series", syn.split.test_series}};
        dataset["meta_train_steps"] = syn.meta_train_steps;
    } else {
        const auto& csv = c.dataset.csv;
        dataset["kind"] = "csv";
        dataset["path"] = csv.path;
        dataset["value_column"] = csv.value_column;
        dataset["source"] = data::to_string(csv.source);
        dataset["split"] = {{"train", range_to_json(csv.split.train)},
                            {"val", range_to_json(csv.split.val)},
                            {"test", range_to_json(csv.split.test)}};
        dataset["meta_train_end"] = csv.meta_train_end.value_or(csv.split.train.end);
    }
    const auto& meta = c.meta.meta;
    return json{
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"dataset", dataset},
        {"lookback", c.effective_lookback()},
        {"horizon", c.horizon},
        {"min_history", c.min_history},
        {"models", c.models},
        {"regimes", c.regimes},
        {"arima", {{"max_p", c.arima.max_p}, {"max_d", c.arima.max_d}, {"max_q", c.arima.max_q}}},
        {"mlp", {{"hidden", c.mlp.hidden}, {"activation", forecast::to_string(c.mlp.activation)}}},
        {"train",
         {{"epochs", c.train.epochs}, {"batch_size", c.train.batch_size}, {"lr", c.train.lr}, {"patience", c.train.patience}}},
        {"augment",
         {{"generator", to_json(c.augment.generator)},
          {"count", c.augment.count},
          {"base_seed", c.augment.base_seed},
          {"synthetic_lookback", c.augment.synthetic_lookback}}},
        {"meta",
         {{"k", meta.k},
          {"r", meta.r},
          {"a", meta.a},
          {"inner_lr", meta.inner_lr},
          {"inner_steps", meta.inner_steps},
          {"meta_lr", meta.meta_lr},
          {"meta_batch", meta.meta_batch},
          {"meta_iterations", meta.meta_iterations},
          {"outer_optimizer", forecast::to_string(meta.outer_optimizer)},
          {"train_tasks_per_series", c.meta.train_tasks_per_series},
          {"test_tasks_per_series", c.meta.test_tasks_per_series}}},
    };
}

std::string config_hash(const ExperimentConfig& config) {
    // output_dir does not influence results, so it is left out of the hash.
    json canonical = to_json(config);
    canonical.erase("output_dir");
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::size_t feasible_offset_bound(std::size_t length, std::size_t window, std::size_t a) {
    const std::size_t half = length / 2;
    if (half <= window) return 0;
    return std::min(a, half - window);
}

std::vector<std::string> validate(const ExperimentConfig& c, bool check_data) {
    std::vector<std::string> out;
    auto add_all = [&out](const std::string& prefix, const std::vector<std::string>& items) {
        for (const auto& i : items) out.push_back(prefix + i);
    };
    const std::size_t lookback = c.effective_lookback();
    if (lookback == 0) out.emplace_back("lookback must be positive");
    if (c.horizon != eval::kEvalHorizon) out.emplace_back("horizon must be 10 (horizon buckets cover steps 1-10)");

    for (const auto& m : c.models) {
        if (std::find(kKnownModels.begin(), kKnownModels.end(), m) == kKnownModels.end()) {
            out.push_back("unknown model '" + m + "'");
        }
    }
    if (c.models.empty()) out.emplace_back("at least one model is required");
    if (c.regimes.empty()) out.emplace_back("at least one regime is required");
    bool wants_augmented = false;
    bool wants_meta = false;
    for (const auto& r : c.regimes) {
        if (r == "augmented") {
            wants_augmented = true;
        } else if (r == "meta") {
            wants_meta = true;
        } else if (r != "normal") {
            out.push_back("unknown regime '" + r + "'");
        }
    }

    const std::size_t grid_history = 10 * (c.arima.max_p + c.arima.max_q + 1) + c.arima.max_d;
    const bool wants_arima = std::find(c.models.begin(), c.models.end(), "arima") != c.models.end();
    if (c.arima.max_p > 5 || c.arima.max_q > 5) out.emplace_back("arima.max_p and arima.max_q must be <= 5");
    if (c.arima.max_d > 2) out.emplace_back("arima.max_d must be <= 2");
    if (wants_arima && c.min_history < grid_history) {
        out.push_back("min_history must be >= " + std::to_string(grid_history) + " for the ARIMA grid");
    }
    for (std::size_t h : c.mlp.hidden) {
        if (h == 0) out.emplace_back("mlp.hidden sizes must be positive");
    }
    add_all("", c.train.violations());
    if (wants_meta) add_all("", c.meta.meta.violations());

    const std::size_t window = lookback + c.horizon;
    if (c.dataset.kind == DatasetKind::synthetic) {
        const auto& syn = c.dataset.synthetic;
        add_all("dataset.generator: ", syn.generator.violations());
        if (syn.count == 0) out.emplace_back("dataset.count must be >= 1");
        if (syn.split.total() > syn.count) {
            out.push_back("dataset.split needs " + std::to_string(syn.split.total()) + " series but count is " +
                          std::to_string(syn.count));
        }
        if (syn.split.train_series == 0) out.emplace_back("dataset.split.train_series must be >= 1");
        if (syn.split.test_series == 0) out.emplace_back("dataset.split.test_series must be >= 1");
        if (syn.generator.series_len < std::max(window, c.min_history + c.horizon)) {
            out.emplace_back("dataset.generator.series_len too short for lookback + horizon and min_history");
        }
        if (wants_augmented) out.emplace_back("the augmented regime needs a csv dataset to augment");
        if (wants_meta) {
            if (syn.meta_train_steps >= syn.generator.series_len) {
                out.emplace_back("dataset.meta_train_steps must be < series_len");
            } else {
                const std::size_t test_len = syn.generator.series_len - syn.meta_train_steps;
                if (feasible_offset_bound(syn.meta_train_steps, window, c.meta.meta.a) == 0 ||
                    feasible_offset_bound(test_len, window, c.meta.meta.a) == 0) {
                    out.emplace_back("meta split segments are too short to hold a meta-task");
                }
            }
        }
        if (std::find(c.models.begin(), c.models.end(), "oracle") != c.models.end() &&
            lookback < syn.generator.n) {
            out.emplace_back("oracle model needs lookback >= generator n");
        }
    } else {
        const auto& csv = c.dataset.csv;
        if (std::find(c.models.begin(), c.models.end(), "oracle") != c.models.end()) {
            out.emplace_back("oracle model is only available for synthetic datasets");
        }
        if (wants_augmented) {
            add_all("augment.generator: ", c.augment.generator.violations());
            if (c.augment.synthetic_lookback < 2) out.emplace_back("augment.synthetic_lookback must be >= 2");
            if (c.augment.generator.series_len < c.augment.synthetic_lookback + c.horizon) {
                out.emplace_back("augment.generator.series_len too short for the synthetic windows");
            }
        }
        if (csv.path.empty()) {
            out.emplace_back("dataset.path is required for csv datasets");
        } else if (check_data) {
            if (!std::filesystem::exists(csv.path)) {
                out.push_back("CSV file not found: " + csv.path);
            } else {
                try {
                    const auto loaded = data::load_csv(csv.path, csv.value_column, csv.source);
                    const std::size_t len = loaded.series.values.size();
                    add_all("dataset.split: ", csv.split.violations(len));
                    if (csv.split.train.size() < window) out.emplace_back("train split shorter than lookback + horizon");
                    if (csv.split.test.size() < window) out.emplace_back("test split shorter than lookback + horizon");
                    if (wants_meta) {
                        const std::size_t cut = csv.meta_train_end.value_or(csv.split.train.end);
                        if (cut > len || feasible_offset_bound(cut, window, c.meta.meta.a) == 0 ||
                            feasible_offset_bound(len - std::min(cut, len), window, c.meta.meta.a) == 0) {
                            out.emplace_back("meta split segments are too short to hold a meta-task");
                        }
                    }
                } catch (const Error& e) {
                    out.push_back(std::string("dataset: ") + e.what());
                }
            }
        }
    }
    return out;
}

GenerateResult run_generate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    if (config.dataset.kind != DatasetKind::synthetic) {
        throw Error(ErrorCode::invalid_config, "generate requires a synthetic dataset config");
    }
    const auto& syn = config.dataset.synthetic;
    if (const auto problems = syn.generator.violations(); !problems.empty()) {
        throw Error(ErrorCode::invalid_config, "dataset.generator: " + problems.front());
    }
    std::filesystem::create_directories(out_dir);
    const auto corpus = simgen::generate_corpus(syn.generator, syn.count, config.effective_base_seed());
    GenerateResult result;
    json files = json::array();
    for (const auto& series : corpus) {
        const auto path = out_dir / (series.id + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
        out << "t,price\n";
        for (std::size_t t = 0; t < series.prices.size(); ++t) out << t << "," << fmt::format("{}", series.prices[t]) << "\n";
        result.files.push_back(path);
        files.push_back({{"id", series.id}, {"file", path.filename().string()}, {"seed", series.seed}});
    }
    const bool default_rules = syn.generator.rules.centers == simgen::FuzzyRuleSet::evenly_spaced().centers &&
                               syn.generator.rules.widths == simgen::FuzzyRuleSet::evenly_spaced().widths &&
                               syn.generator.rules.consequents == simgen::FuzzyRuleSet::evenly_spaced().consequents;
    const json manifest{
        {"generator", to_json(syn.generator)},
        {"count", syn.count},
        {"base_seed", config.effective_base_seed()},
        {"seed", config.seed},
        {"config_hash", config_hash(config)},
        {"rule_set", default_rules ? "default-stand-in" : "custom"},
        {"membership", "gaussian"},
        {"random_source", "xoshiro256** seeded by splitmix64; Box-Muller normals"},
        {"files", files},
    };
    result.manifest = out_dir / "manifest.json";
    std::ofstream out(result.manifest, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + result.manifest.string());
    out << manifest.dump(2) << "\n";
    return result;
}

BenchmarkResult run_benchmark(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    // Data problems surface from loading below with their own error codes.
    if (const auto problems = validate(config, false); !problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw Error(ErrorCode::invalid_config, msg);
    }
    using Clock = std::chrono::steady_clock;
    std::filesystem::create_directories(out_dir);
    const std::string hash = config_hash(config);
    const std::size_t lookback = config.effective_lookback();
    const std::size_t horizon = config.horizon;
    const std::string& dataset = config.dataset.name;

    const bool with_meta = std::find(config.regimes.begin(), config.regimes.end(), "meta") != config.regimes.end();
    const PreparedData prepared = prepare(config, with_meta);

    eval::EvalReport report;
    report.config_hash = hash;
    report.seed = config.seed;
    json timing = json::array();
    auto record = [&](const std::string& regime, const std::string& model, bool deep,
                      const eval::ForecastRecords& records, Clock::time_point started) {
        const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
        report.add(dataset, regime, model, deep, eval::decompose_horizon(records), seconds);
        timing.push_back({{"dataset", dataset}, {"regime", regime}, {"model", model}, {"runtime_seconds", seconds}});
    };
    auto has_model = [&](const std::string& m) {
        return std::find(config.models.begin(), config.models.end(), m) != config.models.end();
    };

    for (const auto& regime_name : config.regimes) {
        const train::Regime regime = train::parse_regime(regime_name);

        if (regime == train::Regime::normal) {
            if (has_model("persistence")) {
                const auto t0 = Clock::now();
                record("normal", "persistence", false, evaluate_on_test(forecast::PersistenceForecaster{}, prepared, config), t0);
            }
            if (has_model("oracle")) {
                const auto t0 = Clock::now();
                const forecast::TransitionOracleForecaster oracle(config.dataset.synthetic.generator);
                record("normal", "oracle", false, evaluate_on_test(oracle, prepared, config), t0);
            }
            if (has_model("arima")) {
                const auto t0 = Clock::now();
                std::vector<std::vector<double>> histories;
                for (const auto& s : prepared.train) histories.push_back(s.values);
                const auto grid = forecast::order_grid(config.arima.max_p, config.arima.max_d, config.arima.max_q);
                const forecast::ArimaForecaster arima(forecast::arima_select_order(histories, grid));
                record("normal", "arima", false, evaluate_on_test(arima, prepared, config), t0);
                timing.back()["order"] = arima.order().to_string();
            }
        }

        if (!has_model("mlp")) continue;
        const auto t0 = Clock::now();
        forecast::MlpModel model = forecast::MlpModel::init(mlp_sizes(config), config.mlp.activation,
                                                            derive_seed(config.seed, "mlp/init/" + regime_name));
        train::TrainConfig tc = config.train;
        tc.seed = derive_seed(config.seed, "mlp/train/" + regime_name);
        tc.regime = regime;
        const auto log_path = out_dir / ("train_mlp_" + regime_name + ".jsonl");
        const auto ckpt_path = out_dir / ("checkpoint_mlp_" + regime_name + ".json");

        const auto train_set = windows_of(prepared.train, lookback, horizon);
        const auto val_set = windows_of(prepared.val, lookback, horizon);

        if (regime == train::Regime::normal) {
            const auto history = train::train_normal(model, train_set, tc, &val_set);
            write_epoch_log(log_path, history, config.seed, tc.seed, hash);
            write_checkpoint(ckpt_path, model, tc.lr, history.optimizer_state, hash);
            record("normal", "mlp", true, evaluate_on_test(forecast::MlpForecaster(model), prepared, config), t0);
        } else if (regime == train::Regime::augmented) {
            const auto& aug = config.augment;
            const auto corpus = to_raw(simgen::generate_corpus(aug.generator, aug.count, aug.base_seed));
            const auto synthetic = data::subsample(
                data::interpolate_dataset(windows_of(corpus, aug.synthetic_lookback, horizon), lookback),
                train_set.size(), derive_seed(config.seed, "augment/subsample"));
            const auto result = train::train_augmented(model, train_set, synthetic, tc, &val_set);
            write_epoch_log(log_path, result.history, config.seed, tc.seed, hash);
            write_checkpoint(ckpt_path, model, tc.lr, result.history.optimizer_state, hash);
            record("augmented", "mlp", true, evaluate_on_test(forecast::MlpForecaster(model), prepared, config), t0);
        } else {
            const auto& run = config.meta;
            const std::size_t window = lookback + horizon;
            auto tasks_from = [&](const std::vector<data::RawSeries>& series, std::size_t per_series, const char* tag) {
                std::vector<train::MetaTask> tasks;
                for (std::size_t i = 0; i < series.size(); ++i) {
                    train::MetaConfig mc = run.meta;
                    mc.a = feasible_offset_bound(series[i].values.size(), window, run.meta.a);
                    auto part = train::build_meta_tasks(series[i], lookback, horizon, per_series, mc,
                                                        derive_seed(config.seed, std::string(tag) + "/" + std::to_string(i)));
                    std::move(part.begin(), part.end(), std::back_inserter(tasks));
                }
                return tasks;
            };
            const auto meta_train = tasks_from(prepared.meta_train, run.train_tasks_per_series, "meta-train");
            const auto meta_test = tasks_from(prepared.meta_test, run.test_tasks_per_series, "meta-test");
            const std::uint64_t outer_seed = derive_seed(config.seed, "meta/outer");
            const auto history =
                train::fomaml_train(model, std::span<const train::MetaTask>(meta_train), run.meta, outer_seed);
            write_meta_log(log_path, history, config.seed, outer_seed, hash);
            write_checkpoint(ckpt_path, model, run.meta.meta_lr, history.optimizer_state, hash);

            eval::ForecastRecords adapted_records;
            eval::ForecastRecords zero_shot_records;
            const forecast::MlpForecaster zero_shot(model);
            for (const auto& task : meta_test) {
                const auto adapted = train::adapt(model, task, run.meta);
                adapted_records.append(eval::evaluate_windows(forecast::MlpForecaster(as_mlp(*adapted)), task.query));
                zero_shot_records.append(eval::evaluate_windows(zero_shot, task.query));
            }
            record("meta", "mlp", true, adapted_records, t0);
            record("meta-zeroshot", "mlp", true, zero_shot_records, t0);
        }
    }

    BenchmarkResult result;
    result.table = eval::render_report(report, out_dir);
    result.report = std::move(report);
    {
        std::ofstream eff(out_dir / "config.effective.json", std::ios::binary);
        eff << to_json(config).dump(2) << "\n";
    }
    {
        std::ofstream t(out_dir / "timing.json", std::ios::binary);
        t << json{{"config_hash", hash}, {"seed", config.seed}, {"cells", timing}}.dump(2) << "\n";
    }
    return result;
}

}  // namespace marketfc::experiment
