#include "marketfc/experiment.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace marketfc::experiment {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("marketfc_exp_" + name);
    fs::remove_all(dir);
    return dir;
}

/// A small synthetic benchmark that finishes in well under a second.
json small_config() {
    return json::parse(R"({
        "seed": 5,
        "dataset": {"kind": "synthetic", "count": 6,
                    "split": {"train_series": 2, "val_series": 2, "test_series": 2},
                    "generator": {"series_len": 160}, "meta_train_steps": 110},
        "min_history": 70,
        "models": ["arima", "mlp"],
        "arima": {"max_p": 1, "max_d": 1, "max_q": 1},
        "mlp": {"hidden": [8]},
        "train": {"epochs": 3, "batch_size": 16},
        "meta": {"meta_iterations": 4, "meta_batch": 2, "train_tasks_per_series": 4, "test_tasks_per_series": 3}
    })");
}

TEST(Config, Defaults) {
    const auto c = parse_config(json::object());
    EXPECT_EQ(c.dataset.kind, DatasetKind::synthetic);
    EXPECT_EQ(c.dataset.synthetic.count, 40u);
    EXPECT_EQ(c.dataset.synthetic.generator.series_len, 500u);
    EXPECT_EQ(c.effective_lookback(), 5u);
    EXPECT_EQ(c.horizon, 10u);
    EXPECT_EQ(c.meta.meta.k, 5u);
    EXPECT_EQ(c.meta.meta.a, 50u);
    const auto csv = parse_config(json::parse(R"({"dataset": {"kind": "csv", "path": "x.csv"}})"));
    EXPECT_EQ(csv.effective_lookback(), 20u);
    EXPECT_EQ(csv.dataset.csv.split.train, (data::IndexRange{0, 2050}));
}

TEST(Config, CsvSplitForms) {
    const auto preset = parse_config(json::parse(R"({"dataset": {"kind": "csv", "path": "x", "split": {"preset": "banknifty"}}})"));
    EXPECT_EQ(preset.dataset.csv.split.test, (data::IndexRange{1194, 1338}));
    const auto explicit_ranges = parse_config(
        json::parse(R"({"dataset": {"kind": "csv", "path": "x", "split": {"train": [0, 10], "val": [10, 12], "test": [12, 20]}}})"));
    EXPECT_EQ(explicit_ranges.dataset.csv.split.val, (data::IndexRange{10, 12}));
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
    EXPECT_ERROR_CODE(parse_config(json::parse(R"({"sed": 1})")), invalid_config);
    EXPECT_ERROR_CODE(parse_config(json::parse(R"({"train": {"epochs": "many"}})")), invalid_config);
    EXPECT_ERROR_CODE(parse_config(json::parse(R"({"mlp": {"activation": "gelu"}})")), invalid_config);
    EXPECT_ERROR_CODE(parse_config(json::parse(R"({"dataset": {"kind": "parquet"}})")), invalid_config);
}

TEST(Config, CanonicalFormRoundTripsAndHashIgnoresOutputDir) {
    const auto c = parse_config(small_config());
    const auto again = parse_config(to_json(c));
    EXPECT_EQ(to_json(again), to_json(c));
    EXPECT_EQ(config_hash(again), config_hash(c));
    EXPECT_EQ(config_hash(c).size(), 16u);
    auto moved = c;
    moved.output_dir = "elsewhere";
    EXPECT_EQ(config_hash(moved), config_hash(c));
    auto reseeded = c;
    reseeded.seed = 6;
    EXPECT_NE(config_hash(reseeded), config_hash(c));
}

TEST(Validate, Ok) { EXPECT_TRUE(validate(parse_config(small_config())).empty()); }

TEST(Validate, MovingAverageOrder) {
    auto doc = small_config();
    doc["dataset"]["generator"]["m"] = 5;
    const auto v = validate(parse_config(doc));
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.find("m < n required") != std::string::npos; }));
}

TEST(Validate, MissingCsvNamesPath) {
    const auto c = parse_config(json::parse(R"({"dataset": {"kind": "csv", "path": "/no/such/prices.csv"}})"));
    const auto v = validate(c);
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.find("/no/such/prices.csv") != std::string::npos; }));
}

TEST(Validate, OtherViolations) {
    auto doc = small_config();
    doc["horizon"] = 5;
    doc["models"] = json::array({"nbeats"});
    doc["regimes"] = json::array({"augmented"});
    const auto v = validate(parse_config(doc));
    EXPECT_GE(v.size(), 3u);
}

TEST(FeasibleOffsetBound, Clipping) {
    EXPECT_EQ(feasible_offset_bound(400, 15, 50), 50u);
    EXPECT_EQ(feasible_offset_bound(100, 15, 50), 35u);
    EXPECT_EQ(feasible_offset_bound(30, 15, 50), 0u);
}

TEST(Generate, FilesManifestAndIdempotence) {
    auto doc = small_config();
    doc["dataset"]["count"] = 2;
    doc["dataset"]["split"] = {{"train_series", 1}, {"val_series", 0}, {"test_series", 1}};
    const auto c = parse_config(doc);
    const auto dir = scratch("generate");
    const auto first = run_generate(c, dir / "a");
    const auto second = run_generate(c, dir / "b");
    ASSERT_EQ(first.files.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto text = slurp(first.files[i]);
        EXPECT_EQ(text, slurp(second.files[i]));
        EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 161);
        EXPECT_EQ(text.rfind("t,price\n", 0), 0u);
    }
    const auto manifest = json::parse(slurp(first.manifest));
    EXPECT_EQ(manifest["config_hash"], config_hash(c));
    EXPECT_EQ(manifest["seed"], 5);
    EXPECT_EQ(manifest["count"], 2);
    EXPECT_EQ(slurp(first.manifest), slurp(second.manifest));
}

TEST(Generate, DefaultCorpusShape) {
    const auto c = parse_config(json::object());
    const auto result = run_generate(c, scratch("generate_default"));
    ASSERT_EQ(result.files.size(), 40u);
    const auto text = slurp(result.files.back());
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 501);
}

TEST(Benchmark, PersistenceOnConstantSeries) {
    auto doc = small_config();
    doc["dataset"]["generator"]["init_vol"] = 0.0;
    doc["models"] = json::array({"persistence"});
    const auto result = run_benchmark(parse_config(doc), scratch("persistence"));
    ASSERT_EQ(result.report.rows.size(), 4u);
    for (const auto& r : result.report.rows) {
        EXPECT_EQ(r.rmse, 0.0);
        EXPECT_EQ(r.mape, 0.0);
    }
}

TEST(Benchmark, ShapeContractAndArtifacts) {
    const auto dir = scratch("shape");
    const auto c = parse_config(small_config());
    const auto result = run_benchmark(c, dir);
    std::set<std::string> models;
    for (const auto& r : result.report.rows) {
        EXPECT_EQ(r.dataset, "synthetic");
        EXPECT_EQ(r.regime, "normal");
        models.insert(r.model);
    }
    EXPECT_EQ(models, (std::set<std::string>{"arima", "mlp"}));
    EXPECT_EQ(result.report.rows.size(), 2u * 4u);
    for (const char* f : {"report.csv", "report.json", "timing.json", "config.effective.json", "train_mlp_normal.jsonl",
                          "checkpoint_mlp_normal.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto log = slurp(dir / "train_mlp_normal.jsonl");
    const auto first_line = json::parse(log.substr(0, log.find('\n')));
    EXPECT_EQ(first_line["config_hash"], config_hash(c));
    EXPECT_EQ(first_line["seed"], 5);
    EXPECT_EQ(json::parse(slurp(dir / "report.json"))["config_hash"], config_hash(c));
}

TEST(Benchmark, MetaRegimeRows) {
    auto doc = small_config();
    doc["models"] = json::array({"mlp"});
    doc["regimes"] = json::array({"meta"});
    const auto result = run_benchmark(parse_config(doc), scratch("meta"));
    std::set<std::string> regimes;
    for (const auto& r : result.report.rows) regimes.insert(r.regime);
    EXPECT_EQ(regimes, (std::set<std::string>{"meta", "meta-zeroshot"}));
}

TEST(Benchmark, IdenticalReports) {
    const auto c = parse_config(small_config());
    const auto dir = scratch("determinism");
    run_benchmark(c, dir / "a");
    run_benchmark(c, dir / "b");
    EXPECT_EQ(slurp(dir / "a" / "report.csv"), slurp(dir / "b" / "report.csv"));
    EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
}

TEST(Benchmark, InvalidConfigIsRejected) {
    auto doc = small_config();
    doc["horizon"] = 3;
    EXPECT_ERROR_CODE(run_benchmark(parse_config(doc), scratch("invalid")), invalid_config);
}

}  // namespace
}  // namespace marketfc::experiment
