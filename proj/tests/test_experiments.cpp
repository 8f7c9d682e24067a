#include "ethq/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace ethq;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("ethq_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

ExperimentConfig small(Experiment e) {
    ExperimentConfig c = ExperimentConfig::defaults(e);
    c.samples = 3;
    c.states = 8;
    return c;
}

}  // namespace

TEST(Config, EmptyDimsIsAValidationError) {
    ExperimentConfig c = ExperimentConfig::defaults(Experiment::page_scaling);
    c.dims.clear();
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Config, JsonOverridesDefaultsAndRejectsUnknownKeys) {
    const auto j = nlohmann::json::parse(R"({"experiment": "suppression-scan", "seed": 9, "dims": [[2, 8]], "samples": 4})");
    const ExperimentConfig c = ExperimentConfig::from_json(j);
    EXPECT_EQ(c.experiment, Experiment::suppression_scan);
    EXPECT_EQ(c.seed, 9u);
    ASSERT_EQ(c.dims.size(), 1u);
    EXPECT_EQ(c.samples, 4);
    EXPECT_EQ(ExperimentConfig::from_json(c.to_json()).to_json(), c.to_json());
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"experiment": "page-scaling", "sampels": 3})")),
                 ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"experiment": "nope"})")), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"experiment": "bbbv", "k_max": "x"})")),
                 ConfigError);
}

TEST(Config, SamplesMustBePositive) {
    ExperimentConfig c = small(Experiment::bbbv);
    c.samples = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Determinism, IdenticalConfigGivesIdenticalCsvBytes) {
    ExperimentConfig c = small(Experiment::suppression_scan);
    c.dims = {{2, 8}, {2, 16}, {2, 32}};
    const RunRecord a = run_experiment(c), b = run_experiment(c);
    EXPECT_EQ(a.tables.at("suppression_scan").str(), b.tables.at("suppression_scan").str());
    c.seed += 1;
    EXPECT_NE(run_experiment(c).tables.at("suppression_scan").str(), a.tables.at("suppression_scan").str());
}

TEST(PageScaling, TrivialSectorStaysBelowHalf) {
    ExperimentConfig c = small(Experiment::page_scaling);
    c.dims = {{2, 2}, {2, 64}};
    c.samples = 100;
    const RunRecord r = run_experiment(c);
    const CsvTable& t = r.tables.at("page_scaling");
    EXPECT_EQ(t.header(), (std::vector<std::string>{"d1", "d2", "sample_mean_D", "bound", "n_samples"}));
    const auto means = t.column("sample_mean_D");
    EXPECT_LE(means[0], 0.5);
    EXPECT_LE(means[1], 0.08838834764831845);
}

TEST(SuppressionScan, SchemaAndVariationalRouteAgree) {
    ExperimentConfig c = small(Experiment::suppression_scan);
    c.dims = {{2, 8}, {2, 16}, {2, 32}};
    const RunRecord r = run_experiment(c);
    EXPECT_EQ(r.tables.at("suppression_scan").header(),
              (std::vector<std::string>{"S", "d1", "d2", "mean_pair_D", "max_pair_D", "forecast_D", "variational_D"}));
    EXPECT_FALSE(r.tolerance_failure.has_value());
    EXPECT_LT(r.results.at("max_variational_gap").get<double>(), 1e-9);
    EXPECT_TRUE(r.results.contains("suppression_slope"));
}

TEST(GroverDistinguish, SchemaAndMeasuredRow) {
    ExperimentConfig c = small(Experiment::grover_distinguish);
    c.dims = {{2, 16}};
    const RunRecord r = run_experiment(c);
    const CsvTable& t = r.tables.at("grover_distinguish");
    EXPECT_EQ(t.header(), (std::vector<std::string>{"D0", "theta_rs_exact", "theta_rs_smallangle", "predicted_iters",
                                                    "simulated_iters"}));
    EXPECT_EQ(t.rows().size(), 7u);
}

TEST(Decompose, RecoversShapesAndWritesDocument) {
    ExperimentConfig c = small(Experiment::decompose);
    const RunRecord r = run_experiment(c);
    EXPECT_TRUE(r.results.at("shapes_match").get<bool>());
    EXPECT_FALSE(r.tolerance_failure.has_value());
    const GeneralizedBipartition bp = decomposition_from_json(r.documents.at("decomposition.json"));
    EXPECT_TRUE(bp.check().ok(bp.ambient_dim()));
    EXPECT_EQ(bp.null_dim(), 1);
}

TEST(ChannelCheck, PassesOnSmallDims) {
    ExperimentConfig c = small(Experiment::channel_check);
    c.null_dim = 1;
    const RunRecord r = run_experiment(c);
    EXPECT_TRUE(r.results.at("pass").get<bool>());
}

TEST(Bbbv, RunsAndRecordsBound) {
    ExperimentConfig c = small(Experiment::bbbv);
    c.qubits = {3};
    c.k_max = 5;
    const RunRecord r = run_experiment(c);
    EXPECT_EQ(r.tables.at("bbbv").rows().size(), 3u * 6u);
}

TEST(WriteRun, EmitsCsvRecordAndPlots) {
    ExperimentConfig c = small(Experiment::page_scaling);
    c.dims = {{2, 4}, {2, 8}};
    const RunRecord r = run_experiment(c);
    const auto dir = scratch("write");
    write_run(r, dir, true);
    EXPECT_TRUE(std::filesystem::exists(dir / "page_scaling.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "page_scaling.svg"));
    const CsvTable back = CsvTable::read(dir / "page_scaling.csv");
    EXPECT_EQ(back.str(), r.tables.at("page_scaling").str());
    const auto rec = nlohmann::json::parse(std::ifstream(dir / "record.json"));
    EXPECT_EQ(rec.at("seed").get<std::uint64_t>(), c.seed);
    EXPECT_EQ(rec.at("version").get<std::string>(), kVersion);
    EXPECT_EQ(rec.at("config").at("experiment").get<std::string>(), "page-scaling");
}

TEST(Io, DoublesUseSeventeenDigitsAndRoundTrip) {
    const double x = 0.1 + 0.2;
    EXPECT_EQ(format_double(x), "0.30000000000000004");
    EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Io, DecompositionJsonRoundTrip) {
    RngStream rng(1);
    const GeneralizedBipartition bp =
        GeneralizedBipartition::from_shapes({{2, 1}, {1, 2}}, 1).conjugated(haar_unitary(5, rng).matrix());
    const GeneralizedBipartition back = decomposition_from_json(nlohmann::json::parse(decomposition_to_json(bp).dump()));
    ASSERT_EQ(back.sector_count(), 2u);
    EXPECT_EQ(back.sector(0).iso, bp.sector(0).iso);
    EXPECT_EQ(back.null_iso(), bp.null_iso());
    EXPECT_THROW(decomposition_from_json(nlohmann::json::parse(R"({"sectors": []})")), std::invalid_argument);
}

TEST(Io, CsvRowLengthIsChecked) {
    CsvTable t({"a", "b"});
    EXPECT_THROW(t.add_row({"1"}), std::invalid_argument);
}

TEST(ParallelMap, ResultsAreOrderedByIndex) {
    const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_map<int>(4, [](std::size_t i) -> int { if (i == 2) throw std::runtime_error("x"); return 0; }),
                 std::runtime_error);
}
