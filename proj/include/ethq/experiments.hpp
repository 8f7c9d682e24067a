// experiments.hpp: reproducible end-to-end runs: configuration, the run
// functions behind each CLI subcommand, and the record they produce.

#pragma once

#include "ethq/io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ethq {

// Invalid configuration or input; the CLI maps it to exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Experiment {
    decompose,
    channel_check,
    page_scaling,
    suppression_scan,
    converse_check,
    grover_search,
    grover_distinguish,
    bbbv,
};

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
    Experiment experiment = Experiment::page_scaling;
    std::uint64_t seed = 1;
    std::vector<std::pair<Index, Index>> dims;  // (d1, d2) per point or per sector
    int samples = 1;
    double envelope_f = 1.0;
    double energy_window = 0.0;
    double slope = 0.0;
    int states = 64;                 // ensemble size per sample (capped at the sector dimension)
    int probes = 5;                  // random Hermitian probes for converse-check
    std::vector<int> qubits;         // grover-search and bbbv
    int k_max = 20;                  // bbbv
    std::vector<double> d0_values;   // grover-distinguish
    Index null_dim = 0;              // decompose
    std::string generators_file;     // decompose: JSON list of generator matrices
    std::filesystem::path output_dir = "out";
    bool plots = false;

    // Defaults for the chosen experiment; keys present in `j` override them.
    static ExperimentConfig defaults(Experiment e);
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    // Throws ConfigError.
    void validate() const;
};

struct RunRecord {
    nlohmann::json config;
    nlohmann::json results;
    std::map<std::string, CsvTable> tables;  // file stem -> table
    std::map<std::string, std::string> plots;  // file name -> SVG
    std::map<std::string, nlohmann::json> documents;  // file name -> JSON
    double wall_clock_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    // Set when a computed check exceeded its tolerance; the CLI exits with 2.
    std::optional<std::string> tolerance_failure;

    nlohmann::json to_json() const;
};

RunRecord run_decompose(const ExperimentConfig& cfg);
RunRecord run_channel_check(const ExperimentConfig& cfg);
RunRecord run_page_scaling(const ExperimentConfig& cfg);
RunRecord run_suppression_scan(const ExperimentConfig& cfg);
RunRecord run_converse_check(const ExperimentConfig& cfg);
RunRecord run_grover_search(const ExperimentConfig& cfg);
RunRecord run_grover_distinguish(const ExperimentConfig& cfg);
RunRecord run_bbbv(const ExperimentConfig& cfg);

// Validates, dispatches, and fills wall-clock, seed, version and config.
RunRecord run_experiment(const ExperimentConfig& cfg);

// Writes <stem>.csv tables, record.json, and (when requested) SVG plots.
void write_run(const RunRecord& record, const std::filesystem::path& dir, bool plots);

// Runs fn(i) for i in [0, n) on a small thread pool. Results are stored by
// index, so the outcome does not depend on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn);

}  // namespace ethq

#include "ethq/detail/parallel.hpp"
