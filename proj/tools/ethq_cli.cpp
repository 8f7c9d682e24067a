// ethq_cli: batch driver for the experiments. One subcommand per experiment;
// flags override values from --config. Exit codes: 0 success, 1 invalid
// configuration or input, 2 numerical-tolerance failure.

#include "ethq/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using ethq::ConfigError;
using ethq::Experiment;
using ethq::ExperimentConfig;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> samples;
    bool plots = false;
    std::optional<std::string> dims;
    std::optional<int> states;
    std::optional<int> probes;
    std::optional<double> envelope_f;
    std::optional<double> energy_window;
    std::optional<double> slope;
    std::vector<int> qubits;
    std::optional<int> k_max;
    std::vector<double> d0_values;
    std::optional<ethq::Index> null_dim;
    std::optional<std::string> generators_file;
};

// "2x8,2x16" -> {(2,8), (2,16)}; an empty string gives an empty list.
std::vector<std::pair<ethq::Index, ethq::Index>> parse_dims(const std::string& text) {
    std::vector<std::pair<ethq::Index, ethq::Index>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto x = item.find('x');
        if (x == std::string::npos) throw ConfigError("--dims entries must look like 2x8");
        try {
            out.emplace_back(std::stoll(item.substr(0, x)), std::stoll(item.substr(x + 1)));
        } catch (const std::exception&) {
            throw ConfigError("--dims: cannot parse '" + item + "'");
        }
    }
    return out;
}

ExperimentConfig load_config(Experiment e, const Overrides& o) {
    ExperimentConfig cfg = ExperimentConfig::defaults(e);
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("cannot open config " + o.config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
        }
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (j.contains("experiment") && j["experiment"] != ethq::to_string(e)) {
            throw ConfigError("config experiment '" + j["experiment"].dump() + "' does not match the subcommand");
        }
        j["experiment"] = ethq::to_string(e);
        cfg = ExperimentConfig::from_json(j);
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.samples) cfg.samples = *o.samples;
    if (o.plots) cfg.plots = true;
    if (o.dims) cfg.dims = parse_dims(*o.dims);
    if (o.states) cfg.states = *o.states;
    if (o.probes) cfg.probes = *o.probes;
    if (o.envelope_f) cfg.envelope_f = *o.envelope_f;
    if (o.energy_window) cfg.energy_window = *o.energy_window;
    if (o.slope) cfg.slope = *o.slope;
    if (!o.qubits.empty()) cfg.qubits = o.qubits;
    if (o.k_max) cfg.k_max = *o.k_max;
    if (!o.d0_values.empty()) cfg.d0_values = o.d0_values;
    if (o.null_dim) cfg.null_dim = *o.null_dim;
    if (o.generators_file) cfg.generators_file = *o.generators_file;
    return cfg;
}

void add_common_flags(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "JSON config file");
    sub->add_option("--seed", o.seed, "64-bit seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--samples", o.samples, "Monte Carlo samples per point");
    sub->add_flag("--plots", o.plots, "also write SVG plots");
    sub->add_option("--dims", o.dims, "comma-separated sector shapes, e.g. 2x8,2x16");
    sub->add_option("--states", o.states, "ensemble size per sample");
    sub->add_option("--probes", o.probes, "random probes per ensemble");
    sub->add_option("--envelope-f", o.envelope_f, "envelope constant f");
    sub->add_option("--energy-window", o.energy_window, "energy window width");
    sub->add_option("--slope", o.slope, "slope of the smooth diagonal");
    sub->add_option("--qubits", o.qubits, "qubit counts");
    sub->add_option("--k-max", o.k_max, "largest query count");
    sub->add_option("--d0-values", o.d0_values, "initial trace distances");
    sub->add_option("--null-dim", o.null_dim, "dimension of the null block");
    sub->add_option("--generators-file", o.generators_file, "JSON file with generator matrices");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenstate-thermalization and search experiments"};
    app.require_subcommand(1);
    Overrides overrides;
    const std::vector<std::pair<Experiment, std::string>> commands = {
        {Experiment::decompose, "Wedderburn decomposition of an algebra"},
        {Experiment::channel_check, "coarse-graining channel property checks"},
        {Experiment::page_scaling, "reduced-state distance from maximally mixed vs d2"},
        {Experiment::suppression_scan, "pairwise reduced-state distance vs entropy"},
        {Experiment::converse_check, "bounded rescaled matrix-element residuals"},
        {Experiment::grover_search, "closed form vs state-vector search"},
        {Experiment::grover_distinguish, "iterations to distinguish two states"},
        {Experiment::bbbv, "query deviation bound"},
    };
    std::vector<std::pair<CLI::App*, Experiment>> subs;
    for (const auto& [e, desc] : commands) {
        CLI::App* sub = app.add_subcommand(ethq::to_string(e), desc);
        add_common_flags(sub, overrides);
        subs.emplace_back(sub, e);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    Experiment chosen = Experiment::page_scaling;
    for (const auto& [sub, e] : subs)
        if (sub->parsed()) chosen = e;

    try {
        const ExperimentConfig cfg = load_config(chosen, overrides);
        const ethq::RunRecord rec = ethq::run_experiment(cfg);
        ethq::write_run(rec, cfg.output_dir, cfg.plots);
        std::cout << ethq::to_string(chosen) << ": wrote " << cfg.output_dir.string() << " in " << rec.wall_clock_seconds
                  << " s\n";
        if (rec.tolerance_failure) {
            std::cerr << "tolerance failure: " << *rec.tolerance_failure << '\n';
            return 2;
        }
        return 0;
    } catch (const ethq::NumericalToleranceError& e) {
        std::cerr << "numerical tolerance failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
