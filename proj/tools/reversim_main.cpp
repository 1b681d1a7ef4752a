#include "reversim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

using reversim::RunOptions;
using reversim::ScenarioOutcome;

void print_outcome(const ScenarioOutcome& outcome) {
    std::cout << "scenario: " << outcome.name << " (" << outcome.kind << ")\n";
    for (const auto& [key, value] : outcome.summary.items()) {
        if (key == "name" || key == "kind" || key == "checks" || key == "passed") continue;
        std::cout << "  " << key << ": " << value.dump() << "\n";
    }
    for (const auto& check : outcome.checks) {
        std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.description;
        if (!check.passed && !check.witness.empty()) std::cout << " -- " << check.witness;
        std::cout << "\n";
    }
    std::cout << "result: " << (outcome.passed ? "PASS" : "FAIL") << "\n";
}

int run_command(const std::string& path, const RunOptions& opts) {
    try {
        const ScenarioOutcome outcome = reversim::run_scenario_file(path, opts);
        const auto written = reversim::write_reports(outcome, opts);
        print_outcome(outcome);
        for (const auto& file : written) std::cout << "wrote " << file << "\n";
        if (!outcome.passed) {
            for (const auto& check : outcome.checks) {
                if (!check.passed) {
                    std::cerr << "check failed: " << check.description;
                    if (!check.witness.empty()) std::cerr << " -- " << check.witness;
                    std::cerr << "\n";
                    break;
                }
            }
            return 1;
        }
        return 0;
    } catch (const reversim::ValidationError& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int list_command() {
    std::cout << "bundled scenarios (run with: reversim run scenarios/<file>):\n";
    for (const auto& entry : reversim::scenario_catalog()) {
        std::cout << "  " << entry.name << "  [" << entry.kind << "]  " << entry.topic << "  ("
                  << entry.file << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reversim: exact measurement-sequence statistics, their time reversals, "
                 "Markov-chain reversal, and discrete mechanical reversibility"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<double> tol;
    unsigned workers = 1;

    CLI::App* run = app.add_subcommand("run", "run a scenario file and report its checks");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--seed", seed, "override the scenario's RNG seed");
    run->add_option("--samples", samples, "override the scenario's sample count");
    run->add_option("--tol", tol, "fallback tolerance for checks without an explicit one");
    run->add_option("--out", out_dir, "directory for CSV/JSON report files");
    run->add_option("--format", format, "report file format")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    run->add_option("--workers", workers, "sampler worker threads")->check(CLI::PositiveNumber);

    CLI::App* list = app.add_subcommand("list", "list the bundled scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) return list_command();

    RunOptions opts;
    opts.seed = seed;
    opts.samples = samples;
    opts.tol = tol;
    opts.out_dir = out_dir;
    opts.workers = workers;
    if (format == "json") {
        opts.format = RunOptions::Format::Json;
    } else if (format == "both") {
        opts.format = RunOptions::Format::Both;
    } else {
        opts.format = RunOptions::Format::Csv;
    }
    if (const char* cap = std::getenv("REVERSIM_ENUM_CAP")) {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(cap, &end, 10);
        if (end == cap || *end != '\0' || value == 0) {
            std::cerr << "invalid REVERSIM_ENUM_CAP value '" << cap << "'\n";
            return 2;
        }
        opts.enumeration_cap = value;
    }
    return run_command(scenario_path, opts);
}
