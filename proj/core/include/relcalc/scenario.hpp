#pragma once

#include "relcalc/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Scenario execution and fuzzing behind the CLI. JSON stays an
// implementation detail of the .cpp so the core library does not leak the
// vendored parser into its public surface; callers exchange strings.
//
// Scenario files are objects with the fields name, tolerance, spaces,
// objects, sequences, tasks. Objects and sequences are arrays of named
// definitions, evaluated in order; tasks run in order and may store
// results under new names for later tasks. See the bundled scenarios for
// the concrete shape.

namespace relcalc {

struct TaskOutcome {
    int index = -1;
    std::string op;
    std::string status;  // "pass", "fail" or "error"
    double residual = -1.0;  // negative when not applicable
    std::string message;
};

struct ScenarioResult {
    bool parsed = false;     // false means schema or input error (exit 2)
    std::string error;       // parse error with a JSON-path prefix
    std::string name;
    std::vector<TaskOutcome> tasks;
    bool passed = false;     // true when parsed and every task passed
    std::string report_json; // deterministic Report serialization
    std::string text;        // human-readable transcript
};

ScenarioResult run_scenario_text(const std::string& json_text, double default_eps = -1.0);
ScenarioResult run_scenario_file(const std::string& path, double default_eps = -1.0);

struct FuzzConfig {
    int dim_lo = 2;
    int dim_hi = 5;
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    std::string suite = "all";  // all, relation, domination, limits, appendix
};

struct FuzzResult {
    bool valid_config = false;  // false means bad flags (exit 2)
    std::string error;
    std::uint64_t trials_run = 0;
    std::uint64_t failures = 0;
    std::string first_failure;        // battery/identity description, empty if none
    std::string counterexample_json;  // ready-to-run scenario reproducing the first failure
    std::string report_json;
    std::string text;
};

FuzzResult run_fuzz(const FuzzConfig& config);

// Bundled demos, each a scenario with fixed 3x3 inputs next to the
// closed-form answers. demo_scenario_text returns "" for unknown names.
std::vector<std::string> demo_names();
std::string demo_scenario_text(const std::string& name);

}  // namespace relcalc
