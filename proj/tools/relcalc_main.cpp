#include "relcalc/scenario.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <string>

namespace {

// Exit codes: 0 all pass, 1 assertion or task failure, 2 input/schema error.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) return false;
    out << content;
    return static_cast<bool>(out);
}

int run_command(const std::string& file, const std::string& json_out, double eps) {
    relcalc::ScenarioResult res = relcalc::run_scenario_file(file, eps);
    if (!res.parsed) {
        std::cerr << "error: " << res.error << "\n";
        return kExitInput;
    }
    std::cout << res.text;
    if (!json_out.empty() && !write_file(json_out, res.report_json)) {
        std::cerr << "error: cannot write " << json_out << "\n";
        return kExitInput;
    }
    return res.passed ? kExitPass : kExitFail;
}

int fuzz_command(relcalc::FuzzConfig config, const std::string& dims, const std::string& json_out) {
    const auto sep = dims.find("..");
    bool ok = sep != std::string::npos;
    if (ok) {
        try {
            config.dim_lo = std::stoi(dims.substr(0, sep));
            config.dim_hi = std::stoi(dims.substr(sep + 2));
        } catch (const std::exception&) {
            ok = false;
        }
    }
    if (!ok) {
        std::cerr << "error: --dims expects a range like 2..5\n";
        return kExitInput;
    }
    relcalc::FuzzResult res = relcalc::run_fuzz(config);
    if (!res.valid_config) {
        std::cerr << "error: " << res.error << "\n";
        return kExitInput;
    }
    std::cout << res.text;
    if (!json_out.empty() && !write_file(json_out, res.report_json)) {
        std::cerr << "error: cannot write " << json_out << "\n";
        return kExitInput;
    }
    return res.failures == 0 ? kExitPass : kExitFail;
}

int demo_command(const std::string& name) {
    const std::string text = relcalc::demo_scenario_text(name);
    if (text.empty()) {
        std::cerr << "error: unknown demo \"" << name << "\" (expected";
        for (const auto& n : relcalc::demo_names()) std::cerr << " " << n;
        std::cerr << ")\n";
        return kExitInput;
    }
    relcalc::ScenarioResult res = relcalc::run_scenario_text(text);
    if (!res.parsed) {
        std::cerr << "error: " << res.error << "\n";
        return kExitInput;
    }
    std::cout << res.text;
    return res.passed ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"calculus of linear relations: scenarios, fuzzing and demos"};
    app.require_subcommand(1);

    std::string run_file;
    std::string run_json_out;
    double run_eps = -1.0;
    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("file", run_file, "scenario JSON file")->required();
    run->add_option("--json-out", run_json_out, "write the full JSON report to this path");
    run->add_option("--eps", run_eps, "default comparison tolerance (1e-6 if unset)");

    relcalc::FuzzConfig config;
    std::string fuzz_dims = "2..5";
    std::string fuzz_json_out;
    CLI::App* fuzz = app.add_subcommand("fuzz", "randomized invariant checking");
    fuzz->add_option("--dims", fuzz_dims, "dimension range A..B")->capture_default_str();
    fuzz->add_option("--trials", config.trials, "number of trials")->capture_default_str();
    fuzz->add_option("--seed", config.seed, "RNG seed")->capture_default_str();
    fuzz->add_option("--suite", config.suite, "all, relation, domination, limits or appendix")
        ->capture_default_str();
    fuzz->add_option("--json-out", fuzz_json_out, "write the full JSON report to this path");

    std::string demo_name;
    CLI::App* demo = app.add_subcommand("demo", "run a bundled example scenario");
    demo->add_option("name", demo_name, "scaling-up, scaling-down, truncation or pipeline")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitInput;
    }

    if (run->parsed()) return run_command(run_file, run_json_out, run_eps);
    if (fuzz->parsed()) return fuzz_command(config, fuzz_dims, fuzz_json_out);
    return demo_command(demo_name);
}
