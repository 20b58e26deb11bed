#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sgsim/errors.hpp"
#include "sgsim/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kPhysicsViolation = 3;
constexpr int kIoError = 4;

unsigned threads_from_env()
{
    const char* env = std::getenv("SGSIM_THREADS");
    if (!env || !*env)
        return 0;
    try {
        const long n = std::stol(env);
        if (n < 1)
            throw std::invalid_argument("");
        return static_cast<unsigned>(n);
    } catch (const std::exception&) {
        throw sgsim::ConfigError("SGSIM_THREADS: expected a positive integer, got \"" + std::string(env) + "\"");
    }
}

int report_outcome(const sgsim::RunReport& r, const std::string& out_dir)
{
    const auto& s = r.report["summary"];
    std::cout << "scenario " << r.report["scenario"].get<std::string>() << " -> " << out_dir << "\n";
    for (const auto& [k, v] : s.items())
        std::cout << "  " << k << " = " << v.dump() << "\n";
    for (const auto& v : r.violations)
        std::cerr << "physics violation: " << v << "\n";
    return r.violations.empty() ? kOk : kPhysicsViolation;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Five-stage Stern-Gerlach interferometer simulator"};
    app.require_subcommand(1);

    sgsim::RunOptions opts;
    opts.tool_version = SGSIM_VERSION;
    std::string out_dir = "sgsim-out";
    std::string format = "csv";
    std::size_t mc_paths = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", opts.seed, "Master seed for Monte-Carlo paths");
        sub->add_option("--out-dir", out_dir, "Output directory");
        sub->add_option("--mc-paths", mc_paths, "Override the Monte-Carlo path count");
        sub->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json-lines"}));
        sub->add_flag("--tolerance-report", opts.tolerance_report, "Write tolerance_report.json");
    };

    std::string file;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("file", file, "Scenario JSON")->required();
    add_common(run);

    std::string name;
    auto* scen = app.add_subcommand("scenario", "Run a built-in scenario");
    scen->add_option("name", name, "Built-in scenario name")->required();
    add_common(scen);

    app.add_subcommand("list-scenarios", "List built-in scenarios");

    std::string param, grid, sweep_file;
    auto* sw = app.add_subcommand("sweep", "Sweep one parameter over a grid");
    sw->add_option("parameter", param, "Parameter name")->required();
    sw->add_option("grid", grid, "start:stop:count or v1,v2,... (pi suffix allowed)")->required();
    sw->add_option("file", sweep_file, "Scenario JSON or built-in name")->required();
    add_common(sw);

    app.add_subcommand("version", "Print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        opts.out_dir = out_dir;
        opts.format = sgsim::format_from_string(format);
        opts.threads = threads_from_env();
        if (mc_paths)
            opts.mc_paths = mc_paths;

        if (app.got_subcommand("version")) {
            std::cout << "sgsim " << SGSIM_VERSION << "\n";
            return kOk;
        }
        if (app.got_subcommand("list-scenarios")) {
            for (const auto& s : sgsim::builtin_scenarios())
                std::cout << s.name << "\t" << s.description << "\n";
            return kOk;
        }
        if (app.got_subcommand("run"))
            return report_outcome(sgsim::run_scenario(sgsim::load_scenario_file(file), opts), out_dir);
        if (app.got_subcommand("scenario"))
            return report_outcome(sgsim::run_scenario(sgsim::builtin_scenario(name), opts), out_dir);
        if (app.got_subcommand("sweep")) {
            const auto values = sgsim::parse_grid(grid);
            const bool is_file = sweep_file.find('/') != std::string::npos ||
                                 sweep_file.find(".json") != std::string::npos;
            const sgsim::Scenario base =
                is_file ? sgsim::load_scenario_file(sweep_file) : sgsim::builtin_scenario(sweep_file);
            const auto sr = sgsim::sweep(param, values, base, opts);
            std::cout << sr.summary.dump(2) << "\n";
            for (const auto& p : sr.points)
                if (!p.violations.empty())
                    return kPhysicsViolation;
            return kOk;
        }
    } catch (const sgsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const sgsim::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const sgsim::PhysicsViolation& e) {
        std::cerr << "physics violation: " << e.what() << "\n";
        return kPhysicsViolation;
    } catch (const sgsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPhysicsViolation;
    }
    return kOk;
}
