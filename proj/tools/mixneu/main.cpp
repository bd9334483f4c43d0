// mixneu: batch driver for the mixed local-nonlocal Neumann solver.

#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mixneu/error.hpp"
#include "mixneu/report.hpp"

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += ch;
        }
    }
    return out;
}

int fail(std::string_view cls, const std::string& message, int code) {
    std::cerr << "{\"error\": \"" << cls << "\", \"message\": \"" << json_escape(message)
              << "\"}\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed local-nonlocal Neumann eigen and source solver"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    for (std::string_view task : mixneu::kTasks) {
        CLI::App* sub = app.add_subcommand(std::string(task));
        sub->add_option("--config", config_path, "JSON run description")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "random seed (overrides config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string task = app.get_subcommands().front()->get_name();

    try {
        mixneu::RunConfig config = mixneu::load_config(config_path);
        config.task = task;
        if (out_dir) config.output = *out_dir;
        if (seed) config.seed = *seed;

        const auto start = std::chrono::steady_clock::now();
        const mixneu::Report report = mixneu::run(config);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        mixneu::emit(report, config.output);
        // Wall time lives outside report.json so reports stay reproducible.
        std::ofstream timing(std::filesystem::path(config.output) / "timing.json");
        timing << "{\"task\": \"" << task << "\", \"seconds\": " << seconds << "}\n";

        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
        int failed = 0;
        for (const auto& c : report.checks) {
            if (!c.passed) {
                ++failed;
                std::cerr << "check failed: " << c.name << " value=" << c.value
                          << " threshold=" << c.threshold << '\n';
            }
        }
        std::cout << task << ": " << report.checks.size() - failed << '/' << report.checks.size()
                  << " checks passed, output in " << config.output << '\n';
        return failed == 0 ? 0 : 4;
    } catch (const mixneu::Error& e) {
        return fail(mixneu::error_class(e.kind()), e.what(), mixneu::exit_code(e.kind()));
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 4);
    }
}
