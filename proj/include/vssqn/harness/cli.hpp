#pragma once

#include "vssqn/harness/experiment.hpp"
#include "vssqn/harness/presets.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

namespace vssqn {

/// Runs cells on `threads` workers. Returns the number of failed cells.
inline std::size_t run_cells(const std::vector<Cell>& cells, const std::string& out_dir, unsigned threads,
                             std::ostream& err) {
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failed{0};
    std::mutex err_mutex;
    ProblemCache cache;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& cell = cells[i];
            try {
                CellOutcome o = run_cell(cell, &cache);
                write_text(out_dir + "/" + cell.label + ".csv", o.csv);
                write_text(out_dir + "/" + cell.label + ".summary", o.summary.str());
            } catch (const std::exception& e) {
                ++failed;
                std::lock_guard<std::mutex> lock(err_mutex);
                err << "error: " << cell.label << ": " << e.what() << "\n";
            }
        }
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return failed;
}

/**
 * `run --config <path> --out <dir> [--seed <u64>] [--preset <name>] [--threads <n>]`
 *
 * Exit codes: 0 success, 1 a run failed, 2 bad arguments or configuration.
 */
inline int cli_run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"variable sample-size stochastic quasi-Newton experiments"};
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "run a configuration or preset");
    std::string config_path, out_dir, preset;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    run->add_option("--config", config_path, "key = value configuration file");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "single seed replacing run.seeds");
    run->add_option("--preset", preset, "built-in experiment; --config keys override it");
    run->add_option("--threads", threads, "cells run concurrently")->check(CLI::PositiveNumber);
    app.add_subcommand("presets", "list the built-in experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        app.exit(e, out, err);
        return 2;
    }

    if (app.got_subcommand("presets")) {
        for (const auto& name : preset_names()) out << name << "\n";
        return 0;
    }

    std::vector<Cell> cells;
    try {
        if (config_path.empty() && preset.empty()) throw ConfigError("--config", "give --config or --preset");
        KeyValueConfig top;
        if (!preset.empty()) top = preset_config(preset);
        if (!config_path.empty()) top.merge(KeyValueConfig::load(config_path));
        cells = expand_cells(top, seed);
        for (const auto& c : cells) validate_cell(c);
        std::filesystem::create_directories(out_dir);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    std::size_t failed = run_cells(cells, out_dir, threads, err);
    out << cells.size() - failed << "/" << cells.size() << " runs written to " << out_dir << "\n";
    return failed == 0 ? 0 : 1;
}

} // namespace vssqn
