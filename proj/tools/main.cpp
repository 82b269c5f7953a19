#include "promptloop/config.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/fetch.hpp"
#include "promptloop/runner.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inference-time prompt refinement and benchmark harness"};
    app.require_subcommand(1);

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download benchmark datasets and write a manifest");
    std::vector<std::string> fetch_datasets;
    std::string fetch_data_dir = "data";
    std::string fetch_source_base;
    fetch->add_option("datasets", fetch_datasets,
                      "datasets to fetch (default: all five benchmarks)");
    fetch->add_option("--data-dir", fetch_data_dir, "dataset directory");
    fetch->add_option("--source-base", fetch_source_base,
                      "override the download source prefix (testing)");

    // run
    auto* run = app.add_subcommand("run", "execute the configured methods over a split");
    std::string run_config_path;
    std::string run_dataset, run_split, run_methods, run_data_dir, run_out_dir;
    int run_concurrency = 0;
    int run_limit = -1;
    run->add_option("--config", run_config_path, "run config file (JSON)")->required();
    run->add_option("--dataset", run_dataset, "override config.dataset");
    run->add_option("--split", run_split, "override config.split");
    run->add_option("--methods", run_methods, "override config.methods (comma-separated)");
    run->add_option("--concurrency", run_concurrency, "override config.concurrency");
    run->add_option("--limit", run_limit, "cap the query count (smoke runs)");
    run->add_option("--data-dir", run_data_dir, "override config.data_dir");
    run->add_option("--out-dir", run_out_dir, "override config.out_dir");

    // report
    auto* report = app.add_subcommand("report", "summarize a results directory");
    std::string report_dir;
    bool report_json = false;
    report->add_option("results_dir", report_dir, "run directory (or parent of run directories)")
        ->required();
    report->add_flag("--json", report_json, "also emit the machine-readable report");

    // trace
    auto* trace = app.add_subcommand("trace", "pretty-print a query's refinement trace");
    std::string trace_file, trace_query;
    trace->add_option("trace_file", trace_file, "traces.jsonl from a run directory")->required();
    trace->add_option("query_id", trace_query, "query id to show")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (fetch->parsed()) {
            promptloop::FetchOptions options;
            options.data_dir = fetch_data_dir;
            options.source_base = fetch_source_base;
            return promptloop::cmd_fetch(fetch_datasets, options, std::cout, std::cerr);
        }
        if (run->parsed()) {
            promptloop::RunConfig config = promptloop::load_run_config(run_config_path);
            if (!run_dataset.empty()) {
                auto task = promptloop::task_from_string(run_dataset);
                if (!task) throw promptloop::ConfigError("unknown dataset: " + run_dataset);
                config.dataset = *task;
            }
            if (!run_split.empty()) {
                auto split = promptloop::split_from_string(run_split);
                if (!split) throw promptloop::ConfigError("unknown split: " + run_split);
                config.split = *split;
            }
            if (!run_methods.empty()) {
                config.methods.clear();
                for (const auto& name : split_csv(run_methods)) {
                    auto method = promptloop::method_from_string(name);
                    if (!method) throw promptloop::ConfigError("unknown method: " + name);
                    config.methods.push_back(*method);
                }
            }
            if (run_concurrency > 0) config.concurrency = run_concurrency;
            if (run_limit >= 0) config.limit = run_limit;
            if (!run_data_dir.empty()) config.data_dir = run_data_dir;
            if (!run_out_dir.empty()) config.out_dir = run_out_dir;
            return promptloop::cmd_run(config, std::cout, std::cerr);
        }
        if (report->parsed()) {
            return promptloop::cmd_report(report_dir, report_json, std::cout, std::cerr);
        }
        if (trace->parsed()) {
            return promptloop::cmd_trace(trace_file, trace_query, std::cout, std::cerr);
        }
    } catch (const promptloop::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 1;
    } catch (const promptloop::Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}
