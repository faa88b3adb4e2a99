#include <cstdlib>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "twinpass/calibration.hpp"
#include "twinpass/errors.hpp"
#include "twinpass/harness.hpp"
#include "twinpass/json_extract.hpp"
#include "twinpass/mcq.hpp"
#include "twinpass/pipeline.hpp"
#include "twinpass/router.hpp"
#include "twinpass/run_store.hpp"

namespace {

// Exit codes: 0 success, 2 usage, 3 config, 4 I/O or data,
// 5 partial run (some items failed).
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitPartial = 5;

using namespace twinpass;

DatasetFormat parse_format(const std::string& fmt) {
    if (fmt == "json-array") return DatasetFormat::JsonArray;
    if (fmt == "jsonl") return DatasetFormat::JsonLines;
    throw ConfigError("unknown dataset format: " + fmt);
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? v : fallback;
}

int cmd_validate(const std::string& dataset_path, const std::string& format,
                 const std::string& mapping_path) {
    try {
        FieldMapping mapping;
        if (!mapping_path.empty()) mapping = FieldMapping::from_file(mapping_path);
        Dataset ds = load_dataset(dataset_path, parse_format(format), mapping);
        std::cout << ds.items.size() << " items OK\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        std::cerr << "validation: " << e.what() << '\n';
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "io: " << e.what() << '\n';
        return kExitIo;
    }
}

struct RunArgs {
    std::string dataset_path;
    std::string format = "json-array";
    std::string mapping_path;
    std::string backend = "replay";
    std::string cassette_path;
    std::string base_url;
    std::string api_key;
    std::string config_path;
    std::string thresholds_path;
    std::string out_dir = "runs";
    std::string run_id;
    std::string model;
    std::string eval_model;
    int n_passes = 0;
    int concurrency = 4;
    bool quiet = false;
};

int cmd_run(const RunArgs& args) {
    PipelineConfig cfg;
    if (!args.config_path.empty()) cfg = PipelineConfig::from_file(args.config_path);
    if (!args.model.empty()) cfg.generator_model = args.model;
    if (!args.eval_model.empty()) cfg.evaluator_model = args.eval_model;
    else if (!args.model.empty()) cfg.evaluator_model = args.model;
    if (args.n_passes > 0) {
        cfg.n_passes = args.n_passes;
        cfg.quorum = (cfg.n_passes + 1) / 2;
    }
    if (!args.thresholds_path.empty())
        cfg.thresholds = ThresholdMap::from_file(args.thresholds_path);

    // backend selection happens before any model call
    std::unique_ptr<ChatBackend> live;
    std::unique_ptr<ChatBackend> backend;
    if (args.backend == "replay") {
        if (args.cassette_path.empty())
            throw ConfigError("replay mode requires --cassette");
        backend = std::make_unique<ReplayBackend>(Cassette::load(args.cassette_path));
        cfg.wall_clock_timestamps = false;  // byte-stable reruns
    } else if (args.backend == "live" || args.backend == "record") {
        std::string base_url = args.base_url.empty()
                                   ? env_or("TWINPASS_BASE_URL", "")
                                   : args.base_url;
        std::string api_key =
            args.api_key.empty() ? env_or("TWINPASS_API_KEY", "") : args.api_key;
        if (base_url.empty())
            throw ConfigError("live/record mode requires TWINPASS_BASE_URL or --base-url");
        if (api_key.empty())
            throw ConfigError("live/record mode requires TWINPASS_API_KEY or --api-key");
        live = std::make_unique<LiveBackend>(base_url, api_key);
        if (args.backend == "record") {
            if (args.cassette_path.empty())
                throw ConfigError("record mode requires --cassette");
            backend = std::make_unique<RecordBackend>(*live, args.cassette_path);
        } else {
            backend = std::move(live);
        }
    } else {
        throw ConfigError("unknown backend: " + args.backend);
    }

    FieldMapping mapping;
    if (!args.mapping_path.empty()) mapping = FieldMapping::from_file(args.mapping_path);
    Dataset ds = load_dataset(args.dataset_path, parse_format(args.format), mapping);

    RunStore store(args.out_dir);
    RunOptions opts;
    opts.concurrency = args.concurrency;
    opts.run_id = args.run_id;
    if (!args.quiet) {
        opts.progress = [](const ItemResult& r, size_t done, size_t total) {
            std::cout << "[" << done << "/" << total << "] " << r.item_id << "  "
                      << (r.correct ? "correct" : "wrong") << "  E=";
            if (r.ensemble && r.ensemble->mean)
                std::cout << round_half_up(*r.ensemble->mean, 2);
            else
                std::cout << "-";
            std::cout << "  " << to_string(r.route.zone) << '\n';
        };
    }

    RunSummary summary = run_dataset(*backend, cfg, ds, store, opts);
    std::cout << "run " << summary.run_id << ": " << summary.done << "/"
              << summary.total << " done, " << summary.failed << " failed\n";
    return summary.failed == 0 && summary.done == summary.total ? kExitOk
                                                                : kExitPartial;
}

int cmd_report(const std::string& out_dir, const std::string& run_id, int bins,
               const std::string& thresholds_path, bool no_plots) {
    RunStore store(out_dir);
    if (!store.run_exists(run_id)) {
        std::cerr << "unknown run id: " << run_id << '\n';
        return kExitIo;
    }
    ReportOptions opts;
    opts.m_bins = bins;
    if (!thresholds_path.empty())
        opts.thresholds = ThresholdMap::from_file(thresholds_path);
    std::cout << store.emit_report(run_id, opts, !no_plots);
    return kExitOk;
}

int cmd_route(double value, const std::string& thresholds_path) {
    ThresholdMap map = thresholds_path.empty() ? ThresholdMap::default_map()
                                               : ThresholdMap::from_file(thresholds_path);
    RouteDecision d = route(value, map);
    std::cout << to_string(d.zone) << " / " << to_string(d.action) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twin-pass self-critique ensemble harness for multiple-choice "
                 "LLM benchmarks"};
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "Validate a dataset file");
    std::string v_dataset, v_format = "json-array", v_mapping;
    validate->add_option("--dataset", v_dataset, "Dataset path")->required();
    validate->add_option("--format", v_format, "json-array | jsonl");
    validate->add_option("--mapping", v_mapping, "Field-mapping config path");

    // run
    auto* run = app.add_subcommand("run", "Execute the pipeline over a dataset");
    RunArgs r;
    run->add_option("--dataset", r.dataset_path, "Dataset path")->required();
    run->add_option("--format", r.format, "json-array | jsonl");
    run->add_option("--mapping", r.mapping_path, "Field-mapping config path");
    run->add_option("--backend", r.backend, "live | record | replay");
    run->add_option("--cassette", r.cassette_path, "Cassette file path");
    run->add_option("--base-url", r.base_url, "Endpoint base URL (or TWINPASS_BASE_URL)");
    run->add_option("--api-key", r.api_key, "Bearer token (or TWINPASS_API_KEY)");
    run->add_option("--config", r.config_path, "Pipeline config path");
    run->add_option("--model", r.model, "Generator model id");
    run->add_option("--eval-model", r.eval_model, "Evaluator model id (cross-model critique)");
    run->add_option("--n-passes", r.n_passes, "Number of critique passes");
    run->add_option("--thresholds", r.thresholds_path, "Threshold map path");
    run->add_option("--out", r.out_dir, "Run store directory");
    run->add_option("--resume", r.run_id, "Run id to resume (also used for new runs)");
    run->add_option("--concurrency", r.concurrency, "Concurrent in-flight items");
    run->add_flag("--quiet", r.quiet, "Suppress per-item progress lines");

    // report
    auto* report = app.add_subcommand("report", "Emit the report bundle for a run");
    std::string rep_out = "runs", rep_run, rep_thresholds;
    int rep_bins = 10;
    bool rep_no_plots = false;
    report->add_option("--out", rep_out, "Run store directory");
    report->add_option("--run", rep_run, "Run id")->required();
    report->add_option("--bins", rep_bins, "Reliability bin count");
    report->add_option("--thresholds", rep_thresholds, "Threshold map path");
    report->add_flag("--no-plots", rep_no_plots, "Skip SVG plots");

    // route
    auto* route_cmd = app.add_subcommand("route", "Map an ensemble mean to a zone");
    double route_value = 0.0;
    std::string route_thresholds;
    route_cmd->add_option("value", route_value, "Ensemble mean in [1,5]")->required();
    route_cmd->add_option("--thresholds", route_thresholds, "Threshold map path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(v_dataset, v_format, v_mapping);
        if (*run) return cmd_run(r);
        if (*report)
            return cmd_report(rep_out, rep_run, rep_bins, rep_thresholds, rep_no_plots);
        if (*route_cmd) {
            if (route_value < 1.0 || route_value > 5.0) {
                std::cerr << "route: value must be in [1,5]\n";
                return kExitUsage;
            }
            return cmd_route(route_value, route_thresholds);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "data: " << e.what() << '\n';
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "io: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}
