#include "twinpass/harness.hpp"

#include <future>
#include <unordered_map>
#include <unordered_set>

#include "twinpass/errors.hpp"

namespace twinpass {

using nlohmann::json;

json config_snapshot(const PipelineConfig& cfg) {
    json j;
    j["generator_model"] = cfg.generator_model;
    j["evaluator_model"] = cfg.evaluator_model;
    j["n_passes"] = cfg.n_passes;
    j["quorum"] = cfg.quorum;
    j["gen_temperature"] = cfg.gen_temperature;
    j["eval_temperature"] = cfg.eval_temperature;
    j["parse_retries"] = cfg.parse_retries;
    j["max_tokens"] = cfg.max_tokens;
    j["categories"] = cfg.categories;
    j["baseline_template_sha256"] = sha256_hex(cfg.templates.baseline);
    j["eval_template_sha256"] = sha256_hex(cfg.templates.eval);
    json zones = json::array();
    for (const auto& z : cfg.thresholds.zones) {
        zones.push_back({{"name", to_string(z.name)},
                         {"lower", z.lower},
                         {"upper", z.upper},
                         {"action", to_string(z.action)}});
    }
    j["thresholds"] = std::move(zones);
    return j;
}

RunSummary run_dataset(ChatBackend& backend, const PipelineConfig& cfg,
                       const Dataset& dataset, RunStore& store,
                       const RunOptions& options) {
    json snapshot = config_snapshot(cfg);

    std::string run_id = options.run_id;
    if (run_id.empty()) {
        run_id = "run-" +
                 sha256_hex(dataset_content_hash(dataset) + snapshot.dump()).substr(0, 12);
    }
    store.create_run(run_id, snapshot, dataset);

    std::vector<std::string> pending = store.resume(run_id, dataset);
    std::unordered_set<std::string> pending_set(pending.begin(), pending.end());

    std::unordered_map<std::string, const McqItem*> by_id;
    for (const auto& item : dataset.items) by_id[item.id] = &item;

    RunSummary summary;
    summary.run_id = run_id;
    summary.total = dataset.items.size();
    summary.done = summary.total - pending.size();

    int concurrency = options.concurrency > 0 ? options.concurrency : 1;
    size_t next = 0;
    bool stop = false;
    while (next < pending.size() && !stop) {
        size_t wave_end = std::min(pending.size(), next + static_cast<size_t>(concurrency));
        std::vector<std::future<ItemResult>> futures;
        for (size_t i = next; i < wave_end; ++i) {
            const McqItem* item = by_id.at(pending[i]);
            futures.push_back(std::async(std::launch::async, [&backend, &cfg, item] {
                return evaluate_item(backend, cfg, *item);
            }));
        }
        // persist in dataset order regardless of completion order
        for (auto& f : futures) {
            ItemResult result = f.get();
            store.append_result(run_id, result);
            ++summary.executed;
            if (result.status == ItemStatus::done) ++summary.done;
            else ++summary.failed;
            if (options.progress)
                options.progress(result, summary.done, summary.total);
            if (options.should_stop && options.should_stop()) {
                stop = true;
                break;  // in-flight siblings drain unpersisted
            }
        }
        next = wave_end;
    }
    summary.interrupted = stop;
    return summary;
}

}  // namespace twinpass
