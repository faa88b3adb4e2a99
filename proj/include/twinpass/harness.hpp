#pragma once

#include <functional>
#include <string>

#include "twinpass/gateway.hpp"
#include "twinpass/mcq.hpp"
#include "twinpass/pipeline.hpp"
#include "twinpass/run_store.hpp"

namespace twinpass {

struct RunOptions {
    int concurrency = 4;
    std::string run_id;  // empty: derived from dataset hash + config
    // Called after each persisted result.
    std::function<void(const ItemResult&, size_t done, size_t total)> progress;
    // Polled after each persisted result; true stops the run cleanly
    // with everything acknowledged so far on disk.
    std::function<bool()> should_stop;
};

struct RunSummary {
    std::string run_id;
    size_t total = 0;       // dataset size
    size_t executed = 0;    // items processed this invocation
    size_t done = 0;        // done records after this invocation
    size_t failed = 0;      // failed_transport this invocation
    bool interrupted = false;
};

nlohmann::json config_snapshot(const PipelineConfig& cfg);

// Drives evaluate_item over all pending items of the dataset, with up
// to `concurrency` items in flight. Results are persisted in dataset
// order regardless of completion order, so reruns over the same
// cassette produce byte-identical results files.
RunSummary run_dataset(ChatBackend& backend, const PipelineConfig& cfg,
                       const Dataset& dataset, RunStore& store,
                       const RunOptions& options = {});

}  // namespace twinpass
