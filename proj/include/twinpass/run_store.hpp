#pragma once

#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "twinpass/calibration.hpp"
#include "twinpass/mcq.hpp"
#include "twinpass/pipeline.hpp"

namespace twinpass {

// Append-only run persistence. Layout under the root directory:
//   {run_id}/header.json     run metadata + config snapshot
//   {run_id}/results.jsonl   one ItemResult per line, append-only
//   {run_id}/report/         summary.json, bins_*.csv, tiers.csv, plots/
class RunStore {
  public:
    explicit RunStore(std::string root_dir);

    std::string create_run(const std::string& run_id,
                           const nlohmann::json& config_snapshot,
                           const Dataset& dataset);
    bool run_exists(const std::string& run_id) const;
    nlohmann::json load_header(const std::string& run_id) const;

    // Durably appended (flushed + fsynced) before returning. Appending
    // a second done record for the same item is a ValidationError.
    void append_result(const std::string& run_id, const ItemResult& result);

    // Last record per item, ordered by first appearance. failed_transport
    // records are superseded by a later done record for the same item.
    std::vector<ItemResult> load_results(const std::string& run_id) const;

    // Item ids with no done record, in dataset order. Refuses when the
    // dataset content hash does not match the run header.
    std::vector<std::string> resume(const std::string& run_id,
                                    const Dataset& dataset) const;

    // Writes the report bundle and returns the printable summary table.
    std::string emit_report(const std::string& run_id, const ReportOptions& options,
                            bool with_plots = true);

    std::string run_dir(const std::string& run_id) const;

  private:
    std::unordered_set<std::string>& done_set_locked(const std::string& run_id);

    std::string root_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::unordered_set<std::string>> done_;
};

// Half-up decimal rounding used for printed report values (e.g. 73.0,
// 1.67); internals keep full precision.
double round_half_up(double v, int decimals);

}  // namespace twinpass
