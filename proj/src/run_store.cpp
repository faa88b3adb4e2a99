#include "twinpass/run_store.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "twinpass/errors.hpp"

namespace fs = std::filesystem;

namespace twinpass {

using nlohmann::json;

double round_half_up(double v, int decimals) {
    double scale = std::pow(10.0, decimals);
    return std::floor(v * scale + 0.5) / scale;
}

RunStore::RunStore(std::string root_dir) : root_(std::move(root_dir)) {
    fs::create_directories(root_);
}

std::string RunStore::run_dir(const std::string& run_id) const {
    return (fs::path(root_) / run_id).string();
}

bool RunStore::run_exists(const std::string& run_id) const {
    return fs::exists(fs::path(run_dir(run_id)) / "header.json");
}

std::string RunStore::create_run(const std::string& run_id,
                                 const json& config_snapshot, const Dataset& dataset) {
    fs::path dir = run_dir(run_id);
    fs::create_directories(dir);
    fs::path header_path = dir / "header.json";
    if (fs::exists(header_path)) return run_id;  // resuming an existing run

    json header;
    header["run_id"] = run_id;
    header["dataset_name"] = dataset.name;
    header["dataset_hash"] = dataset_content_hash(dataset);
    header["dataset_n"] = dataset.items.size();
    header["config"] = config_snapshot;

    std::ofstream out(header_path);
    if (!out) throw IoError("cannot write run header: " + header_path.string());
    out << header.dump(2) << '\n';
    return run_id;
}

json RunStore::load_header(const std::string& run_id) const {
    fs::path p = fs::path(run_dir(run_id)) / "header.json";
    std::ifstream in(p);
    if (!in) throw IoError("unknown run id: " + run_id);
    json j;
    in >> j;
    return j;
}

std::unordered_set<std::string>& RunStore::done_set_locked(const std::string& run_id) {
    auto it = done_.find(run_id);
    if (it != done_.end()) return it->second;

    std::unordered_set<std::string> done;
    fs::path p = fs::path(run_dir(run_id)) / "results.jsonl";
    if (fs::exists(p)) {
        std::ifstream in(p);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            if (j.at("status").get<std::string>() == "done")
                done.insert(j.at("item_id").get<std::string>());
        }
    }
    return done_.emplace(run_id, std::move(done)).first->second;
}

void RunStore::append_result(const std::string& run_id, const ItemResult& result) {
    if (!run_exists(run_id)) throw IoError("unknown run id: " + run_id);

    std::lock_guard<std::mutex> lock(mutex_);
    auto& done = done_set_locked(run_id);
    if (result.status == ItemStatus::done && done.count(result.item_id))
        throw ValidationError("item " + result.item_id + " already done in run " +
                              run_id);

    fs::path p = fs::path(run_dir(run_id)) / "results.jsonl";
    std::string line = item_result_to_json(result).dump() + "\n";
    FILE* f = std::fopen(p.c_str(), "a");
    if (!f) throw IoError("cannot append to " + p.string());
    if (std::fwrite(line.data(), 1, line.size(), f) != line.size()) {
        std::fclose(f);
        throw IoError("short write to " + p.string());
    }
    std::fflush(f);
    ::fsync(fileno(f));
    std::fclose(f);

    if (result.status == ItemStatus::done) done.insert(result.item_id);
}

std::vector<ItemResult> RunStore::load_results(const std::string& run_id) const {
    fs::path p = fs::path(run_dir(run_id)) / "results.jsonl";
    std::vector<ItemResult> out;
    std::map<std::string, size_t> index;  // item id -> position in out
    if (!fs::exists(p)) return out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ItemResult r = item_result_from_json(json::parse(line));
        auto it = index.find(r.item_id);
        if (it == index.end()) {
            index[r.item_id] = out.size();
            out.push_back(std::move(r));
        } else {
            out[it->second] = std::move(r);  // later record supersedes
        }
    }
    return out;
}

std::vector<std::string> RunStore::resume(const std::string& run_id,
                                          const Dataset& dataset) const {
    json header = load_header(run_id);
    std::string recorded_hash = header.at("dataset_hash").get<std::string>();
    std::string actual_hash = dataset_content_hash(dataset);
    if (recorded_hash != actual_hash)
        throw ValidationError("dataset hash mismatch for run " + run_id +
                              ": recorded " + recorded_hash.substr(0, 12) +
                              "…, got " + actual_hash.substr(0, 12) + "…");

    std::unordered_set<std::string> done;
    for (const auto& r : load_results(run_id)) {
        if (r.status == ItemStatus::done) done.insert(r.item_id);
    }
    std::vector<std::string> pending;
    for (const auto& item : dataset.items) {
        if (!done.count(item.id)) pending.push_back(item.id);
    }
    return pending;
}

// ---------------------------------------------------------------------------
// Report emission

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

json report_row(const std::string& tag, const CalibrationReport& rep) {
    json row;
    row["benchmark"] = tag;
    row["n"] = rep.n;
    row["n_unscored"] = rep.n_unscored;
    row["accuracy"] = rep.accuracy;
    row["ece_raw"] = rep.raw.ece;
    row["ece_mean"] = rep.mean.ece;
    row["ece_median"] = rep.median.ece;
    row["delta_ece_mean_pct"] = rep.delta_ece_mean_pct;
    row["delta_ece_median_pct"] = rep.delta_ece_median_pct;
    if (rep.correlation_mean_signal) row["correlation"] = *rep.correlation_mean_signal;
    else row["correlation"] = nullptr;  // typed undefined, never 0
    return row;
}

void write_bins_csv(const fs::path& path, Signal signal,
                    const std::vector<ReliabilityBin>& bins) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "signal,lower,upper,count,mean_confidence,accuracy\n";
    for (const auto& b : bins) {
        out << to_string(signal) << ',' << fmt(b.lower, 6) << ',' << fmt(b.upper, 6)
            << ',' << b.count << ',' << fmt(b.mean_confidence, 6) << ','
            << fmt(b.accuracy, 6) << '\n';
    }
}

void write_tiers_csv(const fs::path& path, const std::vector<TierRow>& tiers) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "zone,lower,upper,count,accuracy\n";
    for (const auto& t : tiers) {
        out << to_string(t.zone) << ',' << fmt(t.lower, 2) << ',' << fmt(t.upper, 2)
            << ',' << t.count << ',';
        if (t.accuracy) out << fmt(*t.accuracy, 6);
        out << '\n';
    }
}

// Reliability diagram: per-bin accuracy bars plus the diagonal
// perfect-calibration line. No timestamps, byte-stable output.
void write_reliability_svg(const fs::path& path, const std::string& title,
                           const std::vector<ReliabilityBin>& bins) {
    const int W = 420, H = 420, M = 50;  // canvas and margin
    const double plot = W - 2.0 * M;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    // axes
    out << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M
        << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\""
        << H - M << "\" stroke=\"black\"/>\n";
    // diagonal
    out << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M
        << "\" y2=\"" << M << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        double x = M + b.lower * plot;
        double w = (b.upper - b.lower) * plot;
        double h = b.accuracy * plot;
        out << "<rect x=\"" << fmt(x, 2) << "\" y=\"" << fmt(H - M - h, 2)
            << "\" width=\"" << fmt(w, 2) << "\" height=\"" << fmt(h, 2)
            << "\" fill=\"steelblue\" fill-opacity=\"0.7\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           "confidence</text>\n";
    out << "</svg>\n";
}

}  // namespace

std::string RunStore::emit_report(const std::string& run_id,
                                  const ReportOptions& options, bool with_plots) {
    json header = load_header(run_id);
    std::vector<ItemResult> results = load_results(run_id);
    std::vector<ItemResult> done;
    for (auto& r : results)
        if (r.status == ItemStatus::done) done.push_back(std::move(r));
    if (done.empty()) throw ValidationError("run " + run_id + " has no done items");

    // pooled + per-benchmark-tag reports
    CalibrationReport pooled = compute_report(done, options);
    std::map<std::string, std::vector<ItemResult>> by_tag;
    for (const auto& r : done) by_tag[r.benchmark].push_back(r);

    json summary;
    summary["run_id"] = run_id;
    summary["n_done"] = done.size();
    summary["pooled"] = report_row("all", pooled);
    json rows = json::array();
    int mean_wins = 0, cells = 0;
    for (const auto& [tag, rs] : by_tag) {
        CalibrationReport rep = compute_report(rs, options);
        rows.push_back(report_row(tag, rep));
        if (rep.n > 0) {
            ++cells;
            if (rep.mean.ece < rep.median.ece) ++mean_wins;
        }
    }
    summary["per_benchmark"] = std::move(rows);

    // denominator: one cell per benchmark tag present in this run
    json mvm;
    mvm["mean_wins"] = mean_wins;
    mvm["cells"] = cells;
    std::ostringstream mvm_line;
    mvm_line << "mean aggregation achieved lower ECE than median in " << mean_wins
             << " of " << cells << " benchmark cells";
    mvm["line"] = mvm_line.str();
    summary["mean_vs_median"] = std::move(mvm);

    json tiers = json::array();
    for (const auto& t : pooled.tier_table) {
        json tj;
        tj["zone"] = to_string(t.zone);
        tj["lower"] = t.lower;
        tj["upper"] = t.upper;
        tj["count"] = t.count;
        if (t.accuracy) tj["accuracy"] = *t.accuracy;
        else tj["accuracy"] = nullptr;
        tiers.push_back(std::move(tj));
    }
    summary["tiers"] = std::move(tiers);

    fs::path report_dir = fs::path(run_dir(run_id)) / "report";
    fs::create_directories(report_dir);
    {
        std::ofstream out(report_dir / "summary.json");
        if (!out) throw IoError("cannot write summary.json");
        out << summary.dump(2) << '\n';
    }
    write_bins_csv(report_dir / "bins_raw.csv", Signal::raw_verbalized, pooled.raw.bins);
    write_bins_csv(report_dir / "bins_mean.csv", Signal::ensemble_mean,
                   pooled.mean.bins);
    write_bins_csv(report_dir / "bins_median.csv", Signal::ensemble_median,
                   pooled.median.bins);
    write_tiers_csv(report_dir / "tiers.csv", pooled.tier_table);
    if (with_plots) {
        fs::create_directories(report_dir / "plots");
        write_reliability_svg(report_dir / "plots" / "reliability_raw.svg",
                              "Raw verbalized confidence", pooled.raw.bins);
        write_reliability_svg(report_dir / "plots" / "reliability_mean.svg",
                              "Ensemble mean", pooled.mean.bins);
        write_reliability_svg(report_dir / "plots" / "reliability_median.svg",
                              "Ensemble median", pooled.median.bins);
    }

    // printable summary table
    std::ostringstream os;
    os << "benchmark        N     Acc.   ECE_raw  ECE_mean  ECE_med  dECE(%)\n";
    auto print_row = [&os](const std::string& tag, const CalibrationReport& rep) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-14s %5d  %6.3f  %8.3f  %8.3f  %7.3f  %+7.1f\n",
                      tag.c_str(), rep.n, round_half_up(rep.accuracy, 3),
                      round_half_up(rep.raw.ece, 3), round_half_up(rep.mean.ece, 3),
                      round_half_up(rep.median.ece, 3),
                      round_half_up(rep.delta_ece_mean_pct, 1));
        os << buf;
    };
    for (const auto& [tag, rs] : by_tag) print_row(tag, compute_report(rs, options));
    print_row("all", pooled);
    os << mvm_line.str() << '\n';
    return os.str();
}

}  // namespace twinpass
