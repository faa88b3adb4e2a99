#include "twinpass/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "twinpass/errors.hpp"

namespace twinpass {

std::string to_string(Signal s) {
    switch (s) {
        case Signal::raw_verbalized: return "raw_verbalized";
        case Signal::ensemble_mean: return "ensemble_mean";
        case Signal::ensemble_median: return "ensemble_median";
    }
    return "?";
}

double normalize_confidence(double s, ConfidenceMap map) {
    if (s < 1.0 || s > 5.0)
        throw DomainError("confidence " + std::to_string(s) + " outside [1,5]");
    switch (map) {
        case ConfidenceMap::affine_s_minus_1_over_4: return (s - 1.0) / 4.0;
        case ConfidenceMap::s_over_5: return s / 5.0;
    }
    return 0.0;
}

namespace {

int bin_index(double unit, int m) {
    int b = static_cast<int>(unit * m);
    if (b >= m) b = m - 1;  // 1.0 closes the last bin
    return b;
}

}  // namespace

std::vector<ReliabilityBin> bin_reliability(const std::vector<ScoredPrediction>& preds,
                                            int m_bins) {
    if (preds.empty()) throw DomainError("bin_reliability: empty prediction set");
    if (m_bins < 1) throw DomainError("bin_reliability: m_bins must be >= 1");

    std::vector<ReliabilityBin> bins(m_bins);
    std::vector<double> conf_sum(m_bins, 0.0);
    std::vector<int> correct_sum(m_bins, 0);
    for (int b = 0; b < m_bins; ++b) {
        bins[b].lower = static_cast<double>(b) / m_bins;
        bins[b].upper = static_cast<double>(b + 1) / m_bins;
    }
    for (const auto& p : preds) {
        int b = bin_index(p.confidence_unit, m_bins);
        bins[b].count += 1;
        conf_sum[b] += p.confidence_unit;
        correct_sum[b] += p.correct ? 1 : 0;
    }
    for (int b = 0; b < m_bins; ++b) {
        if (bins[b].count > 0) {
            bins[b].mean_confidence = conf_sum[b] / bins[b].count;
            bins[b].accuracy = static_cast<double>(correct_sum[b]) / bins[b].count;
        }
    }
    return bins;
}

std::vector<ReliabilityBin> bin_by_value(const std::vector<ScoredPrediction>& preds) {
    if (preds.empty()) throw DomainError("bin_by_value: empty prediction set");
    std::map<double, std::pair<int, int>> groups;  // value -> (count, correct)
    for (const auto& p : preds) {
        auto& g = groups[p.confidence_unit];
        g.first += 1;
        g.second += p.correct ? 1 : 0;
    }
    std::vector<ReliabilityBin> bins;
    bins.reserve(groups.size());
    for (const auto& [value, g] : groups) {
        ReliabilityBin b;
        b.lower = b.upper = value;
        b.count = g.first;
        b.mean_confidence = value;
        b.accuracy = static_cast<double>(g.second) / g.first;
        bins.push_back(b);
    }
    return bins;
}

double ece_from_bins(const std::vector<ReliabilityBin>& bins) {
    long n = 0;
    for (const auto& b : bins) n += b.count;
    if (n == 0) throw DomainError("ece_from_bins: no predictions");
    double ece = 0.0;
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        ece += (static_cast<double>(b.count) / n) *
               std::abs(b.accuracy - b.mean_confidence);
    }
    return ece;
}

double compute_ece(const std::vector<ScoredPrediction>& preds, int m_bins) {
    return ece_from_bins(bin_reliability(preds, m_bins));
}

double delta_ece(double ece_baseline, double ece_improved) {
    if (ece_baseline <= 0.0)
        throw DomainError("delta_ece: baseline ECE must be > 0");
    return (ece_baseline - ece_improved) / ece_baseline * 100.0;
}

std::optional<double> correlation(const std::vector<ScoredPrediction>& preds) {
    if (preds.empty()) throw DomainError("correlation: empty prediction set");
    const size_t n = preds.size();
    double mean_x = 0, mean_y = 0;
    for (const auto& p : preds) {
        mean_x += p.confidence_unit;
        mean_y += p.correct ? 1.0 : 0.0;
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& p : preds) {
        double dx = p.confidence_unit - mean_x;
        double dy = (p.correct ? 1.0 : 0.0) - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant variable
    return sxy / std::sqrt(sxx * syy);
}

std::vector<TierRow> tier_accuracy(const std::vector<ItemResult>& results,
                                   const ThresholdMap& thresholds) {
    std::vector<TierRow> rows;
    rows.reserve(thresholds.zones.size());
    for (const auto& z : thresholds.zones) {
        rows.push_back({z.name, z.lower, z.upper, 0, std::nullopt});
    }
    std::vector<int> correct(rows.size(), 0);
    for (const auto& r : results) {
        if (!r.ensemble || !r.ensemble->quorum_met || !r.ensemble->mean) continue;
        double e = *r.ensemble->mean;
        for (size_t i = 0; i < thresholds.zones.size(); ++i) {
            const Zone& z = thresholds.zones[i];
            bool last = i + 1 == thresholds.zones.size();
            if (e >= z.lower && (e < z.upper || (last && e <= z.upper))) {
                rows[i].count += 1;
                correct[i] += r.correct ? 1 : 0;
                break;
            }
        }
    }
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].count > 0)
            rows[i].accuracy = static_cast<double>(correct[i]) / rows[i].count;
    }
    return rows;
}

std::vector<ScoredPrediction> extract_predictions(
    const std::vector<ItemResult>& results, Signal signal, ConfidenceMap map) {
    std::vector<ScoredPrediction> preds;
    for (const auto& r : results) {
        if (r.status != ItemStatus::done || r.generation.parse_failed()) continue;
        std::optional<double> raw;
        switch (signal) {
            case Signal::raw_verbalized:
                if (r.generation.verbalized_confidence)
                    raw = static_cast<double>(*r.generation.verbalized_confidence);
                break;
            case Signal::ensemble_mean:
                if (r.ensemble && r.ensemble->quorum_met) raw = r.ensemble->mean;
                break;
            case Signal::ensemble_median:
                if (r.ensemble && r.ensemble->quorum_met) raw = r.ensemble->median;
                break;
        }
        if (!raw) continue;
        ScoredPrediction p;
        p.confidence_raw = *raw;
        p.confidence_unit = normalize_confidence(*raw, map);
        p.correct = r.correct;
        p.item_id = r.item_id;
        p.signal = signal;
        preds.push_back(std::move(p));
    }
    return preds;
}

CalibrationReport compute_report(const std::vector<ItemResult>& results,
                                 const ReportOptions& options) {
    CalibrationReport rep;

    auto raw_preds = extract_predictions(results, Signal::raw_verbalized,
                                         options.confidence_map);
    auto mean_preds = extract_predictions(results, Signal::ensemble_mean,
                                          options.confidence_map);
    auto med_preds = extract_predictions(results, Signal::ensemble_median,
                                         options.confidence_map);

    int done = 0, done_correct = 0;
    for (const auto& r : results) {
        if (r.status != ItemStatus::done) continue;
        ++done;  // parse failures count as incorrect in accuracy
        done_correct += r.correct ? 1 : 0;
    }
    rep.n = static_cast<int>(mean_preds.size());
    rep.n_unscored = done - static_cast<int>(mean_preds.size());
    rep.accuracy = done > 0 ? static_cast<double>(done_correct) / done : 0.0;

    if (!raw_preds.empty()) {
        rep.raw.bins = bin_reliability(raw_preds, options.m_bins);
        rep.raw.ece = ece_from_bins(rep.raw.bins);
    }
    if (!mean_preds.empty()) {
        rep.mean.bins = bin_reliability(mean_preds, options.m_bins);
        rep.mean.ece = ece_from_bins(rep.mean.bins);
        rep.correlation_mean_signal = correlation(mean_preds);
    }
    if (!med_preds.empty()) {
        rep.median.bins = bin_reliability(med_preds, options.m_bins);
        rep.median.ece = ece_from_bins(rep.median.bins);
    }
    if (rep.raw.ece > 0.0 && !mean_preds.empty())
        rep.delta_ece_mean_pct = delta_ece(rep.raw.ece, rep.mean.ece);
    if (rep.raw.ece > 0.0 && !med_preds.empty())
        rep.delta_ece_median_pct = delta_ece(rep.raw.ece, rep.median.ece);

    rep.tier_table = tier_accuracy(results, options.thresholds);
    return rep;
}

}  // namespace twinpass
