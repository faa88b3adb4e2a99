#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twinpass/pipeline.hpp"
#include "twinpass/router.hpp"

namespace twinpass {

enum class Signal { raw_verbalized, ensemble_mean, ensemble_median };
std::string to_string(Signal s);

// Which affine map carries the 1..5 scale onto [0,1].
enum class ConfidenceMap { affine_s_minus_1_over_4, s_over_5 };

struct ScoredPrediction {
    double confidence_raw = 0.0;   // on the 1..5 scale
    double confidence_unit = 0.0;  // normalized to [0,1]
    bool correct = false;
    std::string item_id;
    Signal signal = Signal::raw_verbalized;
};

struct ReliabilityBin {
    double lower = 0.0;
    double upper = 0.0;
    int count = 0;
    double mean_confidence = 0.0;  // 0 when empty
    double accuracy = 0.0;         // 0 when empty
};

struct TierRow {
    ZoneName zone;
    double lower = 0.0;
    double upper = 0.0;
    int count = 0;
    std::optional<double> accuracy;  // undefined when empty
};

struct SignalStats {
    double ece = 0.0;
    std::vector<ReliabilityBin> bins;
};

struct CalibrationReport {
    int n = 0;           // scored predictions per signal
    int n_unscored = 0;  // parse failures, excluded from the bins
    double accuracy = 0.0;
    SignalStats raw;
    SignalStats mean;
    SignalStats median;
    double delta_ece_mean_pct = 0.0;
    double delta_ece_median_pct = 0.0;
    std::optional<double> correlation_mean_signal;
    std::vector<TierRow> tier_table;
};

// (s - 1) / 4 by default; throws DomainError outside [1,5].
double normalize_confidence(double s,
                            ConfidenceMap map = ConfidenceMap::affine_s_minus_1_over_4);

// m equal-width bins on [0,1]; bin b covers [b/m, (b+1)/m), last bin
// closed at 1.0.
std::vector<ReliabilityBin> bin_reliability(const std::vector<ScoredPrediction>& preds,
                                            int m_bins);

// One bin per distinct confidence value; removes binning artifacts for
// the discrete 1..5 signals.
std::vector<ReliabilityBin> bin_by_value(const std::vector<ScoredPrediction>& preds);

// ECE = sum_b (n_b/n) * |acc_b - conf_b| over equal-width bins.
double compute_ece(const std::vector<ScoredPrediction>& preds, int m_bins);

double ece_from_bins(const std::vector<ReliabilityBin>& bins);

// Relative improvement in percent: (base - improved) / base * 100.
double delta_ece(double ece_baseline, double ece_improved);

// Point-biserial (Pearson against 0/1 correctness); nullopt when either
// variable is constant.
std::optional<double> correlation(const std::vector<ScoredPrediction>& preds);

// Per-zone count and empirical accuracy of items whose ensemble mean
// falls in the zone; empty zones report an undefined accuracy.
std::vector<TierRow> tier_accuracy(const std::vector<ItemResult>& results,
                                   const ThresholdMap& thresholds);

// Extracts the per-signal prediction sets from pipeline results.
// Parse-failure and quorum-failure items are skipped (counted by the
// caller as unscored).
std::vector<ScoredPrediction> extract_predictions(
    const std::vector<ItemResult>& results, Signal signal,
    ConfidenceMap map = ConfidenceMap::affine_s_minus_1_over_4);

struct ReportOptions {
    int m_bins = 10;
    ConfidenceMap confidence_map = ConfidenceMap::affine_s_minus_1_over_4;
    ThresholdMap thresholds = ThresholdMap::default_map();
};

CalibrationReport compute_report(const std::vector<ItemResult>& results,
                                 const ReportOptions& options = {});

}  // namespace twinpass
