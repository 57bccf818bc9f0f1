#pragma once

#include "eyero/replay.hpp"
#include "eyero/statistics.hpp"
#include "eyero/study_design.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eyero {

enum class Metric { ResponseTime, Missed, Accuracy, Entropy };

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::ResponseTime, Metric::Missed,
                                                      Metric::Accuracy, Metric::Entropy};

std::string_view to_string(Metric m); // "rt", "missed", "accuracy", "entropy"
Metric metric_from_string(std::string_view name);

using ConfigRow = std::array<std::optional<double>, kSessionsPerStudy>;

// Raw per-session metric values, indexed [metric][participant][config_index].
struct StudyMetrics {
    std::vector<std::string> participants; // sorted
    std::array<std::vector<ConfigRow>, 4> values;

    const std::vector<ConfigRow>& of(Metric m) const {
        return values[static_cast<std::size_t>(m)];
    }
};

struct GridSize {
    int rows = 8;
    int cols = 8;
};

// "8x8" -> {8, 8}. Throws ValidationError.
GridSize parse_grid(std::string_view text);

StudyMetrics compute_study_metrics(const StudyTables& tables, GridSize grid = {});

// Per-participant z-scores of one metric over the 12 configs. Throws
// MissingCellError listing every absent (participant, config) cell and
// DegenerateGroupError for a participant with zero spread.
std::vector<std::array<double, kSessionsPerStudy>> normalized_metric(const StudyMetrics& m,
                                                                     Metric metric);

struct MeanSd {
    double mean = 0;
    double sd = 0;
};

struct ConditionSummaryRow {
    SessionConfig config;
    // Indexed by Metric. Empty when some participant has zero spread in that
    // metric, so its z-scores do not exist.
    std::array<std::optional<MeanSd>, 4> metrics;
};

// Twelve rows in canonical config order; every metric normalized within
// participant before aggregation. Needs at least two participants. Missing
// cells throw MissingCellError.
std::vector<ConditionSummaryRow> condition_summary(const StudyMetrics& m);

struct EntropyHeatmap {
    std::vector<std::string> participants;
    std::vector<std::string> columns; // config labels, canonical order
    std::vector<std::array<double, kSessionsPerStudy>> cells;
};

EntropyHeatmap entropy_heatmap(const StudyMetrics& m);
void write_heatmap_csv(const EntropyHeatmap& h, const std::filesystem::path& path);
void write_summary_csv(const std::vector<ConditionSummaryRow>& rows,
                       const std::filesystem::path& path);

// Statistical tests for one metric, on within-participant z-scores.
struct StratumTests {
    DurationClass duration;
    bool distraction;
    std::optional<AnovaResult> feedback; // one-way over the 3 feedback modes
    std::string feedback_error;
    struct Pair {
        FeedbackMode x;
        FeedbackMode y;
        MeanSd x_summary;
        MeanSd y_summary;
        std::optional<PairedResult> test;
        std::string error;
    };
    std::vector<Pair> pairs;
};

struct MetricReport {
    Metric metric;
    std::string error; // set when the metric could not be normalized
    std::optional<TwoWayAnova> feedback_by_duration;    // averaged over distraction
    std::optional<TwoWayAnova> feedback_by_distraction; // averaged over duration
    std::vector<StratumTests> strata;
};

// Dataset for the two within-subject factors `feedback` and either duration
// or distraction, averaging over the remaining factor.
RMDataset feedback_dataset(const StudyMetrics& m, Metric metric, bool by_duration);
RMDataset stratum_dataset(const StudyMetrics& m, Metric metric, DurationClass d, bool distraction);

MetricReport analyze_metric(const StudyMetrics& m, Metric metric);

// "F(2,40) = 3.3135, p = 0.0466"
std::string format_anova(const AnovaResult& r);
std::string format_report(const std::vector<MetricReport>& reports, std::size_t participants);
void write_tests_csv(const std::vector<MetricReport>& reports, const std::filesystem::path& dir);

} // namespace eyero
