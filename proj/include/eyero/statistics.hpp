#pragma once

#include "eyero/gaze_map.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace eyero {

// ---- gaze entropy ------------------------------------------------------------

struct GazeGrid {
    int rows = 8;
    int cols = 8;
    std::vector<long long> counts; // row-major, rows x cols

    long long total() const;
};

// Bins valid samples on a uniform rows x cols grid over the unit square;
// x = 1 or y = 1 falls in the last column/row.
GazeGrid bin_gaze(std::span<const GazeSample> samples, int rows, int cols);

// Stationary gaze entropy in bits: -sum p log2 p over occupied cells.
// Throws UndefinedEntropyError when no valid sample is present.
double gaze_entropy(const GazeGrid& grid);
double gaze_entropy(std::span<const GazeSample> samples, int rows = 8, int cols = 8);

// ---- normalization -------------------------------------------------------------

double mean_of(std::span<const double> v);
// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> v);

using GroupedValues = std::map<std::string, std::vector<double>>;

// z-scores each group with its own mean and sample SD. Groups need at least
// two values; zero variance throws DegenerateGroupError naming the group.
GroupedValues z_normalize_within_participant(const GroupedValues& groups);
std::vector<double> z_normalize(std::span<const double> values, const std::string& group = "");

// ---- repeated-measures ANOVA ---------------------------------------------------------

struct Factor {
    std::string name;
    std::vector<std::string> levels;
};

// Fully crossed, balanced within-subject data. Values are stored subject-major,
// then by the first factor's level, then the second's.
struct RMDataset {
    std::vector<std::string> subjects;
    std::vector<Factor> factors;
    std::vector<double> values;

    std::size_t cells_per_subject() const;
    double at(std::size_t subject, std::size_t level) const;
    double at(std::size_t subject, std::size_t a, std::size_t b) const;
    // Throws ContractError when the shape invariants do not hold.
    void validate() const;
};

struct AnovaResult {
    std::string effect;
    int df1 = 0;
    int df2 = 0;
    double F = 0.0;
    double p = 1.0;
    double ss_effect = 0.0;
    double ss_error = 0.0;
    // The error term vanished; F and p are NaN.
    bool degenerate = false;
};

// One within-subject factor. Throws DegenerateError when the error sum of
// squares is zero.
AnovaResult rm_anova_oneway(const RMDataset& data);

struct OnewayDecomposition {
    double ss_total = 0;
    double ss_subject = 0;
    double ss_treatment = 0;
    double ss_error = 0;
};
OnewayDecomposition rm_oneway_sums_of_squares(const RMDataset& data);

struct TwoWayAnova {
    AnovaResult a;
    AnovaResult b;
    AnovaResult ab;
};

// Two within-subject factors, each effect tested against its own
// effect x subject interaction. Degenerate effects are flagged, not thrown.
TwoWayAnova rm_anova_twoway_within(const RMDataset& data);

// ---- paired comparison -----------------------------------------------------------

struct PairedResult {
    double mean_diff = 0;
    double sd_diff = 0;
    double t = 0;
    int df = 0;
    double p = 1;         // two-tailed
    double p_less = 0.5;  // H1: mean(x - y) < 0
};

// Paired t test on x - y. Throws DegenerateError when the differences have
// zero spread.
PairedResult paired_comparison(std::span<const double> x, std::span<const double> y);

// ---- two-sample Kolmogorov-Smirnov ---------------------------------------------------

struct KsResult {
    double d = 0;
    double p = 1;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

} // namespace eyero
