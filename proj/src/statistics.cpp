#include "eyero/statistics.hpp"

#include "eyero/errors.hpp"
#include "eyero/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eyero {

// ---- gaze entropy --------------------------------------------------------------------

long long GazeGrid::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

GazeGrid bin_gaze(std::span<const GazeSample> samples, int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw ContractError("grid dimensions must be positive");
    GazeGrid g{rows, cols, std::vector<long long>(static_cast<std::size_t>(rows * cols), 0)};
    for (const auto& s : samples) {
        if (!s.valid || !(s.x >= 0.0 && s.x <= 1.0 && s.y >= 0.0 && s.y <= 1.0)) continue;
        const int c = std::min(cols - 1, static_cast<int>(s.x * cols));
        const int r = std::min(rows - 1, static_cast<int>(s.y * rows));
        ++g.counts[static_cast<std::size_t>(r * cols + c)];
    }
    return g;
}

double gaze_entropy(const GazeGrid& grid) {
    const long long total = grid.total();
    if (total == 0) throw UndefinedEntropyError("gaze entropy needs at least one valid sample");
    double h = 0.0;
    for (long long c : grid.counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    // -0.0 for a single occupied cell
    return h == 0.0 ? 0.0 : h;
}

double gaze_entropy(std::span<const GazeSample> samples, int rows, int cols) {
    return gaze_entropy(bin_gaze(samples, rows, cols));
}

// ---- normalization -----------------------------------------------------------------------

double mean_of(std::span<const double> v) {
    if (v.empty()) throw ContractError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) throw ContractError("sample SD needs at least two values");
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> z_normalize(std::span<const double> values, const std::string& group) {
    if (values.size() < 2) {
        throw ContractError("group '" + group + "' needs at least two values to normalize");
    }
    const double m = mean_of(values);
    const double sd = sample_sd(values);
    if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::fabs(m))) {
        throw DegenerateGroupError(group);
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (double x : values) out.push_back((x - m) / sd);
    return out;
}

GroupedValues z_normalize_within_participant(const GroupedValues& groups) {
    GroupedValues out;
    for (const auto& [id, values] : groups) out[id] = z_normalize(values, id);
    return out;
}

// ---- RM-ANOVA -------------------------------------------------------------------------------

std::size_t RMDataset::cells_per_subject() const {
    std::size_t cells = 1;
    for (const auto& f : factors) cells *= f.levels.size();
    return cells;
}

double RMDataset::at(std::size_t subject, std::size_t level) const {
    return values[subject * cells_per_subject() + level];
}

double RMDataset::at(std::size_t subject, std::size_t a, std::size_t b) const {
    return values[subject * cells_per_subject() + a * factors.at(1).levels.size() + b];
}

void RMDataset::validate() const {
    if (subjects.size() < 2) throw ContractError("repeated-measures data needs n >= 2 subjects");
    if (factors.empty() || factors.size() > 2) {
        throw ContractError("repeated-measures data needs one or two factors");
    }
    for (const auto& f : factors) {
        if (f.levels.size() < 2) {
            throw ContractError("factor '" + f.name + "' needs at least two levels");
        }
    }
    if (values.size() != subjects.size() * cells_per_subject()) {
        throw ContractError("repeated-measures data is not balanced and complete");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ContractError("repeated-measures data has a non-finite cell");
    }
}

namespace {

bool error_vanishes(double ss_error, double ss_total) {
    return !(ss_error > 1e-13 * ss_total) || ss_error <= 0.0;
}

AnovaResult make_result(std::string effect, double ss_effect, double ss_error, int df1, int df2,
                        double ss_total) {
    AnovaResult r;
    r.effect = std::move(effect);
    r.df1 = df1;
    r.df2 = df2;
    r.ss_effect = std::max(0.0, ss_effect);
    r.ss_error = ss_error;
    if (error_vanishes(ss_error, ss_total)) {
        r.degenerate = true;
        r.F = std::numeric_limits<double>::quiet_NaN();
        r.p = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    r.F = (r.ss_effect / df1) / (ss_error / df2);
    r.p = special::f_upper_tail(r.F, df1, df2);
    return r;
}

} // namespace

OnewayDecomposition rm_oneway_sums_of_squares(const RMDataset& data) {
    data.validate();
    if (data.factors.size() != 1) throw ContractError("one-way ANOVA needs exactly one factor");
    const std::size_t n = data.subjects.size();
    const std::size_t k = data.factors[0].levels.size();

    const double grand = mean_of(data.values);
    std::vector<double> subject_mean(n, 0.0);
    std::vector<double> level_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            subject_mean[i] += data.at(i, j) / static_cast<double>(k);
            level_mean[j] += data.at(i, j) / static_cast<double>(n);
        }
    }

    OnewayDecomposition d;
    for (double v : data.values) d.ss_total += (v - grand) * (v - grand);
    for (double m : subject_mean) d.ss_subject += static_cast<double>(k) * (m - grand) * (m - grand);
    for (double m : level_mean) d.ss_treatment += static_cast<double>(n) * (m - grand) * (m - grand);
    d.ss_error = d.ss_total - d.ss_subject - d.ss_treatment;
    return d;
}

AnovaResult rm_anova_oneway(const RMDataset& data) {
    const auto d = rm_oneway_sums_of_squares(data);
    const int n = static_cast<int>(data.subjects.size());
    const int k = static_cast<int>(data.factors[0].levels.size());
    auto r = make_result(data.factors[0].name, d.ss_treatment, d.ss_error, k - 1,
                         (k - 1) * (n - 1), d.ss_total);
    if (r.degenerate) {
        throw DegenerateError("error sum of squares is zero; F is undefined for '" + r.effect + "'");
    }
    return r;
}

TwoWayAnova rm_anova_twoway_within(const RMDataset& data) {
    data.validate();
    if (data.factors.size() != 2) throw ContractError("two-way ANOVA needs exactly two factors");
    const std::size_t n = data.subjects.size();
    const std::size_t a = data.factors[0].levels.size();
    const std::size_t b = data.factors[1].levels.size();
    const double N = static_cast<double>(n * a * b);

    // Marginal totals of the grand-mean-centred data; sums of squares follow
    // from squared totals divided by their cell counts.
    const double grand = mean_of(data.values);
    std::vector<double> s_tot(n, 0), a_tot(a, 0), b_tot(b, 0), ab_tot(a * b, 0);
    std::vector<double> as_tot(n * a, 0), bs_tot(n * b, 0);
    double total_sq = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < a; ++j) {
            for (std::size_t l = 0; l < b; ++l) {
                const double y = data.at(i, j, l) - grand;
                total += y;
                total_sq += y * y;
                s_tot[i] += y;
                a_tot[j] += y;
                b_tot[l] += y;
                ab_tot[j * b + l] += y;
                as_tot[i * a + j] += y;
                bs_tot[i * b + l] += y;
            }
        }
    }
    const auto sum_sq = [](const std::vector<double>& v, double divisor) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s / divisor;
    };
    const double correction = total * total / N;
    const double ss_total = total_sq - correction;
    const double ss_s = sum_sq(s_tot, static_cast<double>(a * b)) - correction;
    const double ss_a = sum_sq(a_tot, static_cast<double>(n * b)) - correction;
    const double ss_b = sum_sq(b_tot, static_cast<double>(n * a)) - correction;
    const double ss_ab = sum_sq(ab_tot, static_cast<double>(n)) - correction - ss_a - ss_b;
    const double ss_as = sum_sq(as_tot, static_cast<double>(b)) - correction - ss_a - ss_s;
    const double ss_bs = sum_sq(bs_tot, static_cast<double>(a)) - correction - ss_b - ss_s;
    const double ss_abs = ss_total - ss_s - ss_a - ss_b - ss_ab - ss_as - ss_bs;

    const int dn = static_cast<int>(n) - 1;
    const int da = static_cast<int>(a) - 1;
    const int db = static_cast<int>(b) - 1;
    const auto& fa = data.factors[0].name;
    const auto& fb = data.factors[1].name;
    return TwoWayAnova{
        make_result(fa, ss_a, ss_as, da, da * dn, ss_total),
        make_result(fb, ss_b, ss_bs, db, db * dn, ss_total),
        make_result(fa + " x " + fb, ss_ab, ss_abs, da * db, da * db * dn, ss_total),
    };
}

// ---- paired t -----------------------------------------------------------------------------

PairedResult paired_comparison(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ContractError("paired comparison needs equal lengths");
    if (x.size() < 2) throw ContractError("paired comparison needs n >= 2");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];

    PairedResult r;
    r.df = static_cast<int>(d.size()) - 1;
    r.mean_diff = mean_of(d);
    r.sd_diff = sample_sd(d);
    if (!(r.sd_diff > 1e-14 * std::max(1.0, std::fabs(r.mean_diff)))) {
        throw DegenerateError("paired differences have zero spread");
    }
    r.t = r.mean_diff / (r.sd_diff / std::sqrt(static_cast<double>(d.size())));
    r.p = special::student_t_two_sided_p(r.t, r.df);
    r.p_less = special::student_t_cdf(r.t, r.df);
    return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ContractError("KS test needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return KsResult{d, special::kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

} // namespace eyero
