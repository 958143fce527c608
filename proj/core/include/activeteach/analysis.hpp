#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "activeteach/experiment_io.hpp"
#include "activeteach/stats.hpp"

namespace activeteach {

struct ArmComparison {
    std::string metric;  // "n_learned" or "ratio"
    std::string arm;
    std::string baseline;
    Summary arm_summary;
    Summary baseline_summary;
    MannWhitneyResult test;  // u oriented as arm vs baseline
    double p_corrected = 1.0;
    bool significant = false;
};

struct AnalysisReport {
    std::vector<std::string> arms;
    std::string baseline;
    std::size_t comparisons_per_metric = 0;
    double significance = 0.05;
    std::vector<ArmComparison> comparisons;
    /// teacher -> mean prediction error per session across learners.
    std::map<std::string, std::vector<double>> session_error;
};

/**
 * Compares every arm against the baseline on items learned and on the learned/seen ratio
 * (learners with nothing seen are dropped from the ratio comparison). p-values are
 * Bonferroni-corrected by the number of comparisons per metric.
 *
 * `expected_arms`, when non-empty, must all be present (ConfigError "missing arm: ...").
 * At least two arms are required.
 */
AnalysisReport analyze_metrics(const std::vector<MetricsRow>& rows,
                               const std::vector<std::string>& expected_arms,
                               const std::string& baseline = "leitner", double significance = 0.05);

void add_error_series(AnalysisReport& report, const std::vector<ErrorRow>& rows);

void write_report_text(std::ostream& out, const AnalysisReport& report);
/// comparisons.tsv
void write_report_table(std::ostream& out, const AnalysisReport& report);

}  // namespace activeteach
