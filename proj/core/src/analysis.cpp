#include "activeteach/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "activeteach/errors.hpp"

namespace activeteach {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string p_text(double p) { return p < 0.001 ? "<0.001" : fmt("%.3f", p); }

}  // namespace

AnalysisReport analyze_metrics(const std::vector<MetricsRow>& rows,
                               const std::vector<std::string>& expected_arms,
                               const std::string& baseline, double significance) {
    std::map<std::string, std::vector<double>> learned;
    std::map<std::string, std::vector<double>> ratio;
    std::vector<std::string> order;
    for (const auto& row : rows) {
        if (!learned.contains(row.teacher)) order.push_back(row.teacher);
        learned[row.teacher].push_back(row.n_learned);
        if (row.ratio) ratio[row.teacher].push_back(*row.ratio);
    }
    for (const auto& arm : expected_arms) {
        if (!learned.contains(arm)) throw ConfigError("missing arm: " + arm);
    }
    if (order.size() < 2) {
        throw ConfigError("analysis needs at least two arms, found " + std::to_string(order.size()));
    }

    AnalysisReport report;
    report.arms = order;
    report.baseline = learned.contains(baseline) ? baseline : order.front();
    report.significance = significance;
    report.comparisons_per_metric = order.size() - 1;

    for (const char* metric : {"n_learned", "ratio"}) {
        auto& table = std::string(metric) == "n_learned" ? learned : ratio;
        for (const auto& arm : order) {
            if (arm == report.baseline) continue;
            const auto& a = table[arm];
            const auto& b = table[report.baseline];
            if (a.empty() || b.empty()) continue;
            ArmComparison c;
            c.metric = metric;
            c.arm = arm;
            c.baseline = report.baseline;
            c.arm_summary = summarize(a);
            c.baseline_summary = summarize(b);
            c.test = mann_whitney_u(a, b);
            c.p_corrected = bonferroni(c.test.p_value, report.comparisons_per_metric);
            c.significant = c.p_corrected < significance;
            report.comparisons.push_back(std::move(c));
        }
    }
    return report;
}

void add_error_series(AnalysisReport& report, const std::vector<ErrorRow>& rows) {
    std::map<std::string, std::vector<double>> sum;
    std::map<std::string, std::vector<std::size_t>> count;
    for (const auto& r : rows) {
        auto& s = sum[r.teacher];
        auto& c = count[r.teacher];
        if (s.size() <= r.session) {
            s.resize(r.session + 1, 0.0);
            c.resize(r.session + 1, 0);
        }
        s[r.session] += r.error;
        ++c[r.session];
    }
    for (auto& [teacher, s] : sum) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (count[teacher][i] > 0) s[i] /= static_cast<double>(count[teacher][i]);
        }
        report.session_error[teacher] = s;
    }
}

void write_report_text(std::ostream& out, const AnalysisReport& report) {
    out << "baseline: " << report.baseline << "\n";
    out << "comparisons per metric: " << report.comparisons_per_metric
        << " (Bonferroni), significance threshold " << report.significance << "\n\n";
    for (const auto& c : report.comparisons) {
        out << c.metric << ": " << c.arm << " vs " << c.baseline << "\n";
        out << "  " << c.arm << ": median " << fmt("%.4g", c.arm_summary.median) << ", IQR ["
            << fmt("%.4g", c.arm_summary.q1) << ", " << fmt("%.4g", c.arm_summary.q3) << "], n="
            << c.arm_summary.count << "\n";
        out << "  " << c.baseline << ": median " << fmt("%.4g", c.baseline_summary.median)
            << ", IQR [" << fmt("%.4g", c.baseline_summary.q1) << ", "
            << fmt("%.4g", c.baseline_summary.q3) << "], n=" << c.baseline_summary.count << "\n";
        out << "  u=" << fmt("%.1f", c.test.u) << ", p=" << p_text(c.test.p_value)
            << ", p_cor=" << p_text(c.p_corrected) << " -> "
            << (c.significant ? "significant difference" : "no significant difference") << "\n\n";
    }
    for (const auto& [teacher, series] : report.session_error) {
        out << "prediction error (" << teacher << "):";
        for (double e : series) out << ' ' << fmt("%.4f", e);
        out << "\n";
    }
}

void write_report_table(std::ostream& out, const AnalysisReport& report) {
    out << "metric\tarm\tbaseline\tn_arm\tn_baseline\tmedian_arm\tq1_arm\tq3_arm\tmedian_baseline"
           "\tq1_baseline\tq3_baseline\tu\tz\tp\tp_corrected\tsignificant\n";
    for (const auto& c : report.comparisons) {
        out << c.metric << '\t' << c.arm << '\t' << c.baseline << '\t' << c.arm_summary.count << '\t'
            << c.baseline_summary.count << '\t' << fmt("%.17g", c.arm_summary.median) << '\t'
            << fmt("%.17g", c.arm_summary.q1) << '\t' << fmt("%.17g", c.arm_summary.q3) << '\t'
            << fmt("%.17g", c.baseline_summary.median) << '\t'
            << fmt("%.17g", c.baseline_summary.q1) << '\t' << fmt("%.17g", c.baseline_summary.q3)
            << '\t' << fmt("%.17g", c.test.u) << '\t' << fmt("%.17g", c.test.z) << '\t'
            << fmt("%.17g", c.test.p_value) << '\t' << fmt("%.17g", c.p_corrected) << '\t'
            << (c.significant ? 1 : 0) << '\n';
    }
}

}  // namespace activeteach
