#include "trace/eval.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace trace {

namespace {

void require_uniform_kind(const std::vector<CodeArtifactId>& ids, const char* side) {
    for (std::size_t i = 1; i < ids.size(); ++i)
        if (ids[i].kind != ids[0].kind)
            throw KindMismatch(std::string(side) + " set mixes artifact kinds (" +
                               ids[0].canonical + " vs " + ids[i].canonical + ")");
}

double six_decimals(double v) { return std::round(v * 1e6) / 1e6; }

std::string format_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

ScoreCounts score_links(const std::vector<CodeArtifactId>& predicted,
                        const std::vector<CodeArtifactId>& truth) {
    require_uniform_kind(predicted, "predicted");
    require_uniform_kind(truth, "truth");
    if (!predicted.empty() && !truth.empty() && predicted[0].kind != truth[0].kind)
        throw KindMismatch("predicted and truth sets are at different granularities");

    std::set<CodeArtifactId> p(predicted.begin(), predicted.end());
    std::set<CodeArtifactId> g(truth.begin(), truth.end());

    ScoreCounts s;
    for (const auto& id : p)
        if (g.count(id)) ++s.tp;
    s.fp = static_cast<long>(p.size()) - s.tp;
    s.fn = static_cast<long>(g.size()) - s.tp;

    if (p.empty() && g.empty()) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = p.empty() ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(p.size());
    s.recall = g.empty() ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(g.size());
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

PerProposalScores score_proposal(const LinkSet& link_set, const GroundTruth& truth) {
    PerProposalScores out;
    out.proposal_id = link_set.proposal_id;
    out.predicted_granularity = link_set.granularity;
    out.truth_granularity = truth.granularity;
    out.ga = link_set.granularity == truth.granularity ? 1 : 0;
    if (out.ga == 0) {
        // Wrong granularity: no link can be correct at that level.
        out.tp = 0;
        out.fp = static_cast<long>(link_set.links.size());
        out.fn = static_cast<long>(truth.links.size());
        out.precision = out.recall = out.f1 = 0.0;
        return out;
    }
    ScoreCounts s = score_links(link_set.links, truth.links);
    out.tp = s.tp;
    out.fp = s.fp;
    out.fn = s.fn;
    out.precision = s.precision;
    out.recall = s.recall;
    out.f1 = s.f1;
    return out;
}

AggregateReport macro_aggregate(const std::vector<PerProposalScores>& scores) {
    if (scores.empty()) throw EmptyInput("no scores to aggregate");
    AggregateReport report;
    std::map<GranularityLabel, std::vector<const PerProposalScores*>> groups;
    for (const auto& s : scores) groups[s.truth_granularity].push_back(&s);

    auto mean_of = [](const std::vector<const PerProposalScores*>& group) {
        MetricMeans m;
        m.n = group.size();
        for (const auto* s : group) {
            m.ga += s->ga;
            m.precision += s->precision;
            m.recall += s->recall;
            m.f1 += s->f1;
        }
        double n = static_cast<double>(group.size());
        m.ga /= n;
        m.precision /= n;
        m.recall /= n;
        m.f1 /= n;
        return m;
    };
    for (const auto& [label, group] : groups) report.by_granularity[label] = mean_of(group);

    std::vector<const PerProposalScores*> all;
    for (const auto& s : scores) all.push_back(&s);
    report.overall = mean_of(all);
    return report;
}

std::map<std::string, MetricMeans> group_by_label(const std::vector<PerProposalScores>& scores,
                                                  const std::map<long, std::string>& labels) {
    std::map<std::string, std::vector<const PerProposalScores*>> groups;
    for (const auto& s : scores) {
        auto it = labels.find(s.proposal_id);
        if (it == labels.end()) throw MissingLabel(s.proposal_id);
        groups[it->second].push_back(&s);
    }
    std::map<std::string, MetricMeans> out;
    for (const auto& [label, group] : groups) {
        MetricMeans m;
        m.n = group.size();
        for (const auto* s : group) {
            m.ga += s->ga;
            m.precision += s->precision;
            m.recall += s->recall;
            m.f1 += s->f1;
        }
        double n = static_cast<double>(group.size());
        m.ga /= n;
        m.precision /= n;
        m.recall /= n;
        m.f1 /= n;
        out[label] = m;
    }
    return out;
}

std::vector<ReportRow> report_rows(const AggregateReport& report) {
    std::vector<ReportRow> rows;
    for (const auto& [label, m] : report.by_granularity)
        rows.push_back({std::string(to_string(label)), m.n, m.ga, m.precision, m.recall, m.f1});
    std::sort(rows.begin(), rows.end(),
              [](const ReportRow& a, const ReportRow& b) { return a.group < b.group; });
    const MetricMeans& o = report.overall;
    rows.push_back({"overall", o.n, o.ga, o.precision, o.recall, o.f1});
    return rows;
}

std::vector<ReportRow> report_rows(const std::map<std::string, MetricMeans>& grouped) {
    std::vector<ReportRow> rows;
    for (const auto& [label, m] : grouped)
        rows.push_back({label, m.n, m.ga, m.precision, m.recall, m.f1});
    return rows;  // std::map iteration is already bytewise
}

std::string emit_report(const std::vector<ReportRow>& rows, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out = "group,n,ga,precision,recall,f1\n";
        for (const auto& r : rows) {
            out += r.group;
            out += ',';
            out += std::to_string(r.n);
            out += ',';
            out += format_float(r.ga);
            out += ',';
            out += format_float(r.precision);
            out += ',';
            out += format_float(r.recall);
            out += ',';
            out += format_float(r.f1);
            out += '\n';
        }
        return out;
    }
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["group"] = r.group;
        row["n"] = r.n;
        row["ga"] = six_decimals(r.ga);
        row["precision"] = six_decimals(r.precision);
        row["recall"] = six_decimals(r.recall);
        row["f1"] = six_decimals(r.f1);
        doc.push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

}  // namespace trace
