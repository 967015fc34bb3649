#pragma once

#include "trace/artifact.hpp"
#include "trace/corpus.hpp"
#include "trace/granularity.hpp"
#include "trace/pipeline.hpp"

#include <map>
#include <string>
#include <vector>

namespace trace {

struct ScoreCounts {
    long tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Exact set arithmetic on canonical ids. Conventions at the empty edges:
// both empty -> precision = recall = f1 = 1; empty prediction against a
// non-empty truth -> precision 0; empty truth against a non-empty prediction
// -> recall 0. Throws KindMismatch when either side mixes kinds or the two
// sides disagree.
ScoreCounts score_links(const std::vector<CodeArtifactId>& predicted,
                        const std::vector<CodeArtifactId>& truth);

struct PerProposalScores {
    long proposal_id = 0;
    int ga = 0;  // 1 iff predicted granularity equals the ground truth
    long tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    GranularityLabel predicted_granularity = GranularityLabel::File;
    GranularityLabel truth_granularity = GranularityLabel::File;
};

// Wrong-granularity gate: ga = 0 forces precision = recall = f1 = 0 with
// tp = 0, fp = |links|, fn = |truth.links|; otherwise defers to score_links.
PerProposalScores score_proposal(const LinkSet& link_set, const GroundTruth& truth);

struct MetricMeans {
    std::size_t n = 0;
    double ga = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct AggregateReport {
    std::map<GranularityLabel, MetricMeans> by_granularity;  // keyed by truth granularity
    MetricMeans overall;
};

// Macro averages grouped by TRUTH granularity plus the overall mean.
// Throws EmptyInput on an empty score list.
AggregateReport macro_aggregate(const std::vector<PerProposalScores>& scores);

// Mean metrics per label value; every scored proposal must be labeled.
// Output ordering is bytewise by label.
std::map<std::string, MetricMeans> group_by_label(const std::vector<PerProposalScores>& scores,
                                                  const std::map<long, std::string>& labels);

enum class ReportFormat { Json, Csv };

struct ReportRow {
    std::string group;
    std::size_t n = 0;
    double ga = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

std::vector<ReportRow> report_rows(const AggregateReport& report);
std::vector<ReportRow> report_rows(const std::map<std::string, MetricMeans>& grouped);

// Stable column order (group, n, ga, precision, recall, f1), floats at six
// decimals, deterministic row order.
std::string emit_report(const std::vector<ReportRow>& rows, ReportFormat format);

}  // namespace trace
