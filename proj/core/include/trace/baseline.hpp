#pragma once

#include "trace/corpus.hpp"
#include "trace/gateway.hpp"
#include "trace/go_scan.hpp"
#include "trace/granularity.hpp"
#include "trace/pipeline.hpp"
#include "trace/text_prep.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trace {

struct TokenizedDoc {
    std::string id;                   // canonical artifact id or proposal id text
    std::vector<std::string> tokens;  // preprocessed terms
};

enum class Weighting { TfIdf, External };

std::string_view to_string(Weighting weighting);
std::optional<Weighting> weighting_from_string(std::string_view text);

// Remote embedding endpoint used by the External weighting mode.
class EmbeddingClient {
public:
    virtual ~EmbeddingClient() = default;
    // One vector per input text, any consistent dimension.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

std::unique_ptr<EmbeddingClient> make_http_embedding_client(std::string endpoint,
                                                            std::string model,
                                                            std::string api_key);

struct SparseVector {
    std::vector<std::pair<int, double>> entries;  // sorted by dimension

    double dot(const SparseVector& other) const;
    double norm() const;
    void normalize();  // zero vectors stay zero
};

// Immutable document index at one granularity. Document vectors are
// L2-normalized; ids sorted ascending bytewise.
struct VectorIndex {
    Weighting weighting = Weighting::TfIdf;
    GranularityLabel granularity = GranularityLabel::File;
    std::map<std::string, int> vocabulary;  // term -> dimension (TfIdf)
    std::vector<double> idf;                // per dimension (TfIdf)
    std::vector<std::pair<std::string, SparseVector>> docs;
};

// Document text per artifact: directories concatenate their files
// (transitively, bytewise order), files are their contents, functions their
// source spans.
std::string artifact_document_text(const RepoSnapshot& snapshot, const CodeArtifactId& id);

// TfIdf weighting is tf * ln(N/df), L2-normalized. External weighting embeds
// each document via `embeddings` (required in that mode) and normalizes.
VectorIndex build_index(const RepoSnapshot& snapshot, GranularityLabel granularity,
                        Weighting weighting, EmbeddingClient* embeddings = nullptr);

struct RankedHit {
    std::string id;
    double score;
};

// Cosine retrieval: descending similarity, ties ascending bytewise by id,
// min(k, |docs|) results. Throws EmptyIndex on an empty index. External
// weighting needs `embeddings` to embed the query.
std::vector<RankedHit> retrieve_topk(const VectorIndex& index,
                                     const std::vector<std::string>& proposal_tokens, int k,
                                     EmbeddingClient* embeddings = nullptr);

struct BaselineResult {
    std::vector<RankedHit> candidates;
    std::optional<LinkSet> links;  // present only with link decision enabled
};

// Retrieval baseline: top-k localization, optionally followed by the same
// per-pair link decision the pipeline uses. Localization-only mode performs
// zero gateway calls.
BaselineResult run_baseline(const Proposal& proposal, const RepoSnapshot& snapshot,
                            GranularityLabel granularity, int k, bool with_link_decision,
                            const PipelineConfig& config, CompletionClient& gateway,
                            const VectorIndex* prebuilt_index = nullptr,
                            EmbeddingClient* embeddings = nullptr);

}  // namespace trace
