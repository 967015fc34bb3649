#include "trace/baseline.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace trace {

std::string_view to_string(Weighting weighting) {
    return weighting == Weighting::TfIdf ? "tfidf" : "external";
}

std::optional<Weighting> weighting_from_string(std::string_view text) {
    if (text == "tfidf") return Weighting::TfIdf;
    if (text == "external") return Weighting::External;
    return std::nullopt;
}

double SparseVector::dot(const SparseVector& other) const {
    double sum = 0.0;
    auto a = entries.begin();
    auto b = other.entries.begin();
    while (a != entries.end() && b != other.entries.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            sum += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return sum;
}

double SparseVector::norm() const {
    double sum = 0.0;
    for (const auto& [dim, w] : entries) sum += w * w;
    return std::sqrt(sum);
}

void SparseVector::normalize() {
    double n = norm();
    if (n == 0.0) return;
    for (auto& [dim, w] : entries) w /= n;
}

std::string artifact_document_text(const RepoSnapshot& snapshot, const CodeArtifactId& id) {
    switch (id.kind) {
        case ArtifactKind::File:
            return snapshot.content_of(id);
        case ArtifactKind::Function:
            return snapshot.function_span_text(id);
        case ArtifactKind::Directory: {
            if (!snapshot.has_directory(id))
                throw UnknownArtifact("directory not in snapshot: " + id.canonical);
            std::string text;
            for (const auto& file : snapshot.files())
                if (is_under(file, id)) text += snapshot.content_of(file);
            return text;
        }
    }
    return {};
}

namespace {

std::vector<std::pair<std::string, std::string>> documents_at(const RepoSnapshot& snapshot,
                                                              GranularityLabel granularity) {
    std::vector<std::pair<std::string, std::string>> docs;
    switch (granularity) {
        case GranularityLabel::Directory:
            for (const auto& dir : snapshot.directories())
                docs.emplace_back(dir.canonical, artifact_document_text(snapshot, dir));
            break;
        case GranularityLabel::File:
            for (const auto& file : snapshot.files())
                docs.emplace_back(file.canonical, snapshot.content_of(file));
            break;
        case GranularityLabel::Function:
            for (const auto& file : snapshot.files())
                for (const auto& sig : snapshot.functions_of(file)) {
                    CodeArtifactId id = sig.artifact();
                    docs.emplace_back(id.canonical, snapshot.function_span_text(id));
                }
            break;
    }
    std::sort(docs.begin(), docs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return docs;
}

SparseVector dense_to_sparse(const std::vector<double>& dense) {
    SparseVector v;
    v.entries.reserve(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i)
        v.entries.emplace_back(static_cast<int>(i), dense[i]);
    return v;
}

}  // namespace

VectorIndex build_index(const RepoSnapshot& snapshot, GranularityLabel granularity,
                        Weighting weighting, EmbeddingClient* embeddings) {
    VectorIndex index;
    index.weighting = weighting;
    index.granularity = granularity;
    auto docs = documents_at(snapshot, granularity);

    if (weighting == Weighting::External) {
        if (!embeddings)
            throw ConfigError("external weighting requires an embedding client");
        std::vector<std::string> texts;
        texts.reserve(docs.size());
        for (const auto& [id, text] : docs) texts.push_back(text);
        auto vectors = embeddings->embed(texts);
        if (vectors.size() != docs.size())
            throw TransportError("embedding endpoint returned " + std::to_string(vectors.size()) +
                                 " vectors for " + std::to_string(docs.size()) + " documents");
        for (std::size_t i = 0; i < docs.size(); ++i) {
            SparseVector v = dense_to_sparse(vectors[i]);
            v.normalize();
            index.docs.emplace_back(docs[i].first, std::move(v));
        }
        return index;
    }

    // TfIdf: tokenize, build the vocabulary, then weight tf * ln(N/df).
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(docs.size());
    for (const auto& [id, text] : docs) tokenized.push_back(preprocess_text(text));

    std::map<std::string, int> df;
    for (const auto& tokens : tokenized) {
        std::unordered_map<std::string, bool> seen;
        for (const auto& t : tokens)
            if (!seen.count(t)) {
                seen[t] = true;
                ++df[t];
            }
    }
    int dim = 0;
    for (const auto& [term, count] : df) index.vocabulary[term] = dim++;
    index.idf.resize(static_cast<std::size_t>(dim));
    double n_docs = static_cast<double>(docs.size());
    for (const auto& [term, count] : df)
        index.idf[static_cast<std::size_t>(index.vocabulary[term])] =
            std::log(n_docs / static_cast<double>(count));

    for (std::size_t i = 0; i < docs.size(); ++i) {
        std::unordered_map<int, double> tf;
        for (const auto& t : tokenized[i]) ++tf[index.vocabulary[t]];
        SparseVector v;
        v.entries.reserve(tf.size());
        for (const auto& [d, count] : tf) {
            double w = count * index.idf[static_cast<std::size_t>(d)];
            if (w != 0.0) v.entries.emplace_back(d, w);
        }
        std::sort(v.entries.begin(), v.entries.end());
        v.normalize();
        index.docs.emplace_back(docs[i].first, std::move(v));
    }
    return index;
}

std::vector<RankedHit> retrieve_topk(const VectorIndex& index,
                                     const std::vector<std::string>& proposal_tokens, int k,
                                     EmbeddingClient* embeddings) {
    if (index.docs.empty()) throw EmptyIndex("index holds no documents");
    if (k < 1) throw ShapeError("k must be >= 1");

    SparseVector query;
    if (index.weighting == Weighting::External) {
        if (!embeddings)
            throw ConfigError("external weighting requires an embedding client for queries");
        std::string text;
        for (const auto& t : proposal_tokens) {
            if (!text.empty()) text.push_back(' ');
            text += t;
        }
        auto vectors = embeddings->embed({text});
        if (vectors.size() != 1) throw TransportError("embedding endpoint returned no vector");
        query = dense_to_sparse(vectors[0]);
    } else {
        std::unordered_map<int, double> tf;
        for (const auto& t : proposal_tokens) {
            auto it = index.vocabulary.find(t);
            if (it != index.vocabulary.end()) ++tf[it->second];
        }
        for (const auto& [d, count] : tf) {
            double w = count * index.idf[static_cast<std::size_t>(d)];
            if (w != 0.0) query.entries.emplace_back(d, w);
        }
        std::sort(query.entries.begin(), query.entries.end());
    }
    query.normalize();

    std::vector<RankedHit> hits;
    hits.reserve(index.docs.size());
    for (const auto& [id, vec] : index.docs) hits.push_back({id, query.dot(vec)});
    std::stable_sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), hits.size());
    hits.resize(keep);
    return hits;
}

BaselineResult run_baseline(const Proposal& proposal, const RepoSnapshot& snapshot,
                            GranularityLabel granularity, int k, bool with_link_decision,
                            const PipelineConfig& config, CompletionClient& gateway,
                            const VectorIndex* prebuilt_index, EmbeddingClient* embeddings) {
    VectorIndex local;
    const VectorIndex* index = prebuilt_index;
    if (!index) {
        local = build_index(snapshot, granularity, Weighting::TfIdf, embeddings);
        index = &local;
    }

    BaselineResult result;
    auto tokens = preprocess_text(concat_discussion(proposal).text);
    result.candidates = retrieve_topk(*index, tokens, k, embeddings);
    if (!with_link_decision) return result;

    LinkSet links;
    links.proposal_id = proposal.id;
    links.granularity = granularity;
    for (const auto& hit : result.candidates) {
        CodeArtifactId id = parse_artifact_id(hit.id);
        std::string element = artifact_document_text(snapshot, id);
        if (decide_link(proposal, id, element, config, gateway, &links.provenance))
            links.links.push_back(std::move(id));
    }
    std::sort(links.links.begin(), links.links.end());
    result.links = std::move(links);
    return result;
}

std::unique_ptr<EmbeddingClient> make_http_embedding_client(std::string endpoint,
                                                            std::string model,
                                                            std::string api_key) {
    class HttpEmbeddingClient : public EmbeddingClient {
    public:
        HttpEmbeddingClient(std::string endpoint, std::string model, std::string api_key)
            : endpoint_(std::move(endpoint)),
              model_(std::move(model)),
              api_key_(std::move(api_key)),
              transport_(make_httplib_transport()) {}

        std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
            nlohmann::ordered_json body;
            body["model"] = model_;
            body["input"] = texts;
            std::vector<std::pair<std::string, std::string>> headers;
            if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
            HttpResponse res = transport_->post_json(endpoint_, headers, body.dump());
            if (res.status == 0) throw TransportError("embedding endpoint: " + res.error);
            if (res.status < 200 || res.status >= 300) throw ApiError(res.status, res.body);
            try {
                auto doc = nlohmann::json::parse(res.body);
                std::vector<std::vector<double>> out;
                for (const auto& item : doc.at("data"))
                    out.push_back(item.at("embedding").get<std::vector<double>>());
                return out;
            } catch (const nlohmann::json::exception& e) {
                throw TransportError(std::string("unparseable embedding response: ") + e.what());
            }
        }

    private:
        std::string endpoint_;
        std::string model_;
        std::string api_key_;
        std::unique_ptr<HttpTransport> transport_;
    };
    return std::make_unique<HttpEmbeddingClient>(std::move(endpoint), std::move(model),
                                                 std::move(api_key));
}

}  // namespace trace
