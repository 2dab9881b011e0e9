#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pdechain::text {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dims() const = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Bundled offline embedder: lowercased character trigrams (with boundary
// padding) hashed into signed buckets, L2-normalized. Deterministic, no
// model files, adequate for surface-level similarity.
class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dims = 256);
    std::size_t dims() const override { return dims_; }
    std::vector<double> embed(const std::string& text) override;

private:
    std::size_t dims_;
};

// Lowercase word tokens; punctuation splits and is dropped.
std::vector<std::string> tokenize(const std::string& text);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Whole-text embedding cosine, clamped to [0, 1].
double sts_score(EmbeddingProvider& provider, const std::string& a, const std::string& b);

struct BertScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Greedy token-level matching: each candidate token takes its best reference
// match (precision) and vice versa (recall).
BertScore bert_score(EmbeddingProvider& provider, const std::string& candidate,
                     const std::string& reference);

// Per-invocation text similarity of an actual tool call against its
// reference description.
struct LocalScores {
    double sts = 0.0;
    double bert_p = 0.0;
    double bert_r = 0.0;
    double bert_f1 = 0.0;
};

LocalScores local_scores(EmbeddingProvider& provider, const std::string& actual,
                         const std::string& reference);

}  // namespace pdechain::text
