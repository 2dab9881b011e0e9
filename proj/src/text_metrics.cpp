#include "pdechain/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pdechain/errors.hpp"
#include "pdechain/jsonio.hpp"

namespace pdechain::text {

HashingEmbedder::HashingEmbedder(std::size_t dims) : dims_(dims) {
    if (dims_ < 2) throw Error(ErrorCode::invalid_input, "embedder dims must be at least 2");
}

std::vector<double> HashingEmbedder::embed(const std::string& text) {
    std::string norm = " ";
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        norm.push_back(std::isspace(u) ? ' ' : static_cast<char>(std::tolower(u)));
    }
    norm.push_back(' ');

    std::vector<double> v(dims_, 0.0);
    bool any = false;
    for (std::size_t i = 0; i + 3 <= norm.size(); ++i) {
        std::string_view tri(norm.data() + i, 3);
        if (tri == "   " || tri.find_first_not_of(' ') == std::string_view::npos) continue;
        std::uint64_t h = fnv1a64(tri);
        std::size_t bucket = static_cast<std::size_t>(h % dims_);
        double sign = (h >> 63) ? -1.0 : 1.0;   // signed hashing halves collision bias
        v[bucket] += sign;
        any = true;
    }
    if (!any) return v;   // zero vector for empty / whitespace-only text
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '_') {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::invalid_input, "cosine: vector dimensions differ");
    if (a == b && !a.empty()) {
        double n = 0.0;
        for (double x : a) n += x * x;
        if (n > 0.0) return 1.0;
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double sts_score(EmbeddingProvider& provider, const std::string& a, const std::string& b) {
    if (a.empty() || b.empty())
        throw Error(ErrorCode::invalid_input, "sts: both texts must be non-empty");
    std::vector<double> va = provider.embed(a);
    std::vector<double> vb = provider.embed(b);
    bool zero_a = std::all_of(va.begin(), va.end(), [](double x) { return x == 0.0; });
    bool zero_b = std::all_of(vb.begin(), vb.end(), [](double x) { return x == 0.0; });
    if (zero_a && zero_b) return 1.0;   // whitespace-only on both sides
    if (zero_a || zero_b) return 0.0;
    return std::clamp(cosine(va, vb), 0.0, 1.0);
}

BertScore bert_score(EmbeddingProvider& provider, const std::string& candidate,
                     const std::string& reference) {
    std::vector<std::string> ct = tokenize(candidate);
    std::vector<std::string> rt = tokenize(reference);
    if (ct.empty() || rt.empty())
        throw Error(ErrorCode::invalid_input, "bertscore: both texts must tokenize to at least one token");
    BertScore s;

    std::vector<std::vector<double>> ce, re;
    ce.reserve(ct.size());
    re.reserve(rt.size());
    for (const auto& t : ct) ce.push_back(provider.embed(t));
    for (const auto& t : rt) re.push_back(provider.embed(t));

    auto best_against = [](const std::vector<std::vector<double>>& from,
                           const std::vector<std::vector<double>>& to) {
        double total = 0.0;
        for (const auto& f : from) {
            double best = 0.0;
            for (const auto& t : to) best = std::max(best, std::clamp(cosine(f, t), 0.0, 1.0));
            total += best;
        }
        return total / static_cast<double>(from.size());
    };
    s.precision = best_against(ce, re);
    s.recall = best_against(re, ce);
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

LocalScores local_scores(EmbeddingProvider& provider, const std::string& actual,
                         const std::string& reference) {
    LocalScores out;
    out.sts = sts_score(provider, actual, reference);
    BertScore b = bert_score(provider, actual, reference);
    out.bert_p = b.precision;
    out.bert_r = b.recall;
    out.bert_f1 = b.f1;
    return out;
}

}  // namespace pdechain::text
