#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "pdechain/errors.hpp"
#include "pdechain/graph_metrics.hpp"

namespace pdechain::metrics {

namespace {

// mt19937_64 bits mapped to doubles directly; the standard distributions are
// implementation-defined, which would break cross-platform reproducibility.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
};

int sample_weighted(const std::vector<double>& weights, double total, Rng& rng) {
    double r = rng.uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        r -= weights[i];
        if (r <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

// Second-order biased walk: returning to the previous node weighs 1/p,
// staying in its neighborhood weighs 1, and exploring outward weighs 1/q.
std::vector<int> random_walk(int start, const std::vector<std::vector<int>>& adj,
                             const Node2VecParams& prm, Rng& rng) {
    std::vector<int> walk{start};
    int prev = -1;
    while (static_cast<int>(walk.size()) < prm.walk_len) {
        int cur = walk.back();
        const auto& nbrs = adj[cur];
        if (nbrs.empty()) break;
        std::vector<double> w(nbrs.size());
        double total = 0.0;
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            if (prev < 0)
                w[i] = 1.0;
            else if (nbrs[i] == prev)
                w[i] = 1.0 / prm.p;
            else if (std::binary_search(adj[prev].begin(), adj[prev].end(), nbrs[i]))
                w[i] = 1.0;
            else
                w[i] = 1.0 / prm.q;
            total += w[i];
        }
        int next = nbrs[static_cast<std::size_t>(sample_weighted(w, total, rng))];
        prev = cur;
        walk.push_back(next);
    }
    return walk;
}

}  // namespace

std::vector<std::vector<double>> node2vec_embed(const MetricView& view,
                                                const Node2VecParams& prm) {
    const int n = static_cast<int>(view.node_count());
    if (n == 0) throw Error(ErrorCode::invalid_input, "node2vec: graph has no tool nodes");
    if (prm.dims < 2) throw Error(ErrorCode::invalid_input, "node2vec: dims must be at least 2");

    // Walks treat the graph as undirected so structural context flows both
    // ways through data dependencies.
    std::vector<std::set<int>> nb(static_cast<std::size_t>(n));
    for (auto [s, d] : view.edges) {
        if (s == d) continue;
        nb[s].insert(d);
        nb[d].insert(s);
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) adj[i].assign(nb[i].begin(), nb[i].end());

    Rng rng(prm.seed);
    const std::size_t dims = static_cast<std::size_t>(prm.dims);

    std::vector<std::vector<double>> in_vec(n, std::vector<double>(dims));
    std::vector<std::vector<double>> out_vec(n, std::vector<double>(dims, 0.0));
    for (auto& row : in_vec)
        for (auto& x : row) x = (rng.uniform() - 0.5) / static_cast<double>(prm.dims);

    std::vector<std::vector<int>> walks;
    walks.reserve(static_cast<std::size_t>(n) * prm.walks_per_node);
    for (int pass = 0; pass < prm.walks_per_node; ++pass)
        for (int v = 0; v < n; ++v) walks.push_back(random_walk(v, adj, prm, rng));

    // Negative sampling from the walk unigram distribution^0.75.
    std::vector<double> neg_weights(static_cast<std::size_t>(n), 0.0);
    for (const auto& walk : walks)
        for (int v : walk) neg_weights[v] += 1.0;
    double neg_total = 0.0;
    for (auto& w : neg_weights) {
        w = std::pow(w, 0.75);
        neg_total += w;
    }

    const double lr0 = 0.025;
    std::vector<double> grad(dims);
    for (int epoch = 0; epoch < prm.epochs; ++epoch) {
        double lr = std::max(lr0 * (1.0 - static_cast<double>(epoch) / prm.epochs), lr0 * 0.01);
        for (const auto& walk : walks) {
            const int len = static_cast<int>(walk.size());
            for (int i = 0; i < len; ++i) {
                int target = walk[i];
                int lo = std::max(0, i - prm.window);
                int hi = std::min(len - 1, i + prm.window);
                for (int j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    int context = walk[j];
                    std::fill(grad.begin(), grad.end(), 0.0);
                    // One positive pair plus neg_samples noise draws.
                    for (int s = 0; s < prm.neg_samples + 1; ++s) {
                        int word;
                        double label;
                        if (s == 0) {
                            word = context;
                            label = 1.0;
                        } else {
                            word = sample_weighted(neg_weights, neg_total, rng);
                            if (word == context) continue;
                            label = 0.0;
                        }
                        double dot = 0.0;
                        for (std::size_t d = 0; d < dims; ++d)
                            dot += in_vec[target][d] * out_vec[word][d];
                        double g = (1.0 / (1.0 + std::exp(-dot)) - label) * lr;
                        for (std::size_t d = 0; d < dims; ++d) {
                            grad[d] += g * out_vec[word][d];
                            out_vec[word][d] -= g * in_vec[target][d];
                        }
                    }
                    for (std::size_t d = 0; d < dims; ++d) in_vec[target][d] -= grad[d];
                }
            }
        }
    }
    return in_vec;
}

}  // namespace pdechain::metrics
