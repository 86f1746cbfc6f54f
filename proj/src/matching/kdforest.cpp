#include "shelfscan/error.hpp"
#include "shelfscan/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace shelfscan {

namespace {

constexpr int kLeafSize = 4;
constexpr int kSampleForMean = 100;
constexpr int kRandomDims = 5;

struct Branch {
    float bound;
    int tree;
    int node;
    bool operator>(const Branch& o) const { return bound > o.bound; }
};

}  // namespace

DescriptorIndex::DescriptorIndex(const FeatureSet& features, const IndexConfig& cfg) : cfg_(cfg) {
    if (features.empty()) throw InvalidArgument("descriptor index: empty feature set");
    dim_ = features.descriptor_len;
    count_ = static_cast<int>(features.size());
    rows_.reserve(static_cast<std::size_t>(dim_) * count_);
    for (const auto& p : features.points) {
        if (static_cast<int>(p.descriptor.size()) != dim_) throw InvalidArgument("descriptor index: ragged descriptors");
        rows_.insert(rows_.end(), p.descriptor.begin(), p.descriptor.end());
    }
    build();
}

DescriptorIndex::DescriptorIndex(std::vector<float> rows, int dim, const IndexConfig& cfg)
    : rows_(std::move(rows)), dim_(dim), cfg_(cfg) {
    if (dim <= 0 || rows_.empty() || rows_.size() % dim != 0) {
        throw InvalidArgument("descriptor index: empty or ragged descriptor matrix");
    }
    count_ = static_cast<int>(rows_.size() / dim);
    build();
}

void DescriptorIndex::build() {
    if (cfg_.trees < 1) throw InvalidArgument("descriptor index: trees must be positive");
    if (exact()) return;
    std::mt19937_64 rng(cfg_.seed);
    trees_.resize(cfg_.trees);
    for (Tree& t : trees_) {
        t.perm.resize(count_);
        std::iota(t.perm.begin(), t.perm.end(), 0);
        t.nodes.reserve(2 * count_ / kLeafSize + 2);
        build_node(t, 0, count_, rng);
    }
}

int DescriptorIndex::build_node(Tree& tree, int begin, int end, std::mt19937_64& rng) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    auto make_leaf = [&] {
        tree.nodes[id].begin = begin;
        tree.nodes[id].end = end;
        return id;
    };
    if (end - begin <= kLeafSize) return make_leaf();

    const int n_sample = std::min(end - begin, kSampleForMean);
    std::vector<double> mean(dim_, 0.0), var(dim_, 0.0);
    for (int i = 0; i < n_sample; ++i) {
        const float* r = &rows_[static_cast<std::size_t>(tree.perm[begin + i]) * dim_];
        for (int d = 0; d < dim_; ++d) mean[d] += r[d];
    }
    for (auto& m : mean) m /= n_sample;
    for (int i = 0; i < n_sample; ++i) {
        const float* r = &rows_[static_cast<std::size_t>(tree.perm[begin + i]) * dim_];
        for (int d = 0; d < dim_; ++d) {
            const double diff = r[d] - mean[d];
            var[d] += diff * diff;
        }
    }
    std::vector<int> order(dim_);
    std::iota(order.begin(), order.end(), 0);
    const int top = std::min(kRandomDims, dim_);
    std::partial_sort(order.begin(), order.begin() + top, order.end(),
                      [&](int a, int b) { return var[a] > var[b] || (var[a] == var[b] && a < b); });
    if (var[order[0]] <= 0.0) return make_leaf();
    int split_dim = order[std::uniform_int_distribution<int>(0, top - 1)(rng)];
    if (var[split_dim] <= 0.0) split_dim = order[0];
    auto value = [&](int row) { return rows_[static_cast<std::size_t>(row) * dim_ + split_dim]; };

    float split = static_cast<float>(mean[split_dim]);
    auto mid_it = std::partition(tree.perm.begin() + begin, tree.perm.begin() + end,
                                 [&](int row) { return value(row) < split; });
    int mid = static_cast<int>(mid_it - tree.perm.begin());
    if (mid == begin || mid == end) {
        // mean split degenerate on the full range: fall back to the median
        mid = begin + (end - begin) / 2;
        std::nth_element(tree.perm.begin() + begin, tree.perm.begin() + mid, tree.perm.begin() + end,
                         [&](int a, int b) { return value(a) < value(b); });
        split = value(tree.perm[mid]);
        mid_it = std::partition(tree.perm.begin() + begin, tree.perm.begin() + end,
                                [&](int row) { return value(row) < split; });
        mid = static_cast<int>(mid_it - tree.perm.begin());
        if (mid == begin || mid == end) return make_leaf();
    }
    tree.nodes[id].dim = split_dim;
    tree.nodes[id].split = split;
    const int l = build_node(tree, begin, mid, rng);
    const int r = build_node(tree, mid, end, rng);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
}

float DescriptorIndex::distance_sq(int row, std::span<const float> q) const {
    const float* r = &rows_[static_cast<std::size_t>(row) * dim_];
    float acc = 0.0f;
    for (int d = 0; d < dim_; ++d) {
        const float diff = r[d] - q[d];
        acc += diff * diff;
    }
    return acc;
}

NeighborResult DescriptorIndex::nearest_exact(std::span<const float> query) const {
    if (static_cast<int>(query.size()) != dim_) throw InvalidArgument("descriptor index: query has wrong length");
    int best = -1;
    float best_d = 0;
    for (int i = 0; i < count_; ++i) {
        const float d = distance_sq(i, query);
        if (best < 0 || d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return {best, std::sqrt(static_cast<double>(best_d))};
}

NeighborResult DescriptorIndex::nearest(std::span<const float> query) const {
    if (exact()) return nearest_exact(query);
    if (static_cast<int>(query.size()) != dim_) throw InvalidArgument("descriptor index: query has wrong length");

    std::vector<char> seen(count_, 0);
    std::priority_queue<Branch, std::vector<Branch>, std::greater<>> heap;
    int best = -1;
    float best_d = 0;
    int checks = 0;

    auto descend = [&](int t, int node, float bound) {
        const Tree& tree = trees_[t];
        while (tree.nodes[node].dim >= 0) {
            const Node& n = tree.nodes[node];
            const float diff = query[n.dim] - n.split;
            const int near = diff < 0 ? n.left : n.right;
            const int far = diff < 0 ? n.right : n.left;
            heap.push({bound + diff * diff, t, far});
            node = near;
        }
        const Node& leaf = tree.nodes[node];
        for (int i = leaf.begin; i < leaf.end; ++i) {
            const int row = tree.perm[i];
            if (seen[row]) continue;
            seen[row] = 1;
            ++checks;
            const float d = distance_sq(row, query);
            if (best < 0 || d < best_d || (d == best_d && row < best)) {
                best = row;
                best_d = d;
            }
        }
    };

    for (int t = 0; t < static_cast<int>(trees_.size()); ++t) descend(t, 0, 0.0f);
    while (!heap.empty() && checks < cfg_.checks) {
        const Branch b = heap.top();
        heap.pop();
        if (best >= 0 && b.bound >= best_d) continue;
        descend(b.tree, b.node, b.bound);
    }
    return {best, std::sqrt(static_cast<double>(best_d))};
}

}  // namespace shelfscan
