#include "shelfscan/error.hpp"
#include "shelfscan/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace shelfscan {

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool smaller_center(const Occurrence& a, const Occurrence& b) {
    if (a.envelope.center_x != b.envelope.center_x) return a.envelope.center_x < b.envelope.center_x;
    return a.envelope.center_y < b.envelope.center_y;
}

// strict "a wins over b"
bool wins(const Occurrence& a, const Occurrence& b, ConsolidationMode mode) {
    if (mode == ConsolidationMode::CrossPattern && a.normalized_adjacency != b.normalized_adjacency) {
        return a.normalized_adjacency > b.normalized_adjacency;
    }
    if (a.adjacency_sum != b.adjacency_sum) return a.adjacency_sum > b.adjacency_sum;
    if (smaller_center(a, b)) return true;
    if (smaller_center(b, a)) return false;
    return a.pattern_id < b.pattern_id;
}

}  // namespace

std::vector<Occurrence> consolidate(std::span<const Occurrence> occurrences, ConsolidationMode mode,
                                    double iou_threshold) {
    if (!(iou_threshold > 0 && iou_threshold <= 1)) throw InvalidArgument("consolidate: iou_threshold must be in (0, 1]");
    const std::size_t n = occurrences.size();
    std::vector<BoxD> boxes(n);
    for (std::size_t i = 0; i < n; ++i) boxes[i] = occurrences[i].box();

    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (mode == ConsolidationMode::SamePattern && occurrences[i].pattern_id != occurrences[j].pattern_id) {
                continue;
            }
            if (iou(boxes[i], boxes[j]) >= iou_threshold) sets.unite(i, j);
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t i = 0; i < n; ++i) components[sets.find(i)].push_back(i);

    std::vector<Occurrence> out;
    out.reserve(components.size());
    for (const auto& [root, members] : components) {
        std::size_t best = members.front();
        for (std::size_t m : members) {
            if (wins(occurrences[m], occurrences[best], mode)) best = m;
        }
        Occurrence merged = occurrences[best];
        if (mode == ConsolidationMode::SamePattern && members.size() > 1) {
            merged.adjacency_sum = 0.0;
            merged.normalized_adjacency = 0.0;
            for (std::size_t m : members) {
                merged.adjacency_sum += occurrences[m].adjacency_sum;
                merged.normalized_adjacency += occurrences[m].normalized_adjacency;
            }
        }
        out.push_back(std::move(merged));
    }
    std::sort(out.begin(), out.end(), [mode](const Occurrence& a, const Occurrence& b) { return wins(a, b, mode); });
    return out;
}

}  // namespace shelfscan
