#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcl/geometry.hpp"

namespace mcl {

// Decidable symmetric separation predicate on regions: plain disjointness, or
// distance-at-least-tau. Both are monotone and stable over increasing unions.
struct SeparationRelation {
    enum class Kind { Disjoint, Tau };
    Kind kind = Kind::Disjoint;
    Rat tau;  // positive for Kind::Tau

    static SeparationRelation disjoint() { return SeparationRelation{}; }
    static SeparationRelation tau_separation(Rat t) {
        require(t > 0, "bad-separation", "tau must be positive");
        return SeparationRelation{Kind::Tau, std::move(t)};
    }

    bool is_tau() const { return kind == Kind::Tau; }
    std::string describe() const;
};

bool operator==(const SeparationRelation& a, const SeparationRelation& b);

// "disjoint" or "tau:<p/q>"
SeparationRelation parse_separation(const std::string& text);

bool separated(const SeparationRelation& rel, const Region& a, const Region& b);

struct IntersectionGraph {
    std::vector<Region> nodes;
    std::vector<std::pair<int, int>> edges;  // i < j, not separated
};

IntersectionGraph intersection_graph(const SeparationRelation& rel, const std::vector<Region>& parts);

// Partition into connected components of the intersection graph. Groups are
// ordered by their smallest member under the canonical region order, members
// ascending; the grouping itself is unique.
std::vector<std::vector<int>> decompose_indices(const SeparationRelation& rel, const std::vector<Region>& parts);
std::vector<std::vector<Region>> decompose(const SeparationRelation& rel, const std::vector<Region>& parts);

bool is_connected_union(const SeparationRelation& rel, const std::vector<Region>& parts);

// Union-find used by the component computations; exposed for the grid engine.
class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n = 0) : parent_(n), rank_(n, 0) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
    }
    int add() {
        parent_.push_back(static_cast<int>(parent_.size()));
        rank_.push_back(0);
        return static_cast<int>(parent_.size()) - 1;
    }
    int find(int x) {
        int root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            int next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }
    std::size_t size() const { return parent_.size(); }

  private:
    std::vector<int> parent_;
    std::vector<int> rank_;
};

}  // namespace mcl
