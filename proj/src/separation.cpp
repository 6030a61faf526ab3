#include "mcl/separation.hpp"

#include <algorithm>
#include <map>

namespace mcl {

std::string SeparationRelation::describe() const {
    return is_tau() ? "tau:" + rat_str(tau) : std::string("disjoint");
}

bool operator==(const SeparationRelation& a, const SeparationRelation& b) {
    if (a.kind != b.kind) return false;
    return !a.is_tau() || a.tau == b.tau;
}

SeparationRelation parse_separation(const std::string& text) {
    if (text == "disjoint") return SeparationRelation::disjoint();
    if (text.rfind("tau:", 0) == 0) {
        auto q = parse_rat(text.substr(4));
        require(q.has_value() && *q > 0, "parse-error", "malformed tau in '" + text + "'");
        return SeparationRelation::tau_separation(*q);
    }
    fail("parse-error", "unknown separation relation '" + text + "' (use disjoint or tau:<p/q>)");
}

bool separated(const SeparationRelation& rel, const Region& a, const Region& b) {
    if (rel.is_tau()) return distance_squared(a, b) >= rel.tau * rel.tau;
    return !intersects(a, b);
}

IntersectionGraph intersection_graph(const SeparationRelation& rel, const std::vector<Region>& parts) {
    IntersectionGraph g;
    g.nodes = parts;
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
            if (!separated(rel, parts[i], parts[j])) g.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return g;
}

std::vector<std::vector<int>> decompose_indices(const SeparationRelation& rel, const std::vector<Region>& parts) {
    require(!parts.empty(), "empty-input", "decompose needs at least one region");
    DisjointSets uf(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
            if (uf.find(static_cast<int>(i)) != uf.find(static_cast<int>(j)) &&
                !separated(rel, parts[i], parts[j]))
                uf.unite(static_cast<int>(i), static_cast<int>(j));
    std::map<int, std::vector<int>> by_root;
    for (std::size_t i = 0; i < parts.size(); ++i) by_root[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));
    std::vector<std::vector<int>> groups;
    for (auto& [root, members] : by_root) {
        std::sort(members.begin(), members.end(),
                  [&](int a, int b) { return region_less(parts[a], parts[b]); });
        groups.push_back(std::move(members));
    }
    std::sort(groups.begin(), groups.end(), [&](const std::vector<int>& a, const std::vector<int>& b) {
        return region_less(parts[a.front()], parts[b.front()]);
    });
    return groups;
}

std::vector<std::vector<Region>> decompose(const SeparationRelation& rel, const std::vector<Region>& parts) {
    std::vector<std::vector<Region>> out;
    for (const auto& group : decompose_indices(rel, parts)) {
        std::vector<Region> g;
        g.reserve(group.size());
        for (int i : group) g.push_back(parts[i]);
        out.push_back(std::move(g));
    }
    return out;
}

bool is_connected_union(const SeparationRelation& rel, const std::vector<Region>& parts) {
    return decompose_indices(rel, parts).size() == 1;
}

}  // namespace mcl
