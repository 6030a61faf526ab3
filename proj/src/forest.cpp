#include "mcl/forest.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace mcl {

void Forest::canonicalize() {
    const int n = size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return region_less(nodes_[a].region, nodes_[b].region); });
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[order[i]] = i;
    std::vector<ForestNode> sorted;
    sorted.reserve(n);
    for (int i = 0; i < n; ++i) {
        ForestNode nd = nodes_[order[i]];
        nd.parent = nd.parent < 0 ? -1 : pos[nd.parent];
        sorted.push_back(std::move(nd));
    }
    nodes_ = std::move(sorted);
}

void Forest::verify_links() const {
    for (int i = 0; i < size(); ++i) {
        int p = nodes_[i].parent;
        if (p < 0) continue;
        require(p >= 0 && p < size() && p != i, "forest-violation", "bad parent link");
        require(contains(nodes_[p].region, nodes_[i].region), "forest-violation",
                "parent does not contain child " + nodes_[i].region.describe());
    }
    // Direct siblings must be separated. Dimension classes are stratified by the
    // null-set precedence of their reference measures: pairs from different
    // classes are incomparable and stay unchecked (mixture forests put, say,
    // curve roots next to a full-dimensional root they are geometrically inside).
    for (const auto& family : sibling_families()) {
        for (size_t a = 0; a < family.size(); ++a)
            for (size_t b = a + 1; b < family.size(); ++b) {
                const Region& ra = nodes_[family[a]].region;
                const Region& rb = nodes_[family[b]].region;
                if (ra.dim_class() != rb.dim_class()) continue;
                require(separated(rel_, ra, rb), "forest-violation",
                        "direct siblings " + ra.describe() + " and " + rb.describe() + " are not separated");
            }
    }
}

Forest Forest::trusted(SeparationRelation rel, std::vector<ForestNode> nodes) {
    Forest f;
    f.rel_ = std::move(rel);
    f.nodes_ = std::move(nodes);
    f.canonicalize();
    f.verify_links();
    return f;
}

Forest Forest::build(SeparationRelation rel, std::vector<Region> regions) {
    std::vector<ForestNode> nodes;
    nodes.reserve(regions.size());
    for (auto& r : regions) nodes.push_back(ForestNode{std::move(r)});
    return build_nodes(std::move(rel), std::move(nodes));
}

Forest Forest::build_nodes(SeparationRelation rel, std::vector<ForestNode> nodes) {
    const int n = static_cast<int>(nodes.size());
    // pairwise forest property
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Region& a = nodes[i].region;
            const Region& b = nodes[j].region;
            require(a != b, "forest-violation", "duplicate node " + a.describe());
            if (contains(a, b) || contains(b, a)) continue;
            require(separated(rel, a, b), "forest-violation",
                    "regions " + a.describe() + " and " + b.describe() + " are neither nested nor separated");
        }
    }
    // parent := minimal strict superset (ancestors form a chain)
    for (int i = 0; i < n; ++i) {
        int parent = -1;
        for (int j = 0; j < n; ++j) {
            if (i == j || !contains(nodes[j].region, nodes[i].region) || nodes[j].region == nodes[i].region)
                continue;
            if (parent < 0 || contains(nodes[parent].region, nodes[j].region)) parent = j;
        }
        nodes[i].parent = parent;
    }
    Forest f;
    f.rel_ = std::move(rel);
    f.nodes_ = std::move(nodes);
    f.canonicalize();
    f.verify_links();
    return f;
}

std::vector<int> Forest::roots() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (nodes_[i].parent < 0) out.push_back(i);
    return out;
}

std::vector<int> Forest::children(int i) const {
    std::vector<int> out;
    for (int j = 0; j < size(); ++j)
        if (nodes_[j].parent == i) out.push_back(j);
    return out;
}

std::vector<int> Forest::leaves() const {
    std::vector<bool> has_child(size(), false);
    for (int j = 0; j < size(); ++j)
        if (nodes_[j].parent >= 0) has_child[nodes_[j].parent] = true;
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (!has_child[i]) out.push_back(i);
    return out;
}

std::vector<int> Forest::strict_ancestors(int i) const {
    std::vector<int> out;
    for (int p = nodes_.at(i).parent; p >= 0; p = nodes_[p].parent) out.push_back(p);
    return out;
}

std::vector<Region> Forest::ground() const {
    std::vector<Region> out;
    for (int r : roots()) out.push_back(nodes_[r].region);
    return out;
}

int Forest::find_node(const Region& r) const {
    for (int i = 0; i < size(); ++i)
        if (nodes_[i].region == r) return i;
    return -1;
}

Forest Forest::sub_forest(const Region& a, SubMode mode) const {
    int idx = find_node(a);
    require(idx >= 0, "node-not-found", "region " + a.describe() + " is not a forest node");
    std::vector<bool> keep(size(), false);
    switch (mode) {
        case SubMode::StrictAncestors:
            for (int p : strict_ancestors(idx)) keep[p] = true;
            break;
        case SubMode::Ancestors:
            keep[idx] = true;
            for (int p : strict_ancestors(idx)) keep[p] = true;
            break;
        case SubMode::Descendants:
        case SubMode::StrictDescendants:
            for (int i = 0; i < size(); ++i) {
                int p = i;
                while (p >= 0 && p != idx) p = nodes_[p].parent;
                if (p == idx) keep[i] = true;
            }
            if (mode == SubMode::StrictDescendants) keep[idx] = false;
            break;
    }
    std::vector<ForestNode> sub;
    std::vector<int> remap(size(), -1);
    for (int i = 0; i < size(); ++i) {
        if (!keep[i]) continue;
        remap[i] = static_cast<int>(sub.size());
        sub.push_back(nodes_[i]);
    }
    for (auto& nd : sub) {
        int p = nd.parent;
        while (p >= 0 && remap[p] < 0) p = nodes_[p].parent;
        nd.parent = p >= 0 ? remap[p] : -1;
    }
    Forest f;
    f.rel_ = rel_;
    f.nodes_ = std::move(sub);
    f.canonicalize();
    return f;
}

std::vector<std::vector<int>> Forest::sibling_families() const {
    std::map<int, std::vector<int>> by_parent;
    for (int i = 0; i < size(); ++i) by_parent[nodes_[i].parent].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& [parent, members] : by_parent)
        if (members.size() >= 2) out.push_back(members);
    return out;
}

Forest Forest::structure() const {
    std::vector<int> child_count(size() + 1, 0);  // last slot counts roots
    for (int i = 0; i < size(); ++i) {
        int p = nodes_[i].parent;
        ++child_count[p < 0 ? size() : p];
    }
    std::vector<bool> keep(size(), false);
    for (int i = 0; i < size(); ++i) {
        int p = nodes_[i].parent;
        if (p < 0 || child_count[p] >= 2) keep[i] = true;
    }
    std::vector<ForestNode> out;
    std::vector<int> remap(size(), -1);
    for (int i = 0; i < size(); ++i) {
        if (!keep[i]) continue;
        remap[i] = static_cast<int>(out.size());
        out.push_back(nodes_[i]);
    }
    for (auto& nd : out) {
        int p = nd.parent;
        while (p >= 0 && remap[p] < 0) p = nodes_[p].parent;
        nd.parent = p >= 0 ? remap[p] : -1;
    }
    Forest f;
    f.rel_ = rel_;
    f.nodes_ = std::move(out);
    f.canonicalize();
    return f;
}

bool operator==(const Forest& a, const Forest& b) {
    if (!(a.relation() == b.relation()) || a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i) {
        if (a.node(i).region != b.node(i).region) return false;
        if (a.node(i).parent != b.node(i).parent) return false;
    }
    return true;
}

// --- shape isomorphism -------------------------------------------------------

static std::string shape_encoding(const Forest& f, int node) {
    std::vector<std::string> kids;
    for (int c : f.children(node)) kids.push_back(shape_encoding(f, c));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (const auto& k : kids) s += k;
    s += ")";
    return s;
}

static std::string shape_encoding(const Forest& f) {
    std::vector<std::string> tops;
    for (int r : f.roots()) tops.push_back(shape_encoding(f, r));
    std::sort(tops.begin(), tops.end());
    std::string s;
    for (const auto& t : tops) s += t;
    return s;
}

bool forests_isomorphic(const Forest& f1, const Forest& f2) {
    return shape_encoding(f1) == shape_encoding(f2);
}

// --- FRM ----------------------------------------------------------------------

namespace {

// forced matching: each F1 node must land in the unique F2 candidate containing it
bool frm_match(const Forest& f1, const Forest& f2, const std::vector<int>& as, const std::vector<int>& bs,
               std::vector<int>& out) {
    if (as.size() != bs.size()) return false;
    std::vector<int> assigned(bs.size(), -1);
    for (size_t i = 0; i < as.size(); ++i) {
        int target = -1;
        for (size_t j = 0; j < bs.size(); ++j) {
            if (contains(f2.node(bs[j]).region, f1.node(as[i]).region)) {
                if (target >= 0) return false;  // siblings are separated, so this cannot happen
                target = static_cast<int>(j);
            }
        }
        if (target < 0 || assigned[target] >= 0) return false;
        assigned[target] = static_cast<int>(i);
        out[as[i]] = bs[target];
        if (!frm_match(f1, f2, f1.children(as[i]), f2.children(bs[target]), out)) return false;
    }
    return true;
}

}  // namespace

ForestRelatingMap frm(const Forest& f1, const Forest& f2) {
    std::vector<int> out(f1.size(), -1);
    if (frm_match(f1, f2, f1.roots(), f2.roots(), out)) return ForestRelatingMap{std::move(out)};
    if (forests_isomorphic(f1, f2))
        fail("isomorphic-but-not-contained", "forests are isomorphic but no containment-respecting map exists");
    fail("not-isomorphic", "forests have different graph structure");
}

Forest isomonotone_limit(const std::vector<Forest>& seq) {
    require(!seq.empty(), "empty-input", "isomonotone limit of an empty sequence");
    std::vector<Forest> structures;
    structures.reserve(seq.size());
    for (const auto& f : seq) structures.push_back(f.structure());
    for (size_t i = 0; i + 1 < structures.size(); ++i) {
        try {
            frm(structures[i], structures[i + 1]);
        } catch (const Error& e) {
            fail("monotonicity-violation", "structure is not monotone at index " + std::to_string(i + 1) +
                                               " (" + e.code() + ")");
        }
    }
    // increasing unions of a finite sequence equal the last structure
    return structures.back();
}

// --- equality up to null sets -------------------------------------------------

namespace {

bool match_mod_p(const Forest& f1, const Forest& f2, const MeasureOracle& p, const Rat& tol,
                 const std::vector<int>& as, const std::vector<int>& bs, std::vector<int>& out) {
    if (as.size() != bs.size()) return false;
    if (as.empty()) return true;
    std::vector<bool> used(bs.size(), false);
    std::function<bool(size_t)> place = [&](size_t i) {
        if (i == as.size()) return true;
        for (size_t j = 0; j < bs.size(); ++j) {
            if (used[j]) continue;
            if (p.mass_sym_diff(f1.node(as[i]).region, f2.node(bs[j]).region) > tol) continue;
            if (!match_mod_p(f1, f2, p, tol, f1.children(as[i]), f2.children(bs[j]), out)) continue;
            used[j] = true;
            out[as[i]] = bs[j];
            if (place(i + 1)) return true;
            used[j] = false;
        }
        return false;
    };
    return place(0);
}

}  // namespace

EqualModPResult equal_mod_p(const Forest& f1, const Forest& f2, const MeasureOracle& p, const Rat& tolerance) {
    EqualModPResult res;
    res.witness.assign(f1.size(), -1);
    res.equal = match_mod_p(f1, f2, p, tolerance, f1.roots(), f2.roots(), res.witness);
    if (!res.equal) res.witness.clear();
    return res;
}

// --- ParamChainForest ----------------------------------------------------------

Forest ParamChainForest::generalized_structure() const {
    std::vector<ForestNode> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) {
        ForestNode nd{n.region};
        nd.parent = n.parent;
        if (n.chain_levels) {
            nd.merge_level = n.chain_levels->first;
            nd.birth_level = n.chain_levels->second;
        }
        out.push_back(std::move(nd));
    }
    Forest full = Forest::trusted(rel, std::move(out));
    return full.structure();
}

}  // namespace mcl
