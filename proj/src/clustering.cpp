#include "mcl/clustering.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace mcl {

Forest cluster_simple(const SimpleMeasure& q) { return q.forest().structure(); }

// --- shared helpers -----------------------------------------------------------

namespace {

// Separated-connected grouping of a normalized interval set: under disjointness
// every member is its own group; under tau, consecutive members with gap < tau
// belong together.
std::vector<IvSet> group_ivs(const IvSet& s, const SeparationRelation& rel) {
    std::vector<IvSet> groups;
    for (const auto& iv : s) {
        bool join = false;
        if (!groups.empty() && rel.is_tau()) {
            const FlagIv& prev = groups.back().back();
            join = iv.lo - prev.hi < rel.tau;
        }
        if (join)
            groups.back().push_back(iv);
        else
            groups.push_back(IvSet{iv});
    }
    return groups;
}

int locate_group(const std::vector<IvSet>& groups, const Rat& x) {
    for (size_t g = 0; g < groups.size(); ++g)
        if (ivset_contains_point(groups[g], x)) return static_cast<int>(g);
    return -1;
}

Region ivset_to_region(const Box& box, const IvSet& s, const Rat& level) {
    require(s.size() == 1, "disconnected-node",
            "cluster at level " + rat_str(level) + " is a union of " + std::to_string(s.size()) +
                " intervals, which the region model cannot represent");
    const FlagIv& v = s.front();
    return make_interval(box, v.lo, v.hi, v.lc, v.hc);
}

Rat ivset_min_gap(const IvSet& a, const IvSet& b) {
    std::optional<Rat> best;
    for (const auto& x : a)
        for (const auto& y : b) {
            Rat gap = 0;
            if (y.lo > x.hi)
                gap = y.lo - x.hi;
            else if (x.lo > y.hi)
                gap = x.lo - y.hi;
            if (!best || gap < *best) best = gap;
        }
    return best.value_or(Rat(0));
}

// Distinct one-sided density values at x; containment of a probe interval in a
// level component can only switch when the level passes one of these.
void insert_values_at(const Density1D& f, const Rat& x, std::set<Rat>& out) {
    for (const auto& p : f.pieces) {
        if (x < p.x0 || x > p.x1) continue;
        Rat v = p.y0 + (x - p.x0) * (p.y1 - p.y0) / (p.x1 - p.x0);
        if (v > 0) out.insert(v);
    }
}

// Levels inside disjointness stripes at which some adjacent-component gap
// crosses tau. Component endpoints are linear in the level within a stripe.
std::vector<Rat> tau_gap_criticals(const Density1D& f, const Rat& tau) {
    std::set<Rat> base;
    for (const Rat& v : f.breakpoint_values())
        if (v > 0) base.insert(v);
    base.insert(Rat(0));
    std::vector<Rat> desc(base.rbegin(), base.rend());
    std::vector<Rat> out;
    for (size_t i = 0; i + 1 < desc.size(); ++i) {
        const Rat& hi = desc[i];
        const Rat& lo = desc[i + 1];
        Rat la = lo + (hi - lo) / 4;
        Rat lb = lo + 3 * (hi - lo) / 4;
        IvSet sa = f.superlevel_open(la);
        IvSet sb = f.superlevel_open(lb);
        require(sa.size() == sb.size(), "internal-error", "component count changed inside a stripe");
        for (size_t j = 0; j + 1 < sa.size(); ++j) {
            Rat ga = sa[j + 1].lo - sa[j].hi;
            Rat gb = sb[j + 1].lo - sb[j].hi;
            if (ga == gb) continue;
            Rat lam = la + (tau - ga) * (lb - la) / (gb - ga);
            if (lam > lo && lam < hi) out.push_back(lam);
        }
    }
    return out;
}

}  // namespace

// --- exact 1d engine ------------------------------------------------------------

Level1DResult level_forest_1d(const Density1D& f, const SeparationRelation& rel) {
    struct Branch {
        Rat birth;
        Rat rep;                   // point inside the branch's group, valid from birth on
        std::vector<int> pending;  // emitted child node ids
    };
    struct ENode {
        Region region;
        Rat birth;
        std::optional<Rat> merge;
        std::vector<int> children;
    };

    std::set<Rat> crit_set;
    for (const Rat& v : f.breakpoint_values())
        if (v > 0) crit_set.insert(v);
    crit_set.insert(Rat(0));
    if (rel.is_tau())
        for (const Rat& v : tau_gap_criticals(f, rel.tau)) crit_set.insert(v);
    std::vector<Rat> crits(crit_set.rbegin(), crit_set.rend());  // descending, ends at 0

    std::vector<Branch> branches;
    std::vector<ENode> emitted;
    std::set<Rat> split_set;

    // the branch's group at a level inside a regular stripe
    auto group_at = [&](const Rat& level, const Rat& rep) {
        IvSet s = f.superlevel_open(level);
        auto groups = group_ivs(s, rel);
        int g = locate_group(groups, rep);
        require(g >= 0, "internal-error", "branch lost at level " + rat_str(level));
        return groups[static_cast<std::size_t>(g)];
    };

    // one-sided limit of the branch's component family as the level descends to
    // v, taken over the regular stripe (v, above): endpoints are linear there,
    // so two samples determine the limit; moving endpoints are never attained.
    auto limit_from_above = [&](const Rat& rep, const Rat& v, const Rat& above) {
        Rat l1 = v + (above - v) / 4;
        Rat l2 = v + (above - v) / 2;
        IvSet g1 = group_at(l1, rep);
        IvSet g2 = group_at(l2, rep);
        require(g1.size() == g2.size(), "internal-error", "component count changed inside a stripe");
        std::vector<FlagIv> out;
        for (size_t k = 0; k < g1.size(); ++k) {
            const FlagIv& a = g1[k];
            const FlagIv& b = g2[k];
            FlagIv lim;
            if (a.lo == b.lo) {
                lim.lo = a.lo;
                lim.lc = a.lc;
            } else {
                lim.lo = a.lo + (v - l1) * (b.lo - a.lo) / (l2 - l1);
                lim.lc = false;
            }
            if (a.hi == b.hi) {
                lim.hi = a.hi;
                lim.hc = a.hc;
            } else {
                lim.hi = a.hi + (v - l1) * (b.hi - a.hi) / (l2 - l1);
                lim.hc = false;
            }
            out.push_back(std::move(lim));
        }
        return ivset_normalize(std::move(out));
    };

    auto emit_children = [&](const Rat& v, const Rat& above, std::vector<int>& members) {
        std::vector<IvSet> limits, snaps;
        Rat l1 = v + (above - v) / 4;
        for (int m : members) {
            limits.push_back(limit_from_above(branches[m].rep, v, above));
            snaps.push_back(group_at(l1, branches[m].rep));
        }
        // closures of the level components stay separated strictly above the split
        for (size_t a = 0; a < snaps.size(); ++a)
            for (size_t b = a + 1; b < snaps.size(); ++b) {
                Rat gap = ivset_min_gap(snaps[a], snaps[b]);
                bool ok = rel.is_tau() ? gap >= rel.tau : gap > 0;
                require(ok, "closure-separation-violation",
                        "sibling closures are not separated above level " + rat_str(v));
            }
        std::vector<int> child_ids;
        for (size_t k = 0; k < members.size(); ++k) {
            ENode node{ivset_to_region(f.box, limits[k], v), branches[members[k]].birth, v,
                       std::move(branches[members[k]].pending)};
            emitted.push_back(std::move(node));
            child_ids.push_back(static_cast<int>(emitted.size()) - 1);
        }
        split_set.insert(v);
        return child_ids;
    };

    for (size_t i = 0; i + 1 < crits.size(); ++i) {
        const Rat& v = crits[i];  // positive; the trailing critical is 0
        Rat low = crits[i + 1];
        Rat rep_lambda = (v + low) / 2;
        IvSet s = f.superlevel_open(rep_lambda);
        auto groups = group_ivs(s, rel);

        std::vector<std::vector<int>> members(groups.size());
        for (size_t b = 0; b < branches.size(); ++b) {
            int g = locate_group(groups, branches[b].rep);
            require(g >= 0, "internal-error", "branch lost below level " + rat_str(v));
            members[g].push_back(static_cast<int>(b));
        }

        std::vector<Branch> next;
        for (size_t g = 0; g < groups.size(); ++g) {
            if (members[g].empty()) {
                Branch born;
                born.birth = v;
                born.rep = (groups[g].front().lo + groups[g].front().hi) / 2;
                next.push_back(std::move(born));
            } else if (members[g].size() == 1) {
                next.push_back(std::move(branches[members[g][0]]));
            } else {
                require(i > 0, "internal-error", "merge before any branch exists");
                auto child_ids = emit_children(v, crits[i - 1], members[g]);
                Branch merged;
                merged.birth = v;
                merged.rep = (groups[g].front().lo + groups[g].front().hi) / 2;
                merged.pending = std::move(child_ids);
                next.push_back(std::move(merged));
            }
        }
        branches = std::move(next);
    }

    // roots: one-sided limits at level 0 over the lowest stripe
    require(crits.size() >= 2, "bad-density", "density carries no positive level");
    std::vector<int> root_ids;
    for (auto& b : branches) {
        IvSet limit = limit_from_above(b.rep, Rat(0), crits[crits.size() - 2]);
        ENode node{ivset_to_region(f.box, limit, Rat(0)), b.birth, std::nullopt, std::move(b.pending)};
        emitted.push_back(std::move(node));
        root_ids.push_back(static_cast<int>(emitted.size()) - 1);
    }

    // assemble
    std::vector<ForestNode> nodes(emitted.size());
    std::vector<int> parent(emitted.size(), -1);
    for (size_t i = 0; i < emitted.size(); ++i)
        for (int c : emitted[i].children) parent[c] = static_cast<int>(i);
    for (size_t i = 0; i < emitted.size(); ++i) {
        nodes[i].region = emitted[i].region;
        nodes[i].parent = parent[i];
        nodes[i].birth_level = emitted[i].birth;
        nodes[i].merge_level = emitted[i].merge;
        nodes[i].realized_level = emitted[i].merge ? emitted[i].merge : std::optional<Rat>(Rat(0));
    }
    Level1DResult result;
    result.structured = Forest::trusted(rel, nodes);

    ParamChainForest chains;
    chains.rel = rel;
    for (size_t i = 0; i < nodes.size(); ++i) {
        ParamChainNode pc;
        pc.region = emitted[i].region;
        pc.parent = parent[i];
        Rat low_level = emitted[i].merge ? *emitted[i].merge : Rat(0);
        pc.chain_levels = std::make_pair(low_level, emitted[i].birth);
        chains.nodes.push_back(std::move(pc));
    }
    result.chains = std::move(chains);
    result.split_levels.assign(split_set.begin(), split_set.end());
    return result;
}

Forest cluster_density_1d(const Density1D& f, const SeparationRelation& rel) {
    return level_forest_1d(f, rel).structured;
}

// --- grid engine -------------------------------------------------------------------

std::vector<Cell> grid_stencil(const Box& box, int depth, const SeparationRelation& rel) {
    const int d = box.dim();
    std::vector<std::int64_t> bound(d, 1);
    if (rel.is_tau()) {
        for (int a = 0; a < d; ++a) {
            Rat side = box.cell_side(a, depth);
            std::int64_t b = 1;
            const std::int64_t cap = std::int64_t(1) << 22;
            while (b <= cap && rat(b - 1) * side < rel.tau) ++b;  // first b with (b-1)*side >= tau is excluded
            bound[a] = b;
            require(b <= cap, "unsupported-configuration", "tau stencil too large");
        }
        Rat total = 1;
        for (int a = 0; a < d; ++a) total *= rat(2 * bound[a] + 1);
        require(total <= rat(1 << 22), "unsupported-configuration", "tau stencil too large");
    }
    std::vector<Cell> out;
    Cell cur(d, 0);
    std::function<void(int)> rec = [&](int axis) {
        if (axis == d) {
            bool all_zero = true;
            for (auto o : cur)
                if (o != 0) all_zero = false;
            if (all_zero) return;
            if (rel.is_tau()) {
                Rat d2 = 0;
                for (int a = 0; a < d; ++a) {
                    std::int64_t g = std::llabs(cur[a]) - 1;
                    if (g > 0) {
                        Rat ga = rat(g) * box.cell_side(a, depth);
                        d2 += ga * ga;
                    }
                }
                if (d2 >= rel.tau * rel.tau) return;  // separated offsets stay out
            }
            out.push_back(cur);
            return;
        }
        for (std::int64_t o = -bound[axis]; o <= bound[axis]; ++o) {
            cur[axis] = o;
            rec(axis + 1);
        }
    };
    rec(0);
    return out;
}

namespace {

std::vector<Cell> linear_to_cells(const std::vector<std::int64_t>& linear, int depth, int dim) {
    std::vector<Cell> out;
    out.reserve(linear.size());
    for (auto idx : linear) out.push_back(cell_from_linear_index(idx, depth, dim));
    return out;
}

}  // namespace

Forest cluster_density_grid(const GridDensity& g, const SeparationRelation& rel) {
    const int d = g.box.dim();
    const int depth = g.depth;
    auto stencil = grid_stencil(g.box, depth, rel);
    const std::int64_t n_axis = std::int64_t(1) << depth;

    std::map<Rat, std::vector<std::int64_t>, std::greater<Rat>> by_value;
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx)
        if (g.value(idx) > 0) by_value[g.value(idx)].push_back(idx);

    DisjointSets uf;
    std::vector<int> active(static_cast<std::size_t>(g.cell_count()), -1);
    std::vector<std::int64_t> uf_to_cell;

    struct BranchRec {
        Rat birth;
        std::vector<std::int64_t> cells;
        std::vector<int> pending;
    };
    std::vector<BranchRec> branches;
    std::unordered_map<int, int> branch_of;  // uf root -> branch index

    struct ENode {
        Region region;
        Rat birth, realized;
        std::optional<Rat> merge;
        std::vector<int> children;
    };
    std::vector<ENode> emitted;
    std::optional<Rat> prev_v;

    auto neighbors = [&](std::int64_t linear) {
        Cell c = cell_from_linear_index(linear, depth, d);
        std::vector<std::int64_t> out;
        for (const auto& o : stencil) {
            Cell nb(d);
            bool ok = true;
            for (int a = 0; a < d; ++a) {
                nb[a] = c[a] + o[a];
                if (nb[a] < 0 || nb[a] >= n_axis) ok = false;
            }
            if (ok) out.push_back(cell_linear_index(nb, depth));
        }
        return out;
    };

    for (const auto& [v, new_cells] : by_value) {
        for (auto idx : new_cells) {
            active[static_cast<std::size_t>(idx)] = uf.add();
            uf_to_cell.push_back(idx);
        }
        for (auto idx : new_cells)
            for (auto nb : neighbors(idx))
                if (active[static_cast<std::size_t>(nb)] >= 0)
                    uf.unite(active[static_cast<std::size_t>(idx)], active[static_cast<std::size_t>(nb)]);

        std::unordered_map<int, std::vector<int>> merged;       // final root -> old branches
        for (const auto& [root, b] : branch_of) merged[uf.find(root)].push_back(b);
        std::unordered_map<int, std::vector<std::int64_t>> news;  // final root -> fresh cells
        for (auto idx : new_cells) news[uf.find(active[static_cast<std::size_t>(idx)])].push_back(idx);

        std::unordered_map<int, int> next_branch_of;
        std::set<int> roots;
        for (const auto& [r, b] : merged) roots.insert(r);
        for (const auto& [r, cs] : news) roots.insert(r);
        for (int root : roots) {
            auto& olds = merged[root];
            auto& fresh = news[root];
            if (olds.empty()) {
                BranchRec rec;
                rec.birth = v;
                rec.cells = fresh;
                branches.push_back(std::move(rec));
                next_branch_of[root] = static_cast<int>(branches.size()) - 1;
            } else if (olds.size() == 1) {
                BranchRec& rec = branches[olds[0]];
                rec.cells.insert(rec.cells.end(), fresh.begin(), fresh.end());
                next_branch_of[root] = olds[0];
            } else {
                std::vector<int> child_ids;
                for (int b : olds) {
                    BranchRec& rec = branches[b];
                    ENode node{make_cells(g.box, depth, linear_to_cells(rec.cells, depth, d)), rec.birth,
                               *prev_v, v, std::move(rec.pending)};
                    emitted.push_back(std::move(node));
                    child_ids.push_back(static_cast<int>(emitted.size()) - 1);
                }
                BranchRec rec;
                rec.birth = v;
                for (int b : olds) {
                    rec.cells.insert(rec.cells.end(), branches[b].cells.begin(), branches[b].cells.end());
                    branches[b].cells.clear();
                }
                rec.cells.insert(rec.cells.end(), fresh.begin(), fresh.end());
                rec.pending = std::move(child_ids);
                branches.push_back(std::move(rec));
                next_branch_of[root] = static_cast<int>(branches.size()) - 1;
            }
        }
        branch_of = std::move(next_branch_of);
        prev_v = v;
    }

    require(prev_v.has_value(), "bad-density", "grid density has no positive cells");
    for (const auto& [root, b] : branch_of) {
        BranchRec& rec = branches[b];
        ENode node{make_cells(g.box, depth, linear_to_cells(rec.cells, depth, d)), rec.birth, *prev_v,
                   std::nullopt, std::move(rec.pending)};
        emitted.push_back(std::move(node));
    }

    std::vector<int> parent(emitted.size(), -1);
    for (size_t i = 0; i < emitted.size(); ++i)
        for (int c : emitted[i].children) parent[c] = static_cast<int>(i);
    std::vector<ForestNode> nodes(emitted.size());
    for (size_t i = 0; i < emitted.size(); ++i) {
        nodes[i].region = emitted[i].region;
        nodes[i].parent = parent[i];
        nodes[i].birth_level = emitted[i].birth;
        nodes[i].realized_level = emitted[i].realized;
        nodes[i].merge_level = emitted[i].merge;
    }
    return Forest::trusted(rel, std::move(nodes));
}

SimpleMeasure grid_canonical_simple(const GridDensity& g, const SeparationRelation& rel) {
    const int d = g.box.dim();
    const int depth = g.depth;
    auto stencil = grid_stencil(g.box, depth, rel);
    const std::int64_t n_axis = std::int64_t(1) << depth;
    Rat vol = cell_volume(g.box, depth);

    std::map<Rat, std::vector<std::int64_t>, std::greater<Rat>> by_value;
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx)
        if (g.value(idx) > 0) by_value[g.value(idx)].push_back(idx);
    std::vector<Rat> levels;
    for (const auto& [v, cs] : by_value) levels.push_back(v);

    DisjointSets uf;
    std::vector<int> active(static_cast<std::size_t>(g.cell_count()), -1);

    struct BranchRec {
        std::vector<std::int64_t> cells;
        int node = -1;  // current term index for this component's cell set
    };
    std::vector<BranchRec> branches;
    std::unordered_map<int, int> branch_of;

    struct Term {
        std::vector<std::int64_t> cells;
        Rat weight;
        int parent = -1;
        std::vector<int> children;
    };
    std::vector<Term> terms;

    auto neighbors = [&](std::int64_t linear) {
        Cell c = cell_from_linear_index(linear, depth, d);
        std::vector<std::int64_t> out;
        for (const auto& o : stencil) {
            Cell nb(d);
            bool ok = true;
            for (int a = 0; a < d; ++a) {
                nb[a] = c[a] + o[a];
                if (nb[a] < 0 || nb[a] >= n_axis) ok = false;
            }
            if (ok) out.push_back(cell_linear_index(nb, depth));
        }
        return out;
    };

    for (size_t li = 0; li < levels.size(); ++li) {
        const Rat& v = levels[li];
        Rat next = li + 1 < levels.size() ? levels[li + 1] : Rat(0);
        Rat increment = v - next;
        const auto& new_cells = by_value[v];
        for (auto idx : new_cells) active[static_cast<std::size_t>(idx)] = uf.add();
        for (auto idx : new_cells)
            for (auto nb : neighbors(idx))
                if (active[static_cast<std::size_t>(nb)] >= 0)
                    uf.unite(active[static_cast<std::size_t>(idx)], active[static_cast<std::size_t>(nb)]);

        std::unordered_map<int, std::vector<int>> merged;
        for (const auto& [root, b] : branch_of) merged[uf.find(root)].push_back(b);
        std::unordered_map<int, std::vector<std::int64_t>> news;
        for (auto idx : new_cells) news[uf.find(active[static_cast<std::size_t>(idx)])].push_back(idx);

        std::unordered_map<int, int> next_branch_of;
        std::set<int> roots;
        for (const auto& [r, b] : merged) roots.insert(r);
        for (const auto& [r, cs] : news) roots.insert(r);
        for (int root : roots) {
            auto& olds = merged[root];
            auto& fresh = news[root];
            int branch_idx;
            bool changed = !fresh.empty() || olds.size() != 1;
            if (olds.empty()) {
                BranchRec rec;
                rec.cells = fresh;
                branches.push_back(std::move(rec));
                branch_idx = static_cast<int>(branches.size()) - 1;
            } else if (olds.size() == 1) {
                branch_idx = olds[0];
                auto& rec = branches[branch_idx];
                rec.cells.insert(rec.cells.end(), fresh.begin(), fresh.end());
            } else {
                BranchRec rec;
                for (int b : olds) {
                    rec.cells.insert(rec.cells.end(), branches[b].cells.begin(), branches[b].cells.end());
                    branches[b].cells.clear();
                }
                rec.cells.insert(rec.cells.end(), fresh.begin(), fresh.end());
                branches.push_back(std::move(rec));
                branch_idx = static_cast<int>(branches.size()) - 1;
            }
            auto& rec = branches[branch_idx];
            if (changed || rec.node < 0) {
                Term t;
                t.cells = rec.cells;
                t.weight = increment * vol * rat(static_cast<long>(rec.cells.size()));
                for (int b : (olds.size() >= 2 ? olds : std::vector<int>{})) {
                    if (branches[b].node >= 0) t.children.push_back(branches[b].node);
                }
                if (olds.size() == 1 && branches[olds[0]].node >= 0 && changed)
                    t.children.push_back(branches[olds[0]].node);
                terms.push_back(std::move(t));
                rec.node = static_cast<int>(terms.size()) - 1;
            } else {
                terms[rec.node].weight += increment * vol * rat(static_cast<long>(rec.cells.size()));
            }
            next_branch_of[root] = branch_idx;
        }
        branch_of = std::move(next_branch_of);
    }

    std::vector<int> parent(terms.size(), -1);
    for (size_t i = 0; i < terms.size(); ++i)
        for (int c : terms[i].children) parent[c] = static_cast<int>(i);
    std::vector<ForestNode> nodes(terms.size());
    std::vector<std::pair<Region, Rat>> term_list;
    for (size_t i = 0; i < terms.size(); ++i) {
        nodes[i].region = make_cells(g.box, depth, linear_to_cells(terms[i].cells, depth, d));
        nodes[i].parent = parent[i];
        term_list.emplace_back(nodes[i].region, terms[i].weight);
    }
    Forest f = Forest::trusted(rel, std::move(nodes));
    return SimpleMeasure::trusted(std::move(f), std::move(term_list));
}

// --- kinship ------------------------------------------------------------------------

namespace {

// 1d: is some relation-group of the closed superlevel at h a superset of both?
struct Kin1DProbe {
    IvSet set1, set2;
};

std::optional<std::pair<Rat, std::vector<IvSet>>> kinship_1d_search(const Density1D& f,
                                                                    const SeparationRelation& rel,
                                                                    const Kin1DProbe& probe) {
    std::set<Rat> cand_set;
    for (const Rat& v : f.breakpoint_values())
        if (v > 0) cand_set.insert(v);
    for (const auto& s : {probe.set1, probe.set2})
        for (const auto& iv : s) {
            insert_values_at(f, iv.lo, cand_set);
            insert_values_at(f, iv.hi, cand_set);
        }
    if (rel.is_tau())
        for (const Rat& v : tau_gap_criticals(f, rel.tau))
            if (v > 0) cand_set.insert(v);
    std::vector<Rat> cands(cand_set.rbegin(), cand_set.rend());

    auto try_level = [&](const Rat& h) -> std::optional<std::vector<IvSet>> {
        IvSet s = f.superlevel_closed(h);
        auto groups = group_ivs(s, rel);
        for (const auto& g : groups)
            if (ivset_covers(g, probe.set1) && ivset_covers(g, probe.set2))
                return std::vector<IvSet>{g};
        return std::nullopt;
    };

    for (size_t i = 0; i < cands.size(); ++i) {
        if (auto g = try_level(cands[i])) return std::make_pair(cands[i], *g);
        // the supremum may be unattained under tau: test the stripe just below
        Rat low = i + 1 < cands.size() ? cands[i + 1] : Rat(0);
        Rat mid = (cands[i] + low) / 2;
        if (mid > 0) {
            if (auto g = try_level(mid)) return std::make_pair(cands[i], *g);
        }
    }
    return std::nullopt;
}

std::optional<KinshipCertificate> kinship_1d(const Density1D& f, const SeparationRelation& rel, const Region& b1,
                                             const Region& b2) {
    Kin1DProbe probe{region_to_ivset_1d(b1), region_to_ivset_1d(b2)};
    auto hit = kinship_1d_search(f, rel, probe);
    if (!hit) return std::nullopt;
    KinshipCertificate cert{b1, b2, {}, hit->first};
    for (const auto& g : hit->second)
        for (const auto& iv : g) cert.support.push_back(make_interval(f.box, iv.lo, iv.hi, iv.lc, iv.hc));
    return cert;
}

// grid: group ids of the superlevel cell set under the stencil
struct GridGroups {
    std::vector<int> group_of;  // by linear index, -1 when below level
    int count = 0;
};

GridGroups grid_groups_at(const GridDensity& g, const std::vector<Cell>& stencil, const Rat& level) {
    const int d = g.box.dim();
    const std::int64_t n_axis = std::int64_t(1) << g.depth;
    GridGroups out;
    out.group_of.assign(static_cast<std::size_t>(g.cell_count()), -1);
    DisjointSets uf;
    std::vector<std::int64_t> members;
    std::vector<int> id(static_cast<std::size_t>(g.cell_count()), -1);
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx) {
        if (g.value(idx) < level) continue;
        id[static_cast<std::size_t>(idx)] = uf.add();
        members.push_back(idx);
    }
    for (auto idx : members) {
        Cell c = cell_from_linear_index(idx, g.depth, d);
        for (const auto& o : stencil) {
            Cell nb(d);
            bool ok = true;
            for (int a = 0; a < d; ++a) {
                nb[a] = c[a] + o[a];
                if (nb[a] < 0 || nb[a] >= n_axis) ok = false;
            }
            if (!ok) continue;
            std::int64_t nidx = cell_linear_index(nb, g.depth);
            if (id[static_cast<std::size_t>(nidx)] >= 0) uf.unite(id[static_cast<std::size_t>(idx)], id[static_cast<std::size_t>(nidx)]);
        }
    }
    std::map<int, int> root_to_group;
    for (auto idx : members) {
        int root = uf.find(id[static_cast<std::size_t>(idx)]);
        auto [it, fresh] = root_to_group.try_emplace(root, out.count);
        if (fresh) ++out.count;
        out.group_of[static_cast<std::size_t>(idx)] = it->second;
    }
    return out;
}

// group fully containing the region, or -1
int grid_locate(const GridDensity& g, const GridGroups& groups, const Region& r) {
    const int d = g.box.dim();
    if (r.is_atom()) {
        for (const auto& c : cells_containing_point(g.box, g.depth, r.atom().point)) {
            int grp = groups.group_of[static_cast<std::size_t>(cell_linear_index(c, g.depth))];
            if (grp >= 0) return grp;
        }
        return -1;
    }
    require(r.is_cells(), "unsupported-configuration", "grid kinship probes must be cell unions or atoms");
    const auto& u = r.cells();
    int grp = -2;
    auto visit = [&](std::int64_t fine_idx) {
        int gidx = groups.group_of[static_cast<std::size_t>(fine_idx)];
        if (gidx < 0) return false;
        if (grp == -2) grp = gidx;
        return grp == gidx;
    };
    if (u.depth >= g.depth) {
        int shift = u.depth - g.depth;
        for (const auto& c : u.cells) {
            Cell anc(c.size());
            for (int a = 0; a < d; ++a) anc[a] = c[a] >> shift;
            if (!visit(cell_linear_index(anc, g.depth))) return -1;
        }
    } else {
        int shift = g.depth - u.depth;
        const std::int64_t m = std::int64_t(1) << shift;
        for (const auto& c : u.cells) {
            std::vector<std::int64_t> offs(d, 0);
            while (true) {
                Cell f(d);
                for (int a = 0; a < d; ++a) f[a] = (c[a] << shift) + offs[a];
                if (!visit(cell_linear_index(f, g.depth))) return -1;
                int a = d - 1;
                while (a >= 0 && ++offs[a] == m) offs[a--] = 0;
                if (a < 0) break;
            }
        }
    }
    return grp >= 0 ? grp : -1;
}

std::optional<KinshipCertificate> kinship_grid(const GridDensity& g, const SeparationRelation& rel, const Region& b1,
                                               const Region& b2) {
    auto stencil = grid_stencil(g.box, g.depth, rel);
    auto values = g.distinct_positive_values_desc();
    // containment in a single group is monotone as the level descends
    auto joined_at = [&](const Rat& v) -> std::optional<GridGroups> {
        GridGroups groups = grid_groups_at(g, stencil, v);
        int g1 = grid_locate(g, groups, b1);
        if (g1 < 0) return std::nullopt;
        int g2 = grid_locate(g, groups, b2);
        if (g2 < 0 || g1 != g2) return std::nullopt;
        return groups;
    };
    int lo = 0, hi = static_cast<int>(values.size()) - 1;  // search smallest index (largest value) that joins
    if (hi < 0 || !joined_at(values[hi])) return std::nullopt;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (joined_at(values[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    Rat height = values[lo];
    GridGroups groups = *joined_at(height);
    int target = grid_locate(g, groups, b1);
    std::vector<Cell> cells;
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx)
        if (groups.group_of[static_cast<std::size_t>(idx)] == target)
            cells.push_back(cell_from_linear_index(idx, g.depth, g.box.dim()));
    KinshipCertificate cert{b1, b2, {make_cells(g.box, g.depth, std::move(cells))}, std::move(height)};
    return cert;
}

const Density1D* mixture_line_density(const MixtureDensity& mix, Density1D& storage) {
    for (const auto& comp : mix.components) {
        if (comp.is_line()) return &comp.line().density;
        if (comp.is_grid() && comp.grid().grid.box.dim() == 1) {
            storage = grid_to_density1d(comp.grid().grid);
            return &storage;
        }
    }
    return nullptr;
}

}  // namespace

std::optional<KinshipCertificate> kinship(const DensityModel& p, const SeparationRelation& rel, const Region& b1,
                                          const Region& b2) {
    if (p.is_1d()) return kinship_1d(p.d1(), rel, b1, b2);
    if (p.is_grid()) {
        if (p.grid().box.dim() == 1) return kinship_1d(grid_to_density1d(p.grid()), rel, b1, b2);
        return kinship_grid(p.grid(), rel, b1, b2);
    }
    // mixtures: a supporting base measure lives in exactly one component
    const MixtureDensity& mix = p.mixture();
    if (b1.is_polyline() || b2.is_polyline()) {
        // along a shared curve, in the parameter domain
        for (const auto& comp : mix.components) {
            if (!comp.is_curve()) continue;
            if (!contains(comp.curve().path, b1) || !contains(comp.curve().path, b2)) continue;
            auto r1 = polyline_param_range(comp.curve().path, b1);
            auto r2 = polyline_param_range(comp.curve().path, b2);
            Box pbox({Rat(0)}, {Rat(1)});
            Region p1 = make_interval(pbox, r1.first, r1.second);
            Region p2 = make_interval(pbox, r2.first, r2.second);
            auto cert = kinship_1d(comp.curve().density, rel, p1, p2);
            if (!cert) return std::nullopt;
            std::vector<Region> support;
            for (const auto& piece : cert->support)
                support.push_back(polyline_sub_curve(comp.curve().path, piece.interval().lo, piece.interval().hi));
            return KinshipCertificate{b1, b2, std::move(support), cert->height};
        }
        return std::nullopt;
    }
    if (mix.box.dim() == 1) {
        Density1D storage{};
        const Density1D* line = mixture_line_density(mix, storage);
        if (!line) return std::nullopt;
        return kinship_1d(*line, rel, b1, b2);
    }
    if (b1.is_cells() || b1.is_atom()) {
        for (const auto& comp : mix.components)
            if (comp.is_grid()) return kinship_grid(comp.grid().grid, rel, b1, b2);
    }
    return std::nullopt;
}

// --- adaptedness --------------------------------------------------------------------

bool AdaptednessReport::adapted() const {
    for (const auto& pr : pairs)
        if (!pr.grounded || !pr.fine || !pr.motivated) return false;
    return true;
}

std::string AdaptednessReport::first_violation() const {
    for (const auto& pr : pairs) {
        if (!pr.grounded) return "not grounded";
        if (!pr.fine) return "not fine";
        if (!pr.motivated) return "not motivated";
    }
    return "";
}

namespace {

bool region_covered_by_support(const Region& r, const std::vector<Region>& support) {
    if (support.size() == 1) return contains(support.front(), r);
    if (r.box.dim() == 1) {
        IvSet u;
        for (const auto& s : support) u = ivset_union(u, region_to_ivset_1d(s));
        return ivset_covers(u, region_to_ivset_1d(r));
    }
    for (const auto& s : support)
        if (contains(s, r)) return true;
    return false;
}

}  // namespace

AdaptednessReport is_adapted(const SimpleMeasure& q, const DensityModel& p) {
    AdaptednessReport report;
    if (q.is_zero()) return report;  // vacuous
    require(majorizes(q, p), "q-not-below-p", "the simple measure is not majorized by the target");
    const Forest& f = q.forest();
    const SeparationRelation& rel = f.relation();

    for (const auto& family : f.sibling_families()) {
        bool has_parent = f.node(family.front()).parent >= 0;
        std::vector<Rat> heights;
        for (int m : family) heights.push_back(q.level_height(m));
        for (size_t a = 0; a < family.size(); ++a) {
            for (size_t b = a + 1; b < family.size(); ++b) {
                SiblingPairReport pr;
                pr.a1 = f.node(family[a]).region;
                pr.a2 = f.node(family[b]).region;
                pr.has_parent = has_parent;
                auto cert = kinship(p, rel, pr.a1, pr.a2);
                if (cert) {
                    pr.kin = true;
                    pr.support_height = cert->height;
                    if (!has_parent) {
                        pr.grounded = false;
                        pr.counterexample =
                            BaseMeasure{cert->support.front(), cert->height * measure_exact(cert->support.front())};
                    }
                    for (int m : family) {
                        if (!region_covered_by_support(f.node(m).region, cert->support)) {
                            pr.fine = false;
                            pr.counterexample =
                                BaseMeasure{cert->support.front(), cert->height * measure_exact(cert->support.front())};
                            break;
                        }
                    }
                    Rat hmin = rat_min(heights[a], heights[b]);
                    if (cert->height < hmin) {
                        pr.alpha_margin = cert->height / hmin;
                    } else {
                        pr.motivated = false;
                        pr.counterexample =
                            BaseMeasure{cert->support.front(), cert->height * measure_exact(cert->support.front())};
                    }
                } else {
                    pr.alpha_margin = Rat(0);
                }
                report.pairs.push_back(std::move(pr));
            }
        }
    }
    return report;
}

// --- refinement sequences --------------------------------------------------------------

namespace {

// Adaptedness of a structured grid forest whose node levels are the realized
// thresholds (the level heights of the canonical simple measure).
std::optional<std::string> structured_grid_violation(const Forest& f, const GridDensity& finest,
                                                     const SeparationRelation& rel) {
    DensityModel p(finest);
    for (const auto& family : f.sibling_families()) {
        bool has_parent = f.node(family.front()).parent >= 0;
        for (size_t a = 0; a < family.size(); ++a) {
            for (size_t b = a + 1; b < family.size(); ++b) {
                const Region& r1 = f.node(family[a]).region;
                const Region& r2 = f.node(family[b]).region;
                auto cert = kinship(p, rel, r1, r2);
                if (!cert) continue;
                if (!has_parent) return "not grounded";
                Rat h1 = f.node(family[a]).realized_level.value();
                Rat h2 = f.node(family[b]).realized_level.value();
                if (!(cert->height < rat_min(h1, h2))) return "not motivated";
                for (int m : family)
                    if (!region_covered_by_support(f.node(m).region, cert->support)) return "not fine";
            }
        }
    }
    return std::nullopt;
}

}  // namespace

RefineReport refine_and_cluster(const std::function<Rat(const Point&)>& f, const Box& box,
                                const std::vector<int>& depths, const SeparationRelation& rel,
                                const std::optional<std::vector<Rat>>& offset) {
    require(!depths.empty(), "empty-input", "need at least one depth");
    for (size_t i = 0; i + 1 < depths.size(); ++i)
        require(depths[i] < depths[i + 1], "bad-input", "depths must be strictly increasing");

    const int d = box.dim();
    const int finest_depth = depths.back();
    GridDensity finest = GridDensity::sample(box, finest_depth, f, offset);
    Rat finest_total = finest.total();

    RefineReport report;
    std::vector<Forest> forests;
    for (int depth : depths) {
        int shift = finest_depth - depth;
        std::vector<Rat> values(std::size_t(1) << (d * depth), Rat(-1));
        for (std::int64_t idx = 0; idx < finest.cell_count(); ++idx) {
            Cell c = cell_from_linear_index(idx, finest_depth, d);
            Cell coarse(c.size());
            for (int a = 0; a < d; ++a) coarse[a] = c[a] >> shift;
            std::size_t ci = static_cast<std::size_t>(cell_linear_index(coarse, depth));
            if (values[ci] < 0 || finest.value(idx) < values[ci]) values[ci] = finest.value(idx);
        }
        GridDensity grid = GridDensity::from_values(box, depth, std::move(values));
        RefineStep step;
        step.depth = depth;
        step.clustering = cluster_density_grid(grid, rel);
        step.residual = finest_total - grid.total();
        auto violation = structured_grid_violation(step.clustering, finest, rel);
        step.adapted = !violation.has_value();
        step.grid = std::move(grid);
        forests.push_back(step.clustering);
        report.steps.push_back(std::move(step));
    }

    try {
        report.stabilized = isomonotone_limit(forests);
    } catch (const Error& e) {
        fail("monotonicity-violation", e.what());
    }
    report.isomonotone = true;
    for (size_t i = 0; i < report.steps.size(); ++i)
        require(report.steps[i].adapted, "adaptedness-violation",
                "approximation at index " + std::to_string(i) + " (depth " +
                    std::to_string(report.steps[i].depth) + ") is not adapted");
    report.adapted = true;
    return report;
}

}  // namespace mcl
