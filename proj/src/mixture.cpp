#include "mcl/mixture.hpp"

#include <algorithm>
#include <set>

namespace mcl {

MixtureDensity make_mixture(Box box, std::vector<DimComponent> components) {
    require(!components.empty(), "bad-density", "mixture needs at least one component");
    for (auto& comp : components) {
        if (comp.is_atoms()) {
            require(comp.dim == 0, "unsupported-dimension", "atoms form the dimension-0 component");
            require(!comp.atoms().atoms.empty(), "bad-density", "empty atom component");
            for (const auto& [p, w] : comp.atoms().atoms) {
                require(w > 0, "bad-density", "atom weights must be positive");
                require(box.contains_point(p), "bad-region", "atom outside ambient box");
            }
        } else if (comp.is_line()) {
            require(comp.dim == 1 && box.dim() == 1, "unsupported-dimension",
                    "line component needs a one-dimensional box");
        } else if (comp.is_curve()) {
            require(comp.dim == 1, "unsupported-dimension", "curve components have dimension 1");
            require(comp.curve().path.is_polyline(), "bad-region", "curve component needs a polyline path");
        } else {
            require(comp.dim == box.dim(), "unsupported-dimension",
                    "grid component lives in the ambient dimension");
        }
        require(comp.dim == 0 || comp.dim == 1 || comp.dim == box.dim(), "unsupported-dimension",
                "Hausdorff dimension class must be 0, 1 or the ambient dimension");
    }
    std::stable_sort(components.begin(), components.end(),
                     [](const DimComponent& a, const DimComponent& b) { return a.dim < b.dim; });
    return MixtureDensity{std::move(box), std::move(components)};
}

namespace {

// cells (at grid depth) touched by the polyline, including corner contacts
std::vector<std::int64_t> traversed_cells(const GridDensity& g, const Region& path) {
    std::set<std::int64_t> touched;
    const std::vector<Point> vs = polyline_trimmed_vertices(path);
    for (size_t i = 0; i + 1 < vs.size(); ++i) {
        auto cuts = segment_lattice_cuts(g.box, g.depth, vs[i], vs[i + 1]);
        for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            Point mid = lerp(vs[i], vs[i + 1], (cuts[k] + cuts[k + 1]) / 2);
            for (const auto& c : cells_containing_point(g.box, g.depth, mid))
                touched.insert(cell_linear_index(c, g.depth));
        }
        for (const auto& t : cuts)
            for (const auto& c : cells_containing_point(g.box, g.depth, lerp(vs[i], vs[i + 1], t)))
                touched.insert(cell_linear_index(c, g.depth));
    }
    return std::vector<std::int64_t>(touched.begin(), touched.end());
}

MixtureDiagnostic check_curve_against_grid(const CurveComponent& curve, const GridComponent& gridc) {
    MixtureDiagnostic diag;
    const GridDensity& g = gridc.grid;
    auto touched = traversed_cells(g, curve.path);
    bool meets_support = false;
    for (auto idx : touched)
        if (g.value(idx) > 0) meets_support = true;
    if (!meets_support) return diag;  // disjoint supports pass vacuously

    if (gridc.analytic) {
        // along a straight segment the density must stay constant; sampled at the
        // endpoints, quarters and midpoint of every segment (exact for densities
        // that are polynomial of degree <= 2 along lines)
        const Rat tol = rat(1, 1000000000);
        const std::vector<Point> vs = polyline_trimmed_vertices(curve.path);
        std::optional<Rat> ref;
        for (size_t i = 0; i + 1 < vs.size(); ++i) {
            for (int k = 0; k <= 4; ++k) {
                Point p = lerp(vs[i], vs[i + 1], rat(k, 4));
                Rat v = gridc.analytic->eval(p);
                if (!ref) ref = v;
                if (rat_abs(v - *ref) > tol) {
                    diag.ok = false;
                    diag.messages.push_back("density " + gridc.analytic->name + " is not constant along the curve: " +
                                            rat_str(*ref) + " vs " + rat_str(v));
                    return diag;
                }
            }
        }
        return diag;
    }

    std::optional<std::int64_t> ref_cell;
    for (auto idx : touched) {
        if (!ref_cell) {
            ref_cell = idx;
            continue;
        }
        if (g.value(idx) != g.value(*ref_cell)) {
            diag.ok = false;
            Cell a = cell_from_linear_index(*ref_cell, g.depth, g.box.dim());
            Cell b = cell_from_linear_index(idx, g.depth, g.box.dim());
            std::string sa, sb;
            for (size_t i = 0; i < a.size(); ++i) sa += (i ? "," : "") + std::to_string(a[i]);
            for (size_t i = 0; i < b.size(); ++i) sb += (i ? "," : "") + std::to_string(b[i]);
            diag.messages.push_back("curve crosses a density step between cells (" + sa + ")=" +
                                    rat_str(g.value(*ref_cell)) + " and (" + sb + ")=" + rat_str(g.value(idx)));
            return diag;
        }
    }
    return diag;
}

Region atoms_region(const Box& box, const Point& p) { return make_atom(box, p); }

}  // namespace

MixtureDiagnostic check_mixture_condition(const DimComponent& low, const DimComponent& high, const Box& box,
                                          const SeparationRelation& rel) {
    (void)rel;
    require(low.dim < high.dim, "bad-input", "condition applies to increasing dimension pairs");
    MixtureDiagnostic diag;
    // point pieces are trivially on one niveau line
    if (low.is_atoms()) return diag;
    if (low.is_curve() && high.is_grid()) return check_curve_against_grid(low.curve(), high.grid());
    if (low.is_line() && high.is_grid()) {
        // a full interval support against a grid cannot sit on one niveau line unless constant
        diag.ok = false;
        diag.messages.push_back("line component against a grid of the same ambient dimension is unsupported");
        return diag;
    }
    return diag;
}

MixtureDiagnostic check_mixture(const MixtureDensity& m, const SeparationRelation& rel) {
    MixtureDiagnostic diag;
    const auto& comps = m.components;
    for (size_t i = 0; i < comps.size(); ++i) {
        for (size_t j = 0; j < comps.size(); ++j) {
            if (i == j) continue;
            if (comps[i].dim < comps[j].dim) {
                if (i < j) {
                    auto d = check_mixture_condition(comps[i], comps[j], m.box, rel);
                    if (!d.ok) {
                        diag.ok = false;
                        diag.messages.insert(diag.messages.end(), d.messages.begin(), d.messages.end());
                    }
                }
            } else if (comps[i].dim == comps[j].dim && i < j) {
                // same-dimension components must have separated supports
                if (comps[i].is_curve() && comps[j].is_curve()) {
                    if (!separated(rel, comps[i].curve().path, comps[j].curve().path)) {
                        diag.ok = false;
                        diag.messages.push_back("same-dimension curve supports are not separated");
                    }
                } else {
                    diag.ok = false;
                    diag.messages.push_back("duplicate component for one dimension class");
                }
            }
        }
    }
    return diag;
}

Forest cluster_mixture(const MixtureDensity& m, const SeparationRelation& rel) {
    auto diag = check_mixture(m, rel);
    if (!diag.ok) {
        std::string msg;
        for (const auto& s : diag.messages) msg += (msg.empty() ? "" : "; ") + s;
        fail("mixture-condition-failure", msg);
    }

    std::vector<ForestNode> nodes;
    auto append = [&](const Forest& f) {
        int offset = static_cast<int>(nodes.size());
        for (int i = 0; i < f.size(); ++i) {
            ForestNode nd = f.node(i);
            if (nd.parent >= 0) nd.parent += offset;
            nodes.push_back(std::move(nd));
        }
    };

    for (const auto& comp : m.components) {
        if (comp.is_atoms()) {
            std::vector<Region> regions;
            for (const auto& [p, w] : comp.atoms().atoms) regions.push_back(atoms_region(m.box, p));
            append(Forest::build(rel, std::move(regions)));
        } else if (comp.is_line()) {
            append(cluster_density_1d(comp.line().density, rel));
        } else if (comp.is_curve()) {
            require(!rel.is_tau(), "unsupported-configuration",
                    "tau separation along curve components is not supported");
            Forest param = cluster_density_1d(comp.curve().density, rel);
            std::vector<ForestNode> mapped(param.size());
            for (int i = 0; i < param.size(); ++i) {
                const auto& iv = param.node(i).region.interval();
                mapped[i] = param.node(i);
                mapped[i].region = polyline_sub_curve(comp.curve().path, iv.lo, iv.hi, iv.lc, iv.hc);
            }
            append(Forest::trusted(rel, std::move(mapped)));
        } else {
            append(cluster_density_grid(comp.grid().grid, rel));
        }
    }
    return Forest::trusted(rel, std::move(nodes));
}

}  // namespace mcl
