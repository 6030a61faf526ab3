#include "mcl/measure.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

namespace mcl {

SimpleMeasure SimpleMeasure::validate(const SeparationRelation& rel, std::vector<std::pair<Region, Rat>> terms) {
    if (terms.empty()) return zero(rel);
    std::vector<Region> regions;
    regions.reserve(terms.size());
    for (auto& [r, w] : terms) {
        require(w > 0, "bad-weight", "term weights must be positive");
        require(!r.is_polyline(), "unsupported-configuration", "polyline base sets have irrational mass");
        if (r.is_interval())
            require(r.interval().lc && r.interval().hc, "bad-region",
                    "base sets are closed; half-open intervals only arise as cluster limits");
        require(measure_exact(r) > 0, "empty-region",
                "base set " + r.describe() + " carries no reference mass");
        regions.push_back(r);
    }
    Forest f = Forest::build(rel, std::move(regions));
    return trusted(std::move(f), std::move(terms));
}

SimpleMeasure SimpleMeasure::trusted(Forest forest, std::vector<std::pair<Region, Rat>> terms) {
    require(static_cast<int>(terms.size()) == forest.size(), "bad-weight", "one weight per forest node");
    std::vector<Rat> weights(terms.size());
    std::vector<bool> seen(terms.size(), false);
    for (auto& [r, w] : terms) {
        int idx = forest.find_node(r);
        require(idx >= 0 && !seen[idx], "bad-weight", "terms do not match forest nodes");
        seen[idx] = true;
        weights[idx] = w;
    }
    return SimpleMeasure(std::move(forest), std::move(weights));
}

Rat SimpleMeasure::total() const {
    Rat s = 0;
    for (const auto& w : weights_) s += w;
    return s;
}

// mu(B cap A) / mu(A) for the reference measure of A's dimension class.
// A region strictly thinner than A is null for A's reference measure.
static Rat base_fraction(const Region& a, const Region& b) {
    if (a.is_atom()) return region_contains_point(b, a.atom().point) ? Rat(1) : Rat(0);
    if (a.dim_class() > b.dim_class()) return 0;
    if (a.box.dim() == 1) {
        IvSet cut = ivset_intersect(region_to_ivset_1d(a), region_to_ivset_1d(b));
        return ivset_length(cut) / measure_exact(a);
    }
    require(a.is_cells() && b.is_cells(), "dimension-mismatch",
            "cannot evaluate " + a.describe() + " on " + b.describe());
    require(a.box == b.box, "box-mismatch", "regions from different ambient boxes");
    const auto& ua = a.cells();
    const auto& ub = b.cells();
    int fine = std::max(ua.depth, ub.depth);
    auto refine = [&](const DyadicCellUnion& u) {
        std::set<std::int64_t> out;
        int shift = fine - u.depth;
        const std::int64_t m = std::int64_t(1) << shift;
        const int d = static_cast<int>(u.cells.front().size());
        for (const auto& c : u.cells) {
            std::vector<std::int64_t> offs(d, 0);
            while (true) {
                Cell f(d);
                for (int ax = 0; ax < d; ++ax) f[ax] = (c[ax] << shift) + offs[ax];
                out.insert(cell_linear_index(f, fine));
                int ax = d - 1;
                while (ax >= 0 && ++offs[ax] == m) offs[ax--] = 0;
                if (ax < 0) break;
            }
        }
        return out;
    };
    auto sa = refine(ua);
    auto sb = refine(ub);
    std::int64_t overlap = 0;
    for (auto idx : sa)
        if (sb.count(idx)) ++overlap;
    return rat(static_cast<long>(overlap)) / rat(static_cast<long>(sa.size()));
}

Rat SimpleMeasure::evaluate(const Region& b) const {
    int support_dim = 0;
    for (int i = 0; i < forest_.size(); ++i)
        support_dim = std::max(support_dim, forest_.node(i).region.dim_class());
    require(support_dim <= b.dim_class(), "dimension-mismatch",
            "support dimension exceeds the evaluation region " + b.describe());
    Rat s = 0;
    for (int i = 0; i < forest_.size(); ++i) s += weights_[i] * base_fraction(forest_.node(i).region, b);
    return s;
}

BaseMeasure SimpleMeasure::level(int node) const {
    const Region& a = forest_.node(node).region;
    Rat w = weights_[node];  // Q_A(A) = 1
    for (int anc : forest_.strict_ancestors(node))
        w += weights_[anc] * base_fraction(forest_.node(anc).region, a);
    return BaseMeasure{a, std::move(w)};
}

BaseMeasure SimpleMeasure::level(const Region& a) const {
    int idx = forest_.find_node(a);
    require(idx >= 0, "node-not-found", "region " + a.describe() + " is not a node of the measure's forest");
    return level(idx);
}

Rat SimpleMeasure::level_height(int node) const { return level(node).height(); }

SimpleMeasure SimpleMeasure::restrict_strict_descendants(const Region& a) const {
    int idx = forest_.find_node(a);
    require(idx >= 0, "node-not-found", "region " + a.describe() + " is not a node of the measure's forest");
    std::vector<std::pair<Region, Rat>> terms;
    for (int i = 0; i < forest_.size(); ++i) {
        if (i == idx) continue;
        bool below = false;
        for (int p : forest_.strict_ancestors(i))
            if (p == idx) below = true;
        if (below) terms.emplace_back(forest_.node(i).region, weights_[i]);
    }
    return validate(forest_.relation(), std::move(terms));
}

std::vector<std::pair<Region, Rat>> SimpleMeasure::terms() const {
    std::vector<std::pair<Region, Rat>> out;
    out.reserve(weights_.size());
    for (int i = 0; i < forest_.size(); ++i) out.emplace_back(forest_.node(i).region, weights_[i]);
    return out;
}

// --- density views ------------------------------------------------------------

Density1D SimpleMeasure::to_density_1d() const {
    require(!is_zero(), "empty-input", "zero measure has no density");
    const Box& box = forest_.node(0).region.box;
    require(box.dim() == 1, "dimension-mismatch", "not a one-dimensional measure");
    std::set<Rat> cuts{box.lo[0], box.hi[0]};
    for (int i = 0; i < forest_.size(); ++i) {
        require(!forest_.node(i).region.is_atom(), "dimension-mismatch", "atom nodes have no 1d density");
        for (const auto& v : region_to_ivset_1d(forest_.node(i).region)) {
            cuts.insert(v.lo);
            cuts.insert(v.hi);
        }
    }
    std::vector<Rat> xs(cuts.begin(), cuts.end());
    std::vector<Density1D::Piece> pieces;
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
        Rat mid = (xs[k] + xs[k + 1]) / 2;
        Rat h = 0;
        for (int i = 0; i < forest_.size(); ++i) {
            const Region& r = forest_.node(i).region;
            if (ivset_contains_point(region_to_ivset_1d(r), mid)) h += weights_[i] / measure_exact(r);
        }
        pieces.push_back(Density1D::Piece{xs[k], xs[k + 1], h, h});
    }
    return Density1D::from_pieces(box, std::move(pieces));
}

GridDensity SimpleMeasure::to_grid_density() const {
    require(!is_zero(), "empty-input", "zero measure has no density");
    const Box& box = forest_.node(0).region.box;
    int depth = 0;
    for (int i = 0; i < forest_.size(); ++i) {
        require(forest_.node(i).region.is_cells(), "dimension-mismatch", "not a grid-supported measure");
        depth = std::max(depth, forest_.node(i).region.cells().depth);
    }
    const int d = box.dim();
    std::vector<Rat> values(std::size_t(1) << (d * depth), Rat(0));
    for (int i = 0; i < forest_.size(); ++i) {
        const auto& u = forest_.node(i).region.cells();
        Rat h = weights_[i] / measure_exact(forest_.node(i).region);
        int shift = depth - u.depth;
        const std::int64_t m = std::int64_t(1) << shift;
        for (const auto& c : u.cells) {
            std::vector<std::int64_t> offs(d, 0);
            while (true) {
                Cell f(d);
                for (int ax = 0; ax < d; ++ax) f[ax] = (c[ax] << shift) + offs[ax];
                values[static_cast<std::size_t>(cell_linear_index(f, depth))] += h;
                int ax = d - 1;
                while (ax >= 0 && ++offs[ax] == m) offs[ax--] = 0;
                if (ax < 0) break;
            }
        }
    }
    return GridDensity::from_values(box, depth, std::move(values));
}

DensityModel SimpleMeasure::to_density_model() const {
    require(!is_zero(), "empty-input", "zero measure has no density");
    bool has_atom = false, has_1d = false, has_cells = false;
    const Box& box = forest_.node(0).region.box;
    for (int i = 0; i < forest_.size(); ++i) {
        const Region& r = forest_.node(i).region;
        has_atom |= r.is_atom();
        has_1d |= r.is_interval() || (r.is_cells() && box.dim() == 1);
        has_cells |= r.is_cells() && box.dim() > 1;
    }
    if (!has_atom && has_1d && !has_cells) return DensityModel(to_density_1d());
    if (!has_atom && !has_1d && has_cells) return DensityModel(to_grid_density());
    // mixture view: atoms plus the positive-dimensional rest
    MixtureDensity mix;
    mix.box = box;
    AtomsComponent atoms;
    std::vector<std::pair<Region, Rat>> rest;
    for (int i = 0; i < forest_.size(); ++i) {
        const Region& r = forest_.node(i).region;
        if (r.is_atom())
            atoms.atoms.emplace_back(r.atom().point, weights_[i]);
        else
            rest.emplace_back(r, weights_[i]);
    }
    if (!atoms.atoms.empty()) mix.components.push_back(DimComponent{0, std::move(atoms)});
    if (!rest.empty()) {
        SimpleMeasure rest_q = SimpleMeasure::validate(forest_.relation(), std::move(rest));
        if (box.dim() == 1)
            mix.components.push_back(DimComponent{1, Line1DComponent{rest_q.to_density_1d()}});
        else
            mix.components.push_back(DimComponent{box.dim(), GridComponent{rest_q.to_grid_density(), std::nullopt}});
    }
    return DensityModel(std::move(mix));
}

// --- majorization ---------------------------------------------------------------

namespace {

struct DimParts {
    std::vector<std::pair<Region, Rat>> atoms;   // atom nodes
    std::vector<std::pair<Region, Rat>> lin;     // 1d interval/cell nodes
    std::vector<std::pair<Region, Rat>> cells;   // cell unions in dim >= 2
};

DimParts split_by_dim(const SimpleMeasure& q) {
    DimParts parts;
    for (int i = 0; i < q.forest().size(); ++i) {
        const Region& r = q.forest().node(i).region;
        Rat w = q.weights()[i];
        if (r.is_atom())
            parts.atoms.emplace_back(r, w);
        else if (r.box.dim() == 1)
            parts.lin.emplace_back(r, w);
        else if (r.is_cells())
            parts.cells.emplace_back(r, w);
        else
            fail("unsupported-configuration", "cannot majorize measures with polyline support");
    }
    return parts;
}

bool atoms_below(const std::vector<std::pair<Region, Rat>>& a, const std::vector<std::pair<Region, Rat>>& b) {
    for (const auto& [r, w] : a) {
        Rat other = 0;
        for (const auto& [r2, w2] : b)
            if (r2.atom().point == r.atom().point) other += w2;
        if (w > other) return false;
    }
    return true;
}

bool atoms_below_mixture(const std::vector<std::pair<Region, Rat>>& a, const DensityModel& p) {
    if (a.empty()) return true;
    if (!p.is_mixture()) return false;  // densities carry no point mass
    for (const auto& [r, w] : a) {
        Rat other = 0;
        for (const auto& comp : p.mixture().components)
            if (comp.is_atoms())
                for (const auto& [pt, w2] : comp.atoms().atoms)
                    if (pt == r.atom().point) other += w2;
        if (w > other) return false;
    }
    return true;
}

// step-density heights of 1d nodes on the elementary grid induced by both sides
bool lin_below_density(const std::vector<std::pair<Region, Rat>>& lin, const Density1D& p) {
    if (lin.empty()) return true;
    std::set<Rat> cuts{p.box.lo[0], p.box.hi[0]};
    for (const auto& piece : p.pieces) {
        cuts.insert(piece.x0);
        cuts.insert(piece.x1);
    }
    for (const auto& [r, w] : lin)
        for (const auto& v : region_to_ivset_1d(r)) {
            cuts.insert(v.lo);
            cuts.insert(v.hi);
        }
    std::vector<Rat> xs(cuts.begin(), cuts.end());
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
        Rat mid = (xs[k] + xs[k + 1]) / 2;
        Rat h = 0;
        for (const auto& [r, w] : lin)
            if (ivset_contains_point(region_to_ivset_1d(r), mid)) h += w / measure_exact(r);
        if (h == 0) continue;
        // p is linear on (xs[k], xs[k+1]); a.e. comparison needs both one-sided values
        Rat quarter = xs[k] + (xs[k + 1] - xs[k]) / 4;
        Rat three_quarter = xs[k] + 3 * (xs[k + 1] - xs[k]) / 4;
        if (h > p.value(quarter) || h > p.value(three_quarter) || h > p.value(mid)) return false;
    }
    return true;
}

std::optional<GridDensity> cells_to_grid(const std::vector<std::pair<Region, Rat>>& cells) {
    if (cells.empty()) return std::nullopt;
    const Box& box = cells.front().first.box;
    int depth = 0;
    for (const auto& [r, w] : cells) depth = std::max(depth, r.cells().depth);
    const int d = box.dim();
    std::vector<Rat> values(std::size_t(1) << (d * depth), Rat(0));
    for (const auto& [r, w] : cells) {
        const auto& u = r.cells();
        Rat h = w / measure_exact(r);
        int shift = depth - u.depth;
        const std::int64_t m = std::int64_t(1) << shift;
        for (const auto& c : u.cells) {
            std::vector<std::int64_t> offs(d, 0);
            while (true) {
                Cell f(d);
                for (int ax = 0; ax < d; ++ax) f[ax] = (c[ax] << shift) + offs[ax];
                values[static_cast<std::size_t>(cell_linear_index(f, depth))] += h;
                int ax = d - 1;
                while (ax >= 0 && ++offs[ax] == m) offs[ax--] = 0;
                if (ax < 0) break;
            }
        }
    }
    // zero grids are legal intermediates here; bypass from_values positivity
    GridDensity g;
    g.box = box;
    g.depth = depth;
    g.values = std::move(values);
    return g;
}

bool grid_below_grid(const GridDensity& a, const GridDensity& b) {
    require(a.box == b.box, "box-mismatch", "grids over different boxes");
    int fine = std::max(a.depth, b.depth);
    const int d = a.box.dim();
    std::int64_t n = std::int64_t(1) << (d * fine);
    for (std::int64_t idx = 0; idx < n; ++idx) {
        Cell c = cell_from_linear_index(idx, fine, d);
        Cell ca(c.size()), cb(c.size());
        for (int ax = 0; ax < d; ++ax) {
            ca[ax] = c[ax] >> (fine - a.depth);
            cb[ax] = c[ax] >> (fine - b.depth);
        }
        if (a.value(ca) > b.value(cb)) return false;
    }
    return true;
}

}  // namespace

bool majorizes(const SimpleMeasure& q1, const SimpleMeasure& q2) {
    if (q1.is_zero()) return true;
    if (q2.is_zero()) return false;
    DimParts a = split_by_dim(q1);
    DimParts b = split_by_dim(q2);
    if (!atoms_below(a.atoms, b.atoms)) return false;
    if (!a.lin.empty()) {
        if (b.lin.empty()) return false;
        SimpleMeasure bl = SimpleMeasure::validate(q2.forest().relation(), b.lin);
        if (!lin_below_density(a.lin, bl.to_density_1d())) return false;
    }
    if (!a.cells.empty()) {
        auto ga = cells_to_grid(a.cells);
        auto gb = cells_to_grid(b.cells);
        if (!gb) return false;
        if (!grid_below_grid(*ga, *gb)) return false;
    }
    return true;
}

bool majorizes(const SimpleMeasure& q, const DensityModel& p) {
    if (q.is_zero()) return true;
    DimParts parts = split_by_dim(q);
    if (!atoms_below_mixture(parts.atoms, p)) return false;
    if (!parts.lin.empty()) {
        const Density1D* d = nullptr;
        Density1D storage{};
        if (p.is_1d()) {
            d = &p.d1();
        } else if (p.is_grid() && p.grid().box.dim() == 1) {
            storage = grid_to_density1d(p.grid());
            d = &storage;
        } else if (p.is_mixture()) {
            for (const auto& comp : p.mixture().components) {
                if (comp.is_grid() && comp.grid().grid.box.dim() == 1) {
                    storage = grid_to_density1d(comp.grid().grid);
                    d = &storage;
                }
                if (comp.is_line()) {
                    storage = comp.line().density;
                    d = &storage;
                }
            }
        }
        if (!d) return false;
        if (!lin_below_density(parts.lin, *d)) return false;
    }
    if (!parts.cells.empty()) {
        auto ga = cells_to_grid(parts.cells);
        const GridDensity* g = nullptr;
        if (p.is_grid()) {
            g = &p.grid();
        } else if (p.is_mixture()) {
            for (const auto& comp : p.mixture().components)
                if (comp.is_grid()) g = &comp.grid().grid;
        }
        if (!g) return false;
        if (!grid_below_grid(*ga, *g)) return false;
    }
    return true;
}

std::string simple_measure_to_json(const SimpleMeasure& q) {
    nlohmann::ordered_json j;
    j["separation"] = q.forest().relation().describe();
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [r, w] : q.terms()) {
        nlohmann::ordered_json t;
        t["region"] = nlohmann::ordered_json::parse(region_to_json(r));
        t["weight"] = rat_str(w);
        terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
    return j.dump(2) + "\n";
}

SimpleMeasure simple_measure_from_json(const std::string& text) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    SeparationRelation rel = parse_separation(j.at("separation").get<std::string>());
    std::vector<std::pair<Region, Rat>> terms;
    for (const auto& t : j.at("terms")) {
        auto w = parse_rat(t.at("weight").get<std::string>());
        require(w.has_value(), "parse-error", "malformed weight");
        terms.emplace_back(region_from_json(t.at("region").dump()), *w);
    }
    return SimpleMeasure::validate(rel, std::move(terms));
}

MonotoneReport monotone_convergence_check(const std::vector<SimpleMeasure>& seq, const DensityModel& p) {
    MonotoneReport rep;
    require(!seq.empty(), "empty-input", "empty sequence");
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
        if (!majorizes(seq[i], seq[i + 1])) {
            rep.ok = false;
            rep.violation_index = static_cast<int>(i);
            return rep;
        }
    }
    if (!majorizes(seq.back(), p)) {
        rep.ok = false;
        rep.violation_index = static_cast<int>(seq.size()) - 1;
        return rep;
    }
    rep.residual = p.total() - seq.back().total();
    return rep;
}

}  // namespace mcl
