#include "mcl/density.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace mcl {

// --- Density1D -----------------------------------------------------------

static void check_pieces(const Box& box, const std::vector<Density1D::Piece>& pieces) {
    require(box.dim() == 1, "bad-density", "1d density needs a one-dimensional box");
    require(!pieces.empty(), "bad-density", "density needs at least one piece");
    require(pieces.front().x0 == box.lo[0] && pieces.back().x1 == box.hi[0], "bad-density",
            "pieces must cover the whole domain");
    bool positive = false;
    for (size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        require(p.x0 < p.x1, "bad-density", "piece with empty extent");
        require(p.y0 >= 0 && p.y1 >= 0, "bad-density", "density values must be nonnegative");
        if (p.y0 > 0 || p.y1 > 0) positive = true;
        if (i + 1 < pieces.size())
            require(p.x1 == pieces[i + 1].x0, "bad-density", "pieces must be contiguous");
    }
    require(positive, "bad-density", "density vanishes identically");
}

Density1D Density1D::from_points(Box box, std::vector<std::pair<Rat, Rat>> points) {
    require(points.size() >= 2, "bad-density", "need at least two points");
    std::vector<Piece> pieces;
    for (size_t i = 0; i + 1 < points.size(); ++i)
        pieces.push_back(Piece{points[i].first, points[i + 1].first, points[i].second, points[i + 1].second});
    return from_pieces(std::move(box), std::move(pieces));
}

Density1D Density1D::from_pieces(Box box, std::vector<Piece> pieces) {
    check_pieces(box, pieces);
    return Density1D{std::move(box), std::move(pieces)};
}

Rat Density1D::value(const Rat& x) const {
    std::optional<Rat> best;
    for (const auto& p : pieces) {
        if (x < p.x0 || x > p.x1) continue;
        Rat v = p.y0 + (x - p.x0) * (p.y1 - p.y0) / (p.x1 - p.x0);
        if (!best || v > *best) best = v;
    }
    require(best.has_value(), "bad-region", "point outside density domain");
    return *best;
}

Rat Density1D::integral(const Rat& a, const Rat& b) const {
    if (a >= b) return 0;
    Rat total = 0;
    for (const auto& p : pieces) {
        Rat lo = rat_max(a, p.x0), hi = rat_min(b, p.x1);
        if (lo >= hi) continue;
        Rat slope = (p.y1 - p.y0) / (p.x1 - p.x0);
        Rat ylo = p.y0 + (lo - p.x0) * slope;
        Rat yhi = p.y0 + (hi - p.x0) * slope;
        total += (ylo + yhi) / 2 * (hi - lo);
    }
    return total;
}

Rat Density1D::mass(const IvSet& s) const {
    Rat total = 0;
    for (const auto& v : s) total += integral(v.lo, v.hi);
    return total;
}

Rat Density1D::total() const { return integral(box.lo[0], box.hi[0]); }

Rat Density1D::sup() const {
    Rat best = 0;
    for (const auto& p : pieces) best = rat_max(best, rat_max(p.y0, p.y1));
    return best;
}

std::vector<Rat> Density1D::breakpoint_values() const {
    std::set<Rat> vals;
    for (const auto& p : pieces) {
        vals.insert(p.y0);
        vals.insert(p.y1);
    }
    return std::vector<Rat>(vals.begin(), vals.end());
}

IvSet Density1D::superlevel_open(const Rat& lambda) const {
    std::vector<FlagIv> ivs;
    for (const auto& p : pieces) {
        bool lo_in = p.y0 > lambda, hi_in = p.y1 > lambda;
        if (lo_in && hi_in) {
            ivs.push_back(FlagIv{p.x0, p.x1, true, true});
        } else if (lo_in || hi_in) {
            Rat xc = p.x0 + (lambda - p.y0) * (p.x1 - p.x0) / (p.y1 - p.y0);
            if (lo_in)
                ivs.push_back(FlagIv{p.x0, xc, true, false});
            else
                ivs.push_back(FlagIv{xc, p.x1, false, true});
        }
    }
    return ivset_normalize(std::move(ivs));
}

IvSet Density1D::superlevel_closed(const Rat& lambda) const {
    std::vector<FlagIv> ivs;
    for (const auto& p : pieces) {
        bool lo_in = p.y0 >= lambda, hi_in = p.y1 >= lambda;
        if (lo_in && hi_in) {
            ivs.push_back(FlagIv{p.x0, p.x1, true, true});
        } else if (lo_in || hi_in) {
            Rat xc = p.x0 + (lambda - p.y0) * (p.x1 - p.x0) / (p.y1 - p.y0);
            if (lo_in)
                ivs.push_back(FlagIv{p.x0, xc, true, true});
            else
                ivs.push_back(FlagIv{xc, p.x1, true, true});
        }
    }
    return ivset_normalize(std::move(ivs));
}

int Density1D::strict_local_maxima() const {
    // count maximal plateaus/vertices with strictly lower values on both sides
    // evaluate the usc value on the breakpoint grid and piece interiors
    std::vector<std::pair<Rat, Rat>> samples;  // (x, value), ascending x
    for (const auto& p : pieces) {
        samples.emplace_back(p.x0, value(p.x0));
        samples.emplace_back((p.x0 + p.x1) / 2, (p.y0 + p.y1) / 2);
    }
    samples.emplace_back(pieces.back().x1, value(pieces.back().x1));
    int count = 0;
    size_t i = 0;
    while (i < samples.size()) {
        size_t j = i;
        while (j + 1 < samples.size() && samples[j + 1].second == samples[i].second) ++j;
        bool left_lower = i == 0 || samples[i - 1].second < samples[i].second;
        bool right_lower = j + 1 == samples.size() || samples[j + 1].second < samples[i].second;
        if (left_lower && right_lower && samples[i].second > 0) ++count;
        i = j + 1;
    }
    return count;
}

Density1D Density1D::scaled(const Rat& alpha) const {
    require(alpha > 0, "bad-density", "scale must be positive");
    Density1D out = *this;
    for (auto& p : out.pieces) {
        p.y0 *= alpha;
        p.y1 *= alpha;
    }
    return out;
}

// --- GridDensity -----------------------------------------------------------

GridDensity GridDensity::from_values(Box box, int depth, std::vector<Rat> values) {
    require(depth >= 0 && depth <= 24, "bad-density", "grid depth out of range");
    const int d = box.dim();
    require(static_cast<std::int64_t>(d) * depth <= 26, "bad-density", "grid too large");
    std::int64_t n = std::int64_t(1) << (d * depth);
    require(static_cast<std::int64_t>(values.size()) == n, "bad-density", "value count does not match grid");
    bool positive = false;
    for (const auto& v : values) {
        require(v >= 0, "bad-density", "cell values must be nonnegative");
        if (v > 0) positive = true;
    }
    require(positive, "bad-density", "grid density needs at least one positive cell");
    return GridDensity{std::move(box), depth, std::move(values)};
}

GridDensity GridDensity::sample(const Box& box, int depth, const std::function<Rat(const Point&)>& f,
                                const std::optional<std::vector<Rat>>& offset) {
    const int d = box.dim();
    std::vector<Rat> off(d, rat(1, 2));
    if (offset) {
        require(static_cast<int>(offset->size()) == d, "bad-density", "offset dimension mismatch");
        for (const auto& o : *offset) require(o >= 0 && o < 1, "bad-density", "offset must lie in [0,1)");
        off = *offset;
    }
    std::int64_t n = std::int64_t(1) << (d * depth);
    std::vector<Rat> values(n);
    for (std::int64_t idx = 0; idx < n; ++idx) {
        Cell c = cell_from_linear_index(idx, depth, d);
        Point p(d);
        for (int a = 0; a < d; ++a) {
            Rat side = box.cell_side(a, depth);
            p[a] = box.lo[a] + side * (rat(c[a]) + off[a]);
        }
        Rat v = f(p);
        require(v >= 0, "bad-density", "sampled density value is negative");
        values[idx] = std::move(v);
    }
    return from_values(box, depth, std::move(values));
}

std::vector<Rat> GridDensity::distinct_positive_values_desc() const {
    std::set<Rat> vals;
    for (const auto& v : values)
        if (v > 0) vals.insert(v);
    return std::vector<Rat>(vals.rbegin(), vals.rend());
}

Rat GridDensity::total() const {
    Rat vol = cell_volume(box, depth);
    Rat s = 0;
    for (const auto& v : values) s += v;
    return s * vol;
}

Rat GridDensity::sup() const {
    Rat best = 0;
    for (const auto& v : values) best = rat_max(best, v);
    return best;
}

Rat GridDensity::mass_region(const Region& r) const {
    if (r.is_atom() || r.is_polyline()) return 0;
    if (r.is_interval()) {
        require(box.dim() == 1, "box-mismatch", "interval region against a multi-dimensional grid");
        return grid_to_density1d(*this).mass(region_to_ivset_1d(r));
    }
    require(r.box == box, "box-mismatch", "region from a different ambient box");
    const auto& u = r.cells();
    const int d = box.dim();
    if (u.depth >= depth) {
        // each region cell lies in one grid cell
        Rat vol = cell_volume(box, u.depth);
        Rat s = 0;
        int shift = u.depth - depth;
        for (const auto& c : u.cells) {
            Cell anc(c.size());
            for (int a = 0; a < d; ++a) anc[a] = c[a] >> shift;
            s += value(anc);
        }
        return s * vol;
    }
    // region cells are coarser: sum the grid cells inside
    Rat vol = cell_volume(box, depth);
    Rat s = 0;
    int shift = depth - u.depth;
    const std::int64_t m = std::int64_t(1) << shift;
    for (const auto& c : u.cells) {
        std::vector<std::int64_t> offs(d, 0);
        while (true) {
            Cell fine(d);
            for (int a = 0; a < d; ++a) fine[a] = (c[a] << shift) + offs[a];
            s += value(fine);
            int a = d - 1;
            while (a >= 0 && ++offs[a] == m) offs[a--] = 0;
            if (a < 0) break;
        }
    }
    return s * vol;
}

Region GridDensity::support_region() const {
    std::vector<Cell> cells;
    for (std::int64_t idx = 0; idx < cell_count(); ++idx)
        if (values[static_cast<std::size_t>(idx)] > 0) cells.push_back(cell_from_linear_index(idx, depth, box.dim()));
    return make_cells(box, depth, std::move(cells));
}

GridDensity GridDensity::scaled(const Rat& alpha) const {
    require(alpha > 0, "bad-density", "scale must be positive");
    GridDensity out = *this;
    for (auto& v : out.values) v *= alpha;
    return out;
}

Density1D grid_to_density1d(const GridDensity& g) {
    require(g.box.dim() == 1, "bad-density", "grid is not one-dimensional");
    std::vector<Density1D::Piece> pieces;
    Rat side = g.box.cell_side(0, g.depth);
    for (std::int64_t i = 0; i < g.cell_count(); ++i) {
        Rat lo = g.box.lo[0] + side * rat(i);
        pieces.push_back(Density1D::Piece{lo, lo + side, g.value(i), g.value(i)});
    }
    return Density1D{g.box, std::move(pieces)};
}

IvSet region_to_ivset_1d(const Region& r) {
    require(r.box.dim() == 1, "bad-region", "expected a one-dimensional region");
    if (r.is_interval()) {
        const auto& v = r.interval();
        return {FlagIv{v.lo, v.hi, v.lc, v.hc}};
    }
    if (r.is_atom()) return {FlagIv{r.atom().point[0], r.atom().point[0], true, true}};
    std::vector<FlagIv> ivs;
    for (const auto& c : r.cells().cells) {
        Rat lo, hi;
        cell_extent(r.box, r.cells().depth, c, 0, lo, hi);
        ivs.push_back(FlagIv{lo, hi, true, true});
    }
    return ivset_normalize(std::move(ivs));
}

// --- DensityModel ---------------------------------------------------------------

const Box& DensityModel::box() const {
    if (is_1d()) return d1().box;
    if (is_grid()) return grid().box;
    return mixture().box;
}

Rat DensityModel::total() const {
    if (is_1d()) return d1().total();
    if (is_grid()) return grid().total();
    Rat s = 0;
    for (const auto& comp : mixture().components) {
        if (comp.is_atoms())
            for (const auto& [p, w] : comp.atoms().atoms) s += w;
        if (comp.is_line()) s += comp.line().density.total();
        if (comp.is_curve()) s += comp.curve().density.total();  // parameter-domain mass
        if (comp.is_grid()) s += comp.grid().grid.total();
    }
    return s;
}

Rat DensityModel::sup() const {
    if (is_1d()) return d1().sup();
    if (is_grid()) return grid().sup();
    Rat best = 0;
    for (const auto& comp : mixture().components) {
        if (comp.is_atoms())
            for (const auto& [p, w] : comp.atoms().atoms) best = rat_max(best, w);
        if (comp.is_line()) best = rat_max(best, comp.line().density.sup());
        if (comp.is_curve()) best = rat_max(best, comp.curve().density.sup());
        if (comp.is_grid()) best = rat_max(best, comp.grid().grid.sup());
    }
    return best;
}

namespace {

// mass of a 1d region under a pl density, honoring atoms separately
Rat mixture_mass(const MixtureDensity& mix, const Region& r) {
    Rat s = 0;
    for (const auto& comp : mix.components) {
        if (comp.is_atoms()) {
            for (const auto& [p, w] : comp.atoms().atoms)
                if (region_contains_point(r, p)) s += w;
        } else if (comp.is_line()) {
            if (!r.is_polyline()) s += comp.line().density.mass(region_to_ivset_1d(r));
        } else if (comp.is_curve()) {
            if (r.is_polyline() && contains(comp.curve().path, r)) {
                auto range = polyline_param_range(comp.curve().path, r);
                s += comp.curve().density.integral(range.first, range.second);
            } else if (!r.is_atom() && !r.is_polyline() && contains(r, comp.curve().path)) {
                s += comp.curve().density.total();
            }
        } else if (comp.is_grid()) {
            if (!r.is_polyline() && !r.is_atom()) s += comp.grid().grid.mass_region(r);
        }
    }
    return s;
}

}  // namespace

Rat DensityModel::mass(const Region& r) const {
    if (is_1d()) {
        if (r.is_polyline()) fail("bad-region", "polyline region against a 1d density");
        return d1().mass(region_to_ivset_1d(r));
    }
    if (is_grid()) return grid().mass_region(r);
    return mixture_mass(mixture(), r);
}

Rat DensityModel::mass_sym_diff(const Region& a, const Region& b) const {
    if (a == b) return 0;
    if ((is_grid() || is_mixture()) && a.is_cells() && b.is_cells()) {
        const GridDensity* g = nullptr;
        if (is_grid()) {
            g = &grid();
        } else {
            for (const auto& comp : mixture().components)
                if (comp.is_grid()) g = &comp.grid().grid;
        }
        require(g != nullptr, "bad-density", "no grid component to weigh cell regions");
        // refine both to a common depth and sum over the symmetric difference
        int fine = std::max({g->depth, a.cells().depth, b.cells().depth});
        auto refine = [&](const Region& r) {
            std::unordered_set<std::int64_t> out;
            int shift = fine - r.cells().depth;
            const std::int64_t m = std::int64_t(1) << shift;
            const int d = r.box.dim();
            for (const auto& c : r.cells().cells) {
                std::vector<std::int64_t> offs(d, 0);
                while (true) {
                    Cell f_(d);
                    for (int ax = 0; ax < d; ++ax) f_[ax] = (c[ax] << shift) + offs[ax];
                    out.insert(cell_linear_index(f_, fine));
                    int ax = d - 1;
                    while (ax >= 0 && ++offs[ax] == m) offs[ax--] = 0;
                    if (ax < 0) break;
                }
            }
            return out;
        };
        auto sa = refine(a);
        auto sb = refine(b);
        Rat vol = cell_volume(box(), fine);
        int gshift = fine - g->depth;
        Rat s = 0;
        auto add_side = [&](const std::unordered_set<std::int64_t>& xs, const std::unordered_set<std::int64_t>& ys) {
            for (auto idx : xs) {
                if (ys.count(idx)) continue;
                Cell c = cell_from_linear_index(idx, fine, box().dim());
                Cell anc(c.size());
                for (size_t ax = 0; ax < c.size(); ++ax) anc[ax] = c[ax] >> gshift;
                s += g->value(anc) * vol;
            }
        };
        add_side(sa, sb);
        add_side(sb, sa);
        return s;
    }
    if (a.is_polyline() && b.is_polyline()) {
        if (a.polyline().vertices == b.polyline().vertices) {
            // parameter-domain symmetric difference, weighed by the curve density
            const auto& pa = a.polyline();
            const auto& pb = b.polyline();
            IvSet sd = ivset_sym_diff({FlagIv{pa.t_lo, pa.t_hi, pa.t_lo_closed, pa.t_hi_closed}},
                                      {FlagIv{pb.t_lo, pb.t_hi, pb.t_lo_closed, pb.t_hi_closed}});
            if (is_mixture()) {
                for (const auto& comp : mixture().components)
                    if (comp.is_curve() && comp.curve().path.polyline().vertices == pa.vertices)
                        return comp.curve().density.mass(sd);
            }
            return ivset_length(sd);
        }
        // distinct paths: exact zero iff the curves coincide as sets
        if (contains(a, b) && contains(b, a)) return 0;
        return mass(a) + mass(b);
    }
    if (box().dim() == 1 && !a.is_polyline() && !b.is_polyline()) {
        IvSet sd = ivset_sym_diff(region_to_ivset_1d(a), region_to_ivset_1d(b));
        if (is_1d()) return d1().mass(sd);
        if (is_grid()) return grid_to_density1d(grid()).mass(sd);
        Rat s = 0;
        for (const auto& comp : mixture().components) {
            if (comp.is_atoms()) {
                for (const auto& [p, w] : comp.atoms().atoms)
                    if (ivset_contains_point(sd, p[0])) s += w;
            } else if (comp.is_line()) {
                s += comp.line().density.mass(sd);
            } else if (comp.is_grid()) {
                s += grid_to_density1d(comp.grid().grid).mass(sd);
            }
        }
        return s;
    }
    // mixed kinds: the fatter region loses at most the point's own mass
    if (a.is_atom() && !b.is_atom()) return mass_sym_diff(b, a);
    if (!a.is_atom() && b.is_atom()) {
        if (!region_contains_point(a, b.atom().point)) return mass(a) + mass(b);
        return mass(a) - mass(b);  // a minus the shared point
    }
    return mass(a) + mass(b);
}

DensityModel DensityModel::scaled(const Rat& alpha) const {
    if (is_1d()) return DensityModel(d1().scaled(alpha));
    if (is_grid()) return DensityModel(grid().scaled(alpha));
    MixtureDensity m = mixture();
    for (auto& comp : m.components) {
        if (comp.is_atoms())
            for (auto& [p, w] : std::get<AtomsComponent>(comp.payload).atoms) w *= alpha;
        if (comp.is_line()) std::get<Line1DComponent>(comp.payload).density = comp.line().density.scaled(alpha);
        if (comp.is_curve()) std::get<CurveComponent>(comp.payload).density = comp.curve().density.scaled(alpha);
        if (comp.is_grid()) std::get<GridComponent>(comp.payload).grid = comp.grid().grid.scaled(alpha);
    }
    return DensityModel(std::move(m));
}

}  // namespace mcl
