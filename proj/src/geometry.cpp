#include "mcl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mcl/interval_set.hpp"

namespace mcl {

// --- Box ---------------------------------------------------------------

Box::Box(std::vector<Rat> lo_, std::vector<Rat> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    require(!lo.empty() && lo.size() == hi.size(), "bad-box", "box needs matching lo/hi corners");
    for (size_t a = 0; a < lo.size(); ++a)
        require(lo[a] < hi[a], "bad-box", "box side must be positive");
}

Rat Box::volume() const {
    Rat v = 1;
    for (int a = 0; a < dim(); ++a) v *= side(a);
    return v;
}

bool Box::contains_point(const Point& p) const {
    if (static_cast<int>(p.size()) != dim()) return false;
    for (int a = 0; a < dim(); ++a)
        if (p[a] < lo[a] || p[a] > hi[a]) return false;
    return true;
}

bool operator==(const Box& a, const Box& b) { return a.lo == b.lo && a.hi == b.hi; }

int compare(const Rat& a, const Rat& b) { return cmp(a, b); }

int compare(const Point& a, const Point& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = 0; i < a.size(); ++i)
        if (int c = cmp(a[i], b[i]); c != 0) return c;
    return 0;
}

// --- Construction --------------------------------------------------------

int Region::dim_class() const {
    if (is_atom()) return 0;
    if (is_interval() || is_polyline()) return 1;
    return box.dim();
}

Region make_interval(const Box& box, Rat lo, Rat hi, bool lo_closed, bool hi_closed) {
    require(box.dim() == 1, "bad-region", "intervals live in a one-dimensional box");
    require(lo <= hi, "empty-region", "interval with lo > hi");
    if (lo == hi)
        require(lo_closed && hi_closed, "empty-region", "degenerate interval must be closed");
    require(lo >= box.lo[0] && hi <= box.hi[0], "bad-region", "interval outside ambient box");
    return Region{box, Interval1D{std::move(lo), std::move(hi), lo_closed, hi_closed}};
}

Region make_cells(const Box& box, int depth, std::vector<Cell> cells) {
    require(depth >= 0 && depth <= 24, "bad-region", "cell depth out of range");
    require(!cells.empty(), "empty-region", "cell union needs at least one cell");
    const std::int64_t n = std::int64_t(1) << depth;
    for (const auto& c : cells) {
        require(static_cast<int>(c.size()) == box.dim(), "bad-region", "cell index dimension mismatch");
        for (auto i : c) require(i >= 0 && i < n, "bad-region", "cell index outside grid");
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return Region{box, DyadicCellUnion{depth, std::move(cells)}};
}

Region make_polyline_piece(const Box& box, std::vector<Point> vertices, Rat t_lo, Rat t_hi, bool t_lo_closed,
                           bool t_hi_closed) {
    require(box.dim() >= 2, "bad-region", "polylines need an ambient dimension of at least 2 (use intervals in 1d)");
    require(vertices.size() >= 2, "bad-region", "polyline needs at least two vertices");
    for (const auto& v : vertices) {
        require(static_cast<int>(v.size()) == box.dim(), "bad-region", "vertex dimension mismatch");
        require(box.contains_point(v), "bad-region", "polyline vertex outside ambient box");
    }
    for (size_t i = 0; i + 1 < vertices.size(); ++i)
        require(vertices[i] != vertices[i + 1], "bad-region", "consecutive polyline vertices coincide");
    require(t_lo >= 0 && t_hi <= 1 && t_lo < t_hi, "empty-region", "polyline parameter range must be nondegenerate");
    return Region{box, Polyline{std::move(vertices), std::move(t_lo), std::move(t_hi), t_lo_closed, t_hi_closed}};
}

Region make_polyline(const Box& box, std::vector<Point> vertices) {
    return make_polyline_piece(box, std::move(vertices), Rat(0), Rat(1));
}

Region make_atom(const Box& box, Point point) {
    require(static_cast<int>(point.size()) == box.dim(), "bad-region", "atom dimension mismatch");
    require(box.contains_point(point), "bad-region", "atom outside ambient box");
    return Region{box, Atom{std::move(point)}};
}

// --- Equality and ordering ------------------------------------------------

static int kind_rank(const Region& r) {
    if (r.is_interval()) return 0;
    if (r.is_cells()) return 1;
    if (r.is_polyline()) return 2;
    return 3;
}

bool operator==(const Region& a, const Region& b) { return compare(a, b) == 0; }

int compare(const Region& a, const Region& b) {
    if (int c = compare(Point(a.box.lo), Point(b.box.lo)); c != 0) return c;
    if (int c = compare(Point(a.box.hi), Point(b.box.hi)); c != 0) return c;
    if (kind_rank(a) != kind_rank(b)) return kind_rank(a) < kind_rank(b) ? -1 : 1;
    if (a.is_interval()) {
        const auto& x = a.interval();
        const auto& y = b.interval();
        if (int c = cmp(x.lo, y.lo); c != 0) return c;
        if (x.lc != y.lc) return x.lc ? -1 : 1;
        if (int c = cmp(x.hi, y.hi); c != 0) return c;
        if (x.hc != y.hc) return x.hc ? -1 : 1;
        return 0;
    }
    if (a.is_cells()) {
        const auto& x = a.cells();
        const auto& y = b.cells();
        if (x.depth != y.depth) return x.depth < y.depth ? -1 : 1;
        if (x.cells != y.cells) return x.cells < y.cells ? -1 : 1;
        return 0;
    }
    if (a.is_polyline()) {
        const auto& x = a.polyline();
        const auto& y = b.polyline();
        if (x.vertices.size() != y.vertices.size()) return x.vertices.size() < y.vertices.size() ? -1 : 1;
        for (size_t i = 0; i < x.vertices.size(); ++i)
            if (int c = compare(x.vertices[i], y.vertices[i]); c != 0) return c;
        if (int c = cmp(x.t_lo, y.t_lo); c != 0) return c;
        if (x.t_lo_closed != y.t_lo_closed) return x.t_lo_closed ? -1 : 1;
        if (int c = cmp(x.t_hi, y.t_hi); c != 0) return c;
        if (x.t_hi_closed != y.t_hi_closed) return x.t_hi_closed ? -1 : 1;
        return 0;
    }
    return compare(a.atom().point, b.atom().point);
}

std::string Region::describe() const {
    std::ostringstream os;
    if (is_interval()) {
        const auto& v = interval();
        os << (v.lc ? '[' : '(') << rat_str(v.lo) << ", " << rat_str(v.hi) << (v.hc ? ']' : ')');
    } else if (is_cells()) {
        os << "cells(depth=" << cells().depth << ", n=" << cells().cells.size() << ")";
    } else if (is_polyline()) {
        const auto& pl = polyline();
        os << "curve" << (pl.t_lo_closed ? '[' : '(') << rat_str(pl.t_lo) << ", " << rat_str(pl.t_hi)
           << (pl.t_hi_closed ? ']' : ')') << " of " << pl.vertices.size() << " vertices";
    } else {
        os << "{(";
        for (size_t i = 0; i < atom().point.size(); ++i) {
            if (i) os << ", ";
            os << rat_str(atom().point[i]);
        }
        os << ")}";
    }
    return os.str();
}

// --- Cell helpers -----------------------------------------------------------

void cell_extent(const Box& box, int depth, const Cell& cell, int axis, Rat& lo, Rat& hi) {
    Rat side = box.cell_side(axis, depth);
    lo = box.lo[axis] + side * rat(cell[axis]);
    hi = lo + side;
}

Point cell_center(const Box& box, int depth, const Cell& cell) {
    Point p(box.dim());
    for (int a = 0; a < box.dim(); ++a) {
        Rat lo, hi;
        cell_extent(box, depth, cell, a, lo, hi);
        p[a] = (lo + hi) / 2;
    }
    return p;
}

Rat cell_volume(const Box& box, int depth) {
    Rat v = 1;
    for (int a = 0; a < box.dim(); ++a) v *= box.cell_side(a, depth);
    return v;
}

std::int64_t cell_linear_index(const Cell& cell, int depth) {
    std::int64_t idx = 0;
    for (auto i : cell) idx = (idx << depth) | i;
    return idx;
}

Cell cell_from_linear_index(std::int64_t index, int depth, int dim) {
    Cell c(dim);
    const std::int64_t mask = (std::int64_t(1) << depth) - 1;
    for (int a = dim - 1; a >= 0; --a) {
        c[a] = index & mask;
        index >>= depth;
    }
    return c;
}

static Rat rat_floor(const Rat& q) {
    Rat out;
    mpz_fdiv_q(out.get_num_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    out.canonicalize();
    return out;
}

std::vector<Cell> cells_containing_point(const Box& box, int depth, const Point& p) {
    if (!box.contains_point(p)) return {};
    const std::int64_t n = std::int64_t(1) << depth;
    std::vector<std::vector<std::int64_t>> per_axis(box.dim());
    for (int a = 0; a < box.dim(); ++a) {
        Rat u = (p[a] - box.lo[a]) / box.cell_side(a, depth);
        Rat fl = rat_floor(u);
        std::int64_t k = mpz_get_si(fl.get_num().get_mpz_t());
        if (u == fl) {
            if (k - 1 >= 0 && k - 1 < n) per_axis[a].push_back(k - 1);
            if (k >= 0 && k < n) per_axis[a].push_back(k);
        } else {
            if (k >= 0 && k < n) per_axis[a].push_back(k);
        }
        if (per_axis[a].empty()) return {};
    }
    std::vector<Cell> out;
    Cell cur(box.dim());
    std::function<void(int)> rec = [&](int axis) {
        if (axis == box.dim()) {
            out.push_back(cur);
            return;
        }
        for (auto k : per_axis[axis]) {
            cur[axis] = k;
            rec(axis + 1);
        }
    };
    rec(0);
    return out;
}

Point lerp(const Point& a, const Point& b, const Rat& t) {
    Point p(a.size());
    for (size_t i = 0; i < a.size(); ++i) p[i] = a[i] + t * (b[i] - a[i]);
    return p;
}

std::vector<Rat> segment_lattice_cuts(const Box& box, int depth, const Point& a, const Point& b) {
    std::set<Rat> cuts{Rat(0), Rat(1)};
    const std::int64_t n = std::int64_t(1) << depth;
    for (int ax = 0; ax < box.dim(); ++ax) {
        if (a[ax] == b[ax]) continue;
        Rat side = box.cell_side(ax, depth);
        Rat ulo = (rat_min(a[ax], b[ax]) - box.lo[ax]) / side;
        Rat uhi = (rat_max(a[ax], b[ax]) - box.lo[ax]) / side;
        Rat kf = rat_floor(ulo);
        std::int64_t k0 = mpz_get_si(kf.get_num().get_mpz_t());
        for (std::int64_t k = std::max<std::int64_t>(k0, 0); k <= n; ++k) {
            Rat plane = box.lo[ax] + side * rat(k);
            if (plane > rat_max(a[ax], b[ax])) break;
            if (plane < rat_min(a[ax], b[ax])) continue;
            Rat t = (plane - a[ax]) / (b[ax] - a[ax]);
            if (t > 0 && t < 1) cuts.insert(t);
        }
    }
    return std::vector<Rat>(cuts.begin(), cuts.end());
}

// --- 1d region algebra ------------------------------------------------------

static IvSet region_ivset(const Region& r) {
    if (r.is_interval()) {
        const auto& v = r.interval();
        return {FlagIv{v.lo, v.hi, v.lc, v.hc}};
    }
    if (r.is_atom()) return {FlagIv{r.atom().point[0], r.atom().point[0], true, true}};
    if (r.is_cells()) {
        std::vector<FlagIv> ivs;
        for (const auto& c : r.cells().cells) {
            Rat lo, hi;
            cell_extent(r.box, r.cells().depth, c, 0, lo, hi);
            ivs.push_back(FlagIv{lo, hi, true, true});
        }
        return ivset_normalize(std::move(ivs));
    }
    fail("bad-region", "polyline in a one-dimensional box");
}

// --- Measures ----------------------------------------------------------------

Rat measure_exact(const Region& r) {
    if (r.is_atom()) return 1;  // counting measure
    if (r.is_interval()) return r.interval().hi - r.interval().lo;
    if (r.is_cells()) return cell_volume(r.box, r.cells().depth) * rat(static_cast<long>(r.cells().cells.size()));
    fail("inexact-measure", "polyline arc length is irrational; use measure()");
}

double measure(const Region& r) {
    if (!r.is_polyline()) return to_double(measure_exact(r));
    double total = 0.0;
    const std::vector<Point> vs = polyline_trimmed_vertices(r);
    for (size_t i = 0; i + 1 < vs.size(); ++i) {
        Rat d2 = 0;
        for (size_t a = 0; a < vs[i].size(); ++a) {
            Rat d = vs[i + 1][a] - vs[i][a];
            d2 += d * d;
        }
        total += std::sqrt(to_double(d2));
    }
    return total;
}

// --- Distance ----------------------------------------------------------------

namespace {

struct Prim {
    enum Kind { Pt, Seg, Bx } kind;
    Point a, b;  // Bx: a = lo corner, b = hi corner
};

Rat sq(const Rat& x) { return x * x; }

Rat pdot(const Point& x, const Point& y) {
    Rat s = 0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

Point psub(const Point& x, const Point& y) {
    Point d(x.size());
    for (size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    return d;
}

Rat clamp01(const Rat& t) { return t < 0 ? Rat(0) : (t > 1 ? Rat(1) : t); }

Rat d2_point_point(const Point& p, const Point& q) {
    Rat s = 0;
    for (size_t i = 0; i < p.size(); ++i) s += sq(p[i] - q[i]);
    return s;
}

Rat d2_point_box(const Point& p, const Point& lo, const Point& hi) {
    Rat s = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] < lo[i])
            s += sq(lo[i] - p[i]);
        else if (p[i] > hi[i])
            s += sq(p[i] - hi[i]);
    }
    return s;
}

Rat d2_point_seg(const Point& p, const Point& a, const Point& b) {
    Point ab = psub(b, a);
    Rat denom = pdot(ab, ab);
    if (denom == 0) return d2_point_point(p, a);
    Rat t = clamp01(pdot(psub(p, a), ab) / denom);
    return d2_point_point(p, lerp(a, b, t));
}

Rat d2_seg_seg(const Point& p1, const Point& q1, const Point& p2, const Point& q2) {
    // closest points of two segments, exact arithmetic
    Point d1 = psub(q1, p1), d2v = psub(q2, p2), r = psub(p1, p2);
    Rat a = pdot(d1, d1), e = pdot(d2v, d2v), f = pdot(d2v, r);
    if (a == 0 && e == 0) return d2_point_point(p1, p2);
    if (a == 0) return d2_point_seg(p1, p2, q2);
    if (e == 0) return d2_point_seg(p2, p1, q1);
    Rat c = pdot(d1, r), b = pdot(d1, d2v);
    Rat denom = a * e - b * b;
    Rat s = denom != 0 ? clamp01((b * f - c * e) / denom) : Rat(0);
    Rat t = (b * s + f) / e;
    if (t < 0) {
        t = 0;
        s = clamp01(-c / a);
    } else if (t > 1) {
        t = 1;
        s = clamp01((b - c) / a);
    }
    return d2_point_point(lerp(p1, q1, s), lerp(p2, q2, t));
}

Rat d2_seg_box(const Point& a, const Point& b, const Point& lo, const Point& hi) {
    // The squared clamped gap along the segment is piecewise quadratic in the
    // parameter; regimes change only where a coordinate crosses a box face.
    std::set<Rat> cuts{Rat(0), Rat(1)};
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) continue;
        for (const Rat& plane : {lo[i], hi[i]}) {
            Rat t = (plane - a[i]) / (b[i] - a[i]);
            if (t > 0 && t < 1) cuts.insert(t);
        }
    }
    std::vector<Rat> ts(cuts.begin(), cuts.end());
    Rat best = d2_point_box(a, lo, hi);
    for (size_t k = 0; k + 1 < ts.size(); ++k) {
        const Rat& t0 = ts[k];
        const Rat& t1 = ts[k + 1];
        Rat tm = (t0 + t1) / 2;
        // per-axis gap g_i(t) = ci + di*t on this piece
        Rat A = 0, B = 0, C = 0;  // D(t) = A t^2 + B t + C
        for (size_t i = 0; i < a.size(); ++i) {
            Rat xm = a[i] + tm * (b[i] - a[i]);
            Rat ci, di;
            if (xm < lo[i]) {
                ci = lo[i] - a[i];
                di = a[i] - b[i];
            } else if (xm > hi[i]) {
                ci = a[i] - hi[i];
                di = b[i] - a[i];
            } else {
                continue;
            }
            A += di * di;
            B += 2 * ci * di;
            C += ci * ci;
        }
        auto value = [&](const Rat& t) -> Rat { return A * t * t + B * t + C; };
        best = rat_min(best, rat_min(value(t0), value(t1)));
        if (A > 0) {
            Rat tv = -B / (2 * A);
            if (tv > t0 && tv < t1) best = rat_min(best, value(tv));
        }
        if (best == 0) return best;
    }
    return rat_min(best, d2_point_box(b, lo, hi));
}

Rat d2_box_box(const Point& lo1, const Point& hi1, const Point& lo2, const Point& hi2) {
    Rat s = 0;
    for (size_t i = 0; i < lo1.size(); ++i) {
        if (hi1[i] < lo2[i])
            s += sq(lo2[i] - hi1[i]);
        else if (hi2[i] < lo1[i])
            s += sq(lo1[i] - hi2[i]);
    }
    return s;
}

std::vector<Prim> region_prims(const Region& r) {
    std::vector<Prim> out;
    if (r.is_atom()) {
        out.push_back(Prim{Prim::Pt, r.atom().point, {}});
    } else if (r.is_interval()) {
        out.push_back(Prim{Prim::Bx, {r.interval().lo}, {r.interval().hi}});
    } else if (r.is_cells()) {
        for (const auto& c : r.cells().cells) {
            Point lo(r.box.dim()), hi(r.box.dim());
            for (int a = 0; a < r.box.dim(); ++a) cell_extent(r.box, r.cells().depth, c, a, lo[a], hi[a]);
            out.push_back(Prim{Prim::Bx, std::move(lo), std::move(hi)});
        }
    } else {
        const std::vector<Point> vs = polyline_trimmed_vertices(r);
        for (size_t i = 0; i + 1 < vs.size(); ++i) out.push_back(Prim{Prim::Seg, vs[i], vs[i + 1]});
    }
    return out;
}

Rat d2_prim(const Prim& x, const Prim& y) {
    if (x.kind == Prim::Pt && y.kind == Prim::Pt) return d2_point_point(x.a, y.a);
    if (x.kind == Prim::Pt && y.kind == Prim::Seg) return d2_point_seg(x.a, y.a, y.b);
    if (x.kind == Prim::Pt && y.kind == Prim::Bx) return d2_point_box(x.a, y.a, y.b);
    if (x.kind == Prim::Seg && y.kind == Prim::Pt) return d2_point_seg(y.a, x.a, x.b);
    if (x.kind == Prim::Seg && y.kind == Prim::Seg) return d2_seg_seg(x.a, x.b, y.a, y.b);
    if (x.kind == Prim::Seg && y.kind == Prim::Bx) return d2_seg_box(x.a, x.b, y.a, y.b);
    if (x.kind == Prim::Bx && y.kind == Prim::Pt) return d2_point_box(y.a, x.a, x.b);
    if (x.kind == Prim::Bx && y.kind == Prim::Seg) return d2_seg_box(y.a, y.b, x.a, x.b);
    return d2_box_box(x.a, x.b, y.a, y.b);
}

}  // namespace

Rat distance_squared(const Region& a, const Region& b) {
    require(a.box == b.box, "box-mismatch", "regions from different ambient boxes");
    // fast path: same-depth cell unions via lattice gaps
    if (a.is_cells() && b.is_cells() && a.cells().depth == b.cells().depth) {
        const auto& ca = a.cells().cells;
        const auto& cb = b.cells().cells;
        const int d = a.box.dim();
        const int depth = a.cells().depth;
        std::int64_t best_lattice = -1;
        bool uniform = true;
        Rat s0 = a.box.cell_side(0, depth);
        for (int ax = 1; ax < d; ++ax)
            if (a.box.cell_side(ax, depth) != s0) uniform = false;
        if (uniform) {
            for (const auto& x : ca) {
                for (const auto& y : cb) {
                    std::int64_t g2 = 0;
                    for (int ax = 0; ax < d; ++ax) {
                        std::int64_t g = std::llabs(x[ax] - y[ax]) - 1;
                        if (g > 0) g2 += g * g;
                    }
                    if (best_lattice < 0 || g2 < best_lattice) best_lattice = g2;
                    if (best_lattice == 0) return 0;
                }
            }
            return rat(best_lattice) * s0 * s0;
        }
    }
    auto pa = region_prims(a);
    auto pb = region_prims(b);
    Rat best;
    bool first = true;
    for (const auto& x : pa) {
        for (const auto& y : pb) {
            Rat d2 = d2_prim(x, y);
            if (first || d2 < best) {
                best = d2;
                first = false;
            }
            if (best == 0) return best;
        }
    }
    return best;
}

double distance(const Region& a, const Region& b) { return std::sqrt(to_double(distance_squared(a, b))); }

// --- Point membership ---------------------------------------------------------

static bool point_on_segment(const Point& p, const Point& a, const Point& b) {
    // p = a + t (b - a) with a consistent rational t in [0,1]
    std::optional<Rat> t;
    for (size_t i = 0; i < p.size(); ++i) {
        Rat d = b[i] - a[i];
        if (d == 0) {
            if (p[i] != a[i]) return false;
        } else {
            Rat ti = (p[i] - a[i]) / d;
            if (t && *t != ti) return false;
            t = ti;
        }
    }
    return t && *t >= 0 && *t <= 1;
}

bool region_contains_point(const Region& r, const Point& p) {
    if (r.is_atom()) return r.atom().point == p;
    if (r.is_interval()) return iv_contains_point(region_ivset(r)[0], p[0]);
    if (r.is_cells()) {
        auto cand = cells_containing_point(r.box, r.cells().depth, p);
        std::unordered_set<std::int64_t> have;
        for (const auto& c : r.cells().cells) have.insert(cell_linear_index(c, r.cells().depth));
        for (const auto& c : cand)
            if (have.count(cell_linear_index(c, r.cells().depth))) return true;
        return false;
    }
    const auto& pl = r.polyline();
    const long segs = static_cast<long>(pl.vertices.size()) - 1;
    for (long i = 0; i < segs; ++i) {
        if (!point_on_segment(p, pl.vertices[i], pl.vertices[i + 1])) continue;
        int axis = -1;
        for (size_t a = 0; a < p.size(); ++a)
            if (pl.vertices[i][a] != pl.vertices[i + 1][a]) {
                axis = static_cast<int>(a);
                break;
            }
        Rat local = (p[axis] - pl.vertices[i][axis]) / (pl.vertices[i + 1][axis] - pl.vertices[i][axis]);
        Rat t = (rat(i) + local) / rat(segs);
        if (t < pl.t_lo || t > pl.t_hi) continue;
        if (t == pl.t_lo && !pl.t_lo_closed) continue;
        if (t == pl.t_hi && !pl.t_hi_closed) continue;
        return true;
    }
    return false;
}

// --- Containment ----------------------------------------------------------------

namespace {

std::unordered_set<std::int64_t> cell_index_set(const DyadicCellUnion& u) {
    std::unordered_set<std::int64_t> s;
    s.reserve(u.cells.size() * 2);
    for (const auto& c : u.cells) s.insert(cell_linear_index(c, u.depth));
    return s;
}

// inner cell union contained in outer cell union (possibly different depths)
bool cells_subset(const Region& outer, const Region& inner) {
    const auto& o = outer.cells();
    const auto& i = inner.cells();
    if (i.depth >= o.depth) {
        auto have = cell_index_set(o);
        int shift = i.depth - o.depth;
        for (const auto& c : i.cells) {
            Cell anc(c.size());
            for (size_t a = 0; a < c.size(); ++a) anc[a] = c[a] >> shift;
            if (!have.count(cell_linear_index(anc, o.depth))) return false;
        }
        return true;
    }
    // inner is coarser: every refinement of an inner cell must be present
    auto have = cell_index_set(o);
    int shift = o.depth - i.depth;
    const std::int64_t m = std::int64_t(1) << shift;
    const int d = static_cast<int>(i.cells.front().size());
    for (const auto& c : i.cells) {
        std::vector<std::int64_t> offs(d, 0);
        while (true) {
            Cell fine(d);
            for (int a = 0; a < d; ++a) fine[a] = (c[a] << shift) + offs[a];
            if (!have.count(cell_linear_index(fine, o.depth))) return false;
            int a = d - 1;
            while (a >= 0 && ++offs[a] == m) offs[a--] = 0;
            if (a < 0) break;
        }
    }
    return true;
}

bool cells_contain_polyline(const Region& outer, const Region& inner) {
    const auto& u = outer.cells();
    auto have = cell_index_set(u);
    auto in_union = [&](const Point& p) {
        for (const auto& c : cells_containing_point(outer.box, u.depth, p))
            if (have.count(cell_linear_index(c, u.depth))) return true;
        return false;
    };
    const std::vector<Point> vs = polyline_trimmed_vertices(inner);
    for (size_t i = 0; i + 1 < vs.size(); ++i) {
        auto cuts = segment_lattice_cuts(outer.box, u.depth, vs[i], vs[i + 1]);
        for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            Point mid = lerp(vs[i], vs[i + 1], (cuts[k] + cuts[k + 1]) / 2);
            if (!in_union(mid)) return false;
        }
    }
    return true;
}

// every inner segment lies along the outer polyline
bool polyline_covers_polyline(const Region& outer, const Region& inner) {
    if (outer.polyline().vertices == inner.polyline().vertices) {
        const auto& o = outer.polyline();
        const auto& i = inner.polyline();
        return iv_subset(FlagIv{i.t_lo, i.t_hi, i.t_lo_closed, i.t_hi_closed},
                         FlagIv{o.t_lo, o.t_hi, o.t_lo_closed, o.t_hi_closed});
    }
    const std::vector<Point> ov = polyline_trimmed_vertices(outer);
    const std::vector<Point> iv = polyline_trimmed_vertices(inner);
    auto collinear = [](const Point& p, const Point& q, const Point& x) {
        // x on line through p,q
        Point d1 = psub(q, p), d2 = psub(x, p);
        for (size_t i = 0; i < d1.size(); ++i)
            for (size_t j = i + 1; j < d1.size(); ++j)
                if (d1[i] * d2[j] - d1[j] * d2[i] != 0) return false;
        return true;
    };
    for (size_t s = 0; s + 1 < iv.size(); ++s) {
        const Point& p = iv[s];
        const Point& q = iv[s + 1];
        // gather coverage of [0,1] in the segment parameter
        std::vector<FlagIv> cover;
        int axis = -1;
        for (size_t a = 0; a < p.size(); ++a)
            if (p[a] != q[a]) {
                axis = static_cast<int>(a);
                break;
            }
        for (size_t t = 0; t + 1 < ov.size(); ++t) {
            const Point& a = ov[t];
            const Point& b = ov[t + 1];
            if (!collinear(p, q, a) || !collinear(p, q, b)) continue;
            Rat ta = (a[axis] - p[axis]) / (q[axis] - p[axis]);
            Rat tb = (b[axis] - p[axis]) / (q[axis] - p[axis]);
            // verify the endpoints really lie on the line (not only axis-projected)
            if (lerp(p, q, ta) != a || lerp(p, q, tb) != b) continue;
            cover.push_back(FlagIv{rat_min(ta, tb), rat_max(ta, tb), true, true});
        }
        IvSet covered = ivset_normalize(std::move(cover));
        if (!ivset_covers(covered, {FlagIv{Rat(0), Rat(1), true, true}})) return false;
    }
    return true;
}

}  // namespace

bool contains(const Region& outer, const Region& inner) {
    require(outer.box == inner.box, "box-mismatch", "regions from different ambient boxes");
    if (outer.box.dim() == 1) return ivset_covers(region_ivset(outer), region_ivset(inner));

    if (inner.is_atom()) return region_contains_point(outer, inner.atom().point);
    if (outer.is_atom()) return false;  // nothing with positive extent fits in a point
    if (outer.is_cells() && inner.is_cells()) return cells_subset(outer, inner);
    if (outer.is_cells() && inner.is_polyline()) return cells_contain_polyline(outer, inner);
    if (outer.is_polyline() && inner.is_polyline()) return polyline_covers_polyline(outer, inner);
    if (outer.is_polyline() && inner.is_cells()) return false;  // positive volume never fits in a curve
    fail("bad-region", "unsupported containment combination");
}

bool intersects(const Region& a, const Region& b) {
    require(a.box == b.box, "box-mismatch", "regions from different ambient boxes");
    if (a.box.dim() == 1) return ivset_intersects(region_ivset(a), region_ivset(b));

    if (a.is_atom()) return region_contains_point(b, a.atom().point);
    if (b.is_atom()) return region_contains_point(a, b.atom().point);
    if (a.is_polyline() && b.is_polyline() && a.polyline().vertices == b.polyline().vertices) {
        const auto& x = a.polyline();
        const auto& y = b.polyline();
        return iv_intersect(FlagIv{x.t_lo, x.t_hi, x.t_lo_closed, x.t_hi_closed},
                            FlagIv{y.t_lo, y.t_hi, y.t_lo_closed, y.t_hi_closed})
            .has_value();
    }
    // remaining pairs are compared as closed sets: they intersect iff distance zero
    return distance_squared(a, b) == 0;
}

// --- Polyline parameterization -----------------------------------------------------

Point polyline_point_at(const Region& path, const Rat& t) {
    const auto& vs = path.polyline().vertices;
    const long segs = static_cast<long>(vs.size()) - 1;
    require(t >= 0 && t <= 1, "bad-region", "curve parameter outside [0,1]");
    Rat scaled = t * rat(segs);
    Rat fl;
    mpz_fdiv_q(fl.get_num_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
    fl.canonicalize();
    long i = mpz_get_si(fl.get_num().get_mpz_t());
    if (i >= segs) i = segs - 1;
    Rat local = scaled - rat(i);
    return lerp(vs[i], vs[i + 1], local);
}

std::optional<Rat> polyline_param_of_point(const Region& path, const Point& p) {
    const auto& vs = path.polyline().vertices;
    const long segs = static_cast<long>(vs.size()) - 1;
    for (long i = 0; i < segs; ++i) {
        if (!point_on_segment(p, vs[i], vs[i + 1])) continue;
        int axis = -1;
        for (size_t a = 0; a < p.size(); ++a)
            if (vs[i][a] != vs[i + 1][a]) {
                axis = static_cast<int>(a);
                break;
            }
        Rat local = (p[axis] - vs[i][axis]) / (vs[i + 1][axis] - vs[i][axis]);
        return (rat(i) + local) / rat(segs);
    }
    return std::nullopt;
}

std::pair<Rat, Rat> polyline_param_range(const Region& path, const Region& sub) {
    if (path.polyline().vertices == sub.polyline().vertices)
        return {sub.polyline().t_lo, sub.polyline().t_hi};
    const std::vector<Point> sv = polyline_trimmed_vertices(sub);
    auto t0 = polyline_param_of_point(path, sv.front());
    auto t1 = polyline_param_of_point(path, sv.back());
    require(t0.has_value() && t1.has_value(), "bad-region", "sub-curve endpoints not on the path");
    if (*t0 <= *t1) return {*t0, *t1};
    return {*t1, *t0};
}

Region polyline_sub_curve(const Region& path, const Rat& t0, const Rat& t1, bool t0_closed, bool t1_closed) {
    return make_polyline_piece(path.box, path.polyline().vertices, t0, t1, t0_closed, t1_closed);
}

std::vector<Point> polyline_trimmed_vertices(const Region& path) {
    const auto& pl = path.polyline();
    const long segs = static_cast<long>(pl.vertices.size()) - 1;
    std::vector<Point> out;
    out.push_back(polyline_point_at(path, pl.t_lo));
    for (long i = 1; i < static_cast<long>(pl.vertices.size()) - 1; ++i) {
        Rat tv = rat(i) / rat(segs);
        if (tv > pl.t_lo && tv < pl.t_hi && pl.vertices[i] != out.back()) out.push_back(pl.vertices[i]);
    }
    Point last = polyline_point_at(path, pl.t_hi);
    if (out.back() != last) out.push_back(last);
    return out;
}

// --- JSON ------------------------------------------------------------------------

using json = nlohmann::ordered_json;

static json box_to_json(const Box& b) {
    json axes = json::array();
    for (int a = 0; a < b.dim(); ++a) axes.push_back(json::array({rat_str(b.lo[a]), rat_str(b.hi[a])}));
    return axes;
}

static Rat json_rat(const json& j) {
    if (j.is_number_integer()) return rat(j.get<long>());
    auto q = parse_rat(j.get<std::string>());
    require(q.has_value(), "parse-error", "malformed rational '" + j.dump() + "'");
    return *q;
}

static Box box_from_json(const json& j) {
    std::vector<Rat> lo, hi;
    for (const auto& axis : j) {
        lo.push_back(json_rat(axis.at(0)));
        hi.push_back(json_rat(axis.at(1)));
    }
    return Box(std::move(lo), std::move(hi));
}

json region_to_json_obj(const Region& r);
Region region_from_json_obj(const json& j);

json region_to_json_obj(const Region& r) {
    json j;
    if (r.is_interval()) {
        j["kind"] = "interval";
        j["box"] = box_to_json(r.box);
        j["lo"] = rat_str(r.interval().lo);
        j["hi"] = rat_str(r.interval().hi);
        j["lo_closed"] = r.interval().lc;
        j["hi_closed"] = r.interval().hc;
    } else if (r.is_cells()) {
        j["kind"] = "cells";
        j["box"] = box_to_json(r.box);
        j["depth"] = r.cells().depth;
        json cells = json::array();
        for (const auto& c : r.cells().cells) cells.push_back(c);
        j["cells"] = cells;
    } else if (r.is_polyline()) {
        j["kind"] = "polyline";
        j["box"] = box_to_json(r.box);
        json vs = json::array();
        for (const auto& v : r.polyline().vertices) {
            json pt = json::array();
            for (const auto& x : v) pt.push_back(rat_str(x));
            vs.push_back(pt);
        }
        j["vertices"] = vs;
        j["t_lo"] = rat_str(r.polyline().t_lo);
        j["t_hi"] = rat_str(r.polyline().t_hi);
        j["t_lo_closed"] = r.polyline().t_lo_closed;
        j["t_hi_closed"] = r.polyline().t_hi_closed;
    } else {
        j["kind"] = "atom";
        j["box"] = box_to_json(r.box);
        json pt = json::array();
        for (const auto& x : r.atom().point) pt.push_back(rat_str(x));
        j["point"] = pt;
    }
    return j;
}

Region region_from_json_obj(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    Box box = box_from_json(j.at("box"));
    if (kind == "interval")
        return make_interval(box, json_rat(j.at("lo")), json_rat(j.at("hi")), j.at("lo_closed").get<bool>(),
                             j.at("hi_closed").get<bool>());
    if (kind == "cells") {
        std::vector<Cell> cells;
        for (const auto& c : j.at("cells")) cells.push_back(c.get<Cell>());
        return make_cells(box, j.at("depth").get<int>(), std::move(cells));
    }
    if (kind == "polyline") {
        std::vector<Point> vs;
        for (const auto& v : j.at("vertices")) {
            Point p;
            for (const auto& x : v) p.push_back(json_rat(x));
            vs.push_back(std::move(p));
        }
        if (j.contains("t_lo"))
            return make_polyline_piece(box, std::move(vs), json_rat(j.at("t_lo")), json_rat(j.at("t_hi")),
                                       j.at("t_lo_closed").get<bool>(), j.at("t_hi_closed").get<bool>());
        return make_polyline(box, std::move(vs));
    }
    if (kind == "atom") {
        Point p;
        for (const auto& x : j.at("point")) p.push_back(json_rat(x));
        return make_atom(box, std::move(p));
    }
    fail("parse-error", "unknown region kind '" + kind + "'");
}

std::string region_to_json(const Region& r) { return region_to_json_obj(r).dump(); }

Region region_from_json(const std::string& text) {
    json j = json::parse(text);
    return region_from_json_obj(j);
}

std::optional<Rat> parse_rat(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::string s = text;
    size_t slash = s.find('/');
    try {
        Rat q;
        if (slash == std::string::npos) {
            mpz_class num(s);
            q = Rat(num);
        } else {
            std::string num = s.substr(0, slash), den = s.substr(slash + 1);
            if (num.empty() || den.empty()) return std::nullopt;
            mpz_class n(num), d(den);
            if (d == 0) return std::nullopt;
            q = Rat(n, d);
        }
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

std::string rat_str(const Rat& q) { return q.get_num().get_str() + "/" + q.get_den().get_str(); }

}  // namespace mcl
