#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mcl/error.hpp"
#include "mcl/rational.hpp"

namespace mcl {

using Point = std::vector<Rat>;  // one coordinate per axis

// Compact axis-parallel ambient box with rational corners.
struct Box {
    std::vector<Rat> lo;
    std::vector<Rat> hi;

    Box() = default;
    Box(std::vector<Rat> lo_, std::vector<Rat> hi_);

    int dim() const { return static_cast<int>(lo.size()); }
    Rat side(int axis) const { return hi[axis] - lo[axis]; }
    // Side of one grid cell at the given dyadic depth.
    Rat cell_side(int axis, int depth) const { return side(axis) / rat_pow2(depth); }
    Rat volume() const;
    bool contains_point(const Point& p) const;

    friend bool operator==(const Box&, const Box&);
};

int compare(const Rat& a, const Rat& b);
int compare(const Point& a, const Point& b);

// --- Region variants ------------------------------------------------------

struct Interval1D {
    Rat lo, hi;
    bool lc = true;  // lo endpoint closed
    bool hc = true;  // hi endpoint closed
};

using Cell = std::vector<std::int64_t>;  // lattice index per axis, in [0, 2^depth)

struct DyadicCellUnion {
    int depth = 0;
    std::vector<Cell> cells;  // sorted lexicographically, deduplicated
};

// Piecewise-linear curve. Vertex i of an n-vertex path sits at parameter
// i/(n-1); the region is the image of the (possibly half-open) parameter range,
// so limit pieces of curve clusterings are representable.
struct Polyline {
    std::vector<Point> vertices;  // >= 2, consecutive vertices distinct
    Rat t_lo = Rat(0), t_hi = Rat(1);
    bool t_lo_closed = true, t_hi_closed = true;
};

struct Atom {
    Point point;
};

// A concrete subset of the ambient box, tagged with its Hausdorff dimension class
// (0 for atoms, 1 for intervals and polylines, box dimension for cell unions).
struct Region {
    Box box;
    std::variant<Interval1D, DyadicCellUnion, Polyline, Atom> shape;

    int dim_class() const;
    bool is_interval() const { return std::holds_alternative<Interval1D>(shape); }
    bool is_cells() const { return std::holds_alternative<DyadicCellUnion>(shape); }
    bool is_polyline() const { return std::holds_alternative<Polyline>(shape); }
    bool is_atom() const { return std::holds_alternative<Atom>(shape); }

    const Interval1D& interval() const { return std::get<Interval1D>(shape); }
    const DyadicCellUnion& cells() const { return std::get<DyadicCellUnion>(shape); }
    const Polyline& polyline() const { return std::get<Polyline>(shape); }
    const Atom& atom() const { return std::get<Atom>(shape); }

    std::string describe() const;
};

// Checked constructors. All reject empty or malformed shapes.
Region make_interval(const Box& box, Rat lo, Rat hi, bool lo_closed = true, bool hi_closed = true);
Region make_cells(const Box& box, int depth, std::vector<Cell> cells);
Region make_polyline(const Box& box, std::vector<Point> vertices);
Region make_polyline_piece(const Box& box, std::vector<Point> vertices, Rat t_lo, Rat t_hi,
                           bool t_lo_closed = true, bool t_hi_closed = true);
Region make_atom(const Box& box, Point point);

bool operator==(const Region& a, const Region& b);
inline bool operator!=(const Region& a, const Region& b) { return !(a == b); }

// Total order used to canonicalize forests and reports.
int compare(const Region& a, const Region& b);
inline bool region_less(const Region& a, const Region& b) { return compare(a, b) < 0; }

// --- Measures and metric queries ------------------------------------------

// Reference mass of the region under the Hausdorff measure matching its dimension
// class: counting for atoms, length for intervals, cell volume for cell unions.
// Polylines have irrational length; use `measure` for them.
Rat measure_exact(const Region& r);

// Same as measure_exact but defined for every variant (arc length for polylines).
double measure(const Region& r);

// Squared infimum Euclidean distance between the two point sets, exact.
// Openness flags do not affect the infimum.
Rat distance_squared(const Region& a, const Region& b);
double distance(const Region& a, const Region& b);

// Exact set-theoretic queries; interval endpoint openness is honored.
bool contains(const Region& outer, const Region& inner);
bool intersects(const Region& a, const Region& b);

bool region_contains_point(const Region& r, const Point& p);

// --- Cell helpers ----------------------------------------------------------

// Closed coordinate extent of a cell along one axis.
void cell_extent(const Box& box, int depth, const Cell& cell, int axis, Rat& lo, Rat& hi);
Point cell_center(const Box& box, int depth, const Cell& cell);
Rat cell_volume(const Box& box, int depth);

std::int64_t cell_linear_index(const Cell& cell, int depth);
Cell cell_from_linear_index(std::int64_t index, int depth, int dim);

// Cells (at `depth`) whose closed extent contains the point; 2^k candidates when the
// point lies on k lattice planes. Only in-range indices are returned.
std::vector<Cell> cells_containing_point(const Box& box, int depth, const Point& p);

// Subdivides [a,b] at every lattice-plane crossing at the given depth and returns the
// ascending parameter cuts (first 0, last 1).
std::vector<Rat> segment_lattice_cuts(const Box& box, int depth, const Point& a, const Point& b);

Point lerp(const Point& a, const Point& b, const Rat& t);

// --- Polyline parameterization ----------------------------------------------

Point polyline_point_at(const Region& path, const Rat& t);
std::optional<Rat> polyline_param_of_point(const Region& path, const Point& p);
// Parameter range of a contiguous sub-polyline (first match along the path).
std::pair<Rat, Rat> polyline_param_range(const Region& path, const Region& sub);
// Piece of the path over a sub-range of its parameter interval.
Region polyline_sub_curve(const Region& path, const Rat& t0, const Rat& t1, bool t0_closed = true,
                          bool t1_closed = true);
// Vertex list of the closed hull of the region's parameter range.
std::vector<Point> polyline_trimmed_vertices(const Region& path);

// --- JSON -------------------------------------------------------------------

std::string region_to_json(const Region& r);
Region region_from_json(const std::string& text);

}  // namespace mcl
