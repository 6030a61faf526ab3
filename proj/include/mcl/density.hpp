#pragma once

#include <functional>
#include <optional>
#include <unordered_set>
#include <variant>
#include <vector>

#include "mcl/forest.hpp"
#include "mcl/geometry.hpp"
#include "mcl/interval_set.hpp"

namespace mcl {

// Piecewise-linear density on a one-dimensional box. Pieces are contiguous and
// may jump at breakpoints; the function value at a breakpoint is the larger
// one-sided limit, so closed superlevel sets behave like closures.
struct Density1D {
    struct Piece {
        Rat x0, x1;  // x0 < x1
        Rat y0, y1;  // values at the ends, >= 0
    };

    Box box;  // one-dimensional domain
    std::vector<Piece> pieces;

    static Density1D from_points(Box box, std::vector<std::pair<Rat, Rat>> points);
    static Density1D from_pieces(Box box, std::vector<Piece> pieces);

    Rat value(const Rat& x) const;  // upper semicontinuous at breakpoints
    Rat integral(const Rat& a, const Rat& b) const;
    Rat mass(const IvSet& s) const;
    Rat total() const;
    Rat sup() const;
    // Distinct piece endpoint values; every level where the superlevel-set
    // combinatorics can change under disjointness is among them.
    std::vector<Rat> breakpoint_values() const;
    IvSet superlevel_open(const Rat& lambda) const;    // {f > lambda}
    IvSet superlevel_closed(const Rat& lambda) const;  // {f >= lambda}
    int strict_local_maxima() const;
    Density1D scaled(const Rat& alpha) const;
};

// Nonnegative rational cell values on the full dyadic grid of the box.
struct GridDensity {
    Box box;
    int depth = 0;
    std::vector<Rat> values;  // dense, indexed by cell_linear_index

    static GridDensity from_values(Box box, int depth, std::vector<Rat> values);
    // Samples f at one point per cell (offset in [0,1)^d of the cell, default center).
    static GridDensity sample(const Box& box, int depth, const std::function<Rat(const Point&)>& f,
                              const std::optional<std::vector<Rat>>& offset = std::nullopt);

    std::int64_t cell_count() const { return static_cast<std::int64_t>(values.size()); }
    const Rat& value(std::int64_t linear) const { return values[static_cast<std::size_t>(linear)]; }
    const Rat& value(const Cell& c) const { return value(cell_linear_index(c, depth)); }
    std::vector<Rat> distinct_positive_values_desc() const;
    Rat total() const;
    Rat sup() const;
    Rat mass_region(const Region& r) const;
    Region support_region() const;
    GridDensity scaled(const Rat& alpha) const;
};

// In one dimension a grid density is just a step function.
Density1D grid_to_density1d(const GridDensity& g);

// --- Mixture data -----------------------------------------------------------

struct AtomsComponent {
    std::vector<std::pair<Point, Rat>> atoms;  // distinct points, positive weights
};

// Density on the ambient interval itself (one-dimensional boxes).
struct Line1DComponent {
    Density1D density;
};

struct CurveComponent {
    Region path;         // polyline region
    Density1D density;   // density along the curve, over the parameter box [0,1]
};

struct AnalyticDensity {
    std::string name;
    std::function<Rat(const Point&)> eval;
};

struct GridComponent {
    GridDensity grid;
    std::optional<AnalyticDensity> analytic;  // present when the grid samples a known formula
};

// One dimension-tagged part of a mixture, ordered by increasing dimension.
struct DimComponent {
    int dim = 0;  // 0 atoms, 1 line/curve, box dimension for grids
    std::variant<AtomsComponent, Line1DComponent, CurveComponent, GridComponent> payload;

    bool is_atoms() const { return std::holds_alternative<AtomsComponent>(payload); }
    bool is_line() const { return std::holds_alternative<Line1DComponent>(payload); }
    bool is_curve() const { return std::holds_alternative<CurveComponent>(payload); }
    bool is_grid() const { return std::holds_alternative<GridComponent>(payload); }
    const AtomsComponent& atoms() const { return std::get<AtomsComponent>(payload); }
    const Line1DComponent& line() const { return std::get<Line1DComponent>(payload); }
    const CurveComponent& curve() const { return std::get<CurveComponent>(payload); }
    const GridComponent& grid() const { return std::get<GridComponent>(payload); }
};

struct MixtureDensity {
    Box box;
    std::vector<DimComponent> components;  // sorted by dim ascending
};

// --- Unified density model ----------------------------------------------------

struct DensityModel {
    std::variant<Density1D, GridDensity, MixtureDensity> model;

    DensityModel(Density1D d) : model(std::move(d)) {}
    DensityModel(GridDensity g) : model(std::move(g)) {}
    DensityModel(MixtureDensity m) : model(std::move(m)) {}

    bool is_1d() const { return std::holds_alternative<Density1D>(model); }
    bool is_grid() const { return std::holds_alternative<GridDensity>(model); }
    bool is_mixture() const { return std::holds_alternative<MixtureDensity>(model); }
    const Density1D& d1() const { return std::get<Density1D>(model); }
    const GridDensity& grid() const { return std::get<GridDensity>(model); }
    const MixtureDensity& mixture() const { return std::get<MixtureDensity>(model); }

    const Box& box() const;
    Rat total() const;
    Rat sup() const;
    // Exact mass of a region. Polyline regions are only supported against the
    // matching curve component (parameter-domain mass; see mixture module).
    Rat mass(const Region& r) const;
    Rat mass_sym_diff(const Region& a, const Region& b) const;
    DensityModel scaled(const Rat& alpha) const;
};

// MeasureOracle adapter for equal_mod_p.
class DensityOracle : public MeasureOracle {
  public:
    explicit DensityOracle(const DensityModel& m) : m_(&m) {}
    Rat mass_sym_diff(const Region& a, const Region& b) const override { return m_->mass_sym_diff(a, b); }
    Rat total_mass() const override { return m_->total(); }

  private:
    const DensityModel* m_;
};

// 1d regions as flagged interval sets (intervals, 1d cell unions, atoms).
IvSet region_to_ivset_1d(const Region& r);

}  // namespace mcl
