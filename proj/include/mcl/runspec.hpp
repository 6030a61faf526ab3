#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcl/density.hpp"
#include "mcl/measure.hpp"
#include "mcl/separation.hpp"

namespace mcl {

// Parsed declarative run specification. Exactly one input stanza is present.
struct RunSpec {
    enum class Kind { Simple, Density1D, Grid, Mixture };

    Box box;
    SeparationRelation rel;
    Kind kind = Kind::Density1D;

    std::vector<std::pair<Region, Rat>> simple_terms;
    std::optional<Density1D> density1d;
    std::optional<GridDensity> grid;
    std::optional<AnalyticDensity> grid_analytic;  // when the grid samples a named expression
    std::optional<int> grid_depth;
    std::optional<MixtureDensity> mixture;

    std::string source_text;

    static RunSpec parse(const std::string& text);
    static RunSpec parse_file(const std::string& path);

    // Exact point sampler for refinement runs; present for named expressions
    // and 1d densities.
    std::optional<std::function<Rat(const Point&)>> sampler() const;
};

// Named 1d densities over [0,1]: twinpeaks, factory, merlon, camel, m, uniform.
Density1D builtin_density1d(const std::string& name);
// Named analytic grid expressions: saddle (x*y + 1 on [-1,1]^2).
AnalyticDensity builtin_expr(const std::string& name);
// Named indicator rasterizations on [-1,1]^2 (cells with center strictly inside):
// squares_corner, squares_separated, discs_overlap, discs_tangent, diamonds_bowtie.
GridDensity builtin_indicator(const std::string& name, int depth);

bool builtin_density1d_exists(const std::string& name);

}  // namespace mcl
