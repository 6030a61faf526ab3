#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcl/density.hpp"
#include "mcl/measure.hpp"

namespace mcl {

// Unique additive clustering of a simple measure: the structure of its forest.
// Scale invariant by construction (weights do not enter).
Forest cluster_simple(const SimpleMeasure& q);

struct Level1DResult {
    Forest structured;
    ParamChainForest chains;       // nodes with their level ranges
    std::vector<Rat> split_levels; // ascending distinct merge levels
};

// Exact level-set clustering of a piecewise-linear density. Split levels are
// the exact critical values; node endpoints and openness come from one-sided
// limits of the level components.
Level1DResult level_forest_1d(const Density1D& f, const SeparationRelation& rel);
Forest cluster_density_1d(const Density1D& f, const SeparationRelation& rel);

// Superlevel-set merge forest of a grid density: one pass over the distinct
// cell values, components tracked by union-find, structure emitted directly.
// Node metadata: birth_level, realized_level, merge_level.
Forest cluster_density_grid(const GridDensity& g, const SeparationRelation& rel);

// The unique simple-measure representation of a grid density: one term per
// maximal run of levels over which a superlevel component stays the same set.
SimpleMeasure grid_canonical_simple(const GridDensity& g, const SeparationRelation& rel);

struct KinshipCertificate {
    Region b1, b2;
    std::vector<Region> support;  // pieces of the connected superlevel set containing both
    Rat height;                   // maximal admissible flat height

    // Under tau separation the maximal height can be a supremum realized only
    // by bases strictly below it; `support` is then taken from the topmost
    // admissible stripe, which every admissible base is contained in.
};

// Searches the finitely many candidate heights for a separated-connected piece
// of {density >= h} containing both regions; returns the certificate with the
// maximal height, or nothing when the regions are never jointly supported.
std::optional<KinshipCertificate> kinship(const DensityModel& p, const SeparationRelation& rel, const Region& b1,
                                          const Region& b2);

struct SiblingPairReport {
    Region a1, a2;
    bool has_parent = false;
    bool kin = false;
    std::optional<Rat> support_height;  // maximal height jointly supporting the pair below P
    bool grounded = true;
    bool fine = true;
    bool motivated = true;
    std::optional<Rat> alpha_margin;           // h_max / min(h1,h2); any alpha in (margin,1) witnesses
    std::optional<BaseMeasure> counterexample; // unextendable or too-tall supporting base measure
};

struct AdaptednessReport {
    std::vector<SiblingPairReport> pairs;

    bool adapted() const;
    std::string first_violation() const;  // "not grounded" / "not fine" / "not motivated" or empty
};

// Grounded / fine / strictly-motivated checks for every direct-sibling pair.
// Pre: majorizes(q, p); otherwise throws "q-not-below-p".
AdaptednessReport is_adapted(const SimpleMeasure& q, const DensityModel& p);

struct RefineStep {
    int depth = 0;
    GridDensity grid;     // monotone minorant of the finest sample grid
    Forest clustering;
    Rat residual;         // P(Omega) - Q_n(Omega)
    bool adapted = false;
};

struct RefineReport {
    std::vector<RefineStep> steps;
    Forest stabilized;  // structure of the final step
    bool isomonotone = false;
    bool adapted = false;
};

// Samples f on the finest grid (at the given in-cell offset), derives the
// monotone minorant at each coarser depth, clusters every step, and verifies
// the sequence is isomonotone and adapted to the finest grid. Throws
// "monotonicity-violation" / "adaptedness-violation" naming the index.
RefineReport refine_and_cluster(const std::function<Rat(const Point&)>& f, const Box& box,
                                const std::vector<int>& depths, const SeparationRelation& rel,
                                const std::optional<std::vector<Rat>>& offset = std::nullopt);

// Neighborhood offsets under which two grid cells fail to be rel-separated.
std::vector<Cell> grid_stencil(const Box& box, int depth, const SeparationRelation& rel);

}  // namespace mcl
