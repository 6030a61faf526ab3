#pragma once

#include <utility>
#include <vector>

#include "mcl/density.hpp"
#include "mcl/forest.hpp"

namespace mcl {

// alpha * Q_A with Q_A the normalized reference measure of the base set A.
struct BaseMeasure {
    Region region;
    Rat weight;  // alpha > 0

    // Flat density height alpha / mu(A); exact variants only.
    Rat height() const { return weight / measure_exact(region); }
};

// Weighted family of base measures indexed by forest nodes. The term list has a
// unique valid arrangement; construction recovers it (or rejects the family).
class SimpleMeasure {
  public:
    SimpleMeasure() = default;

    // Verifies the regions form a valid forest under rel (unique representation),
    // rejects non-positive weights and duplicate regions.
    static SimpleMeasure validate(const SeparationRelation& rel, std::vector<std::pair<Region, Rat>> terms);
    // Construction when the forest is already known to be valid.
    static SimpleMeasure trusted(Forest forest, std::vector<std::pair<Region, Rat>> terms);
    static SimpleMeasure zero(const SeparationRelation& rel) { return SimpleMeasure(Forest(), {}); }

    const Forest& forest() const { return forest_; }
    const std::vector<Rat>& weights() const { return weights_; }  // aligned with forest nodes
    bool is_zero() const { return forest_.empty(); }
    int size() const { return forest_.size(); }
    Rat total() const;

    // Sum_A alpha_A mu(B cap A)/mu(A). Errors with dimension-mismatch when some
    // node's support dimension exceeds B's dimension class.
    Rat evaluate(const Region& b) const;

    // Combined ancestor mass of the node restricted to it, as a base measure.
    BaseMeasure level(int node) const;
    BaseMeasure level(const Region& a) const;
    // Flat height of the level of `node`.
    Rat level_height(int node) const;

    // Q restricted to the strict descendants of A.
    SimpleMeasure restrict_strict_descendants(const Region& a) const;

    std::vector<std::pair<Region, Rat>> terms() const;

    // Density views (by support dimension class). 1d view covers interval/cell
    // nodes in a one-dimensional box; grid view covers cell unions; the model
    // view adds atoms as a mixture component.
    Density1D to_density_1d() const;
    GridDensity to_grid_density() const;
    DensityModel to_density_model() const;

  private:
    SimpleMeasure(Forest f, std::vector<Rat> w) : forest_(std::move(f)), weights_(std::move(w)) {}

    Forest forest_;
    std::vector<Rat> weights_;
};

// Exact pointwise-density comparison on the common refinement of both node
// boundary sets, per dimension class.
bool majorizes(const SimpleMeasure& q1, const SimpleMeasure& q2);
bool majorizes(const SimpleMeasure& q, const DensityModel& p);

struct MonotoneReport {
    bool ok = true;
    int violation_index = -1;  // first i with not (Q_i <= Q_{i+1}) or not (Q_m <= P)
    Rat residual;              // P(Omega) - Q_m(Omega) when ok
};

MonotoneReport monotone_convergence_check(const std::vector<SimpleMeasure>& seq, const DensityModel& p);

// Term-list serialization: {"separation": ..., "terms": [{"region":..., "weight":"p/q"}]}.
std::string simple_measure_to_json(const SimpleMeasure& q);
SimpleMeasure simple_measure_from_json(const std::string& text);

}  // namespace mcl
