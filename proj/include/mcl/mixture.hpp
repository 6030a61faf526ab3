#pragma once

#include <string>
#include <vector>

#include "mcl/clustering.hpp"
#include "mcl/density.hpp"

namespace mcl {

struct MixtureDiagnostic {
    bool ok = true;
    std::vector<std::string> messages;  // one entry per failed piece, empty when ok
};

// Verifies the higher-dimensional component's density is constant on every
// separated-connected piece of the lower component's support that meets it.
// With an analytic density attached to the grid the check is evaluated along
// the piece within 1e-9; against raw grid values it is exact per traversed
// cell, and a step across unequal cells fails with the offending pair.
MixtureDiagnostic check_mixture_condition(const DimComponent& low, const DimComponent& high, const Box& box,
                                          const SeparationRelation& rel);

// All dimension pairs plus pairwise separation of same-dimension supports.
MixtureDiagnostic check_mixture(const MixtureDensity& m, const SeparationRelation& rel);

// Clusters each component with its own engine and returns the union forest;
// nodes from different dimension classes are never nested.
// Throws "mixture-condition-failure" when check_mixture fails.
Forest cluster_mixture(const MixtureDensity& m, const SeparationRelation& rel);

MixtureDensity make_mixture(Box box, std::vector<DimComponent> components);

}  // namespace mcl
