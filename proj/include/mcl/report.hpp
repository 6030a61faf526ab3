#pragma once

#include <optional>
#include <string>

#include "mcl/density.hpp"
#include "mcl/forest.hpp"

namespace mcl {

// Rendered clustering plus provenance; JSON and DOT describe the same node set
// and serialize deterministically.
struct ForestReport {
    std::string engine;  // simple | density1d | grid | mixture
    Forest forest;
    std::optional<int> depth;
    std::string spec_hash;
    std::vector<std::optional<Rat>> exact_mass;    // per node, when exact
    std::vector<std::optional<double>> approx_mass;  // per node, curves

    std::string to_json() const;
    std::string to_dot() const;
    static ForestReport from_json(const std::string& text);
};

ForestReport make_report(std::string engine, Forest forest, std::optional<int> depth, const std::string& spec_text,
                         const std::optional<DensityModel>& mass_model);

std::string fnv1a_hash(const std::string& text);

}  // namespace mcl
