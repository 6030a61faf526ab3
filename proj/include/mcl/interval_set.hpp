#pragma once

#include <optional>
#include <vector>

#include "mcl/rational.hpp"

namespace mcl {

// One-dimensional interval with endpoint-openness flags. Degenerate intervals
// (lo == hi, both closed) represent single points.
struct FlagIv {
    Rat lo, hi;
    bool lc = true, hc = true;

    bool is_point() const { return lo == hi; }
};

// Sorted, pairwise disjoint, maximally merged.
using IvSet = std::vector<FlagIv>;

bool iv_valid(const FlagIv& v);
bool iv_contains_point(const FlagIv& v, const Rat& x);
bool iv_subset(const FlagIv& inner, const FlagIv& outer);
std::optional<FlagIv> iv_intersect(const FlagIv& a, const FlagIv& b);
// a minus b, 0..2 pieces
std::vector<FlagIv> iv_subtract(const FlagIv& a, const FlagIv& b);
// True when the union of a and b is a single interval (overlap or closed touch).
bool iv_joinable(const FlagIv& a, const FlagIv& b);

IvSet ivset_normalize(std::vector<FlagIv> ivs);
IvSet ivset_union(const IvSet& a, const IvSet& b);
IvSet ivset_intersect(const IvSet& a, const IvSet& b);
IvSet ivset_subtract(const IvSet& a, const IvSet& b);
IvSet ivset_sym_diff(const IvSet& a, const IvSet& b);
bool ivset_contains_point(const IvSet& s, const Rat& x);
bool ivset_covers(const IvSet& outer, const IvSet& inner);
bool ivset_intersects(const IvSet& a, const IvSet& b);
Rat ivset_length(const IvSet& s);

}  // namespace mcl
