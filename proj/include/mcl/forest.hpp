#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcl/geometry.hpp"
#include "mcl/separation.hpp"

namespace mcl {

struct ForestNode {
    Region region;
    int parent = -1;  // index into the forest, -1 for roots

    // Engine metadata (level-set engines fill these in; optional elsewhere).
    std::optional<Rat> birth_level;     // level at which the node's branch appeared
    std::optional<Rat> realized_level;  // threshold whose superlevel component equals the node
    std::optional<Rat> merge_level;     // split level at which the node merged into its parent
};

// Finite set of regions, pairwise nested or separated, ordered by inclusion.
// Nodes are kept in a canonical order so equality and serialization are
// deterministic.
class Forest {
  public:
    Forest() = default;

    // Validates the forest property pairwise (rejects duplicates and
    // non-nested non-separated pairs), derives parents, canonicalizes.
    static Forest build(SeparationRelation rel, std::vector<Region> regions);
    static Forest build_nodes(SeparationRelation rel, std::vector<ForestNode> nodes);

    // Construction from engines that guarantee validity: parents are supplied;
    // containment of children and separation of direct siblings are still
    // verified (cheap), the full pairwise check is skipped.
    static Forest trusted(SeparationRelation rel, std::vector<ForestNode> nodes);

    const SeparationRelation& relation() const { return rel_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    bool empty() const { return nodes_.empty(); }
    const ForestNode& node(int i) const { return nodes_.at(i); }
    const std::vector<ForestNode>& nodes() const { return nodes_; }

    std::vector<int> roots() const;
    std::vector<int> children(int i) const;
    std::vector<int> leaves() const;
    std::vector<int> strict_ancestors(int i) const;  // from parent upward
    bool is_root(int i) const { return nodes_.at(i).parent < 0; }

    // Union over the roots, as the list of root regions.
    std::vector<Region> ground() const;

    int find_node(const Region& r) const;  // -1 when absent

    enum class SubMode { StrictAncestors, Ancestors, Descendants, StrictDescendants };
    Forest sub_forest(const Region& a, SubMode mode) const;

    // Roots plus all nodes possessing a direct sibling; chains collapse.
    Forest structure() const;

    // Direct sibling families of size >= 2 (children sharing a parent, or the
    // root family when there are >= 2 roots).
    std::vector<std::vector<int>> sibling_families() const;

  private:
    SeparationRelation rel_;
    std::vector<ForestNode> nodes_;

    void canonicalize();
    void verify_links() const;
};

bool operator==(const Forest& a, const Forest& b);
inline bool operator!=(const Forest& a, const Forest& b) { return !(a == b); }

// The unique inclusion-respecting graph isomorphism witnessing F1 <= F2.
struct ForestRelatingMap {
    std::vector<int> map;  // node index in F1 -> node index in F2
};

// Throws "not-isomorphic" when the graphs differ, "isomorphic-but-not-contained"
// when shapes agree but no containment-respecting matching exists.
ForestRelatingMap frm(const Forest& f1, const Forest& f2);

bool forests_isomorphic(const Forest& f1, const Forest& f2);

// Verifies s(F_1) <= s(F_2) <= ... and returns the node-wise union along the
// relating maps. For a finite sequence the increasing unions equal the last
// structure; convergence shows up as stability across successive terms.
// Throws "monotonicity-violation" naming the first offending index.
Forest isomonotone_limit(const std::vector<Forest>& seq);

// Mass oracle supplied by a density model; lets forest equality ignore
// null-set discrepancies without this module knowing about densities.
class MeasureOracle {
  public:
    virtual ~MeasureOracle() = default;
    virtual Rat mass_sym_diff(const Region& a, const Region& b) const = 0;
    virtual Rat total_mass() const = 0;
};

struct EqualModPResult {
    bool equal = false;
    std::vector<int> witness;  // node index in F1 -> node index in F2 when equal
};

// True iff a graph isomorphism exists whose node symmetric differences all
// have oracle mass <= tolerance.
EqualModPResult equal_mod_p(const Forest& f1, const Forest& f2, const MeasureOracle& p, const Rat& tolerance);

// --- Parameterized chain forests -------------------------------------------

// Finite forest whose nodes may stand for a monotone one-parameter family of
// regions; the family is stored via its union. Generalized structure collapses
// every maximal pure chain into that union.
struct ParamChainNode {
    Region region;  // the chain's union, or the plain region
    std::optional<std::pair<Rat, Rat>> chain_levels;  // open level range when a chain
    int parent = -1;
};

struct ParamChainForest {
    SeparationRelation rel;
    std::vector<ParamChainNode> nodes;

    Forest generalized_structure() const;
};

}  // namespace mcl
