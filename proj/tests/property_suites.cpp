#include "property_suites.hpp"

#include <random>

#include "mcl/clustering.hpp"
#include "mcl/measure.hpp"

namespace mcl::props {

namespace {

using namespace mcl;

Box box01() { return Box({rat(0)}, {rat(1)}); }
Box box2() { return Box({rat(-1), rat(-1)}, {rat(1), rat(1)}); }

Region iv(const Rat& lo, const Rat& hi) { return make_interval(box01(), lo, hi); }

// random nested interval family on a rational lattice: a root plus up to two
// generations of disjoint children
std::vector<Region> random_interval_forest(std::mt19937& rng) {
    const long D = 64;  // denominator lattice
    std::vector<Region> out;
    std::function<void(long, long, int)> grow = [&](long lo, long hi, int depth) {
        out.push_back(iv(rat(lo, D), rat(hi, D)));
        if (depth >= 3 || hi - lo < 6) return;
        long span = hi - lo;
        int kids = static_cast<int>(rng() % 3);  // 0..2 children
        long cursor = lo + 1;
        for (int k = 0; k < kids && cursor + 2 < hi; ++k) {
            long budget = (hi - 1 - cursor) / (kids - k);
            if (budget < 2) break;
            long clo = cursor + static_cast<long>(rng() % std::max<long>(1, budget / 2));
            long chi = clo + 2 + static_cast<long>(rng() % std::max<long>(1, budget / 2));
            if (chi >= hi) break;
            grow(clo, chi, depth + 1);
            cursor = chi + 1;
        }
        (void)span;
    };
    long rlo = static_cast<long>(rng() % 8);
    long rhi = rlo + 20 + static_cast<long>(rng() % (D - rlo - 20));
    grow(rlo, rhi, 0);
    if (rng() % 2) {
        // second root when space remains
        if (rhi + 4 < D) out.push_back(iv(rat(rhi + 2, D), rat(std::min(D, rhi + 2 + (long)(rng() % 8) + 2), D)));
    }
    return out;
}

GridDensity random_grid(std::mt19937& rng, int depth = 2) {
    const int d = 2;
    std::int64_t n = std::int64_t(1) << (d * depth);
    std::vector<Rat> values(n);
    bool pos = false;
    for (auto& v : values) {
        v = rat(rng() % 4, 1 + rng() % 3);
        if (v > 0) pos = true;
    }
    if (!pos) values[static_cast<std::size_t>(rng() % n)] = rat(1);
    return GridDensity::from_values(box2(), depth, std::move(values));
}

SimpleMeasure random_simple_1d(std::mt19937& rng, const SeparationRelation& rel) {
    auto regions = random_interval_forest(rng);
    std::vector<std::pair<Region, Rat>> terms;
    for (auto& r : regions) terms.emplace_back(r, rat(1 + rng() % 9, 1 + rng() % 5));
    return SimpleMeasure::validate(rel, std::move(terms));
}

}  // namespace

int structure_idempotence(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    auto rel = SeparationRelation::disjoint();
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        Forest f = (i % 3 == 2) ? cluster_density_grid(random_grid(rng), rel).structure()
                                : Forest::build(rel, random_interval_forest(rng));
        Forest s = f.structure();
        if (!(s.structure() == s)) ++failures;
    }
    return failures;
}

int representation_uniqueness(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    auto rel = SeparationRelation::disjoint();
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        SimpleMeasure q = (i % 3 == 2) ? grid_canonical_simple(random_grid(rng), rel) : random_simple_1d(rng, rel);
        auto terms = q.terms();
        std::shuffle(terms.begin(), terms.end(), rng);
        SimpleMeasure again = SimpleMeasure::validate(rel, std::move(terms));
        if (!(again.forest() == q.forest()) || again.weights() != q.weights()) ++failures;
    }
    return failures;
}

int self_adaptedness(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    auto rel = SeparationRelation::disjoint();
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        SimpleMeasure q = (i % 3 == 2) ? grid_canonical_simple(random_grid(rng), rel) : random_simple_1d(rng, rel);
        auto rep = is_adapted(q, q.to_density_model());
        if (!rep.adapted()) ++failures;
    }
    return failures;
}

int level_decomposition(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    auto rel = SeparationRelation::disjoint();
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        SimpleMeasure q = random_simple_1d(rng, rel);
        int node = static_cast<int>(rng() % q.size());
        const Region& a = q.forest().node(node).region;
        BaseMeasure lvl = q.level(node);
        SimpleMeasure below = q.restrict_strict_descendants(a);
        long lo = static_cast<long>(rng() % 60);
        long hi = lo + 1 + static_cast<long>(rng() % (64 - lo - 1));
        Region b = iv(rat(lo, 64), rat(hi, 64));
        IvSet cut = ivset_intersect(region_to_ivset_1d(b), region_to_ivset_1d(a));
        Rat lhs = 0;
        for (const auto& piece : cut) lhs += q.evaluate(iv(piece.lo, piece.hi));
        Rat rhs = lvl.weight * (ivset_length(cut) / measure_exact(a)) + below.evaluate(b);
        if (lhs != rhs) ++failures;
    }
    return failures;
}

int additivity_laws(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    auto rel = SeparationRelation::disjoint();
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        if (i % 2 == 0) {
            // disjoint additivity: supports in separated halves
            std::mt19937 r1(rng()), r2(rng());
            auto window = [&](std::mt19937& r, long wlo, long whi) {
                std::vector<std::pair<Region, Rat>> terms;
                long lo = wlo + static_cast<long>(r() % 8);
                long hi = whi - static_cast<long>(r() % 8);
                terms.emplace_back(iv(rat(lo, 128), rat(hi, 128)), rat(1 + r() % 5));
                if (hi - lo > 10 && r() % 2)
                    terms.emplace_back(iv(rat(lo + 2, 128), rat(lo + 2 + r() % (hi - lo - 4) + 1, 128)),
                                       rat(1 + r() % 5));
                return terms;
            };
            auto t1 = window(r1, 0, 60);
            auto t2 = window(r2, 68, 128);
            auto q1 = SimpleMeasure::validate(rel, t1);
            auto q2 = SimpleMeasure::validate(rel, t2);
            auto all = t1;
            all.insert(all.end(), t2.begin(), t2.end());
            Forest joint = cluster_simple(SimpleMeasure::validate(rel, all));
            Forest c1 = cluster_simple(q1);
            Forest c2 = cluster_simple(q2);
            bool ok = joint.size() == c1.size() + c2.size();
            for (int k = 0; ok && k < c1.size(); ++k) ok = joint.find_node(c1.node(k).region) >= 0;
            for (int k = 0; ok && k < c2.size(); ++k) ok = joint.find_node(c2.node(k).region) >= 0;
            if (!ok) ++failures;
        } else {
            // base additivity: pour a base over a measure supported inside it
            SimpleMeasure q = random_simple_1d(rng, rel);
            auto terms = q.terms();
            Forest cq = cluster_simple(q);
            Region cover = iv(rat(0), rat(1));
            terms.emplace_back(cover, rat(1 + rng() % 3));
            Forest poured = cluster_simple(SimpleMeasure::validate(rel, terms));
            std::vector<Region> expected_nodes{cover};
            for (int k = 0; k < cq.size(); ++k) expected_nodes.push_back(cq.node(k).region);
            Forest expected = Forest::build(rel, expected_nodes).structure();
            if (!(poured == expected)) ++failures;
        }
    }
    return failures;
}

int separation_laws(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        SeparationRelation rel = (i % 2) ? SeparationRelation::tau_separation(rat(1 + rng() % 8, 32))
                                         : SeparationRelation::disjoint();
        // reflexivity on a random nonempty region
        long lo = static_cast<long>(rng() % 56), hi = lo + 1 + static_cast<long>(rng() % 8);
        Region r = iv(rat(lo, 64), rat(hi, 64));
        if (separated(rel, r, r)) ++failures;

        // monotonicity: r_sub inside r, against a random probe
        Region sub = iv(rat(lo, 64), rat(lo + (hi - lo + 1) / 2, 64));
        long blo = static_cast<long>(rng() % 56), bhi = blo + 1 + static_cast<long>(rng() % 8);
        Region probe = iv(rat(blo, 64), rat(bhi, 64));
        if (separated(rel, r, probe) && !separated(rel, sub, probe)) ++failures;

        // finite stability over an increasing cell-union chain
        int depth = 3;
        std::vector<Cell> cells{{static_cast<std::int64_t>(rng() % 4), static_cast<std::int64_t>(rng() % 4)}};
        std::vector<Region> chain{make_cells(box2(), depth, cells)};
        for (int s = 0; s < 3; ++s) {
            Cell next = cells.back();
            int axis = static_cast<int>(rng() % 2);
            next[axis] = std::min<std::int64_t>(7, next[axis] + 1);
            cells.push_back(next);
            chain.push_back(make_cells(box2(), depth, cells));
        }
        Region far = make_cells(box2(), depth, {{7, 7}});
        bool all_sep = true;
        for (const auto& link : chain)
            if (!separated(rel, link, far)) all_sep = false;
        if (all_sep && !separated(rel, chain.back(), far)) ++failures;
    }
    return failures;
}

int kinship_laws(int cases, unsigned seed) {
    std::mt19937 rng(seed);
    auto rel = SeparationRelation::disjoint();
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        GridDensity g = random_grid(rng, 2);
        DensityModel p(g);
        auto probe = [&]() {
            while (true) {
                Cell c{static_cast<std::int64_t>(rng() % 4), static_cast<std::int64_t>(rng() % 4)};
                if (g.value(c) > 0) return make_cells(box2(), 2, {c});
            }
        };
        Region a = probe(), b = probe(), c = probe();
        auto ab = kinship(p, rel, a, b);
        auto ba = kinship(p, rel, b, a);
        if (ab.has_value() != ba.has_value()) ++failures;
        if (ab && ba && ab->height != ba->height) ++failures;
        auto bc = kinship(p, rel, b, c);
        auto ac = kinship(p, rel, a, c);
        if (ab && bc && !ac) ++failures;
    }
    return failures;
}

}  // namespace mcl::props
