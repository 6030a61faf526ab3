#include <doctest.h>

#include <random>

#include "mcl/measure.hpp"

using namespace mcl;

namespace {

Box box04() { return Box({rat(0)}, {rat(4)}); }
Box box01() { return Box({rat(0)}, {rat(1)}); }

Region iv4(const Rat& lo, const Rat& hi) { return make_interval(box04(), lo, hi); }

}  // namespace

TEST_CASE("validate representation") {
    auto rel = SeparationRelation::disjoint();
    // nested chain is fine
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(4)), rat(1)}, {iv4(rat(1), rat(2)), rat(1)}});
    CHECK(q.size() == 2);

    // overlapping but not nested: rejected with the offending pair named
    CHECK_THROWS_WITH_AS(
        SimpleMeasure::validate(rel, {{iv4(rat(0), rat(2)), rat(1)}, {iv4(rat(1), rat(3)), rat(1)}}),
        doctest::Contains("forest-violation"), Error);

    CHECK_THROWS_AS(SimpleMeasure::validate(rel, {{iv4(rat(0), rat(1)), rat(0)}}), Error);
}

TEST_CASE("five-interval family with two roots") {
    auto rel = SeparationRelation::disjoint();
    std::vector<std::pair<Region, Rat>> terms = {
        {iv4(rat(0), rat(2)), rat(1)},          {iv4(rat(1, 4), rat(3, 4)), rat(1, 2)},
        {iv4(rat(5, 4), rat(7, 4)), rat(2)},    {iv4(rat(5, 2), rat(4)), rat(1)},
        {iv4(rat(11, 4), rat(7, 2)), rat(1, 3)},
    };
    // oracle: verify pairwise relations exhaustively
    for (size_t i = 0; i < terms.size(); ++i)
        for (size_t j = i + 1; j < terms.size(); ++j) {
            bool ok = contains(terms[i].first, terms[j].first) || contains(terms[j].first, terms[i].first) ||
                      separated(rel, terms[i].first, terms[j].first);
            REQUIRE(ok);
        }
    auto q = SimpleMeasure::validate(rel, terms);
    CHECK(q.size() == 5);
    CHECK(q.forest().roots().size() == 2);
}

TEST_CASE("levels") {
    auto rel = SeparationRelation::disjoint();
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(4)), rat(1)}, {iv4(rat(1), rat(2)), rat(1)}});

    BaseMeasure lvl = q.level(iv4(rat(1), rat(2)));
    CHECK(lvl.weight == rat(5, 4));   // 1 * (1/4) + 1 * 1
    CHECK(lvl.height() == rat(5, 4));

    // cross-check by evaluating Q on sub-intervals of [1,2]
    CHECK(q.evaluate(iv4(rat(1), rat(3, 2))) == rat(5, 8));
    CHECK(q.evaluate(iv4(rat(1), rat(2))) == rat(5, 4));

    // a root with no ancestors: level = own term
    BaseMeasure root = q.level(iv4(rat(0), rat(4)));
    CHECK(root.weight == rat(1));

    // trivial measure: level of A is Q_A
    auto qa = SimpleMeasure::validate(rel, {{iv4(rat(1), rat(2)), rat(1)}});
    CHECK(qa.level(iv4(rat(1), rat(2))).weight == rat(1));

    CHECK_THROWS_WITH_AS(q.level(iv4(rat(0), rat(1))), doctest::Contains("node-not-found"), Error);
}

TEST_CASE("evaluate") {
    auto rel = SeparationRelation::disjoint();
    auto q1 = SimpleMeasure::validate(rel, {{make_interval(box01(), rat(0), rat(1)), rat(1)}});
    CHECK(q1.evaluate(make_interval(box01(), rat(0), rat(1, 2))) == rat(1, 2));

    // a dirac mass sees every region containing its point
    Box b({rat(-1)}, {rat(1)});
    auto dirac = SimpleMeasure::validate(rel, {{make_atom(b, {rat(0)}), rat(3)}});
    CHECK(dirac.evaluate(make_interval(b, rat(-1), rat(1, 2))) == rat(3));
    CHECK(dirac.evaluate(make_interval(b, rat(1, 4), rat(1, 2))) == rat(0));

    // a region strictly thinner than the support cannot be evaluated
    CHECK_THROWS_WITH_AS(q1.evaluate(make_atom(box01(), {rat(1, 2)})), doctest::Contains("dimension-mismatch"),
                         Error);
}

TEST_CASE("support equals ground") {
    auto rel = SeparationRelation::disjoint();
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(1)), rat(1)}, {iv4(rat(2), rat(3)), rat(2)}});
    // complement of the ground carries no mass and every node carries positive mass
    CHECK(q.evaluate(iv4(rat(1), rat(2))) == rat(0));
    CHECK(q.evaluate(iv4(rat(3), rat(4))) == rat(0));
    for (int i = 0; i < q.size(); ++i) CHECK(q.evaluate(q.forest().node(i).region) > 0);
}

TEST_CASE("majorization") {
    auto rel = SeparationRelation::disjoint();
    Region a = iv4(rat(0), rat(1));
    auto q = SimpleMeasure::validate(rel, {{a, rat(1)}});
    auto half = SimpleMeasure::validate(rel, {{a, rat(1, 2)}});
    CHECK(majorizes(half, q));
    CHECK_FALSE(majorizes(q, half));

    // Q_[0,1] vs Q_[0,2]: heights 1 vs 1/2
    auto wide = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(2)), rat(1)}});
    CHECK_FALSE(majorizes(q, wide));
    CHECK(majorizes(half, wide));

    SUBCASE("base pairs: (A,h) <= (A',h') iff nested supports and ordered heights") {
        std::mt19937 rng(23);
        for (int rep = 0; rep < 200; ++rep) {
            long alo = rng() % 30, alen = 1 + rng() % (40 - alo - 1);
            long blo = rng() % 30, blen = 1 + rng() % (40 - blo - 1);
            Region ra = iv4(rat(alo, 10), rat(alo + alen, 10));
            Region rb = iv4(rat(blo, 10), rat(blo + blen, 10));
            Rat wa = rat(1 + rng() % 8, 1 + rng() % 8);
            Rat wb = rat(1 + rng() % 8, 1 + rng() % 8);
            auto qa = SimpleMeasure::validate(rel, {{ra, wa}});
            auto qb = SimpleMeasure::validate(rel, {{rb, wb}});
            Rat ha = wa / measure_exact(ra), hb = wb / measure_exact(rb);
            bool expect = contains(rb, ra) && ha <= hb;
            // brute-force oracle on the refinement of both boundary sets
            std::vector<Rat> cuts = {rat(alo, 10), rat(alo + alen, 10), rat(blo, 10), rat(blo + blen, 10)};
            std::sort(cuts.begin(), cuts.end());
            bool oracle = true;
            for (size_t k = 0; k + 1 < cuts.size(); ++k) {
                if (cuts[k] == cuts[k + 1]) continue;
                Region piece = iv4(cuts[k], cuts[k + 1]);
                if (qa.evaluate(piece) > qb.evaluate(piece)) oracle = false;
            }
            CHECK(majorizes(qa, qb) == expect);
            CHECK(expect == oracle);
        }
    }
}

TEST_CASE("monotone convergence of interval restrictions") {
    auto rel = SeparationRelation::disjoint();
    DensityModel p(Density1D::from_points(box01(), {{rat(0), rat(1)}, {rat(1), rat(1)}}));
    std::vector<SimpleMeasure> seq;
    for (long n : {2L, 4L, 8L}) {
        if (n == 2) {
            seq.push_back(SimpleMeasure::zero(rel));  // degenerate restriction carries no mass
            continue;
        }
        seq.push_back(
            SimpleMeasure::validate(rel, {{make_interval(box01(), rat(1, n), rat(n - 1, n)), rat(n - 2, n)}}));
    }
    auto rep = monotone_convergence_check(seq, p);
    CHECK(rep.ok);
    CHECK(rep.residual == rat(1, 4));

    // constant sequence
    auto q = SimpleMeasure::validate(rel, {{make_interval(box01(), rat(1, 4), rat(3, 4)), rat(1, 2)}});
    auto rep2 = monotone_convergence_check({q, q, q}, p);
    CHECK(rep2.ok);
    CHECK(rep2.residual == rat(1, 2));

    // shuffled: violation at the first inversion
    std::vector<SimpleMeasure> bad = {seq[2], seq[1]};
    auto rep3 = monotone_convergence_check(bad, p);
    CHECK_FALSE(rep3.ok);
    CHECK(rep3.violation_index == 0);
}

TEST_CASE("level decomposition identity") {
    auto rel = SeparationRelation::disjoint();
    std::mt19937 rng(31);
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(4)), rat(2)},
                                           {iv4(rat(1, 2), rat(3, 2)), rat(1)},
                                           {iv4(rat(2), rat(3)), rat(1, 3)},
                                           {iv4(rat(3, 4), rat(5, 4)), rat(1, 5)}});
    for (int i = 0; i < q.size(); ++i) {
        Region a = q.forest().node(i).region;
        BaseMeasure lvl = q.level(i);
        SimpleMeasure below = q.restrict_strict_descendants(a);
        for (int rep = 0; rep < 50; ++rep) {
            long lo = rng() % 390;
            long len = 1 + rng() % (400 - lo - 9);
            Region b = iv4(rat(lo, 100), rat(lo + len, 100));
            IvSet cut = ivset_intersect(region_to_ivset_1d(b), region_to_ivset_1d(a));
            Rat lhs = 0;
            for (const auto& piece : cut) lhs += q.evaluate(iv4(piece.lo, piece.hi));
            Rat level_part = lvl.weight * (ivset_length(cut) / measure_exact(a));
            Rat rhs = level_part + below.evaluate(b);
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("density views round masses exactly") {
    auto rel = SeparationRelation::disjoint();
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(4)), rat(1)}, {iv4(rat(1), rat(2)), rat(1)}});
    Density1D d = q.to_density_1d();
    CHECK(d.total() == q.total());
    CHECK(d.integral(rat(1), rat(2)) == rat(5, 4));

    Box b2({rat(0), rat(0)}, {rat(1), rat(1)});
    auto qg = SimpleMeasure::validate(
        rel, {{make_cells(b2, 1, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}), rat(1)}, {make_cells(b2, 1, {{0, 0}}), rat(1)}});
    GridDensity g = qg.to_grid_density();
    CHECK(g.total() == rat(2));
    CHECK(g.value(Cell{0, 0}) == rat(5));  // 1 + 4 on the quarter cell
}

TEST_CASE("simple measure json round trip") {
    auto rel = SeparationRelation::disjoint();
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(4)), rat(1)},
                                           {iv4(rat(1), rat(2)), rat(5, 7)},
                                           {make_atom(box04(), {rat(3)}), rat(2)}});
    std::string j = simple_measure_to_json(q);
    SimpleMeasure back = simple_measure_from_json(j);
    CHECK(back.forest() == q.forest());
    CHECK(back.weights() == q.weights());
    CHECK(simple_measure_to_json(back) == j);
}

TEST_CASE("majorization implies support inclusion up to null sets") {
    auto rel = SeparationRelation::disjoint();
    std::mt19937 rng(59);
    for (int rep = 0; rep < 100; ++rep) {
        long alo = rng() % 30, alen = 1 + rng() % (40 - alo - 1);
        long blo = rng() % 30, blen = 1 + rng() % (40 - blo - 1);
        auto qa = SimpleMeasure::validate(rel, {{iv4(rat(alo, 10), rat(alo + alen, 10)), rat(1, 4)}});
        auto qb = SimpleMeasure::validate(rel, {{iv4(rat(blo, 10), rat(blo + blen, 10)), rat(1 + rng() % 4)}});
        if (!majorizes(qa, qb)) continue;
        // everything outside supp(qb) carries no qa mass
        IvSet complement = ivset_subtract({FlagIv{rat(0), rat(4), true, true}},
                                          region_to_ivset_1d(qb.forest().node(0).region));
        for (const auto& piece : complement)
            if (piece.lo < piece.hi) CHECK(qa.evaluate(iv4(piece.lo, piece.hi)) == rat(0));
    }
}

TEST_CASE("levels across dimension classes") {
    auto rel = SeparationRelation::disjoint();
    // an atom nested inside an interval node: the interval's reference measure
    // never charges the point, so the atom's level is its own weight
    auto q = SimpleMeasure::validate(rel, {{iv4(rat(0), rat(4)), rat(1)}, {make_atom(box04(), {rat(3)}), rat(2)}});
    int atom_node = q.forest().find_node(make_atom(box04(), {rat(3)}));
    REQUIRE(atom_node >= 0);
    CHECK(q.forest().node(atom_node).parent >= 0);  // geometrically nested
    CHECK(q.level(atom_node).weight == rat(2));
    // evaluating the whole mixed measure on a point region is refused
    CHECK_THROWS_WITH_AS(q.evaluate(make_atom(box04(), {rat(3)})), doctest::Contains("dimension-mismatch"), Error);
    // but a fat region sees the atom plus the interval share
    CHECK(q.evaluate(iv4(rat(5, 2), rat(7, 2))) == rat(2) + rat(1, 4));
}
