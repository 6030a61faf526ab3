#include <doctest.h>

#include <random>

#include "mcl/clustering.hpp"
#include "mcl/runspec.hpp"

using namespace mcl;

namespace {

Box box01() { return Box({rat(0)}, {rat(1)}); }
Box box2() { return Box({rat(-1), rat(-1)}, {rat(1), rat(1)}); }

Region iv(const Rat& lo, const Rat& hi, bool lc = true, bool hc = true) {
    return make_interval(box01(), lo, hi, lc, hc);
}

bool has_node(const Forest& f, const Region& r) { return f.find_node(r) >= 0; }

}  // namespace

TEST_CASE("additive clustering of simple measures") {
    auto rel = SeparationRelation::disjoint();
    // a base measure clusters trivially
    auto qa = SimpleMeasure::validate(rel, {{iv(rat(1, 4), rat(3, 4)), rat(2)}});
    Forest ca = cluster_simple(qa);
    REQUIRE(ca.size() == 1);
    CHECK(ca.node(0).region == iv(rat(1, 4), rat(3, 4)));

    // two separated trees cluster independently
    auto q1 = SimpleMeasure::validate(rel, {{iv(rat(0), rat(1, 3)), rat(1)}, {iv(rat(1, 12), rat(1, 6)), rat(1)}});
    auto q2 = SimpleMeasure::validate(rel, {{iv(rat(2, 3), rat(1)), rat(1)}});
    std::vector<std::pair<Region, Rat>> sum;
    for (auto& t : q1.terms()) sum.push_back(t);
    for (auto& t : q2.terms()) sum.push_back(t);
    Forest joint = cluster_simple(SimpleMeasure::validate(rel, sum));
    Forest c1 = cluster_simple(q1);
    Forest c2 = cluster_simple(q2);
    CHECK(joint.size() == c1.size() + c2.size());
    for (int i = 0; i < c1.size(); ++i) CHECK(has_node(joint, c1.node(i).region));
    for (int i = 0; i < c2.size(); ++i) CHECK(has_node(joint, c2.node(i).region));

    // pouring a base over Q prepends the support and restructures
    auto inner = SimpleMeasure::validate(rel, {{iv(rat(1, 4), rat(1, 2)), rat(1)}});
    std::vector<std::pair<Region, Rat>> poured = inner.terms();
    poured.emplace_back(iv(rat(0), rat(1)), rat(1));
    Forest cpoured = cluster_simple(SimpleMeasure::validate(rel, poured));
    REQUIRE(cpoured.size() == 1);  // chain collapses to the new root
    CHECK(cpoured.node(0).region == iv(rat(0), rat(1)));
}

TEST_CASE("twin peaks: exact level-set clusterings") {
    Density1D f = builtin_density1d("twinpeaks");

    SUBCASE("disjointness") {
        Forest c = cluster_density_1d(f, SeparationRelation::disjoint());
        REQUIRE(c.size() == 3);
        CHECK(has_node(c, iv(rat(0), rat(1), false, false)));
        CHECK(has_node(c, iv(rat(1, 6), rat(1, 2), false, false)));
        CHECK(has_node(c, iv(rat(1, 2), rat(5, 6), false, false)));
        auto res = level_forest_1d(f, SeparationRelation::disjoint());
        REQUIRE(res.split_levels.size() == 1);
        CHECK(res.split_levels[0] == rat(1, 6));
    }
    SUBCASE("tau = 1/6") {
        Forest c = cluster_density_1d(f, SeparationRelation::tau_separation(rat(1, 6)));
        REQUIRE(c.size() == 3);
        CHECK(has_node(c, iv(rat(0), rat(1), false, false)));
        CHECK(has_node(c, iv(rat(1, 4), rat(5, 12), false, false)));
        CHECK(has_node(c, iv(rat(7, 12), rat(3, 4), false, false)));
    }
    SUBCASE("tau = 1/2 merges everything") {
        Forest c = cluster_density_1d(f, SeparationRelation::tau_separation(rat(1, 2)));
        REQUIRE(c.size() == 1);
        CHECK(has_node(c, iv(rat(0), rat(1), false, false)));
    }
}

TEST_CASE("factory keeps its half-open chain limit") {
    Forest c = cluster_density_1d(builtin_density1d("factory"), SeparationRelation::disjoint());
    REQUIRE(c.size() == 3);
    CHECK(has_node(c, iv(rat(0), rat(1))));
    CHECK(has_node(c, iv(rat(0), rat(1, 2), true, false)));
    CHECK(has_node(c, iv(rat(1, 2), rat(1))));
}

TEST_CASE("table densities: merlon, camel, m") {
    auto disjoint = SeparationRelation::disjoint();
    auto tau_small = SeparationRelation::tau_separation(rat(1, 12));
    auto tau_large = SeparationRelation::tau_separation(rat(1));

    Forest merlon = cluster_density_1d(builtin_density1d("merlon"), disjoint);
    REQUIRE(merlon.size() == 3);
    CHECK(has_node(merlon, iv(rat(0), rat(1))));
    CHECK(has_node(merlon, iv(rat(0), rat(1, 3))));
    CHECK(has_node(merlon, iv(rat(2, 3), rat(1))));

    CHECK(cluster_density_1d(builtin_density1d("camel"), disjoint).size() == 3);
    CHECK(cluster_density_1d(builtin_density1d("m"), disjoint).size() == 3);

    CHECK(cluster_density_1d(builtin_density1d("merlon"), tau_small).size() == 3);
    for (const char* name : {"merlon", "camel", "m", "factory", "twinpeaks"})
        CHECK(cluster_density_1d(builtin_density1d(name), tau_large).size() == 1);
}

TEST_CASE("leaves biject with strict local maxima") {
    for (const char* name : {"twinpeaks", "camel", "m", "uniform"}) {
        Density1D f = builtin_density1d(name);
        Forest c = cluster_density_1d(f, SeparationRelation::disjoint());
        CHECK((int)c.leaves().size() == f.strict_local_maxima());
    }
}

TEST_CASE("scale invariance of clusterings") {
    std::mt19937 rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        Rat alpha = rat(1 + rng() % 20, 1 + rng() % 7);
        Density1D f = builtin_density1d("twinpeaks");
        CHECK(cluster_density_1d(f, SeparationRelation::disjoint()) ==
              cluster_density_1d(f.scaled(alpha), SeparationRelation::disjoint()));
        GridDensity g = builtin_indicator("squares_separated", 4);
        CHECK(cluster_density_grid(g, SeparationRelation::disjoint()) ==
              cluster_density_grid(g.scaled(alpha), SeparationRelation::disjoint()));
    }
}

TEST_CASE("grid engine: indicators") {
    auto rel = SeparationRelation::disjoint();
    // a connected uniform indicator clusters trivially
    GridDensity one = GridDensity::from_values(box2(), 1, {rat(1), rat(1), rat(0), rat(1)});
    Forest c = cluster_density_grid(one, rel);
    REQUIRE(c.size() == 1);
    CHECK(c.node(0).region == one.support_region());

    // two closed squares touching at one corner form a single root
    Forest corner = cluster_density_grid(builtin_indicator("squares_corner", 5), rel);
    CHECK(corner.size() == 1);
    CHECK(corner.roots().size() == 1);

    Forest apart = cluster_density_grid(builtin_indicator("squares_separated", 5), rel);
    CHECK(apart.roots().size() == 2);
    CHECK(apart.size() == 2);

    Forest discs = cluster_density_grid(builtin_indicator("discs_overlap", 5), rel);
    CHECK(discs.roots().size() == 1);

    Forest tangent = cluster_density_grid(builtin_indicator("discs_tangent", 5), rel);
    CHECK(tangent.roots().size() == 1);

    Forest bowtie = cluster_density_grid(builtin_indicator("diamonds_bowtie", 5), rel);
    CHECK(bowtie.roots().size() == 2);
}

TEST_CASE("grid engine: saddle at depth 6") {
    auto rel = SeparationRelation::disjoint();
    GridDensity g = GridDensity::sample(box2(), 6, builtin_expr("saddle").eval);
    Forest c = cluster_density_grid(g, rel);
    REQUIRE(c.roots().size() == 1);
    REQUIRE(c.size() == 3);
    int root = c.roots()[0];
    auto kids = c.children(root);
    REQUIRE(kids.size() == 2);
    // split level 1 + h^2/4 with h = 2^-5
    Rat expected_split = rat(1) + rat(1, 4096);
    for (int k : kids) {
        REQUIRE(c.node(k).merge_level.has_value());
        CHECK(*c.node(k).merge_level == expected_split);
        // children sit in opposite quadrants
        const auto& cells = c.node(k).region.cells().cells;
        bool neg = cells.front()[0] < 32;
        for (const auto& cell : cells) {
            CHECK((cell[0] < 32) == neg);
            CHECK((cell[1] < 32) == neg);
        }
    }
}

TEST_CASE("grid density equals its canonical simple measure") {
    auto rel = SeparationRelation::disjoint();
    std::mt19937 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Rat> values(16);
        for (auto& v : values) v = rat(rng() % 4, 1 + rng() % 3);
        bool positive = false;
        for (auto& v : values) positive |= v > 0;
        if (!positive) values[5] = rat(1);
        GridDensity g = GridDensity::from_values(box2(), 2, values);
        SimpleMeasure q = grid_canonical_simple(g, rel);
        // masses agree everywhere
        CHECK(q.total() == g.total());
        CHECK(cluster_simple(q) == cluster_density_grid(g, rel));
        // representation survives permutation
        auto terms = q.terms();
        std::shuffle(terms.begin(), terms.end(), rng);
        SimpleMeasure q2 = SimpleMeasure::validate(rel, terms);
        CHECK(q2.forest() == q.forest());
        CHECK(q2.weights() == q.weights());
    }
}

TEST_CASE("twin peaks grids at depths 6 and 7 relate by containment") {
    auto rel = SeparationRelation::disjoint();
    Density1D f = builtin_density1d("twinpeaks");
    auto sampler = [&](const Point& p) { return f.value(p[0]); };
    Forest c6 = cluster_density_grid(GridDensity::sample(box01(), 6, sampler), rel).structure();
    Forest c7 = cluster_density_grid(GridDensity::sample(box01(), 7, sampler), rel).structure();
    REQUIRE(c6.size() == 3);
    REQUIRE(c7.size() == 3);
    auto zeta = frm(c6, c7);
    for (int i = 0; i < c6.size(); ++i) {
        CHECK(contains(c7.node(zeta.map[i]).region, c6.node(i).region));
        // exhaustive cell-level verification
        const auto& coarse = c6.node(i).region;
        const auto& fine = c7.node(zeta.map[i]).region;
        for (const auto& cell : coarse.cells().cells)
            CHECK(contains(fine, make_cells(coarse.box, coarse.cells().depth, {cell})));
    }
}

TEST_CASE("kinship") {
    auto rel = SeparationRelation::disjoint();
    // two bumps joined by a positive bridge
    Density1D bridge = Density1D::from_points(
        box01(), {{rat(0), rat(0)}, {rat(1, 4), rat(1)}, {rat(1, 2), rat(1, 4)}, {rat(3, 4), rat(1)}, {rat(1), rat(0)}});
    DensityModel pb(bridge);
    auto cert = kinship(pb, rel, iv(rat(1, 5), rat(3, 10)), iv(rat(7, 10), rat(4, 5)));
    REQUIRE(cert.has_value());
    CHECK(cert->height == rat(1, 4));  // valley height supports both

    // a zero-density gap breaks kinship
    Density1D gap = Density1D::from_pieces(box01(), {{rat(0), rat(2, 5), rat(1), rat(1)},
                                                     {rat(2, 5), rat(3, 5), rat(0), rat(0)},
                                                     {rat(3, 5), rat(1), rat(1), rat(1)}});
    CHECK_FALSE(kinship(DensityModel(gap), rel, iv(rat(1, 10), rat(1, 5)), iv(rat(7, 10), rat(4, 5))).has_value());

    // equal probes inside one positive cell: height is the cell value
    GridDensity g = GridDensity::from_values(box2(), 1, {rat(3), rat(0), rat(0), rat(0)});
    Region probe = make_cells(box2(), 1, {{0, 0}});
    auto gc = kinship(DensityModel(g), rel, probe, probe);
    REQUIRE(gc.has_value());
    CHECK(gc->height == rat(3));
}

TEST_CASE("adaptedness: restriction sequences") {
    auto rel = SeparationRelation::disjoint();
    DensityModel p(builtin_density1d("uniform"));

    // interior restrictions are adapted at every term
    for (long n : {3L, 4L, 8L, 16L}) {
        auto q = SimpleMeasure::validate(rel, {{iv(rat(1, n), rat(n - 1, n)), rat(n - 2, n)}});
        auto rep = is_adapted(q, p);
        CHECK(rep.adapted());
    }

    // the two-cluster approximations of the same uniform measure are not grounded
    for (long n : {3L, 4L, 8L, 16L}) {
        auto q = SimpleMeasure::validate(rel, {{iv(rat(0), rat(1, 2) - rat(1, n)), rat(1, 2) - rat(1, n)},
                                               {iv(rat(1, 2), rat(1)), rat(1, 2)}});
        auto rep = is_adapted(q, p);
        CHECK_FALSE(rep.adapted());
        CHECK(rep.first_violation() == "not grounded");
    }

    // a measure that is not below P is rejected
    auto tall = SimpleMeasure::validate(rel, {{iv(rat(0), rat(1, 2)), rat(1)}});
    CHECK_THROWS_WITH_AS(is_adapted(tall, p), doctest::Contains("q-not-below-p"), Error);
}

TEST_CASE("self adaptedness of simple measures") {
    auto rel = SeparationRelation::disjoint();
    auto q = SimpleMeasure::validate(rel, {{iv(rat(0), rat(1)), rat(1)},
                                           {iv(rat(1, 8), rat(3, 8)), rat(1, 2)},
                                           {iv(rat(5, 8), rat(7, 8)), rat(1, 4)},
                                           {iv(rat(3, 16), rat(5, 16)), rat(1, 8)}});
    auto rep = is_adapted(q, q.to_density_model());
    CHECK(rep.adapted());
}

TEST_CASE("refinement sequences") {
    auto rel = SeparationRelation::disjoint();

    SUBCASE("constant density stays a single root at every depth") {
        auto one = [](const Point&) { return Rat(1); };
        auto rep = refine_and_cluster(one, box01(), {2, 4, 6}, rel);
        CHECK(rep.isomonotone);
        CHECK(rep.adapted);
        for (const auto& step : rep.steps) {
            CHECK(step.clustering.size() == 1);
            CHECK(step.residual == rat(0));
        }
    }

    SUBCASE("twin peaks stabilizes to the exact structure") {
        Density1D f = builtin_density1d("twinpeaks");
        auto sampler = [&](const Point& p) { return f.value(p[0]); };
        auto rep = refine_and_cluster(sampler, box01(), {4, 6, 8}, rel);
        CHECK(rep.isomonotone);
        CHECK(rep.adapted);
        REQUIRE(rep.stabilized.size() == 3);
        // matches the exact engine up to null sets at the finest scale
        Forest exact = cluster_density_1d(f, rel);
        DensityModel p(f);
        DensityOracle oracle(p);
        Rat tol = rat(4, 256) * f.sup();
        CHECK(equal_mod_p(rep.stabilized, exact, oracle, tol).equal);
        // residuals shrink along the sequence
        CHECK(rep.steps.front().residual >= rep.steps.back().residual);
    }

    SUBCASE("saddle: two offsets agree mod null sets") {
        auto saddle = builtin_expr("saddle").eval;
        auto rep1 = refine_and_cluster(saddle, box2(), {3, 4, 5}, rel);
        auto rep2 = refine_and_cluster(saddle, box2(), {4, 5}, rel,
                                       std::vector<Rat>{rat(1, 4), rat(1, 4)});
        CHECK(rep1.isomonotone);
        CHECK(rep2.isomonotone);
        GridDensity finest = GridDensity::sample(box2(), 5, saddle);
        DensityModel p(finest);
        DensityOracle oracle(p);
        Rat tol = rat(4, 16) * finest.sup();  // 4h at depth 5 on [-1,1]
        CHECK(equal_mod_p(rep1.stabilized, rep2.stabilized, oracle, tol).equal);
    }
}

TEST_CASE("sub-forest below the factory root") {
    Forest c = cluster_density_1d(builtin_density1d("factory"), SeparationRelation::disjoint());
    Forest below = c.sub_forest(iv(rat(0), rat(1)), Forest::SubMode::StrictDescendants);
    REQUIRE(below.size() == 2);
    CHECK(below.find_node(iv(rat(0), rat(1, 2), true, false)) >= 0);
    CHECK(below.find_node(iv(rat(1, 2), rat(1))) >= 0);
}
