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

}  // namespace

TEST_CASE("twin peaks under every small tau: closed-form clusters") {
    Density1D f = builtin_density1d("twinpeaks");
    std::mt19937 rng(83);
    for (int rep = 0; rep < 40; ++rep) {
        // random rational tau in (0, 1/3)
        Rat tau = rat(1 + rng() % 320, 961 + rng() % 40);
        if (tau >= rat(1, 3)) continue;
        Forest c = cluster_density_1d(f, SeparationRelation::tau_separation(tau));
        REQUIRE(c.size() == 3);
        CHECK(c.find_node(iv(rat(0), rat(1), false, false)) >= 0);
        CHECK(c.find_node(iv(rat(1, 6) + tau / 2, rat(1, 2) - tau / 2, false, false)) >= 0);
        CHECK(c.find_node(iv(rat(1, 2) + tau / 2, rat(5, 6) - tau / 2, false, false)) >= 0);
        // split level where the inter-peak gap reaches tau
        for (int i = 0; i < c.size(); ++i)
            if (c.node(i).merge_level) CHECK(*c.node(i).merge_level == rat(1, 6) + tau / 2);
    }
    // at and above 1/3 the peaks never separate
    for (const Rat& tau : {rat(1, 3), rat(2, 5)})
        CHECK(cluster_density_1d(f, SeparationRelation::tau_separation(tau)).size() == 1);
}

TEST_CASE("adaptedness: a pair whose support cannot be extended over a third sibling") {
    auto rel = SeparationRelation::disjoint();
    // podium over the first two bumps only; the third connects at ground level
    Density1D p = Density1D::from_pieces(
        box01(), {{rat(0), rat(1, 50), rat(1, 10), rat(1, 10)},
                  {rat(1, 50), rat(1, 20), rat(4, 5), rat(4, 5)},
                  {rat(1, 20), rat(3, 20), rat(3), rat(3)},        // bump A1
                  {rat(3, 20), rat(1, 4), rat(4, 5), rat(4, 5)},
                  {rat(1, 4), rat(7, 20), rat(11, 5), rat(11, 5)},  // bump A2
                  {rat(7, 20), rat(2, 5), rat(4, 5), rat(4, 5)},
                  {rat(2, 5), rat(11, 20), rat(1, 10), rat(1, 10)},
                  {rat(11, 20), rat(13, 20), rat(7, 5), rat(7, 5)},  // bump A3
                  {rat(13, 20), rat(7, 10), rat(1, 10), rat(1, 10)},
                  {rat(7, 10), rat(1), rat(0), rat(0)}});
    Region root = iv(rat(0), rat(7, 10));
    Region a1 = iv(rat(1, 20), rat(3, 20));
    Region a2 = iv(rat(1, 4), rat(7, 20));
    Region a3 = iv(rat(11, 20), rat(13, 20));
    auto q = SimpleMeasure::validate(
        rel, {{root, rat(7, 100)},                      // height 1/10
              {a1, rat(29, 100)},                       // level 3
              {a2, rat(21, 100)},                       // level 22/10
              {a3, rat(13, 100)}});                     // level 14/10
    REQUIRE(majorizes(q, DensityModel(p)));
    auto rep = is_adapted(q, DensityModel(p));
    CHECK_FALSE(rep.adapted());
    CHECK(rep.first_violation() == "not fine");
    bool saw_pair = false;
    for (const auto& pr : rep.pairs) {
        if (pr.a1 == a1 && pr.a2 == a2) {
            saw_pair = true;
            CHECK(pr.grounded);
            CHECK_FALSE(pr.fine);
            CHECK(pr.motivated);
            REQUIRE(pr.support_height.has_value());
            CHECK(*pr.support_height == rat(4, 5));
            CHECK(pr.counterexample.has_value());
        }
    }
    CHECK(saw_pair);
}

TEST_CASE("adaptedness: siblings drowned below the target are not motivated") {
    auto rel = SeparationRelation::disjoint();
    DensityModel p(builtin_density1d("uniform"));
    // two shallow siblings under a thin root; uniform mass one supports both
    // at height 1, which exceeds their levels
    auto q = SimpleMeasure::validate(rel, {{iv(rat(0), rat(1)), rat(1, 10)},
                                           {iv(rat(1, 8), rat(3, 8)), rat(1, 20)},    // level 1/10 + 1/5
                                           {iv(rat(5, 8), rat(7, 8)), rat(1, 20)}});
    REQUIRE(majorizes(q, p));
    auto rep = is_adapted(q, p);
    CHECK_FALSE(rep.adapted());
    CHECK(rep.first_violation() == "not motivated");
    for (const auto& pr : rep.pairs) {
        CHECK(pr.grounded);
        CHECK(pr.fine);
        CHECK_FALSE(pr.motivated);
        CHECK(*pr.support_height == rat(1));
    }
}

TEST_CASE("saddle under tau separation: children pull away from the axes") {
    Rat tau = rat(1, 2);
    auto rel = SeparationRelation::tau_separation(tau);
    GridDensity g = GridDensity::sample(box2(), 5, builtin_expr("saddle").eval);
    Forest c = cluster_density_grid(g, rel);
    REQUIRE(c.size() == 3);
    auto kids = c.children(c.roots()[0]);
    REQUIRE(kids.size() == 2);
    // the merge happens strictly above the disjointness split level
    Rat h = rat(1, 16);
    Rat disjoint_split = rat(1) + h * h / 4;
    for (int k : kids) CHECK(*c.node(k).merge_level > disjoint_split);
    // realized children keep a gap of at least tau
    CHECK(distance_squared(c.node(kids[0]).region, c.node(kids[1]).region) >= tau * tau);
    // the union-find agrees with the generic decomposition: still two groups at
    // the realized level, one at the merge level
    auto live_at = [&](const Rat& level) {
        std::vector<Region> live;
        for (std::int64_t i = 0; i < g.cell_count(); ++i)
            if (g.value(i) >= level) live.push_back(make_cells(box2(), 5, {cell_from_linear_index(i, 5, 2)}));
        return live;
    };
    CHECK(decompose(rel, live_at(*c.node(kids[0]).realized_level)).size() == 2);
    CHECK(decompose(rel, live_at(*c.node(kids[0]).merge_level)).size() == 1);
}

TEST_CASE("exact segment-box distances") {
    // the box [0,1]^2 realized as one depth-2 cell
    Box grid_box({rat(0), rat(0)}, {rat(4), rat(4)});
    Region cell = make_cells(grid_box, 2, {{0, 0}});  // the box [0,1]^2
    // diagonal approach to the corner (1,1)
    Region diag = make_polyline(grid_box, {{rat(2), rat(2)}, {rat(3), rat(1)}});
    CHECK(distance_squared(cell, diag) == rat(2));
    // perpendicular interior approach
    Region vert = make_polyline(grid_box, {{rat(2), rat(0)}, {rat(2), rat(2)}});
    CHECK(distance_squared(cell, vert) == rat(1));
    // crossing
    Region through = make_polyline(grid_box, {{rat(1, 2), rat(1, 2)}, {rat(3), rat(3)}});
    CHECK(distance_squared(cell, through) == rat(0));
    // closest point in the interior of the segment, off the corner
    Region slanted = make_polyline(grid_box, {{rat(2), rat(1)}, {rat(1), rat(2)}});
    CHECK(distance_squared(cell, slanted) == rat(1, 2));
}

TEST_CASE("tau forests reject siblings closer than tau") {
    auto rel = SeparationRelation::tau_separation(rat(1, 4));
    CHECK_THROWS_WITH_AS(
        SimpleMeasure::validate(rel, {{iv(rat(0), rat(1, 4)), rat(1)}, {iv(rat(3, 8), rat(1, 2)), rat(1)}}),
        doctest::Contains("forest-violation"), Error);
    CHECK_NOTHROW(
        SimpleMeasure::validate(rel, {{iv(rat(0), rat(1, 4)), rat(1)}, {iv(rat(1, 2), rat(3, 4)), rat(1)}}));
    // nesting stays legal under tau
    CHECK_NOTHROW(SimpleMeasure::validate(rel, {{iv(rat(0), rat(1)), rat(1)}, {iv(rat(1, 4), rat(1, 2)), rat(1)}}));
}

TEST_CASE("refinement of separated supports stays grounded") {
    auto rel = SeparationRelation::disjoint();
    // indicator of two well-separated squares, as an exact sampler
    auto f = [](const Point& p) -> Rat {
        bool left = p[0] > -1 && p[0] < rat(-1, 4) && p[1] > -1 && p[1] < rat(-1, 4);
        bool right = p[0] > rat(1, 4) && p[0] < 1 && p[1] > rat(1, 4) && p[1] < 1;
        return left || right ? Rat(1) : Rat(0);
    };
    auto rep = refine_and_cluster(f, box2(), {3, 4, 5}, rel);
    CHECK(rep.isomonotone);
    CHECK(rep.adapted);
    CHECK(rep.stabilized.roots().size() == 2);
    for (const auto& step : rep.steps) CHECK(step.clustering.size() == 2);
}

TEST_CASE("region json survives randomized regions") {
    std::mt19937 rng(89);
    for (int rep = 0; rep < 200; ++rep) {
        Region r = [&]() -> Region {
            switch (rng() % 4) {
                case 0: {
                    long lo = rng() % 200, len = 1 + rng() % (256 - lo % 256);
                    if (lo + len > 256) len = 256 - lo;
                    if (len == 0) len = 1;
                    return make_interval(box01(), rat(lo, 256), rat(lo + len, 256), rng() % 2 == 0,
                                         rng() % 2 == 0);
                }
                case 1: {
                    std::vector<Cell> cells;
                    int n = 1 + static_cast<int>(rng() % 6);
                    for (int k = 0; k < n; ++k)
                        cells.push_back({static_cast<std::int64_t>(rng() % 8), static_cast<std::int64_t>(rng() % 8)});
                    return make_cells(box2(), 3, std::move(cells));
                }
                case 2: {
                    long t0 = rng() % 100, t1 = t0 + 1 + rng() % (101 - t0 - 1 + 1);
                    if (t1 > 100) t1 = 100;
                    return make_polyline_piece(
                        box2(),
                        {{rat(-1, 2), rat(-1, 2)}, {rat((long)(rng() % 3) - 1, 2), rat(1, 2)}, {rat(1), rat(1)}},
                        rat(t0, 100), rat(t1, 100), rng() % 2 == 0, rng() % 2 == 0);
                }
                default:
                    return make_atom(box2(), {rat((long)(rng() % 17) - 8, 8), rat((long)(rng() % 17) - 8, 8)});
            }
        }();
        std::string j = region_to_json(r);
        CHECK(region_from_json(j) == r);
        CHECK(region_to_json(region_from_json(j)) == j);
    }
}

TEST_CASE("curve symmetric differences are null across endpoint flags") {
    Region path = make_polyline(box2(), {{rat(0), rat(0)}, {rat(1), rat(0)}});
    MixtureDensity mix;
    mix.box = box2();
    mix.components.push_back(DimComponent{1, CurveComponent{path, builtin_density1d("uniform")}});
    DensityModel p(mix);
    Region closed = polyline_sub_curve(path, rat(0), rat(1, 2));
    Region half_open = polyline_sub_curve(path, rat(0), rat(1, 2), true, false);
    CHECK(p.mass_sym_diff(closed, half_open) == rat(0));
    Region shorter = polyline_sub_curve(path, rat(0), rat(1, 4));
    CHECK(p.mass_sym_diff(closed, shorter) == rat(1, 4));

    // a forest over the two flag variants is equal mod the curve measure
    auto rel = SeparationRelation::disjoint();
    DensityOracle oracle(p);
    Forest f1 = Forest::trusted(rel, {ForestNode{closed}});
    Forest f2 = Forest::trusted(rel, {ForestNode{half_open}});
    CHECK(equal_mod_p(f1, f2, oracle, rat(0)).equal);
}

TEST_CASE("atom inside a fatter region contributes only once to the difference") {
    MixtureDensity mix;
    mix.box = box2();
    mix.components.push_back(DimComponent{0, AtomsComponent{{{Point{rat(-1, 2), rat(-1, 2)}, rat(3)}}}});
    std::vector<Rat> values(4, rat(0));
    values[0] = rat(1);  // depth-1 cell [-1,0]^2
    mix.components.push_back(DimComponent{2, GridComponent{GridDensity::from_values(box2(), 1, values), std::nullopt}});
    DensityModel p(mix);
    Region cell = make_cells(box2(), 1, {{0, 0}});
    Region atom = make_atom(box2(), {rat(-1, 2), rat(-1, 2)});
    // cell carries lebesgue mass 1 and the atom 3; their difference is the cell alone
    CHECK(p.mass(cell) == rat(4));
    CHECK(p.mass_sym_diff(cell, atom) == rat(1));
    Region outside = make_atom(box2(), {rat(1, 2), rat(1, 2)});
    CHECK(p.mass_sym_diff(cell, outside) == rat(4));
}
