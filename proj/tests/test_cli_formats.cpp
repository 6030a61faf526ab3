#include <doctest.h>

#include <thread>

#include "mcl/clustering.hpp"
#include "mcl/mixture.hpp"
#include "mcl/report.hpp"
#include "mcl/runspec.hpp"

using namespace mcl;

TEST_CASE("runspec parsing") {
    RunSpec spec = RunSpec::parse(
        "# comment\n"
        "box = [0, 1]\n"
        "separation = tau:1/6\n"
        "density1d {\n"
        "  name = twinpeaks\n"
        "}\n");
    CHECK(spec.kind == RunSpec::Kind::Density1D);
    CHECK(spec.rel.is_tau());
    CHECK(spec.rel.tau == rat(1, 6));

    RunSpec simple = RunSpec::parse(
        "box = [0, 4]\n"
        "simple {\n"
        "  term = interval [0, 4] weight 1\n"
        "  term = interval [1, 2] weight 1/2\n"
        "  term = atom (3) weight 2\n"
        "}\n");
    CHECK(simple.simple_terms.size() == 3);
    SimpleMeasure q = SimpleMeasure::validate(simple.rel, simple.simple_terms);
    CHECK(q.total() == rat(7, 2));

    RunSpec grid = RunSpec::parse(
        "box = [-1, 1] x [-1, 1]\n"
        "grid {\n"
        "  depth = 2\n"
        "  values = 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2\n"
        "}\n");
    CHECK(grid.grid->depth == 2);
    CHECK(grid.grid->total() == rat(3, 4));

    RunSpec mix = RunSpec::parse(
        "box = [0, 3]\n"
        "mixture {\n"
        "  component atoms {\n"
        "    atom = (0) weight 1\n"
        "    atom = (2) weight 1\n"
        "  }\n"
        "  component line {\n"
        "    points = 0:0, 1/2:1, 1:0, 3:0\n"
        "  }\n"
        "}\n");
    CHECK(mix.mixture->components.size() == 2);

    CHECK_THROWS_WITH_AS(RunSpec::parse("box = [0, 1/0]\n"), doctest::Contains("malformed rational"), Error);
    CHECK_THROWS_WITH_AS(RunSpec::parse("box = [0, 1]\n"), doctest::Contains("parse-error"), Error);
}

TEST_CASE("report json round trip is byte identical") {
    RunSpec spec = RunSpec::parse("box = [0, 1]\ndensity1d {\n  name = factory\n}\n");
    Forest c = cluster_density_1d(*spec.density1d, spec.rel);
    ForestReport rep = make_report("density1d", c, std::nullopt, spec.source_text, DensityModel(*spec.density1d));
    std::string j1 = rep.to_json();
    ForestReport back = ForestReport::from_json(j1);
    CHECK(back.to_json() == j1);
    CHECK(back.forest == rep.forest);

    // identical specs give identical bytes
    Forest c2 = cluster_density_1d(*spec.density1d, spec.rel);
    ForestReport rep2 = make_report("density1d", c2, std::nullopt, spec.source_text, DensityModel(*spec.density1d));
    CHECK(rep2.to_json() == j1);
    CHECK(rep2.to_dot() == rep.to_dot());
}

TEST_CASE("dot and json describe the same node set") {
    RunSpec spec = RunSpec::parse("box = [-1, 1] x [-1, 1]\ngrid {\n  depth = 4\n  expr = saddle\n}\n");
    Forest c = cluster_density_grid(*spec.grid, spec.rel);
    ForestReport rep = make_report("grid", c, 4, spec.source_text, std::nullopt);
    std::string dot = rep.to_dot();
    for (int i = 0; i < c.size(); ++i) {
        CHECK(dot.find("n" + std::to_string(i) + " [label=") != std::string::npos);
    }
    // one edge per non-root
    int edges = 0;
    for (size_t pos = 0; (pos = dot.find("->", pos)) != std::string::npos; ++pos) ++edges;
    CHECK(edges == c.size() - static_cast<int>(c.roots().size()));
}

TEST_CASE("engines are callable concurrently on distinct densities") {
    std::vector<Forest> results(4);
    std::vector<std::thread> workers;
    const char* names[4] = {"twinpeaks", "factory", "camel", "m"};
    for (int t = 0; t < 4; ++t)
        workers.emplace_back([t, &results, &names] {
            results[t] = cluster_density_1d(builtin_density1d(names[t]), SeparationRelation::disjoint());
        });
    for (auto& w : workers) w.join();
    for (int t = 0; t < 4; ++t)
        CHECK(results[t] == cluster_density_1d(builtin_density1d(names[t]), SeparationRelation::disjoint()));

    std::vector<Forest> grids(3);
    std::vector<std::thread> gw;
    for (int t = 0; t < 3; ++t)
        gw.emplace_back([t, &grids] {
            GridDensity g = GridDensity::sample(Box({rat(-1), rat(-1)}, {rat(1), rat(1)}), 4 + t,
                                                builtin_expr("saddle").eval);
            grids[t] = cluster_density_grid(g, SeparationRelation::disjoint());
        });
    for (auto& w : gw) w.join();
    for (int t = 0; t < 3; ++t) CHECK(grids[t].size() == 3);
}
