#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mcl/clustering.hpp"
#include "mcl/mixture.hpp"
#include "mcl/report.hpp"
#include "mcl/runspec.hpp"

using namespace mcl;
namespace fs = std::filesystem;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("MCL_OUT_DIR");
    return env ? env : ".";
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "io-error", "cannot write '" + path + "'");
    out << content;
}

struct ClusterOutcome {
    ForestReport report;
};

ClusterOutcome run_cluster(const RunSpec& spec) {
    switch (spec.kind) {
        case RunSpec::Kind::Simple: {
            SimpleMeasure q = SimpleMeasure::validate(spec.rel, spec.simple_terms);
            std::optional<DensityModel> model;
            try {
                model = q.to_density_model();
            } catch (const Error&) {
            }
            return {make_report("simple", cluster_simple(q), std::nullopt, spec.source_text, model)};
        }
        case RunSpec::Kind::Density1D: {
            Forest c = cluster_density_1d(*spec.density1d, spec.rel);
            return {make_report("density1d", std::move(c), std::nullopt, spec.source_text,
                                DensityModel(*spec.density1d))};
        }
        case RunSpec::Kind::Grid: {
            Forest c = cluster_density_grid(*spec.grid, spec.rel);
            return {make_report("grid", std::move(c), spec.grid_depth, spec.source_text, DensityModel(*spec.grid))};
        }
        case RunSpec::Kind::Mixture: {
            Forest c = cluster_mixture(*spec.mixture, spec.rel);
            return {make_report("mixture", std::move(c), std::nullopt, spec.source_text, DensityModel(*spec.mixture))};
        }
    }
    fail("internal-error", "unhandled spec kind");
}

RunSpec load_spec(const std::string& path, const std::string& separation_flag, int depth_flag) {
    RunSpec spec = RunSpec::parse_file(path);
    if (!separation_flag.empty()) spec.rel = parse_separation(separation_flag);
    if (depth_flag > 0) {
        require(spec.kind == RunSpec::Kind::Grid, "bad-input", "--depth applies to grid specs");
        require(spec.grid_analytic.has_value(), "bad-input", "--depth needs an expression-based grid");
        spec.grid_depth = depth_flag;
        spec.grid = GridDensity::sample(spec.grid->box, depth_flag, spec.grid_analytic->eval);
    }
    return spec;
}

std::vector<int> parse_depths(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    require(!out.empty(), "bad-input", "empty depth list");
    return out;
}

std::optional<std::vector<Rat>> parse_offset(const std::string& text, int dim) {
    if (text.empty()) return std::nullopt;
    std::vector<Rat> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto q = parse_rat(tok);
        require(q.has_value() && *q >= 0 && *q < 1, "bad-input", "offsets are rationals in [0,1)");
        out.push_back(*q);
    }
    if (static_cast<int>(out.size()) == 1 && dim > 1) out.assign(dim, out[0]);
    require(static_cast<int>(out.size()) == dim, "bad-input", "one offset per axis");
    return out;
}

// --- reproduce-tables ---------------------------------------------------------

std::string density_table() {
    std::ostringstream os;
    os << "# densities x separation relations: cluster count and nodes\n";
    for (const char* name : {"merlon", "camel", "m", "factory", "twinpeaks"}) {
        Density1D f = builtin_density1d(name);
        for (const char* relname : {"disjoint", "tau:1/12", "tau:1/1"}) {
            Forest c = cluster_density_1d(f, parse_separation(relname));
            os << name << " | " << relname << " | " << c.size() << " |";
            for (int i = 0; i < c.size(); ++i) os << " " << c.node(i).region.describe();
            os << "\n";
        }
    }
    return os.str();
}

std::string indicator_table() {
    std::ostringstream os;
    os << "# indicator shapes (depth 5, disjointness): structure counts\n";
    for (const char* name :
         {"squares_corner", "squares_separated", "discs_overlap", "discs_tangent", "diamonds_bowtie"}) {
        Forest c = cluster_density_grid(builtin_indicator(name, 5), SeparationRelation::disjoint());
        os << name << " | roots " << c.roots().size() << " | nodes " << c.size() << "\n";
    }
    return os.str();
}

int diff_against_golden(const std::string& generated, const std::string& golden_path, const std::string& label) {
    std::ifstream in(golden_path);
    if (!in.good()) {
        std::cerr << "golden file missing: " << golden_path << "\n";
        return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    if (ss.str() == generated) return 0;
    std::cerr << label << ": mismatch against " << golden_path << "\n";
    std::istringstream a(generated), b(ss.str());
    std::string la, lb;
    int lineno = 0;
    while (true) {
        bool ga = static_cast<bool>(std::getline(a, la));
        bool gb = static_cast<bool>(std::getline(b, lb));
        ++lineno;
        if (!ga && !gb) break;
        if (la != lb)
            std::cerr << "  line " << lineno << ": generated '" << (ga ? la : "<eof>") << "' vs golden '"
                      << (gb ? lb : "<eof>") << "'\n";
        if (!ga || !gb) break;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical clustering of finite measures: level-set forests, adaptedness checks, refinements"};
    app.require_subcommand(1);

    std::string spec_path, separation_flag, out_json, out_dot;
    int depth_flag = 0;

    auto* cluster = app.add_subcommand("cluster", "cluster a measure or density spec into a forest");
    cluster->add_option("spec", spec_path, "run spec file")->required()->check(CLI::ExistingFile);
    cluster->add_option("--separation", separation_flag, "disjoint or tau:<p/q> (overrides the spec)");
    cluster->add_option("--depth", depth_flag, "resample expression grids at this depth");
    cluster->add_option("--out-json", out_json, "forest report JSON path");
    cluster->add_option("--out-dot", out_dot, "Graphviz DOT path");

    std::string q_path, p_path;
    auto* check = app.add_subcommand("check-adapted", "verify a simple measure is adapted to a density");
    check->add_option("--q", q_path, "simple measure spec")->required()->check(CLI::ExistingFile);
    check->add_option("--p", p_path, "density spec")->required()->check(CLI::ExistingFile);

    std::string depths_text, alt_depths_text, offset_text, alt_offset_text;
    auto* approx = app.add_subcommand("approx", "refinement sequence report for a sampled density");
    approx->add_option("spec", spec_path, "density spec with an expression or named density")
        ->required()
        ->check(CLI::ExistingFile);
    approx->add_option("--depths", depths_text, "comma-separated grid depths")->required();
    approx->add_option("--offset", offset_text, "in-cell sample offset(s) in [0,1)");
    approx->add_option("--alt-depths", alt_depths_text, "second schedule for the uniqueness cross-check");
    approx->add_option("--alt-offset", alt_offset_text, "sample offset(s) of the second schedule");
    approx->add_option("--separation", separation_flag, "disjoint or tau:<p/q>");
    approx->add_option("--out-json", out_json, "stabilized forest JSON path");

    std::string out_dir = default_out_dir(), golden_dir;
    auto* tables = app.add_subcommand("reproduce-tables", "regenerate the example tables and diff against goldens");
    tables->add_option("--out-dir", out_dir, "output directory (default $MCL_OUT_DIR or .)");
    tables->add_option("--golden-dir", golden_dir, "directory with table1.txt and indicators.txt to diff against");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cluster->parsed()) {
            RunSpec spec = load_spec(spec_path, separation_flag, depth_flag);
            ClusterOutcome outcome = run_cluster(spec);
            std::cout << "engine " << outcome.report.engine << ", separation "
                      << outcome.report.forest.relation().describe() << ", " << outcome.report.forest.size()
                      << " cluster(s), " << outcome.report.forest.roots().size() << " root(s)\n";
            for (int i = 0; i < outcome.report.forest.size(); ++i) {
                const auto& n = outcome.report.forest.node(i);
                std::cout << "  [" << i << "] " << n.region.describe();
                if (n.parent >= 0) std::cout << " < [" << n.parent << "]";
                if (n.merge_level) std::cout << "  split " << rat_str(*n.merge_level);
                std::cout << "\n";
            }
            if (!out_json.empty()) write_file(out_json, outcome.report.to_json());
            if (!out_dot.empty()) write_file(out_dot, outcome.report.to_dot());
            return 0;
        }

        if (check->parsed()) {
            RunSpec qspec = RunSpec::parse_file(q_path);
            require(qspec.kind == RunSpec::Kind::Simple, "bad-input", "--q expects a simple stanza");
            RunSpec pspec = RunSpec::parse_file(p_path);
            std::optional<DensityModel> p;
            if (pspec.kind == RunSpec::Kind::Density1D)
                p = DensityModel(*pspec.density1d);
            else if (pspec.kind == RunSpec::Kind::Grid)
                p = DensityModel(*pspec.grid);
            else if (pspec.kind == RunSpec::Kind::Mixture)
                p = DensityModel(*pspec.mixture);
            require(p.has_value(), "bad-input", "--p expects a density spec");
            SimpleMeasure q = SimpleMeasure::validate(qspec.rel, qspec.simple_terms);
            AdaptednessReport rep = is_adapted(q, *p);
            for (const auto& pr : rep.pairs) {
                std::cout << "pair " << pr.a1.describe() << " / " << pr.a2.describe() << ": "
                          << (pr.grounded ? "grounded" : "NOT grounded") << ", " << (pr.fine ? "fine" : "NOT fine")
                          << ", " << (pr.motivated ? "motivated" : "NOT motivated");
                if (pr.alpha_margin) std::cout << ", margin " << rat_str(*pr.alpha_margin);
                std::cout << "\n";
            }
            if (!rep.adapted()) {
                std::cerr << "not adapted: " << rep.first_violation() << "\n";
                return 2;
            }
            std::cout << "adapted\n";
            return 0;
        }

        if (approx->parsed()) {
            RunSpec spec = RunSpec::parse_file(spec_path);
            if (!separation_flag.empty()) spec.rel = parse_separation(separation_flag);
            auto sampler = spec.sampler();
            require(sampler.has_value(), "bad-input", "approx needs an expression or named density spec");
            Box box = spec.kind == RunSpec::Kind::Grid ? spec.grid->box : spec.density1d->box;
            auto depths = parse_depths(depths_text);
            auto offset = parse_offset(offset_text, box.dim());
            RefineReport rep = refine_and_cluster(*sampler, box, depths, spec.rel, offset);
            for (const auto& step : rep.steps)
                std::cout << "depth " << step.depth << ": " << step.clustering.size() << " cluster(s), residual "
                          << rat_str(step.residual) << (step.adapted ? ", adapted" : ", NOT adapted") << "\n";
            std::cout << "isomonotone: yes; stabilized structure: " << rep.stabilized.size() << " node(s)\n";
            if (!alt_depths_text.empty()) {
                auto alt_depths = parse_depths(alt_depths_text);
                auto alt_offset = parse_offset(alt_offset_text, box.dim());
                RefineReport alt = refine_and_cluster(*sampler, box, alt_depths, spec.rel, alt_offset);
                int fine_depth = std::max(depths.back(), alt_depths.back());
                GridDensity finest = GridDensity::sample(box, fine_depth, *sampler);
                DensityModel p(finest);
                DensityOracle oracle(p);
                int coarse_final = std::min(depths.back(), alt_depths.back());
                Rat h = box.cell_side(0, coarse_final);
                Rat tol = rat(4) * h * finest.sup();
                auto eq = equal_mod_p(rep.stabilized, alt.stabilized, oracle, tol);
                std::cout << "cross-schedule agreement (tolerance " << rat_str(tol) << "): "
                          << (eq.equal ? "equal" : "DIFFERENT") << "\n";
                require(eq.equal, "uniqueness-violation", "refinement schedules disagree beyond tolerance");
            }
            if (!out_json.empty())
                write_file(out_json,
                           make_report("approx", rep.stabilized, depths.back(), spec.source_text, std::nullopt)
                               .to_json());
            return 0;
        }

        if (tables->parsed()) {
            std::string t1 = density_table();
            std::string t2 = indicator_table();
            write_file((fs::path(out_dir) / "table1.txt").string(), t1);
            write_file((fs::path(out_dir) / "indicators.txt").string(), t2);
            std::cout << "wrote " << (fs::path(out_dir) / "table1.txt").string() << " and "
                      << (fs::path(out_dir) / "indicators.txt").string() << "\n";
            if (!golden_dir.empty()) {
                int bad = diff_against_golden(t1, (fs::path(golden_dir) / "table1.txt").string(), "table1");
                bad += diff_against_golden(t2, (fs::path(golden_dir) / "indicators.txt").string(), "indicators");
                if (bad > 0) return 2;
                std::cout << "tables match the golden files\n";
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
