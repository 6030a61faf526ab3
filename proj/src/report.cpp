#include "mcl/report.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace mcl {

using json = nlohmann::ordered_json;

// defined in geometry.cpp
json region_to_json_obj(const Region& r);
Region region_from_json_obj(const json& j);

std::string fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

ForestReport make_report(std::string engine, Forest forest, std::optional<int> depth, const std::string& spec_text,
                         const std::optional<DensityModel>& mass_model) {
    ForestReport rep;
    rep.engine = std::move(engine);
    rep.depth = depth;
    rep.spec_hash = fnv1a_hash(spec_text);
    rep.exact_mass.assign(forest.size(), std::nullopt);
    rep.approx_mass.assign(forest.size(), std::nullopt);
    if (mass_model) {
        for (int i = 0; i < forest.size(); ++i) {
            const Region& r = forest.node(i).region;
            try {
                rep.exact_mass[i] = mass_model->mass(r);
            } catch (const Error&) {
                rep.approx_mass[i] = std::nullopt;
            }
        }
    }
    rep.forest = std::move(forest);
    return rep;
}

std::string ForestReport::to_json() const {
    json j;
    j["engine"] = engine;
    j["separation"] = forest.relation().describe();
    if (depth) j["depth"] = *depth;
    j["spec_hash"] = spec_hash;
    json nodes = json::array();
    for (int i = 0; i < forest.size(); ++i) {
        const ForestNode& n = forest.node(i);
        json nd;
        nd["id"] = i;
        nd["parent"] = n.parent < 0 ? json(nullptr) : json(n.parent);
        nd["dim"] = n.region.dim_class();
        nd["region"] = region_to_json_obj(n.region);
        if (n.birth_level) nd["birth"] = rat_str(*n.birth_level);
        if (n.realized_level) nd["realized"] = rat_str(*n.realized_level);
        if (n.merge_level) nd["split"] = rat_str(*n.merge_level);
        if (i < static_cast<int>(exact_mass.size()) && exact_mass[i]) nd["mass"] = rat_str(*exact_mass[i]);
        if (i < static_cast<int>(approx_mass.size()) && approx_mass[i]) nd["mass_approx"] = *approx_mass[i];
        nodes.push_back(std::move(nd));
    }
    j["nodes"] = std::move(nodes);
    return j.dump(2) + "\n";
}

ForestReport ForestReport::from_json(const std::string& text) {
    json j = json::parse(text);
    ForestReport rep;
    rep.engine = j.at("engine").get<std::string>();
    if (j.contains("depth")) rep.depth = j.at("depth").get<int>();
    rep.spec_hash = j.at("spec_hash").get<std::string>();
    SeparationRelation rel = parse_separation(j.at("separation").get<std::string>());
    std::vector<ForestNode> nodes;
    for (const auto& nd : j.at("nodes")) {
        ForestNode n;
        n.region = region_from_json_obj(nd.at("region"));
        n.parent = nd.at("parent").is_null() ? -1 : nd.at("parent").get<int>();
        auto opt_rat = [&](const char* key) -> std::optional<Rat> {
            if (!nd.contains(key)) return std::nullopt;
            auto q = parse_rat(nd.at(key).get<std::string>());
            require(q.has_value(), "parse-error", std::string("bad rational in field ") + key);
            return q;
        };
        n.birth_level = opt_rat("birth");
        n.realized_level = opt_rat("realized");
        n.merge_level = opt_rat("split");
        nodes.push_back(std::move(n));
        rep.exact_mass.push_back(nd.contains("mass") ? parse_rat(nd.at("mass").get<std::string>()) : std::nullopt);
        rep.approx_mass.push_back(nd.contains("mass_approx") ? std::optional<double>(nd.at("mass_approx").get<double>())
                                                             : std::nullopt);
    }
    rep.forest = Forest::trusted(rel, std::move(nodes));
    return rep;
}

std::string ForestReport::to_dot() const {
    std::ostringstream os;
    os << "digraph clustering {\n";
    os << "  rankdir=BT;\n";
    os << "  node [shape=box, fontname=\"monospace\"];\n";
    for (int i = 0; i < forest.size(); ++i) {
        const ForestNode& n = forest.node(i);
        os << "  n" << i << " [label=\"" << n.region.describe();
        if (n.birth_level) os << "\\nbirth " << rat_str(*n.birth_level);
        if (n.merge_level) os << "\\nsplit " << rat_str(*n.merge_level);
        os << "\"];\n";
    }
    for (int i = 0; i < forest.size(); ++i)
        if (forest.node(i).parent >= 0) os << "  n" << i << " -> n" << forest.node(i).parent << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace mcl
