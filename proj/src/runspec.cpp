#include "mcl/mixture.hpp"
#include "mcl/runspec.hpp"

#include <fstream>
#include <sstream>

namespace mcl {

// --- builtins -----------------------------------------------------------------

static Box unit_box() { return Box({Rat(0)}, {Rat(1)}); }

bool builtin_density1d_exists(const std::string& name) {
    return name == "twinpeaks" || name == "factory" || name == "merlon" || name == "camel" || name == "m" ||
           name == "uniform";
}

Density1D builtin_density1d(const std::string& name) {
    Box box = unit_box();
    using P = std::pair<Rat, Rat>;
    if (name == "twinpeaks")
        return Density1D::from_points(box, {P{rat(0), rat(0)}, P{rat(1, 3), rat(1, 3)}, P{rat(1, 2), rat(1, 6)},
                                            P{rat(2, 3), rat(1, 3)}, P{rat(1), rat(0)}});
    if (name == "factory")
        return Density1D::from_pieces(box, {{rat(0), rat(1, 2), rat(1), rat(1, 2)},
                                            {rat(1, 2), rat(1), rat(1), rat(1)}});
    if (name == "merlon")
        return Density1D::from_pieces(box, {{rat(0), rat(1, 3), rat(1), rat(1)},
                                            {rat(1, 3), rat(2, 3), rat(1, 2), rat(1, 2)},
                                            {rat(2, 3), rat(1), rat(1), rat(1)}});
    if (name == "camel")
        return Density1D::from_points(box, {P{rat(0), rat(0)}, P{rat(1, 4), rat(1)}, P{rat(1, 2), rat(1, 2)},
                                            P{rat(3, 4), rat(1)}, P{rat(1), rat(0)}});
    if (name == "m")
        return Density1D::from_points(box, {P{rat(0), rat(1)}, P{rat(1, 2), rat(1, 2)}, P{rat(1), rat(1)}});
    if (name == "uniform") return Density1D::from_points(box, {P{rat(0), rat(1)}, P{rat(1), rat(1)}});
    fail("parse-error", "unknown 1d density '" + name + "'");
}

AnalyticDensity builtin_expr(const std::string& name) {
    if (name == "saddle")
        return AnalyticDensity{"saddle", [](const Point& p) -> Rat { return p[0] * p[1] + 1; }};
    if (name == "twinpeaks" || name == "factory" || name == "merlon" || name == "camel" || name == "m" ||
        name == "uniform") {
        Density1D d = builtin_density1d(name);
        return AnalyticDensity{name, [d](const Point& p) { return d.value(p[0]); }};
    }
    fail("parse-error", "unknown density expression '" + name + "'");
}

GridDensity builtin_indicator(const std::string& name, int depth) {
    Box box({rat(-1), rat(-1)}, {rat(1), rat(1)});
    auto inside = [&](const Point& p) -> bool {
        const Rat& x = p[0];
        const Rat& y = p[1];
        if (name == "squares_corner") return (x < 0 && y < 0) || (x > 0 && y > 0);
        if (name == "squares_separated")
            return (x > -1 && x < rat(-1, 4) && y > -1 && y < rat(-1, 4)) ||
                   (x > rat(1, 4) && x < 1 && y > rat(1, 4) && y < 1);
        if (name == "discs_overlap") {
            Rat r2 = rat(9, 16);
            Rat a = (x + rat(1, 2)) * (x + rat(1, 2)) + y * y;
            Rat b = (x - rat(1, 2)) * (x - rat(1, 2)) + y * y;
            return a < r2 || b < r2;
        }
        if (name == "discs_tangent") {
            Rat r2 = rat(1, 2);
            Rat a = (x + rat(1, 2)) * (x + rat(1, 2)) + (y + rat(1, 2)) * (y + rat(1, 2));
            Rat b = (x - rat(1, 2)) * (x - rat(1, 2)) + (y - rat(1, 2)) * (y - rat(1, 2));
            return a < r2 || b < r2;
        }
        if (name == "diamonds_bowtie") {
            return rat_abs(x + rat(1, 2)) + rat_abs(y) < rat(1, 2) || rat_abs(x - rat(1, 2)) + rat_abs(y) < rat(1, 2);
        }
        fail("parse-error", "unknown indicator shape '" + name + "'");
    };
    return GridDensity::sample(box, depth, [&](const Point& p) { return inside(p) ? Rat(1) : Rat(0); });
}

// --- parsing --------------------------------------------------------------------

namespace {

struct Line {
    int number;
    std::string text;
};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    fail("parse-error", "line " + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Rat need_rat(const std::string& tok, int line) {
    auto q = parse_rat(strip(tok));
    if (!q) parse_fail(line, "malformed rational '" + strip(tok) + "'");
    return *q;
}

// "[-1, 1] x [0, 1]" -> box
Box parse_box_value(const std::string& value, int line) {
    std::vector<Rat> lo, hi;
    std::string rest = value;
    while (true) {
        size_t open = rest.find('[');
        if (open == std::string::npos) break;
        size_t comma = rest.find(',', open);
        size_t close = rest.find(']', open);
        if (comma == std::string::npos || close == std::string::npos || comma > close)
            parse_fail(line, "malformed box axis");
        lo.push_back(need_rat(rest.substr(open + 1, comma - open - 1), line));
        hi.push_back(need_rat(rest.substr(comma + 1, close - comma - 1), line));
        rest = rest.substr(close + 1);
    }
    if (lo.empty()) parse_fail(line, "box needs at least one axis like [0, 1]");
    return Box(std::move(lo), std::move(hi));
}

// "(a, b, ...)" -> point
Point parse_point(const std::string& text, int line) {
    size_t open = text.find('(');
    size_t close = text.find(')', open);
    if (open == std::string::npos || close == std::string::npos) parse_fail(line, "malformed point");
    std::string inner = text.substr(open + 1, close - open - 1);
    Point p;
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) p.push_back(need_rat(tok, line));
    if (p.empty()) parse_fail(line, "empty point");
    return p;
}

// "x0:y0, x1:y1, ..." -> pl points
std::vector<std::pair<Rat, Rat>> parse_pl_points(const std::string& value, int line) {
    std::vector<std::pair<Rat, Rat>> pts;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        size_t colon = tok.find(':');
        if (colon == std::string::npos) parse_fail(line, "expected x:y in points list");
        pts.emplace_back(need_rat(tok.substr(0, colon), line), need_rat(tok.substr(colon + 1), line));
    }
    if (pts.size() < 2) parse_fail(line, "points list needs at least two entries");
    return pts;
}

// "[a, b] y0 y1" -> piece
Density1D::Piece parse_piece(const std::string& value, int line) {
    size_t open = value.find('[');
    size_t comma = value.find(',', open);
    size_t close = value.find(']', open);
    if (open == std::string::npos || comma == std::string::npos || close == std::string::npos)
        parse_fail(line, "malformed piece, expected [x0, x1] y0 y1");
    Density1D::Piece p;
    p.x0 = need_rat(value.substr(open + 1, comma - open - 1), line);
    p.x1 = need_rat(value.substr(comma + 1, close - comma - 1), line);
    std::stringstream ss(value.substr(close + 1));
    std::string y0, y1;
    if (!(ss >> y0 >> y1)) parse_fail(line, "piece needs two values after the interval");
    p.y0 = need_rat(y0, line);
    p.y1 = need_rat(y1, line);
    return p;
}

// region mini-syntax used by the simple stanza:
//   interval [0, 1/2) | cells depth 2 (0,0) (0,1) | atom (1/2) | polyline (0,0) (1,0)
Region parse_region_value(const Box& box, const std::string& value, int line) {
    std::stringstream ss(value);
    std::string kind;
    ss >> kind;
    std::string rest;
    std::getline(ss, rest);
    rest = strip(rest);
    if (kind == "interval") {
        if (rest.size() < 2) parse_fail(line, "malformed interval");
        char openc = rest.front(), closec = rest.back();
        if ((openc != '[' && openc != '(') || (closec != ']' && closec != ')'))
            parse_fail(line, "interval needs bracket endpoints like [0, 1/2)");
        size_t comma = rest.find(',');
        if (comma == std::string::npos) parse_fail(line, "interval needs two endpoints");
        Rat lo = need_rat(rest.substr(1, comma - 1), line);
        Rat hi = need_rat(rest.substr(comma + 1, rest.size() - comma - 2), line);
        return make_interval(box, std::move(lo), std::move(hi), openc == '[', closec == ']');
    }
    if (kind == "atom") return make_atom(box, parse_point(rest, line));
    if (kind == "cells") {
        std::stringstream rs(rest);
        std::string kw;
        int depth;
        if (!(rs >> kw >> depth) || kw != "depth") parse_fail(line, "cells need 'depth <n>' first");
        std::string remainder;
        std::getline(rs, remainder);
        std::vector<Cell> cells;
        size_t pos = 0;
        while ((pos = remainder.find('(')) != std::string::npos) {
            size_t close = remainder.find(')', pos);
            if (close == std::string::npos) parse_fail(line, "unbalanced cell index");
            std::string inner = remainder.substr(pos + 1, close - pos - 1);
            Cell c;
            std::stringstream cs(inner);
            std::string tok;
            while (std::getline(cs, tok, ',')) c.push_back(std::stoll(strip(tok)));
            cells.push_back(std::move(c));
            remainder = remainder.substr(close + 1);
        }
        return make_cells(box, depth, std::move(cells));
    }
    if (kind == "polyline") {
        std::vector<Point> vs;
        std::string remainder = rest;
        size_t pos = 0;
        while ((pos = remainder.find('(')) != std::string::npos) {
            size_t close = remainder.find(')', pos);
            if (close == std::string::npos) parse_fail(line, "unbalanced vertex");
            vs.push_back(parse_point(remainder.substr(pos, close - pos + 1), line));
            remainder = remainder.substr(close + 1);
        }
        return make_polyline(box, std::move(vs));
    }
    parse_fail(line, "unknown region kind '" + kind + "'");
}

Density1D parse_density_block(const Box& box, const std::vector<Line>& lines, size_t& i, int open_line);

}  // namespace

RunSpec RunSpec::parse(const std::string& text) {
    RunSpec spec;
    spec.source_text = text;
    spec.box = unit_box();
    spec.rel = SeparationRelation::disjoint();

    std::vector<Line> lines;
    {
        std::stringstream ss(text);
        std::string raw;
        int num = 0;
        while (std::getline(ss, raw)) {
            ++num;
            size_t hash = raw.find('#');
            if (hash != std::string::npos) raw = raw.substr(0, hash);
            raw = strip(raw);
            if (!raw.empty()) lines.push_back(Line{num, raw});
        }
    }

    bool have_stanza = false;
    size_t i = 0;
    auto expect_stanza = [&](int line) {
        if (have_stanza) parse_fail(line, "exactly one input stanza is allowed");
        have_stanza = true;
    };

    // top-level keys first (box, separation), stanzas afterwards
    while (i < lines.size()) {
        const Line& ln = lines[i];
        size_t eq = ln.text.find('=');
        if (eq != std::string::npos && ln.text.find('{') == std::string::npos) {
            std::string key = strip(ln.text.substr(0, eq));
            std::string value = strip(ln.text.substr(eq + 1));
            if (key == "box")
                spec.box = parse_box_value(value, ln.number);
            else if (key == "separation")
                spec.rel = parse_separation(value);
            else
                parse_fail(ln.number, "unknown top-level key '" + key + "'");
            ++i;
            continue;
        }
        size_t brace = ln.text.find('{');
        if (brace == std::string::npos) parse_fail(ln.number, "expected 'key = value' or a stanza");
        std::string stanza = strip(ln.text.substr(0, brace));
        ++i;
        if (stanza == "density1d") {
            expect_stanza(ln.number);
            spec.kind = Kind::Density1D;
            spec.density1d = parse_density_block(spec.box, lines, i, ln.number);
        } else if (stanza == "grid") {
            expect_stanza(ln.number);
            spec.kind = Kind::Grid;
            std::optional<int> depth;
            std::optional<std::string> expr, indicator;
            std::vector<Rat> values;
            while (i < lines.size() && lines[i].text != "}") {
                const Line& l = lines[i];
                size_t e = l.text.find('=');
                if (e == std::string::npos) parse_fail(l.number, "expected key = value");
                std::string key = strip(l.text.substr(0, e));
                std::string value = strip(l.text.substr(e + 1));
                if (key == "depth")
                    depth = std::stoi(value);
                else if (key == "expr")
                    expr = value;
                else if (key == "indicator")
                    indicator = value;
                else if (key == "values") {
                    std::stringstream vs(value);
                    std::string tok;
                    while (std::getline(vs, tok, ',')) values.push_back(need_rat(tok, l.number));
                } else
                    parse_fail(l.number, "unknown grid key '" + key + "'");
                ++i;
            }
            if (i == lines.size()) parse_fail(ln.number, "unterminated grid stanza");
            ++i;  // consume }
            if (!depth) parse_fail(ln.number, "grid stanza needs depth");
            spec.grid_depth = depth;
            if (indicator) {
                spec.grid = builtin_indicator(*indicator, *depth);
                spec.box = spec.grid->box;
            } else if (expr) {
                AnalyticDensity a = builtin_expr(*expr);
                if (*expr == "saddle" && spec.box.dim() != 2) spec.box = Box({rat(-1), rat(-1)}, {rat(1), rat(1)});
                spec.grid = GridDensity::sample(spec.box, *depth, a.eval);
                spec.grid_analytic = std::move(a);
            } else if (!values.empty()) {
                spec.grid = GridDensity::from_values(spec.box, *depth, std::move(values));
            } else {
                parse_fail(ln.number, "grid stanza needs expr, indicator or values");
            }
        } else if (stanza == "simple") {
            expect_stanza(ln.number);
            spec.kind = Kind::Simple;
            while (i < lines.size() && lines[i].text != "}") {
                const Line& l = lines[i];
                size_t e = l.text.find('=');
                if (e == std::string::npos || strip(l.text.substr(0, e)) != "term")
                    parse_fail(l.number, "simple stanza lines look like: term = <region> weight <p/q>");
                std::string value = strip(l.text.substr(e + 1));
                size_t wpos = value.rfind("weight");
                if (wpos == std::string::npos) parse_fail(l.number, "term needs a weight");
                Region r = parse_region_value(spec.box, strip(value.substr(0, wpos)), l.number);
                Rat w = need_rat(value.substr(wpos + 6), l.number);
                spec.simple_terms.emplace_back(std::move(r), std::move(w));
                ++i;
            }
            if (i == lines.size()) parse_fail(ln.number, "unterminated simple stanza");
            ++i;
        } else if (stanza == "mixture") {
            expect_stanza(ln.number);
            spec.kind = Kind::Mixture;
            std::vector<DimComponent> comps;
            while (i < lines.size() && lines[i].text != "}") {
                const Line& l = lines[i];
                size_t b = l.text.find('{');
                if (b == std::string::npos || l.text.rfind("component", 0) != 0)
                    parse_fail(l.number, "mixture stanza contains 'component <kind> {' blocks");
                std::string ckind = strip(l.text.substr(9, b - 9));
                ++i;
                if (ckind == "atoms") {
                    AtomsComponent ac;
                    while (i < lines.size() && lines[i].text != "}") {
                        const Line& al = lines[i];
                        size_t e = al.text.find('=');
                        if (e == std::string::npos || strip(al.text.substr(0, e)) != "atom")
                            parse_fail(al.number, "atoms blocks contain: atom = (point) weight <p/q>");
                        std::string value = strip(al.text.substr(e + 1));
                        size_t wpos = value.rfind("weight");
                        if (wpos == std::string::npos) parse_fail(al.number, "atom needs a weight");
                        Point p = parse_point(value.substr(0, wpos), al.number);
                        ac.atoms.emplace_back(std::move(p), need_rat(value.substr(wpos + 6), al.number));
                        ++i;
                    }
                    ++i;
                    comps.push_back(DimComponent{0, std::move(ac)});
                } else if (ckind == "line") {
                    Density1D d = parse_density_block(spec.box, lines, i, l.number);
                    comps.push_back(DimComponent{1, Line1DComponent{std::move(d)}});
                } else if (ckind == "curve") {
                    std::optional<Region> path;
                    std::optional<Density1D> density;
                    Box param_box = unit_box();
                    while (i < lines.size() && lines[i].text != "}") {
                        const Line& cl = lines[i];
                        size_t e = cl.text.find('=');
                        if (e == std::string::npos) parse_fail(cl.number, "expected key = value");
                        std::string key = strip(cl.text.substr(0, e));
                        std::string value = strip(cl.text.substr(e + 1));
                        if (key == "path") {
                            path = parse_region_value(spec.box, "polyline " + value, cl.number);
                        } else if (key == "density") {
                            if (builtin_density1d_exists(value))
                                density = builtin_density1d(value);
                            else
                                parse_fail(cl.number, "unknown curve density '" + value + "'");
                        } else if (key == "points") {
                            density = Density1D::from_points(param_box, parse_pl_points(value, cl.number));
                        } else {
                            parse_fail(cl.number, "unknown curve key '" + key + "'");
                        }
                        ++i;
                    }
                    ++i;
                    if (!path || !density) parse_fail(l.number, "curve component needs path and density");
                    comps.push_back(DimComponent{1, CurveComponent{std::move(*path), std::move(*density)}});
                } else if (ckind == "grid") {
                    std::optional<int> depth;
                    std::optional<std::string> expr;
                    std::vector<Rat> values;
                    while (i < lines.size() && lines[i].text != "}") {
                        const Line& gl = lines[i];
                        size_t e = gl.text.find('=');
                        if (e == std::string::npos) parse_fail(gl.number, "expected key = value");
                        std::string key = strip(gl.text.substr(0, e));
                        std::string value = strip(gl.text.substr(e + 1));
                        if (key == "depth")
                            depth = std::stoi(value);
                        else if (key == "expr")
                            expr = value;
                        else if (key == "values") {
                            std::stringstream vs(value);
                            std::string tok;
                            while (std::getline(vs, tok, ',')) values.push_back(need_rat(tok, gl.number));
                        } else
                            parse_fail(gl.number, "unknown grid key '" + key + "'");
                        ++i;
                    }
                    ++i;
                    if (!depth) parse_fail(l.number, "grid component needs depth");
                    GridComponent gc;
                    if (expr) {
                        AnalyticDensity a = builtin_expr(*expr);
                        gc.grid = GridDensity::sample(spec.box, *depth, a.eval);
                        gc.analytic = std::move(a);
                    } else if (!values.empty()) {
                        gc.grid = GridDensity::from_values(spec.box, *depth, std::move(values));
                    } else {
                        parse_fail(l.number, "grid component needs expr or values");
                    }
                    comps.push_back(DimComponent{spec.box.dim(), std::move(gc)});
                } else {
                    parse_fail(l.number, "unknown component kind '" + ckind + "'");
                }
            }
            if (i == lines.size()) parse_fail(ln.number, "unterminated mixture stanza");
            ++i;
            spec.mixture = make_mixture(spec.box, std::move(comps));
        } else {
            parse_fail(ln.number, "unknown stanza '" + stanza + "'");
        }
    }
    if (!have_stanza) fail("parse-error", "spec needs one of: simple, density1d, grid, mixture");
    return spec;
}

namespace {

Density1D parse_density_block(const Box& box, const std::vector<Line>& lines, size_t& i, int open_line) {
    std::optional<std::string> name;
    std::optional<std::vector<std::pair<Rat, Rat>>> points;
    std::vector<Density1D::Piece> pieces;
    std::optional<Box> domain;
    while (i < lines.size() && lines[i].text != "}") {
        const Line& l = lines[i];
        size_t e = l.text.find('=');
        if (e == std::string::npos) parse_fail(l.number, "expected key = value");
        std::string key = strip(l.text.substr(0, e));
        std::string value = strip(l.text.substr(e + 1));
        if (key == "name")
            name = value;
        else if (key == "points")
            points = parse_pl_points(value, l.number);
        else if (key == "piece")
            pieces.push_back(parse_piece(value, l.number));
        else if (key == "domain")
            domain = parse_box_value(value, l.number);
        else
            parse_fail(l.number, "unknown density key '" + key + "'");
        ++i;
    }
    if (i == lines.size()) parse_fail(open_line, "unterminated density stanza");
    ++i;  // consume }
    if (name) return builtin_density1d(*name);
    Box d = domain.value_or(box);
    if (points) return Density1D::from_points(d, std::move(*points));
    if (!pieces.empty()) return Density1D::from_pieces(d, std::move(pieces));
    parse_fail(open_line, "density stanza needs name, points or piece lines");
}

}  // namespace

RunSpec RunSpec::parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "io-error", "cannot read spec file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::function<Rat(const Point&)>> RunSpec::sampler() const {
    if (grid_analytic) return grid_analytic->eval;
    if (density1d) {
        Density1D d = *density1d;
        return std::function<Rat(const Point&)>([d](const Point& p) { return d.value(p[0]); });
    }
    return std::nullopt;
}

}  // namespace mcl
