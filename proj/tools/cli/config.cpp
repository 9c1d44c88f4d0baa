#include "config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nfqed/nfqed.h"

namespace nfqed_cli {
namespace {

std::string where(const std::string& origin, const YAML::Mark& m) {
    if (m.is_null()) return origin;
    return origin + ":" + std::to_string(m.line + 1);
}

// One mapping node. Every key read is recorded so that leftovers can be
// reported as unknown.
class Table {
public:
    Table(YAML::Node node, std::string path, const std::string& origin)
        : node_(std::move(node)), path_(std::move(path)), origin_(origin) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            fail(node_.Mark(), "'" + (path_.empty() ? std::string("<root>") : path_) + "' must be a table");
    }

    bool has(const std::string& key) const { return node_.IsMap() && node_[key]; }

    template <class T>
    T get(const std::string& key, const T& def) {
        if (!has(key)) return def;
        return as<T>(at(key), key);
    }

    template <class T>
    std::optional<T> opt(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return as<T>(at(key), key);
    }

    Table sub(const std::string& key) {
        if (!has(key)) return Table(YAML::Node(), dotted(key), origin_);
        return Table(at(key), dotted(key), origin_);
    }

    YAML::Node raw(const std::string& key) { return has(key) ? at(key) : YAML::Node(); }

    void finish() const {
        if (!node_.IsMap()) return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string k = it->first.Scalar();
            if (!used_.count(k)) fail(it->first.Mark(), "unknown key '" + dotted(k) + "'");
        }
    }

    std::string dotted(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] void fail(const YAML::Mark& m, const std::string& msg) const {
        throw ConfigError(where(origin_, m) + ": " + msg);
    }

    template <class T>
    T as(const YAML::Node& n, const std::string& key) const {
        try {
            if (!n.IsScalar() && !std::is_same_v<T, std::vector<double>> && !std::is_same_v<T, std::vector<std::string>>)
                throw YAML::BadConversion(n.Mark());
            T v = n.as<T>();
            if constexpr (std::is_same_v<T, double>)
                if (!std::isfinite(v)) fail(n.Mark(), "key '" + dotted(key) + "' must be finite");
            return v;
        } catch (const YAML::BadConversion&) {
            fail(n.Mark(), "key '" + dotted(key) + "' has the wrong type (expected " + type_name<T>() + ")");
        }
    }

private:
    template <class T>
    static std::string type_name() {
        if constexpr (std::is_same_v<T, int>) return "integer";
        if constexpr (std::is_same_v<T, double>) return "number";
        if constexpr (std::is_same_v<T, bool>) return "boolean";
        if constexpr (std::is_same_v<T, std::string>) return "string";
        if constexpr (std::is_same_v<T, std::vector<double>>) return "list of numbers";
        if constexpr (std::is_same_v<T, std::vector<std::string>>) return "list of strings";
        return "value";
    }

    YAML::Node at(const std::string& key) {
        used_.insert(key);
        return node_[key];
    }

    YAML::Node node_;
    std::string path_;
    const std::string& origin_;
    std::set<std::string> used_;
};

void one_of(const Table& t, const YAML::Mark& m, const std::string& key, const std::string& v,
            std::initializer_list<const char*> allowed) {
    std::string list;
    for (const char* a : allowed) {
        if (v == a) return;
        list += std::string(list.empty() ? "" : ", ") + a;
    }
    t.fail(m, "key '" + t.dotted(key) + "' must be one of {" + list + "}, got '" + v + "'");
}

YAML::Mark mark(const YAML::Node& n) { return n ? n.Mark() : YAML::Mark::null_mark(); }

std::array<double, 2> pair_of(Table& t, const std::string& key, std::array<double, 2> def) {
    if (!t.has(key)) return def;
    const YAML::Node n = t.raw(key);
    const auto v = t.as<std::vector<double>>(n, key);
    if (v.size() != 2) t.fail(n.Mark(), "key '" + t.dotted(key) + "' must hold two numbers");
    return {v[0], v[1]};
}

// A list of numbers or a {min, max, points} table.
std::vector<double> grid_of(Table& parent, const std::string& key, std::vector<double> def) {
    if (!parent.has(key)) return def;
    const YAML::Node n = parent.raw(key);
    if (n.IsSequence()) return parent.as<std::vector<double>>(n, key);
    Table t = parent.sub(key);
    const double lo = t.get<double>("min", 0), hi = t.get<double>("max", 0);
    const int pts = t.get<int>("points", 0);
    t.finish();
    if (pts < 0 || (pts > 1 && !(hi > lo)))
        parent.fail(n.Mark(), "key '" + parent.dotted(key) + "' needs max > min and points >= 0");
    std::vector<double> out;
    for (int i = 0; i < pts; ++i) out.push_back(pts == 1 ? lo : lo + (hi - lo) * i / (pts - 1));
    return out;
}

std::complex<double> component(const Table& t, const YAML::Node& n, const std::string& key) {
    if (n.IsSequence()) {
        const auto v = t.as<std::vector<double>>(n, key);
        if (v.size() != 2) t.fail(n.Mark(), "complex entries of '" + t.dotted(key) + "' are [re, im]");
        return {v[0], v[1]};
    }
    return t.as<double>(n, key);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(where(origin, e.mark) + ": " + e.msg);
    }
    RunConfig c;
    c.base_dir = base_dir;
    Table t(root, "", origin);

    if (!t.has("schema_version")) t.fail(mark(root), "missing key 'schema_version'");
    c.schema_version = t.get<int>("schema_version", 0);
    if (c.schema_version != schema_version)
        t.fail(mark(t.raw("schema_version")), "unsupported schema_version " + std::to_string(c.schema_version) +
                                                  " (this build reads " + std::to_string(schema_version) + ")");

    {
        Table f = t.sub("fiber");
        c.fiber.radius_nm = f.get("radius_nm", c.fiber.radius_nm);
        if (!(c.fiber.radius_nm > 0)) f.fail(mark(f.raw("radius_nm")), "key 'fiber.radius_nm' must be positive");
        c.fiber.material = f.get("material", c.fiber.material);
        one_of(f, mark(f.raw("material")), "material", c.fiber.material, {"silica", "vacuum"});
        c.fiber.material_file = f.get("material_file", std::string());
        if (!c.fiber.material_file.empty() && f.has("material"))
            f.fail(mark(f.raw("material_file")), "'fiber.material' and 'fiber.material_file' are exclusive");
        f.finish();
    }
    {
        Table e = t.sub("emitter");
        c.wavelength_nm = e.get("wavelength_nm", c.wavelength_nm);
        if (!(c.wavelength_nm > 0)) e.fail(mark(e.raw("wavelength_nm")), "key 'emitter.wavelength_nm' must be positive");
        e.finish();
    }
    if (t.has("chain") && t.has("emitters")) t.fail(mark(t.raw("emitters")), "'chain' and 'emitters' are exclusive");
    if (t.has("chain")) {
        Table ch = t.sub("chain");
        ChainConfig k;
        k.n = ch.get("n", k.n);
        if (k.n < 0) ch.fail(mark(ch.raw("n")), "key 'chain.n' must be non-negative");
        k.spacing_over_lambda = ch.get("spacing_over_lambda", k.spacing_over_lambda);
        if (!(k.spacing_over_lambda > 0))
            ch.fail(mark(ch.raw("spacing_over_lambda")), "key 'chain.spacing_over_lambda' must be positive");
        k.x_a_nm = ch.get("x_a_nm", k.x_a_nm);
        if (!(k.x_a_nm > 0)) ch.fail(mark(ch.raw("x_a_nm")), "key 'chain.x_a_nm' must be positive");
        k.orientation = ch.get("orientation", k.orientation);
        one_of(ch, mark(ch.raw("orientation")), "orientation", k.orientation, {"parallel", "binormal", "normal"});
        ch.finish();
        c.chain = k;
    }
    if (t.has("emitters")) {
        const YAML::Node list = t.raw("emitters");
        if (!list.IsSequence()) t.fail(list.Mark(), "'emitters' must be a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Table e(list[i], "emitters[" + std::to_string(i) + "]", origin);
            EmitterConfig em;
            em.r_nm = e.get("r_nm", 0.0);
            em.phi = e.get("phi", 0.0);
            em.z_nm = e.get("z_nm", 0.0);
            const YAML::Node d = e.raw("dipole");
            if (!d || !d.IsSequence() || d.size() != 3) e.fail(mark(list[i]), "'" + e.dotted("dipole") + "' needs three components");
            for (int k = 0; k < 3; ++k) em.dipole[k] = component(e, d[k], "dipole");
            e.finish();
            c.emitters.push_back(em);
        }
    }
    {
        Table q = t.sub("quadrature");
        nfqed_quad lib;
        nfqed_quad_default(&lib);
        c.quadrature = {lib.m_cut, lib.theta_order, lib.rel_tol, lib.max_refinements};
        c.quadrature.m_cut = q.get("m_cut", c.quadrature.m_cut);
        c.quadrature.theta_order = q.get("theta_order", c.quadrature.theta_order);
        c.quadrature.rel_tol = q.get("rel_tol", c.quadrature.rel_tol);
        c.quadrature.max_refinements = q.get("max_refinements", c.quadrature.max_refinements);
        if (c.quadrature.m_cut < 0 || c.quadrature.theta_order < 0 || c.quadrature.max_refinements < 0 ||
            !(c.quadrature.rel_tol > 0))
            q.fail(mark(t.raw("quadrature")), "quadrature settings must be non-negative with rel_tol > 0");
        q.finish();
    }
    {
        Table p = t.sub("pv");
        c.pv.strategy = p.get("strategy", c.pv.strategy);
        one_of(p, mark(p.raw("strategy")), "strategy", c.pv.strategy, {"averaged", "direct"});
        if (p.has("window")) {
            const auto w = pair_of(p, "window", {0, 0});
            if (!(w[0] > 0 && w[1] > w[0])) p.fail(mark(p.raw("window")), "'pv.window' needs 0 < min < max");
            c.pv.window = w;
        }
        if (p.has("n_cutoffs") && !c.pv.window) p.fail(mark(p.raw("n_cutoffs")), "'pv.n_cutoffs' requires 'pv.window'");
        c.pv.n_cutoffs = p.get("n_cutoffs", c.pv.n_cutoffs);
        if (c.pv.n_cutoffs < 1) p.fail(mark(p.raw("n_cutoffs")), "'pv.n_cutoffs' must be positive");
        p.finish();
    }
    {
        Table d = t.sub("drive");
        c.drive.rabi = d.get("rabi", c.drive.rabi);
        if (!(c.drive.rabi > 0)) d.fail(mark(d.raw("rabi")), "'drive.rabi' must be positive");
        std::vector<double> def;
        for (int i = 0; i < 400; ++i) def.push_back(-15.0 + 30.0 * i / 399);
        c.drive.detunings = grid_of(d, "detunings", def);
        d.finish();
    }
    {
        Table d = t.sub("dispersion");
        c.dispersion.wavelength_min_nm = d.get("wavelength_min_nm", c.dispersion.wavelength_min_nm);
        c.dispersion.wavelength_max_nm = d.get("wavelength_max_nm", c.dispersion.wavelength_max_nm);
        c.dispersion.points = d.get("points", c.dispersion.points);
        if (c.dispersion.points < 0 || !(c.dispersion.wavelength_min_nm > 0) ||
            (c.dispersion.points > 1 && !(c.dispersion.wavelength_max_nm > c.dispersion.wavelength_min_nm)))
            d.fail(mark(t.raw("dispersion")), "'dispersion' needs 0 < wavelength_min_nm < wavelength_max_nm");
        d.finish();
    }
    {
        Table g = t.sub("green_map");
        GreenMapConfig& m = c.green_map;
        m.component = g.get("component", m.component);
        one_of(g, mark(g.raw("component")), "component", m.component, {"xx", "yy", "zz"});
        m.plane = g.get("plane", m.plane);
        one_of(g, mark(g.raw("plane")), "plane", m.plane, {"zx", "yx"});
        m.x_a_nm = g.get("x_a_nm", m.x_a_nm);
        if (!(m.x_a_nm > 0)) g.fail(mark(g.raw("x_a_nm")), "'green_map.x_a_nm' must be positive");
        m.x_range_nm = pair_of(g, "x_range_nm", m.x_range_nm);
        m.other_range_nm = pair_of(g, m.plane == "zx" ? "z_range_nm" : "y_range_nm", m.other_range_nm);
        if (g.has("points")) {
            const YAML::Node n = g.raw("points");
            const auto v = g.as<std::vector<double>>(n, "points");
            if (v.size() != 2 || v[0] < 0 || v[1] < 0 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
                g.fail(n.Mark(), "'green_map.points' must be two non-negative integers");
            m.points = {static_cast<int>(v[0]), static_cast<int>(v[1])};
        }
        g.finish();
    }
    {
        Table p = t.sub("pair_interaction");
        PairConfig& q = c.pair_interaction;
        q.x_a_nm = grid_of(p, "x_a_nm", q.x_a_nm);
        for (double x : q.x_a_nm)
            if (!(x > 0)) p.fail(mark(p.raw("x_a_nm")), "'pair_interaction.x_a_nm' entries must be positive");
        std::vector<double> def;
        for (int i = 0; i < 16; ++i) def.push_back(0.5 + 0.1 * i);
        q.a_over_lambda = grid_of(p, "a_over_lambda", def);
        for (double a : q.a_over_lambda)
            if (!(a >= 0.05))
                p.fail(mark(p.raw("a_over_lambda")),
                       "'pair_interaction.a_over_lambda' entries must be >= 0.05 (the spectral grid becomes infeasible below)");
        q.orientations = p.get("orientations", q.orientations);
        for (const auto& o : q.orientations) one_of(p, mark(p.raw("orientations")), "orientations", o, {"parallel", "binormal", "normal"});
        p.finish();
    }
    {
        Table b = t.sub("pv_benchmark");
        c.pv_benchmark.a_over_lambda = grid_of(b, "a_over_lambda", c.pv_benchmark.a_over_lambda);
        for (double a : c.pv_benchmark.a_over_lambda)
            if (!(a >= 0.05)) b.fail(mark(b.raw("a_over_lambda")), "'pv_benchmark.a_over_lambda' entries must be >= 0.05");
        c.pv_benchmark.orientation = b.get("orientation", c.pv_benchmark.orientation);
        one_of(b, mark(b.raw("orientation")), "orientation", c.pv_benchmark.orientation, {"perpendicular", "parallel"});
        b.finish();
    }
    c.mode = t.get("mode", c.mode);
    one_of(t, mark(t.raw("mode")), "mode", c.mode, {"exact", "vacuum-approx", "both"});
    c.output_dir = t.get("output_dir", c.output_dir);
    c.cache_dir = t.get("cache_dir", c.cache_dir);
    c.threads = t.get("threads", c.threads);
    if (c.threads < 0) t.fail(mark(t.raw("threads")), "'threads' must be non-negative");
    t.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, std::filesystem::path(path).parent_path().string());
}

nlohmann::json to_json(const RunConfig& c) {
    using nlohmann::json;
    json j;
    j["schema_version"] = c.schema_version;
    j["fiber"] = {{"radius_nm", c.fiber.radius_nm}};
    if (c.fiber.material_file.empty())
        j["fiber"]["material"] = c.fiber.material;
    else
        j["fiber"]["material_file"] = c.fiber.material_file;
    j["emitter"] = {{"wavelength_nm", c.wavelength_nm}};
    if (c.chain)
        j["chain"] = {{"n", c.chain->n},
                      {"spacing_over_lambda", c.chain->spacing_over_lambda},
                      {"x_a_nm", c.chain->x_a_nm},
                      {"orientation", c.chain->orientation}};
    if (!c.emitters.empty()) {
        j["emitters"] = json::array();
        for (const auto& e : c.emitters) {
            json d = json::array();
            for (const auto& v : e.dipole) d.push_back({v.real(), v.imag()});
            j["emitters"].push_back({{"r_nm", e.r_nm}, {"phi", e.phi}, {"z_nm", e.z_nm}, {"dipole", d}});
        }
    }
    j["quadrature"] = {{"m_cut", c.quadrature.m_cut},
                       {"theta_order", c.quadrature.theta_order},
                       {"rel_tol", c.quadrature.rel_tol},
                       {"max_refinements", c.quadrature.max_refinements}};
    j["pv"] = {{"strategy", c.pv.strategy}};
    if (c.pv.window) {
        j["pv"]["window"] = *c.pv.window;
        j["pv"]["n_cutoffs"] = c.pv.n_cutoffs;
    } else {
        j["pv"]["window"] = "per-pair default";
    }
    j["drive"] = {{"rabi", c.drive.rabi}, {"detunings", c.drive.detunings}};
    j["dispersion"] = {{"wavelength_min_nm", c.dispersion.wavelength_min_nm},
                       {"wavelength_max_nm", c.dispersion.wavelength_max_nm},
                       {"points", c.dispersion.points}};
    j["green_map"] = {{"component", c.green_map.component},
                      {"plane", c.green_map.plane},
                      {"x_a_nm", c.green_map.x_a_nm},
                      {"x_range_nm", c.green_map.x_range_nm},
                      {c.green_map.plane == "zx" ? "z_range_nm" : "y_range_nm", c.green_map.other_range_nm},
                      {"points", c.green_map.points}};
    j["pair_interaction"] = {{"x_a_nm", c.pair_interaction.x_a_nm},
                             {"a_over_lambda", c.pair_interaction.a_over_lambda},
                             {"orientations", c.pair_interaction.orientations}};
    j["pv_benchmark"] = {{"a_over_lambda", c.pv_benchmark.a_over_lambda},
                         {"orientation", c.pv_benchmark.orientation}};
    j["mode"] = c.mode;
    j["output_dir"] = c.output_dir;
    j["cache_dir"] = c.cache_dir;
    return j;
}

}  // namespace nfqed_cli
