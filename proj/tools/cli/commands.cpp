#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "output.hpp"

namespace nfqed_cli {
namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double c_light = 299792458.0;
constexpr double nm = 1e-9;

void check(nfqed_status s, const std::string& what) {
    if (s != NFQED_OK) throw ApiError(s, what + ": " + nfqed_last_error() + " [" + nfqed_status_name(s) + "]");
}

template <class T, void (*F)(T*)>
struct Deleter {
    void operator()(T* p) const { F(p); }
};
using FiberPtr = std::unique_ptr<nfqed_fiber, Deleter<nfqed_fiber, nfqed_fiber_destroy>>;
using EnsemblePtr = std::unique_ptr<nfqed_ensemble, Deleter<nfqed_ensemble, nfqed_ensemble_destroy>>;
using CachePtr = std::unique_ptr<nfqed_cache, Deleter<nfqed_cache, nfqed_cache_close>>;
using CouplingsPtr = std::unique_ptr<nfqed_couplings, Deleter<nfqed_couplings, nfqed_couplings_destroy>>;
using SpectrumPtr = std::unique_ptr<nfqed_spectrum, Deleter<nfqed_spectrum, nfqed_spectrum_destroy>>;

std::string take(char* s) {
    std::string out = s ? s : "";
    nfqed_free_string(s);
    return out;
}

double omega_a(const RunConfig& c) { return 2 * pi * c_light / (c.wavelength_nm * nm); }

FiberPtr make_fiber(const RunConfig& c) {
    nfqed_fiber* f = nullptr;
    if (c.fiber.material_file.empty()) {
        check(nfqed_fiber_create(c.fiber.radius_nm * nm, c.fiber.material.c_str(), &f), "fiber");
    } else {
        std::filesystem::path p = c.fiber.material_file;
        if (p.is_relative() && !c.base_dir.empty()) p = std::filesystem::path(c.base_dir) / p;
        check(nfqed_fiber_load(c.fiber.radius_nm * nm, p.string().c_str(), &f), "fiber material " + p.string());
    }
    return FiberPtr(f);
}

CachePtr open_cache(const RunConfig& c) {
    if (c.cache_dir.empty()) return nullptr;
    nfqed_cache* h = nullptr;
    check(nfqed_cache_open(c.cache_dir.c_str(), &h), "cache " + c.cache_dir);
    return CachePtr(h);
}

nfqed_quad quad(const RunConfig& c) {
    return {c.quadrature.m_cut, c.quadrature.theta_order, c.quadrature.rel_tol, c.quadrature.max_refinements};
}

nfqed_pv pv(const RunConfig& c, const std::string& strategy) {
    nfqed_pv p;
    nfqed_pv_default(&p);
    const bool direct = strategy == "direct";
    if (c.pv.window) {
        p.kind = direct ? NFQED_PV_FIXED_DIRECT : NFQED_PV_FIXED_AVERAGED;
        p.x_min_c = (*c.pv.window)[0];
        p.x_max_c = (*c.pv.window)[1];
        p.x_c = p.x_max_c;
        p.n_cutoffs = c.pv.n_cutoffs;
    } else {
        p.kind = direct ? NFQED_PV_DIRECT : NFQED_PV_AVERAGED;
    }
    return p;
}

nfqed_orientation orientation(const std::string& o) {
    if (o == "parallel") return NFQED_PARALLEL;
    if (o == "binormal") return NFQED_BINORMAL;
    return NFQED_NORMAL;
}

// Unit dipole along the chain's local axes at phi = 0.
void dipole_of(const std::string& o, double d[6]) {
    for (int i = 0; i < 6; ++i) d[i] = 0;
    d[o == "parallel" ? 4 : o == "binormal" ? 2 : 0] = 1;
}

nlohmann::json base_meta(const RunConfig& c, const std::string& command, const nfqed_fiber* f) {
    nlohmann::json m;
    m["tool"] = "nfqed";
    m["version"] = nfqed_version();
    m["command"] = command;
    m["config"] = to_json(c);
    m["conventions"] = {
        {"radial_coordinate", "emitters sit at r = r_f + x_a, phi = 0; x_a is the distance from the fiber surface"},
        {"axes", "parallel = z (fiber axis), binormal = phi, normal = r"},
        {"coupling_units", "gamma, the single-emitter vacuum decay rate"},
        {"dispersion_outside_band", "refractive index frozen at the band edge for radiation-mode integrals"}};
    if (f) {
        char* s = nullptr;
        check(nfqed_fiber_material_json(f, &s), "material");
        m["material"] = nlohmann::json::parse(take(s));
    }
    return m;
}

std::filesystem::path out_dir(const RunConfig& c) { return c.output_dir; }

EnsemblePtr make_ensemble(const RunConfig& c, const nfqed_fiber* f) {
    nfqed_ensemble* e = nullptr;
    const double w = omega_a(c);
    if (c.chain) {
        check(nfqed_ensemble_chain(f, c.chain->n, c.chain->spacing_over_lambda * c.wavelength_nm * nm,
                                   c.chain->x_a_nm * nm, orientation(c.chain->orientation), w, &e),
              "chain");
        return EnsemblePtr(e);
    }
    if (c.emitters.empty()) throw ConfigError("the spectrum command needs a 'chain' table or an 'emitters' list");
    check(nfqed_ensemble_create(w, &e), "ensemble");
    EnsemblePtr out(e);
    for (std::size_t i = 0; i < c.emitters.size(); ++i) {
        const EmitterConfig& em = c.emitters[i];
        const double pos[3] = {em.r_nm * nm, em.phi, em.z_nm * nm};
        double d[6];
        for (int k = 0; k < 3; ++k) {
            d[2 * k] = em.dipole[k].real();
            d[2 * k + 1] = em.dipole[k].imag();
        }
        check(nfqed_ensemble_add(e, pos, d), "emitters[" + std::to_string(i) + "]");
    }
    return out;
}

}  // namespace

void cmd_dispersion(const RunConfig& c) {
    FiberPtr f = make_fiber(c);
    const DispersionConfig& d = c.dispersion;
    CsvTable t({"wavelength_nm", "omega_rad_per_s", "n1", "beta_per_m", "n_eff", "beta_prime_s_per_m", "s"});
    for (int i = 0; i < d.points; ++i) {
        const double lam =
            d.points == 1 ? d.wavelength_min_nm
                          : d.wavelength_min_nm + (d.wavelength_max_nm - d.wavelength_min_nm) * i / (d.points - 1);
        const double w = 2 * pi * c_light / (lam * nm);
        nfqed_dispersion_point p{};
        check(nfqed_dispersion(f.get(), w, &p), "dispersion at " + num(lam) + " nm");
        t.add({num(lam), num(w), num(p.n1), num(p.beta), num(p.beta * c_light / w), num(p.beta_prime), num(p.s)});
    }
    nlohmann::json m = base_meta(c, "dispersion", f.get());
    m["columns"] = {{"wavelength_nm", "vacuum wavelength"},
                    {"omega_rad_per_s", "angular frequency"},
                    {"n1", "core refractive index"},
                    {"beta_per_m", "HE11 propagation constant"},
                    {"n_eff", "beta / k"},
                    {"beta_prime_s_per_m", "d beta / d omega"},
                    {"s", "HE11 mode parameter"}};
    write_result(out_dir(c), "dispersion", t.str(), m);
}

void cmd_green_map(const RunConfig& c) {
    FiberPtr f = make_fiber(c);
    const GreenMapConfig& g = c.green_map;
    const double w = omega_a(c);
    const double rf = c.fiber.radius_nm * nm;
    const double src[3] = {rf + g.x_a_nm * nm, 0, 0};
    const double unit = w / c_light / (6 * pi);  // Im G0 at coincidence
    const int comp = g.component == "xx" ? 0 : g.component == "yy" ? 1 : 2;
    const bool zx = g.plane == "zx";

    struct Point {
        double x, y, z;
        bool inside;
    };
    std::vector<Point> pts;
    std::vector<double> pairs;
    for (int i = 0; i < g.points[0]; ++i) {
        const double x = g.points[0] == 1 ? g.x_range_nm[0]
                                          : g.x_range_nm[0] + (g.x_range_nm[1] - g.x_range_nm[0]) * i / (g.points[0] - 1);
        for (int j = 0; j < g.points[1]; ++j) {
            const double o = g.points[1] == 1 ? g.other_range_nm[0]
                                              : g.other_range_nm[0] +
                                                    (g.other_range_nm[1] - g.other_range_nm[0]) * j / (g.points[1] - 1);
            Point p{x, zx ? 0.0 : o, zx ? o : 0.0, false};
            const double r = std::hypot(p.x, p.y) * nm;
            p.inside = r <= rf;
            pts.push_back(p);
            if (!p.inside) {
                const double cyl[3] = {r, std::atan2(p.y, p.x), p.z * nm};
                pairs.insert(pairs.end(), cyl, cyl + 3);
                pairs.insert(pairs.end(), src, src + 3);
            }
        }
    }

    const std::size_t n_out = pairs.size() / 6;
    std::vector<double> rad(18 * n_out);
    double achieved = 0;
    check(nfqed_im_g_radiation(f.get(), n_out, pairs.data(), w, nullptr, rad.data(), &achieved), "radiation map");
    nfqed_dispersion_point dp{};
    const bool guided = nfqed_dispersion(f.get(), w, &dp) == NFQED_OK;

    CsvTable t({"x_nm", "y_nm", "z_nm", "inside_fiber", "im_g_fiber", "im_g_vacuum"});
    std::size_t k = 0;
    const int diag = 2 * (3 * comp + comp);
    for (const Point& p : pts) {
        if (p.inside) {
            t.add({num(p.x), num(p.y), num(p.z), "1", "", ""});
            continue;
        }
        const double* field = pairs.data() + 6 * k;
        double total = rad[18 * k + diag];
        if (guided) {
            double gd[18];
            check(nfqed_im_g_guided(f.get(), field, src, w, gd), "guided map");
            total += gd[diag];
        }
        double vac[18];
        check(nfqed_im_g0(field, src, w, vac), "vacuum map");
        t.add({num(p.x), num(p.y), num(p.z), "0", num(total / unit), num(vac[diag] / unit)});
        ++k;
    }
    nlohmann::json m = base_meta(c, "green-map", f.get());
    m["columns"] = {{"x_nm, y_nm, z_nm", "field point, Cartesian, fiber axis along z"},
                    {"inside_fiber", "1 where the point lies inside the fiber or on its surface; values are left empty"},
                    {"im_g_fiber", "Im G_" + g.component + " with the fiber, guided plus radiation, over k / (6 pi)"},
                    {"im_g_vacuum", "free-space Im G_" + g.component + " over k / (6 pi)"}};
    m["source"] = {{"r_nm", src[0] / nm}, {"phi", 0.0}, {"z_nm", 0.0}};
    m["solver_meta"] = {{"radiation_achieved_tol", achieved}, {"guided_mode", guided}};
    write_result(out_dir(c), "green_map_" + g.component + "_" + g.plane, t.str(), m);
}

void cmd_pair_interaction(const RunConfig& c) {
    FiberPtr f = make_fiber(c);
    CachePtr cache = open_cache(c);
    const double w = omega_a(c);
    const double rf = c.fiber.radius_nm * nm;
    const nfqed_quad q = quad(c);
    const nfqed_pv p = pv(c, c.pv.strategy);
    CsvTable t({"x_a_nm", "orientation", "a_over_lambda", "v_rd_over_gamma", "v0_over_gamma", "relative_deviation"});
    for (double xa : c.pair_interaction.x_a_nm)
        for (const std::string& o : c.pair_interaction.orientations)
            for (double a : c.pair_interaction.a_over_lambda) {
                const double ra[3] = {rf + xa * nm, 0, 0};
                const double rb[3] = {rf + xa * nm, 0, a * c.wavelength_nm * nm};
                double d[6], v0[2], g0[2], vrd[2];
                dipole_of(o, d);
                check(nfqed_v0_pair(ra, rb, d, d, w, v0, g0), "vacuum pair");
                check(nfqed_v_rd_pair(f.get(), ra, rb, d, d, w, &q, &p, cache.get(), vrd),
                      "pair at a/lambda = " + num(a));
                t.add({num(xa), o, num(a), num(vrd[0]), num(v0[0]), num(std::abs(vrd[0] - v0[0]) / std::abs(v0[0]))});
            }
    nlohmann::json m = base_meta(c, "pair-interaction", f.get());
    m["columns"] = {{"v_rd_over_gamma", "radiation-mode part of the coherent coupling"},
                    {"v0_over_gamma", "free-space coherent coupling"},
                    {"relative_deviation", "|v_rd - v0| / |v0|"}};
    m["solver_meta"] = {{"pv_kind", c.pv.strategy}};
    write_result(out_dir(c), "pair_interaction", t.str(), m);
}

void cmd_pv_benchmark(const RunConfig& c) {
    const double w = omega_a(c);
    const nfqed_pv avg = pv(c, "averaged"), dir = pv(c, "direct");
    double d[6] = {0, 0, 0, 0, 0, 0};
    d[c.pv_benchmark.orientation == "parallel" ? 4 : 0] = 1;
    CsvTable t({"a_over_lambda", "v0_exact", "v_averaged", "v_direct", "abs_error_averaged", "abs_error_direct"});
    for (double a : c.pv_benchmark.a_over_lambda) {
        const double ra[3] = {0, 0, 0};
        const double rb[3] = {0, 0, a * c.wavelength_nm * nm};
        double v0[2], g0[2], va[2], vd[2];
        check(nfqed_v0_pair(ra, rb, d, d, w, v0, g0), "vacuum pair");
        check(nfqed_v0_numeric(ra, rb, d, d, w, &avg, va), "averaged estimate");
        check(nfqed_v0_numeric(ra, rb, d, d, w, &dir, vd), "direct estimate");
        t.add({num(a), num(v0[0]), num(va[0]), num(vd[0]), num(std::abs(va[0] - v0[0])), num(std::abs(vd[0] - v0[0]))});
    }
    nlohmann::json m = base_meta(c, "pv-benchmark", nullptr);
    m["columns"] = {{"v0_exact", "closed-form free-space coupling"},
                    {"v_averaged", "principal-value estimate averaged over cutoffs"},
                    {"v_direct", "principal-value estimate at a single cutoff"}};
    write_result(out_dir(c), "pv_benchmark", t.str(), m);
}

void cmd_spectrum(const RunConfig& c) {
    FiberPtr f = make_fiber(c);
    EnsemblePtr e = make_ensemble(c, f.get());
    CachePtr cache = open_cache(c);
    const nfqed_quad q = quad(c);
    const nfqed_pv p = pv(c, c.pv.strategy);
    std::vector<std::pair<std::string, nfqed_provenance>> runs;
    if (c.mode != "vacuum-approx") runs.emplace_back("exact", NFQED_FULL_EXACT);
    if (c.mode != "exact") runs.emplace_back("vacuum-approx", NFQED_VACUUM_APPROX);
    for (const auto& [name, mode] : runs) {
        nfqed_couplings* ch = nullptr;
        check(nfqed_assemble(f.get(), e.get(), mode, &q, &p, cache.get(), &ch), "couplings (" + name + ")");
        CouplingsPtr cm(ch);
        nfqed_spectrum* sh = nullptr;
        check(nfqed_transmission(cm.get(), c.drive.rabi, c.drive.detunings.data(), c.drive.detunings.size(), &sh),
              "transmission (" + name + ")");
        SpectrumPtr sp(sh);
        char* s = nullptr;
        check(nfqed_spectrum_csv(sp.get(), &s), "spectrum csv");
        const std::string csv = take(s);
        check(nfqed_spectrum_json(sp.get(), &s), "spectrum json");
        const nlohmann::json sj = nlohmann::json::parse(take(s));
        check(nfqed_couplings_csv(cm.get(), &s), "couplings csv");
        const std::string mcsv = take(s);

        nlohmann::json m = base_meta(c, "spectrum", f.get());
        m["provenance"] = sj["provenance"];
        m["emitters"] = nfqed_ensemble_size(e.get());
        m["solver_meta"] = sj["solver_meta"];
        m["columns"] = {{"delta_over_gamma", "probe detuning"}, {"T", "transmitted power fraction"}};
        write_result(out_dir(c), "spectrum_" + name, csv, m);
        m["columns"] = {{"i, j", "emitter indices"}, {"V, Gamma", "couplings in units of gamma as (re, im)"}};
        write_result(out_dir(c), "couplings_" + name, mcsv, m);
    }
}

void cmd_check_config(const RunConfig& c) { std::printf("%s\n", to_json(c).dump(2).c_str()); }

}  // namespace nfqed_cli
