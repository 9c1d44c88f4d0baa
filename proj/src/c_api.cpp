#include "nfqed/nfqed.h"

#include <cstring>
#include <memory>
#include <string>

#include "nfqed/constants.hpp"
#include "nfqed/coupling_matrices.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/green_fiber.hpp"
#include "nfqed/green_vacuum.hpp"
#include "nfqed/pv_integrator.hpp"
#include "nfqed/transmission.hpp"

using namespace nfqed;

struct nfqed_fiber {
    FiberSpec spec;
    std::unique_ptr<FiberDispersion> disp;  // built on first use
};
struct nfqed_ensemble {
    EmitterEnsemble e;
};
struct nfqed_cache {
    SpectralCache c;
};
struct nfqed_couplings {
    CouplingMatrices m;
};
struct nfqed_spectrum {
    SpectrumResult s;
};

namespace {

thread_local std::string last_error;

nfqed_status fail(nfqed_status s, const char* what) {
    last_error = what;
    return s;
}

template <class F>
nfqed_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return NFQED_OK;
    } catch (const DomainError& e) {
        return fail(NFQED_ERR_DOMAIN, e.what());
    } catch (const OverflowError& e) {
        return fail(NFQED_ERR_OVERFLOW, e.what());
    } catch (const InvalidArgument& e) {
        return fail(NFQED_ERR_INVALID_ARGUMENT, e.what());
    } catch (const NoGuidedModeError& e) {
        return fail(NFQED_ERR_NO_GUIDED_MODE, e.what());
    } catch (const MultimodeError& e) {
        return fail(NFQED_ERR_MULTIMODE, e.what());
    } catch (const ConvergenceError& e) {
        return fail(NFQED_ERR_CONVERGENCE, (std::string(e.what()) + " (achieved " + std::to_string(e.achieved()) + ")").c_str());
    } catch (const SingularSystemError& e) {
        return fail(NFQED_ERR_SINGULAR, (std::string(e.what()) + " at delta = " + std::to_string(e.delta())).c_str());
    } catch (const ConfigError& e) {
        return fail(NFQED_ERR_CONFIG, e.what());
    } catch (const CacheError& e) {
        return fail(NFQED_ERR_CACHE, e.what());
    } catch (const std::exception& e) {
        return fail(NFQED_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(NFQED_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* name) {
    if (!p) throw InvalidArgument(std::string(name) + " is null");
}

CylPoint point(const double* p) {
    need(p, "point");
    return {p[0], p[1], p[2]};
}

Vec3c vec(const double* d) {
    need(d, "dipole");
    return Vec3c(cplx(d[0], d[1]), cplx(d[2], d[3]), cplx(d[4], d[5]));
}

void put(const Mat3c& m, double* out) {
    need(out, "output");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out[2 * (3 * i + j)] = m(i, j).real();
            out[2 * (3 * i + j) + 1] = m(i, j).imag();
        }
}

void put(cplx v, double* out) {
    if (!out) return;
    out[0] = v.real();
    out[1] = v.imag();
}

RadiationQuadratureSpec quad_of(const nfqed_quad* q) {
    RadiationQuadratureSpec s;
    if (q) {
        s.m_cut = q->m_cut;
        s.theta_order = q->theta_order;
        s.rel_tol = q->rel_tol;
        s.max_refinements = q->max_refinements;
    }
    if (s.m_cut < 0 || s.theta_order < 0 || s.max_refinements < 0 || !(s.rel_tol > 0.0))
        throw InvalidArgument("invalid quadrature settings");
    return s;
}

// per-pair default or a fixed strategy
struct PvChoice {
    PvKind kind = PvKind::FourierAveraged;
    std::optional<PvStrategy> fixed;
};

PvChoice pv_of(const nfqed_pv* p) {
    PvChoice c;
    if (!p) return c;
    switch (p->kind) {
        case NFQED_PV_AVERAGED: break;
        case NFQED_PV_DIRECT: c.kind = PvKind::DirectCutoff; break;
        case NFQED_PV_FIXED_AVERAGED: c.fixed = PvStrategy::averaged(p->x_min_c, p->x_max_c, p->n_cutoffs); break;
        case NFQED_PV_FIXED_DIRECT:
            c.kind = PvKind::DirectCutoff;
            c.fixed = PvStrategy::direct(p->x_c);
            break;
        default: throw InvalidArgument("unknown PV strategy kind");
    }
    return c;
}

PvStrategy strategy_for(const PvChoice& c, const CylPoint& a, const CylPoint& b, double omega_a) {
    if (c.fixed) return *c.fixed;
    return PvStrategy::default_for((a.cartesian() - b.cartesian()).norm() / wavelength_from_omega(omega_a), c.kind);
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

const FiberDispersion& dispersion(const nfqed_fiber* f) {
    need(f, "fiber");
    if (!f->disp) const_cast<nfqed_fiber*>(f)->disp = std::make_unique<FiberDispersion>(f->spec);
    return *f->disp;
}

}  // namespace

extern "C" {

const char* nfqed_last_error(void) { return last_error.c_str(); }

const char* nfqed_status_name(nfqed_status s) {
    switch (s) {
        case NFQED_OK: return "ok";
        case NFQED_ERR_DOMAIN: return "domain error";
        case NFQED_ERR_OVERFLOW: return "overflow";
        case NFQED_ERR_INVALID_ARGUMENT: return "invalid argument";
        case NFQED_ERR_NO_GUIDED_MODE: return "no guided mode";
        case NFQED_ERR_MULTIMODE: return "multimode fiber";
        case NFQED_ERR_CONVERGENCE: return "convergence failure";
        case NFQED_ERR_SINGULAR: return "singular system";
        case NFQED_ERR_CONFIG: return "configuration error";
        case NFQED_ERR_CACHE: return "cache error";
        case NFQED_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* nfqed_version(void) { return "1.0.0"; }

void nfqed_free_string(char* s) { std::free(s); }

nfqed_status nfqed_set_threads(int n) {
    return guarded([&] { set_worker_threads(n); });
}

void nfqed_quad_default(nfqed_quad* q) {
    if (!q) return;
    const RadiationQuadratureSpec s;
    *q = {s.m_cut, s.theta_order, s.rel_tol, s.max_refinements};
}

void nfqed_pv_default(nfqed_pv* p) {
    if (!p) return;
    *p = {NFQED_PV_AVERAGED, 0.0, 0.0, 0.0, 32};
}

nfqed_status nfqed_fiber_create(double radius, const char* material, nfqed_fiber** out) {
    return guarded([&] {
        need(out, "out");
        need(material, "material");
        auto f = std::make_unique<nfqed_fiber>();
        f->spec.radius = radius;
        const std::string m = material;
        if (m == "silica")
            f->spec.material = SellmeierModel::fused_silica();
        else if (m == "vacuum")
            f->spec.material = SellmeierModel::vacuum();
        else
            f->spec.material = SellmeierModel::from_json_text(m);
        f->spec.validate();
        *out = f.release();
    });
}

nfqed_status nfqed_fiber_load(double radius, const char* material_path, nfqed_fiber** out) {
    return guarded([&] {
        need(out, "out");
        need(material_path, "material_path");
        auto f = std::make_unique<nfqed_fiber>();
        f->spec.radius = radius;
        f->spec.material = SellmeierModel::load(material_path);
        f->spec.validate();
        *out = f.release();
    });
}

void nfqed_fiber_destroy(nfqed_fiber* f) { delete f; }

double nfqed_fiber_radius(const nfqed_fiber* f) { return f ? f->spec.radius : 0.0; }

nfqed_status nfqed_fiber_material_json(const nfqed_fiber* f, char** out) {
    return guarded([&] {
        need(f, "fiber");
        need(out, "out");
        *out = dup(f->spec.material.to_json_text());
    });
}

nfqed_status nfqed_refractive_index(const nfqed_fiber* f, double omega, double* n) {
    return guarded([&] {
        need(f, "fiber");
        need(n, "n");
        *n = refractive_index(f->spec, omega);
    });
}

nfqed_status nfqed_dispersion(const nfqed_fiber* f, double omega, nfqed_dispersion_point* out) {
    return guarded([&] {
        need(out, "out");
        const GuidedDispersionPoint p = dispersion(f).point(omega);
        *out = {p.omega, p.n1, p.beta, p.beta_prime, p.kappa, p.q, p.s};
    });
}

nfqed_status nfqed_g0(const double a[3], const double b[3], double omega, double out[18]) {
    return guarded([&] { put(g0(point(a).cartesian(), point(b).cartesian(), omega), out); });
}

nfqed_status nfqed_im_g0(const double a[3], const double b[3], double omega, double out[18]) {
    return guarded([&] { put(Mat3c(im_g0(point(a).cartesian(), point(b).cartesian(), omega).cast<cplx>()), out); });
}

nfqed_status nfqed_im_g_radiation(const nfqed_fiber* f, size_t n_pairs, const double* pairs, double omega,
                                  const nfqed_quad* q, double* out, double* achieved) {
    return guarded([&] {
        need(f, "fiber");
        quad_of(q);
        if (n_pairs == 0) return;
        need(out, "out");
        need(pairs, "pairs");
        std::vector<PointPair> pp(n_pairs);
        for (size_t i = 0; i < n_pairs; ++i) pp[i] = {point(pairs + 6 * i), point(pairs + 6 * i + 3)};
        const RadiationResult r = im_g_radiation_certified(f->spec, omega, pp, quad_of(q));
        for (size_t i = 0; i < n_pairs; ++i) put(r.values[i], out + 18 * i);
        if (achieved) *achieved = r.achieved_tol;
    });
}

nfqed_status nfqed_im_g_guided(const nfqed_fiber* f, const double a[3], const double b[3], double omega,
                               double out[18]) {
    return guarded([&] { put(im_g_guided(dispersion(f), point(a), point(b), omega), out); });
}

nfqed_status nfqed_v0_pair(const double a[3], const double b[3], const double d_a[6], const double d_b[6],
                           double omega_a, double v[2], double gamma[2]) {
    return guarded([&] {
        const PairRates r = v0_gamma0(vec(d_a), vec(d_b), point(a).cartesian(), point(b).cartesian(), omega_a);
        put(r.V, v);
        put(r.Gamma, gamma);
    });
}

nfqed_status nfqed_v0_numeric(const double a[3], const double b[3], const double d_a[6], const double d_b[6],
                              double omega_a, const nfqed_pv* pv, double v[2]) {
    return guarded([&] {
        const PairSpec p{point(a), point(b), vec(d_a), vec(d_b)};
        put(v0_numeric(p, omega_a, strategy_for(pv_of(pv), p.a, p.b, omega_a)), v);
    });
}

nfqed_status nfqed_v_rd_pair(const nfqed_fiber* f, const double a[3], const double b[3], const double d_a[6],
                             const double d_b[6], double omega_a, const nfqed_quad* q, const nfqed_pv* pv,
                             const nfqed_cache* cache, double v[2]) {
    return guarded([&] {
        need(f, "fiber");
        const PairSpec p{point(a), point(b), vec(d_a), vec(d_b)};
        put(v_rd_pair(f->spec, p, omega_a, quad_of(q), strategy_for(pv_of(pv), p.a, p.b, omega_a),
                      cache ? &cache->c : nullptr),
            v);
    });
}

nfqed_status nfqed_cache_open(const char* dir, nfqed_cache** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new nfqed_cache{SpectralCache(dir)};
    });
}

void nfqed_cache_close(nfqed_cache* c) { delete c; }

nfqed_status nfqed_ensemble_create(double omega_a, nfqed_ensemble** out) {
    return guarded([&] {
        need(out, "out");
        if (!(omega_a > 0.0)) throw InvalidArgument("omega_a must be positive");
        auto e = std::make_unique<nfqed_ensemble>();
        e->e.omega_a = omega_a;
        *out = e.release();
    });
}

nfqed_status nfqed_ensemble_add(nfqed_ensemble* e, const double pos[3], const double dipole[6]) {
    return guarded([&] {
        need(e, "ensemble");
        const Vec3c d = vec(dipole);
        if (std::abs(d.norm() - 1.0) > 1e-12) throw InvalidArgument("dipole must be a unit vector");
        e->e.positions.push_back(point(pos));
        e->e.dipoles.push_back(d);
    });
}

nfqed_status nfqed_ensemble_chain(const nfqed_fiber* f, int n, double spacing, double x_a, nfqed_orientation o,
                                  double omega_a, nfqed_ensemble** out) {
    return guarded([&] {
        need(f, "fiber");
        need(out, "out");
        Orientation orient;
        switch (o) {
            case NFQED_PARALLEL: orient = Orientation::Parallel; break;
            case NFQED_BINORMAL: orient = Orientation::Binormal; break;
            case NFQED_NORMAL: orient = Orientation::Normal; break;
            default: throw InvalidArgument("unknown orientation");
        }
        *out = new nfqed_ensemble{make_chain(f->spec, n, spacing, x_a, orient, omega_a)};
    });
}

size_t nfqed_ensemble_size(const nfqed_ensemble* e) { return e ? e->e.size() : 0; }

void nfqed_ensemble_destroy(nfqed_ensemble* e) { delete e; }

nfqed_status nfqed_assemble(const nfqed_fiber* f, const nfqed_ensemble* e, nfqed_provenance mode,
                            const nfqed_quad* q, const nfqed_pv* pv, const nfqed_cache* cache,
                            nfqed_couplings** out) {
    return guarded([&] {
        need(f, "fiber");
        need(e, "ensemble");
        need(out, "out");
        AssembleOptions opt;
        switch (mode) {
            case NFQED_GUIDED_ONLY: opt.mode = Provenance::GuidedOnly; break;
            case NFQED_FULL_EXACT: opt.mode = Provenance::FullExact; break;
            case NFQED_VACUUM_APPROX: opt.mode = Provenance::RadiationVacuumApprox; break;
            default: throw InvalidArgument("unknown provenance");
        }
        opt.quad = quad_of(q);
        const PvChoice c = pv_of(pv);
        opt.pv_kind = c.kind;
        opt.pv_fixed = c.fixed;
        opt.cache = cache ? &cache->c : nullptr;
        *out = new nfqed_couplings{assemble(f->spec, e->e, opt)};
    });
}

size_t nfqed_couplings_size(const nfqed_couplings* c) { return c ? static_cast<size_t>(c->m.V.rows()) : 0; }

nfqed_status nfqed_couplings_get(const nfqed_couplings* c, size_t i, size_t j, double v[2], double gamma[2]) {
    return guarded([&] {
        need(c, "couplings");
        const auto n = static_cast<size_t>(c->m.V.rows());
        if (i >= n || j >= n) throw InvalidArgument("index out of range");
        put(c->m.V(i, j), v);
        put(c->m.Gamma(i, j), gamma);
    });
}

nfqed_status nfqed_couplings_json(const nfqed_couplings* c, char** out) {
    return guarded([&] {
        need(c, "couplings");
        need(out, "out");
        *out = dup(matrices_to_json(c->m));
    });
}

nfqed_status nfqed_couplings_csv(const nfqed_couplings* c, char** out) {
    return guarded([&] {
        need(c, "couplings");
        need(out, "out");
        *out = dup(matrices_to_csv(c->m));
    });
}

void nfqed_couplings_destroy(nfqed_couplings* c) { delete c; }

nfqed_status nfqed_transmission(const nfqed_couplings* c, double rabi, const double* detunings, size_t n,
                                nfqed_spectrum** out) {
    return guarded([&] {
        need(c, "couplings");
        need(out, "out");
        if (n > 0) need(detunings, "detunings");
        DriveSpec d;
        d.rabi = rabi;
        d.detunings.assign(detunings, detunings + n);
        *out = new nfqed_spectrum{transmission_spectrum(c->m, d)};
    });
}

size_t nfqed_spectrum_size(const nfqed_spectrum* s) { return s ? s->s.detunings.size() : 0; }

nfqed_status nfqed_spectrum_get(const nfqed_spectrum* s, size_t i, double* delta, double* t) {
    return guarded([&] {
        need(s, "spectrum");
        if (i >= s->s.detunings.size()) throw InvalidArgument("index out of range");
        if (delta) *delta = s->s.detunings[i];
        if (t) *t = s->s.transmission[i];
    });
}

nfqed_status nfqed_spectrum_csv(const nfqed_spectrum* s, char** out) {
    return guarded([&] {
        need(s, "spectrum");
        need(out, "out");
        *out = dup(spectrum_to_csv(s->s));
    });
}

nfqed_status nfqed_spectrum_json(const nfqed_spectrum* s, char** out) {
    return guarded([&] {
        need(s, "spectrum");
        need(out, "out");
        *out = dup(spectrum_to_json(s->s));
    });
}

void nfqed_spectrum_destroy(nfqed_spectrum* s) { delete s; }

}  // extern "C"
