/* C interface to the nanofiber dipole-interaction library.
 *
 * Every function returns an nfqed_status. On failure the message of the last
 * error on the calling thread is available from nfqed_last_error(). Objects
 * are opaque handles released with their _destroy function; strings returned
 * through char** are released with nfqed_free_string.
 *
 * Units: SI for lengths [m] and frequencies [rad/s]; couplings in units of the
 * vacuum single-emitter rate gamma. 3x3 complex matrices are 18 doubles,
 * row-major, (re, im) interleaved. Complex 3-vectors are 6 doubles. */
#ifndef NFQED_H
#define NFQED_H

#include <stddef.h>

#if defined(_WIN32)
#define NFQED_API __declspec(dllexport)
#else
#define NFQED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    NFQED_OK = 0,
    NFQED_ERR_DOMAIN = 1,
    NFQED_ERR_OVERFLOW = 2,
    NFQED_ERR_INVALID_ARGUMENT = 3,
    NFQED_ERR_NO_GUIDED_MODE = 4,
    NFQED_ERR_MULTIMODE = 5,
    NFQED_ERR_CONVERGENCE = 6,
    NFQED_ERR_SINGULAR = 7,
    NFQED_ERR_CONFIG = 8,
    NFQED_ERR_CACHE = 9,
    NFQED_ERR_INTERNAL = 10
} nfqed_status;

typedef enum { NFQED_PARALLEL = 0, NFQED_BINORMAL = 1, NFQED_NORMAL = 2 } nfqed_orientation;

typedef enum { NFQED_GUIDED_ONLY = 0, NFQED_FULL_EXACT = 1, NFQED_VACUUM_APPROX = 2 } nfqed_provenance;

typedef enum {
    NFQED_PV_AVERAGED = 0, /* per-pair window [2, 10] lambda_a / r, 32 cutoffs */
    NFQED_PV_DIRECT = 1,   /* per-pair single cutoff at the window end */
    NFQED_PV_FIXED_AVERAGED = 2,
    NFQED_PV_FIXED_DIRECT = 3
} nfqed_pv_kind;

typedef struct {
    int m_cut;       /* 0: automatic */
    int theta_order; /* 0: automatic */
    double rel_tol;
    int max_refinements;
} nfqed_quad;

typedef struct {
    nfqed_pv_kind kind;
    double x_c;            /* FIXED_DIRECT cutoff, units of omega_a */
    double x_min_c, x_max_c; /* FIXED_AVERAGED window, units of omega_a */
    int n_cutoffs;
} nfqed_pv;

typedef struct {
    double omega, n1, beta, beta_prime, kappa, q, s;
} nfqed_dispersion_point;

typedef struct nfqed_fiber nfqed_fiber;
typedef struct nfqed_ensemble nfqed_ensemble;
typedef struct nfqed_cache nfqed_cache;
typedef struct nfqed_couplings nfqed_couplings;
typedef struct nfqed_spectrum nfqed_spectrum;

NFQED_API const char* nfqed_last_error(void);
NFQED_API const char* nfqed_status_name(nfqed_status s);
NFQED_API const char* nfqed_version(void);
NFQED_API void nfqed_free_string(char* s);
NFQED_API nfqed_status nfqed_set_threads(int n);

NFQED_API void nfqed_quad_default(nfqed_quad* q);
NFQED_API void nfqed_pv_default(nfqed_pv* p);

/* material: "silica", "vacuum", or the text of a JSON material file. */
NFQED_API nfqed_status nfqed_fiber_create(double radius, const char* material, nfqed_fiber** out);
NFQED_API nfqed_status nfqed_fiber_load(double radius, const char* material_path, nfqed_fiber** out);
NFQED_API void nfqed_fiber_destroy(nfqed_fiber* f);
NFQED_API double nfqed_fiber_radius(const nfqed_fiber* f);
/* Resolved material as JSON text. */
NFQED_API nfqed_status nfqed_fiber_material_json(const nfqed_fiber* f, char** out);

NFQED_API nfqed_status nfqed_refractive_index(const nfqed_fiber* f, double omega, double* n);
NFQED_API nfqed_status nfqed_dispersion(const nfqed_fiber* f, double omega, nfqed_dispersion_point* out);

/* Green tensors. Points are cylindrical (r, phi, z). */
NFQED_API nfqed_status nfqed_g0(const double a[3], const double b[3], double omega, double out[18]);
NFQED_API nfqed_status nfqed_im_g0(const double a[3], const double b[3], double omega, double out[18]);
/* n_pairs pairs, 6 doubles each (a then b). achieved may be NULL. */
NFQED_API nfqed_status nfqed_im_g_radiation(const nfqed_fiber* f, size_t n_pairs, const double* pairs, double omega,
                                            const nfqed_quad* q, double* out, double* achieved);
NFQED_API nfqed_status nfqed_im_g_guided(const nfqed_fiber* f, const double a[3], const double b[3], double omega,
                                         double out[18]);

/* Pair couplings in units of gamma: out = (re, im). */
NFQED_API nfqed_status nfqed_v0_pair(const double a[3], const double b[3], const double d_a[6], const double d_b[6],
                                     double omega_a, double v[2], double gamma[2]);
NFQED_API nfqed_status nfqed_v0_numeric(const double a[3], const double b[3], const double d_a[6],
                                        const double d_b[6], double omega_a, const nfqed_pv* pv, double v[2]);
NFQED_API nfqed_status nfqed_v_rd_pair(const nfqed_fiber* f, const double a[3], const double b[3],
                                       const double d_a[6], const double d_b[6], double omega_a, const nfqed_quad* q,
                                       const nfqed_pv* pv, const nfqed_cache* cache, double v[2]);

NFQED_API nfqed_status nfqed_cache_open(const char* dir, nfqed_cache** out);
NFQED_API void nfqed_cache_close(nfqed_cache* c);

NFQED_API nfqed_status nfqed_ensemble_create(double omega_a, nfqed_ensemble** out);
NFQED_API nfqed_status nfqed_ensemble_add(nfqed_ensemble* e, const double pos[3], const double dipole[6]);
/* n emitters at r = r_f + x_a, phi = 0, z = i * spacing. */
NFQED_API nfqed_status nfqed_ensemble_chain(const nfqed_fiber* f, int n, double spacing, double x_a,
                                            nfqed_orientation o, double omega_a, nfqed_ensemble** out);
NFQED_API size_t nfqed_ensemble_size(const nfqed_ensemble* e);
NFQED_API void nfqed_ensemble_destroy(nfqed_ensemble* e);

NFQED_API nfqed_status nfqed_assemble(const nfqed_fiber* f, const nfqed_ensemble* e, nfqed_provenance mode,
                                      const nfqed_quad* q, const nfqed_pv* pv, const nfqed_cache* cache,
                                      nfqed_couplings** out);
NFQED_API size_t nfqed_couplings_size(const nfqed_couplings* c);
NFQED_API nfqed_status nfqed_couplings_get(const nfqed_couplings* c, size_t i, size_t j, double v[2],
                                           double gamma[2]);
NFQED_API nfqed_status nfqed_couplings_json(const nfqed_couplings* c, char** out);
NFQED_API nfqed_status nfqed_couplings_csv(const nfqed_couplings* c, char** out);
NFQED_API void nfqed_couplings_destroy(nfqed_couplings* c);

/* rabi in units of gamma. */
NFQED_API nfqed_status nfqed_transmission(const nfqed_couplings* c, double rabi, const double* detunings, size_t n,
                                          nfqed_spectrum** out);
NFQED_API size_t nfqed_spectrum_size(const nfqed_spectrum* s);
NFQED_API nfqed_status nfqed_spectrum_get(const nfqed_spectrum* s, size_t i, double* delta, double* t);
NFQED_API nfqed_status nfqed_spectrum_csv(const nfqed_spectrum* s, char** out);
NFQED_API nfqed_status nfqed_spectrum_json(const nfqed_spectrum* s, char** out);
NFQED_API void nfqed_spectrum_destroy(nfqed_spectrum* s);

#ifdef __cplusplus
}
#endif

#endif
