#pragma once

#include "nfqed/types.hpp"

namespace nfqed {

/// Free-space Green's tensor between two Cartesian points [m].
/// DomainError for coincident points.
Mat3c g0(const Vec3d& r_a, const Vec3d& r_b, double omega);

/// Longitudinal part (3 rr - 1) / (4 pi r^3 k^2); purely real.
Mat3d g0_longitudinal(const Vec3d& r_a, const Vec3d& r_b, double omega);

/// g0 - g0_longitudinal.
Mat3c g0_transverse(const Vec3d& r_a, const Vec3d& r_b, double omega);

/// Im g0, finite at coincidence where it equals k / (6 pi) times identity.
/// A series replaces the closed form for k r < 0.05.
Mat3d im_g0(const Vec3d& r_a, const Vec3d& r_b, double omega);

/// Re g0. DomainError for coincident points.
Mat3d re_g0(const Vec3d& r_a, const Vec3d& r_b, double omega);

struct PairRates {
    cplx V = 0.0;      // in units of gamma
    cplx Gamma = 0.0;  // in units of gamma
};

/// Vacuum coherent and dissipative couplings of two unit dipoles, in units of
/// the single-emitter vacuum rate. Coincident points return V = 0 (no
/// self-interaction) and the single-emitter Gamma.
PairRates v0_gamma0(const Vec3c& d_a, const Vec3c& d_b, const Vec3d& r_a, const Vec3d& r_b, double omega_a);

/// d_a^dagger G d_b
inline cplx sandwich(const Vec3c& d_a, const Mat3c& G, const Vec3c& d_b) { return d_a.dot(G * d_b); }

}  // namespace nfqed
