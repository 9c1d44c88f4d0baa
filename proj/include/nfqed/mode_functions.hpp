#pragma once

#include <vector>

#include "nfqed/fiber_dispersion.hpp"
#include "nfqed/specfun.hpp"
#include "nfqed/types.hpp"

namespace nfqed {

enum class Basis { Cylindrical, Cartesian };

struct ProfileVector {
    Vec3c v = Vec3c::Zero();  // (e_r, e_phi, e_z) or (e_x, e_y, e_z)
    Basis basis = Basis::Cylindrical;
    double phi = 0.0;  // azimuth of the cylindrical basis
};

/// Rotates a cylindrical-basis vector to Cartesian. InvalidArgument if the
/// input is already Cartesian.
ProfileVector to_cartesian(const ProfileVector& v, double phi);

struct GuidedModeIndex {
    double beta = 0.0;
    int l = 1;  // polarization
    int f = 1;  // propagation direction
};

/// HE11 profile functions at one dispersion point. The normalization constant
/// C is fixed by 2 pi int eps |e|^2 r dr = 1, evaluated numerically.
class GuidedProfile {
public:
    GuidedProfile(const FiberSpec& fiber, const GuidedDispersionPoint& point);

    ProfileVector at(const GuidedModeIndex& idx, double r) const;
    /// Same as at() but with C = 1.
    Vec3c unnormalized(int l, int f, double r) const;

    double norm_constant() const { return C_; }
    const GuidedDispersionPoint& point() const { return p_; }
    double radius() const { return a_; }

private:
    GuidedDispersionPoint p_;
    double a_;
    double C_ = 1.0;
    double inner_ratio_;  // K1(q a) / J1(kappa a)
};

struct RadiationModeIndex {
    double omega = 0.0;
    double theta = 0.0;
    int m = 0;
    int l = 1;
};

/// Radiation-mode coefficients with the magnetic amplitudes
/// rescaled by mu0 c (Bt = mu0 c B, Dt_j = mu0 c D_j), which removes eps0 and
/// mu0 from every relation. Values are unscaled doubles, so only moderate
/// orders are representable; the field evaluators below never form them.
struct RadiationCoefficients {
    double kappa = 0.0, q = 0.0, beta = 0.0;
    double A = 0.0;
    double eta_t = 0.0;  // mu0 c eta
    cplx Bt;
    cplx C[2], Dt[2];
    cplx V[2], M[2], L[2];
};

RadiationCoefficients radiation_coefficients(double n1, double radius, double k, double theta, int m, int l);

/// Profile of one radiation mode at radius r > 0 (interior forms for r < r_f).
/// n1 is passed explicitly so callers choose strict or clamped dispersion.
ProfileVector radiation_profile(double n1, double radius, const RadiationModeIndex& idx, double r);

/// Same, with the fiber's refractive index at idx.omega frozen outside its
/// validity band.
ProfileVector radiation_profile(const FiberSpec& fiber, const RadiationModeIndex& idx, double r);

/// Exterior radiation fields for every m = 0..m_max and l = +-1 at one angle
/// and a set of radii, with every Bessel sequence computed once. Each field is
/// e = (i fr, fphi, fz) with real fr, fphi, fz.
class RadiationNode {
public:
    struct Fields {
        double fr, fphi, fz;
    };

    void compute(double n1, double radius, double k, double theta, int m_max, const std::vector<double>& radii);

    const Fields& at(int m, int l, int ir) const { return out_[(2 * m + (l > 0 ? 1 : 0)) * n_r_ + ir]; }
    int m_max() const { return m_max_; }

private:
    int m_max_ = -1;
    int n_r_ = 0;
    std::vector<Fields> out_;
    specfun::ScaledCylinderSeq sy_, su_;
    std::vector<specfun::ScaledCylinderSeq> sw_;
};

}  // namespace nfqed
