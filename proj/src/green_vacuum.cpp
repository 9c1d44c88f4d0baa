#include "nfqed/green_vacuum.hpp"

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"

namespace nfqed {

namespace {

struct Sep {
    double r;
    Mat3d rr;  // unit-vector outer product
};

Sep separation(const Vec3d& r_a, const Vec3d& r_b) {
    const Vec3d d = r_a - r_b;
    Sep s;
    s.r = d.norm();
    s.rr = s.r > 0 ? Mat3d((d / s.r) * (d / s.r).transpose()) : Mat3d::Zero();
    return s;
}

Sep require_distinct(const Vec3d& r_a, const Vec3d& r_b) {
    const Sep s = separation(r_a, r_b);
    if (!(s.r > 0.0)) throw DomainError("Green's tensor needs distinct points");
    return s;
}

void check_omega(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("frequency must be positive");
}

}  // namespace

Mat3c g0(const Vec3d& r_a, const Vec3d& r_b, double omega) {
    // negative frequencies are allowed here so the reflection property can be exercised
    if (omega == 0.0 || !std::isfinite(omega)) throw DomainError("frequency must be nonzero");
    const Sep s = require_distinct(r_a, r_b);
    const double k = wavenumber(omega);
    const double x = k * s.r;
    const Mat3d I = Mat3d::Identity();
    const cplx pre = k * std::exp(cplx(0.0, x)) / (4.0 * pi);
    const cplx near = cplx(1.0 / (x * x * x), -1.0 / (x * x));
    return pre * ((I - s.rr).cast<cplx>() / x + (3.0 * s.rr - I).cast<cplx>() * near);
}

Mat3d g0_longitudinal(const Vec3d& r_a, const Vec3d& r_b, double omega) {
    check_omega(omega);
    const Sep s = require_distinct(r_a, r_b);
    const double k = wavenumber(omega);
    return (3.0 * s.rr - Mat3d::Identity()) / (4.0 * pi * s.r * s.r * s.r * k * k);
}

Mat3c g0_transverse(const Vec3d& r_a, const Vec3d& r_b, double omega) {
    return g0(r_a, r_b, omega) - g0_longitudinal(r_a, r_b, omega).cast<cplx>();
}

Mat3d im_g0(const Vec3d& r_a, const Vec3d& r_b, double omega) {
    check_omega(omega);
    const Sep s = separation(r_a, r_b);
    const double k = wavenumber(omega);
    const double x = k * s.r;
    double sinc, f;  // sin x / x and (sin x - x cos x) / x^3
    if (x < 0.05) {
        const double x2 = x * x;
        sinc = 0.0;
        double t = 1.0;  // (-1)^n x^{2n} / (2n+1)!
        for (int n = 0; n < 6; ++n) {
            sinc += t;
            t *= -x2 / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
        }
        // f as a series: sum_{n>=1} (-1)^{n+1} 2n x^{2n-2} / (2n+1)!
        f = 0.0;
        double fact = 6.0;  // (2n+1)! for n = 1
        double p = 1.0;     // x^{2n-2}
        for (int n = 1; n <= 6; ++n) {
            f += ((n % 2) ? 1.0 : -1.0) * 2.0 * n * p / fact;
            p *= x2;
            fact *= (2.0 * n + 2.0) * (2.0 * n + 3.0);
        }
    } else {
        sinc = std::sin(x) / x;
        f = (std::sin(x) - x * std::cos(x)) / (x * x * x);
    }
    const Mat3d I = Mat3d::Identity();
    return k / (4.0 * pi) * ((I - s.rr) * sinc + (3.0 * s.rr - I) * f);
}

Mat3d re_g0(const Vec3d& r_a, const Vec3d& r_b, double omega) {
    check_omega(omega);
    const Sep s = require_distinct(r_a, r_b);
    const double k = wavenumber(omega);
    const double x = k * s.r;
    const Mat3d I = Mat3d::Identity();
    const double c = std::cos(x), sn = std::sin(x);
    return k / (4.0 * pi) * ((I - s.rr) * (c / x) + (3.0 * s.rr - I) * (c / (x * x * x) + sn / (x * x)));
}

PairRates v0_gamma0(const Vec3c& d_a, const Vec3c& d_b, const Vec3d& r_a, const Vec3d& r_b, double omega_a) {
    if (std::abs(d_a.norm() - 1.0) > 1e-12 || std::abs(d_b.norm() - 1.0) > 1e-12)
        throw InvalidArgument("dipole vectors must have unit norm");
    const double k = wavenumber(omega_a);
    PairRates out;
    out.Gamma = (6.0 * pi / k) * sandwich(d_a, im_g0(r_a, r_b, omega_a).cast<cplx>(), d_b);
    if ((r_a - r_b).norm() > 0.0)
        out.V = (3.0 * pi / k) * sandwich(d_a, re_g0(r_a, r_b, omega_a).cast<cplx>(), d_b);
    return out;
}

}  // namespace nfqed
