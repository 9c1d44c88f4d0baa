#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

namespace nfqed::specfun {

using cplx = std::complex<double>;

enum class CylKind { BesselJ, ModBesselK, Hankel1, Hankel2 };

/// Cylinder function of integer order m >= 0 at real x.
/// x = 0 is accepted for BesselJ only; K and H kinds raise DomainError for
/// x <= 0 and OverflowError when the value exceeds double range.
cplx cyl_eval(CylKind kind, int m, double x);

/// First derivative with respect to x, same domain rules as cyl_eval.
cplx cyl_deriv(CylKind kind, int m, double x);

/// 2^e, equal to std::ldexp(1.0, e) but built from the bit pattern in the
/// normal range.
inline double pow2(int e) {
    if (e >= -1022 && e <= 1023) return std::bit_cast<double>(static_cast<std::uint64_t>(e + 1023) << 52);
    if (e > 1023) return std::numeric_limits<double>::infinity();
    return std::ldexp(1.0, e);
}

double bessel_j(int m, double x);
double bessel_y(int m, double x);
double bessel_k(int m, double x);
double bessel_j_deriv(int m, double x);
double bessel_y_deriv(int m, double x);
double bessel_k_deriv(int m, double x);

/// J_m, J'_m, Y_m, Y'_m for m = 0..max_order at one argument, each stored as
/// mantissa and a power-of-two exponent so that orders far above x neither
/// underflow (J) nor overflow (Y):
///
///   J_m(x) = j[m] * 2^ej[m],  J'_m(x) = jp[m] * 2^ej[m]
///   Y_m(x) = y[m] * 2^ey[m],  Y'_m(x) = yp[m] * 2^ey[m]
///
/// J comes from Miller's backward recurrence normalized to J_0 or J_1, Y from
/// forward recurrence seeded with Y_0 and Y_1.
struct ScaledCylinderSeq {
    double x = 0.0;
    int max_order = -1;
    std::vector<double> j, jp, y, yp;
    std::vector<int> ej, ey;

    void compute(double arg, int order_max, bool with_y = true);
    double J(int m) const;
    double Y(int m) const;
};

}  // namespace nfqed::specfun
