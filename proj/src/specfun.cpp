#include "nfqed/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "nfqed/errors.hpp"

namespace nfqed::specfun {

namespace {

constexpr int kRescaleBits = 400;
const double kRescaleThreshold = std::ldexp(1.0, kRescaleBits);
const double kRescaleInv = std::ldexp(1.0, -kRescaleBits);

void check_order(int m) {
    if (m < 0) throw DomainError("cylinder function order must be non-negative, got " + std::to_string(m));
}

void check_positive(double x, const char* name) {
    if (!(x > 0.0)) throw DomainError(std::string(name) + " requires x > 0, got " + std::to_string(x));
}

template <class F>
double guarded(F&& f, const char* name, int m, double x) {
    try {
        double v = f();
        if (!std::isfinite(v))
            throw OverflowError(std::string(name) + " overflow at m=" + std::to_string(m) + ", x=" + std::to_string(x));
        return v;
    } catch (const std::overflow_error&) {
        throw OverflowError(std::string(name) + " overflow at m=" + std::to_string(m) + ", x=" + std::to_string(x));
    } catch (const std::domain_error& e) {
        throw DomainError(std::string(name) + ": " + e.what());
    }
}

}  // namespace

double bessel_j(int m, double x) {
    check_order(m);
    if (x < 0.0) throw DomainError("bessel_j requires x >= 0");
    if (x == 0.0) return m == 0 ? 1.0 : 0.0;
    return guarded([&] { return boost::math::cyl_bessel_j(m, x); }, "bessel_j", m, x);
}

double bessel_y(int m, double x) {
    check_order(m);
    check_positive(x, "bessel_y");
    return guarded([&] { return boost::math::cyl_neumann(m, x); }, "bessel_y", m, x);
}

double bessel_k(int m, double x) {
    check_order(m);
    check_positive(x, "bessel_k");
    return guarded([&] { return boost::math::cyl_bessel_k(m, x); }, "bessel_k", m, x);
}

double bessel_j_deriv(int m, double x) {
    check_order(m);
    if (x == 0.0) return m == 1 ? 0.5 : 0.0;
    if (m == 0) return -bessel_j(1, x);
    return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}

double bessel_y_deriv(int m, double x) {
    check_order(m);
    if (m == 0) return -bessel_y(1, x);
    return 0.5 * (bessel_y(m - 1, x) - bessel_y(m + 1, x));
}

double bessel_k_deriv(int m, double x) {
    check_order(m);
    if (m == 0) return -bessel_k(1, x);
    return -0.5 * (bessel_k(m - 1, x) + bessel_k(m + 1, x));
}

cplx cyl_eval(CylKind kind, int m, double x) {
    switch (kind) {
        case CylKind::BesselJ:
            return bessel_j(m, x);
        case CylKind::ModBesselK:
            return bessel_k(m, x);
        case CylKind::Hankel1:
        case CylKind::Hankel2: {
            check_positive(x, "hankel");
            const double jv = bessel_j(m, x);
            const double yv = bessel_y(m, x);
            return kind == CylKind::Hankel1 ? cplx(jv, yv) : cplx(jv, -yv);
        }
    }
    throw InvalidArgument("unknown cylinder function kind");
}

cplx cyl_deriv(CylKind kind, int m, double x) {
    switch (kind) {
        case CylKind::BesselJ:
            return bessel_j_deriv(m, x);
        case CylKind::ModBesselK:
            return bessel_k_deriv(m, x);
        case CylKind::Hankel1:
        case CylKind::Hankel2: {
            check_positive(x, "hankel derivative");
            const double jd = bessel_j_deriv(m, x);
            const double yd = bessel_y_deriv(m, x);
            return kind == CylKind::Hankel1 ? cplx(jd, yd) : cplx(jd, -yd);
        }
    }
    throw InvalidArgument("unknown cylinder function kind");
}

void ScaledCylinderSeq::compute(double arg, int order_max, bool with_y) {
    check_positive(arg, "ScaledCylinderSeq");
    if (order_max < 0) throw DomainError("ScaledCylinderSeq: negative order");
    x = arg;
    max_order = order_max;
    const int n = order_max + 1;
    // J_{M+1} is kept until the derivatives are formed (J'_0 = -J_1)
    j.assign(n + 1, 0.0);
    ej.assign(n + 1, 0);
    jp.assign(n, 0.0);

    // Miller backward recurrence from well above max(M, x).
    const double top = std::max<double>(order_max + 1, x);
    int start = static_cast<int>(top + 20.0 + 6.0 * std::cbrt(top) + std::sqrt(40.0 * top));
    start += start & 1;
    double next = 0.0;   // J_{m+1}
    double cur = 1e-30;  // J_m
    int expo = 0;
    for (int m = start; m > 0; --m) {
        if (m <= n) {
            j[m] = cur;
            ej[m] = expo;
        }
        const double prev = (2.0 * m / x) * cur - next;
        next = cur;
        cur = prev;
        if (std::abs(cur) > kRescaleThreshold) {
            cur *= kRescaleInv;
            next *= kRescaleInv;
            expo += kRescaleBits;
        }
    }
    j[0] = cur;
    ej[0] = expo;

    const double j0 = boost::math::cyl_bessel_j(0, x);
    const double j1 = boost::math::cyl_bessel_j(1, x);
    const int ref = std::abs(j0) >= std::abs(j1) ? 0 : 1;
    const double ref_true = ref == 0 ? j0 : j1;
    const double scale = ref_true / j[ref];
    const int ref_exp = ej[ref];
    for (int m = 0; m <= n; ++m) {
        j[m] *= scale;
        ej[m] -= ref_exp;
    }
    // renormalize mantissas to O(1) where possible
    for (int m = 0; m <= n; ++m) {
        if (j[m] != 0.0) {
            int e = 0;
            j[m] = std::frexp(j[m], &e);
            ej[m] += e;
        }
    }
    jp[0] = -j[1] * pow2(ej[1] - ej[0]);
    for (int m = 1; m < n; ++m)
        jp[m] = j[m - 1] * pow2(ej[m - 1] - ej[m]) - (m / x) * j[m];
    j.resize(n);
    ej.resize(n);

    if (!with_y) {
        y.clear();
        yp.clear();
        ey.clear();
        return;
    }
    y.assign(n, 0.0);
    yp.assign(n, 0.0);
    ey.assign(n, 0);
    y[0] = boost::math::cyl_neumann(0, x);
    if (n > 1) y[1] = boost::math::cyl_neumann(1, x);
    else {
        yp[0] = -boost::math::cyl_neumann(1, x);
        return;
    }
    int e = 0;
    double ym1 = y[0], ycur = y[1];
    for (int m = 1; m + 1 < n; ++m) {
        double ynext = (2.0 * m / x) * ycur - ym1;
        if (std::abs(ynext) > kRescaleThreshold) {
            ynext *= kRescaleInv;
            ycur *= kRescaleInv;
            e += kRescaleBits;
        }
        y[m + 1] = ynext;
        ey[m + 1] = e;
        ym1 = ycur;
        ycur = ynext;
    }
    yp[0] = -y[1] * pow2(ey[1] - ey[0]);
    for (int m = 1; m < n; ++m)
        yp[m] = y[m - 1] * pow2(ey[m - 1] - ey[m]) - (m / x) * y[m];
}

double ScaledCylinderSeq::J(int m) const { return std::ldexp(j.at(m), ej.at(m)); }

double ScaledCylinderSeq::Y(int m) const { return std::ldexp(y.at(m), ey.at(m)); }

}  // namespace nfqed::specfun
