#include "nfqed/mode_functions.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"

namespace nfqed {

using specfun::bessel_j;
using specfun::bessel_k;
using specfun::pow2;

ProfileVector to_cartesian(const ProfileVector& v, double phi) {
    if (v.basis != Basis::Cylindrical) throw InvalidArgument("to_cartesian expects a cylindrical-basis vector");
    ProfileVector out;
    out.v = cyl_to_cart(phi).cast<cplx>() * v.v;
    out.basis = Basis::Cartesian;
    out.phi = 0.0;
    return out;
}

// ---------------------------------------------------------------- guided

GuidedProfile::GuidedProfile(const FiberSpec& fiber, const GuidedDispersionPoint& point)
    : p_(point), a_(fiber.radius) {
    if (!(p_.kappa > 0.0 && p_.q > 0.0 && p_.beta > 0.0))
        throw InvalidArgument("GuidedProfile needs a solved dispersion point");
    inner_ratio_ = bessel_k(1, p_.q * a_) / bessel_j(1, p_.kappa * a_);

    auto density = [this](double r) { return unnormalized(1, 1, r).squaredNorm() * r; };
    const double n2 = p_.n1 * p_.n1;
    namespace bq = boost::math::quadrature;
    // the core integrand is entire in r and a fixed 40-point rule is exact to
    // round-off for the guided range kappa a < 2.405; the tail decays as e^{-2 q r}
    const double inner = bq::gauss<double, 40>::integrate(density, 0.0, a_);
    double err_out = 0.0;
    bq::exp_sinh<double> tail;
    const double outer = tail.integrate([&](double t) { return density(a_ + t); }, 1e-13, &err_out);
    const double total = 2.0 * pi * (n2 * inner + outer);
    if (!(total > 0.0) || !std::isfinite(total)) throw ConvergenceError("guided normalization integral failed", total);
    C_ = 1.0 / std::sqrt(total);
}

Vec3c GuidedProfile::unnormalized(int l, int f, double r) const {
    if (r < 0.0) throw DomainError("guided profile needs r >= 0");
    const double s = p_.s, q = p_.q, kappa = p_.kappa, beta = p_.beta;
    const cplx I(0.0, 1.0);
    Vec3c e;
    if (r < a_) {
        const double x = kappa * r;
        const double j0 = bessel_j(0, x), j1 = bessel_j(1, x), j2 = bessel_j(2, x);
        const double g = q / kappa * inner_ratio_;
        e << I * g * ((1 - s) * j0 - (1 + s) * j2), -double(l) * g * ((1 - s) * j0 + (1 + s) * j2),
            2.0 * f * q / beta * inner_ratio_ * j1;
    } else {
        const double x = q * r;
        const double k0 = bessel_k(0, x), k1 = bessel_k(1, x), k2 = bessel_k(2, x);
        e << I * ((1 - s) * k0 + (1 + s) * k2), double(l) * ((1 + s) * k2 - (1 - s) * k0), 2.0 * f * q / beta * k1;
    }
    return e;
}

ProfileVector GuidedProfile::at(const GuidedModeIndex& idx, double r) const {
    if (std::abs(idx.l) != 1 || std::abs(idx.f) != 1) throw InvalidArgument("guided mode labels l, f must be +-1");
    ProfileVector out;
    out.v = C_ * unnormalized(idx.l, idx.f, r);
    out.basis = Basis::Cylindrical;
    return out;
}

// ---------------------------------------------------------------- radiation

namespace {

struct Angle {
    double k, beta, q, kappa, n2;
};

Angle make_angle(double n1, double k, double theta) {
    if (!(theta > 0.0 && theta < pi)) throw DomainError("radiation mode angle must lie strictly inside (0, pi)");
    if (!(k > 0.0)) throw DomainError("radiation mode needs k > 0");
    Angle g;
    g.k = k;
    g.beta = k * std::cos(theta);
    g.q = k * std::sin(theta);
    g.n2 = n1 * n1;
    g.kappa = k * std::sqrt(g.n2 - std::cos(theta) * std::cos(theta));
    return g;
}

// Per-(m, l) coefficients. Mantissas of the J(q a)-parts carry the exponent
// eP + eJu, Y-parts eP + eYu; "rel" values are rescaled to the Y exponent.
struct Core {
    double eta;
    double TJm, UJm;  // J-parts at their own exponent
    double TY, UY;    // Y-parts, the reference exponent
    int s;            // eJu - eYu
    int ref_exp;      // eP + eYu
    double A_rel;
    double VJm, MJm, LJm, VYm, MYm, LYm;
};

int order_sign(int m) { return (m < 0 && (std::abs(m) & 1)) ? -1 : 1; }

// l-independent part of the coefficients
Core make_core_base(const Angle& g, double a, int m, const specfun::ScaledCylinderSeq& sy,
                    const specfun::ScaledCylinderSeq& su) {
    const int am = std::abs(m);
    // J_{-m} = (-1)^m J_m for every kind; the sign enters P and Z(qa) alike and cancels.
    const double p = sy.j[am], pp = sy.jp[am];
    const double ju = su.j[am], jup = su.jp[am], yu = su.y[am], yup = su.yp[am];
    const double v = m * g.k * g.beta * (1.0 - g.n2) / (a * g.kappa * g.kappa * g.q * g.q);
    Core c;
    c.VJm = v * p * ju;
    c.MJm = pp * ju / g.kappa - p * jup / g.q;
    c.LJm = g.n2 * pp * ju / g.kappa - p * jup / g.q;
    c.VYm = v * p * yu;
    c.MYm = pp * yu / g.kappa - p * yup / g.q;
    c.LYm = g.n2 * pp * yu / g.kappa - p * yup / g.q;
    c.s = su.ej[am] - su.ey[am];
    c.ref_exp = sy.ej[am] + su.ey[am];
    const double sc = pow2(c.s);
    const double VJ = c.VJm * sc, MJ = c.MJm * sc, LJ = c.LJm * sc;
    const double vv = VJ * VJ + c.VYm * c.VYm;
    c.eta = std::sqrt((vv + LJ * LJ + c.LYm * c.LYm) / (vv + MJ * MJ + c.MYm * c.MYm));
    return c;
}

Core finish_core(const Angle& g, double a, int l, Core c) {
    const double sc = pow2(c.s);
    c.TJm = c.LJm - l * c.eta * c.VJm;
    c.UJm = c.VJm - l * c.eta * c.MJm;
    c.TY = c.LYm - l * c.eta * c.VYm;
    c.UY = c.VYm - l * c.eta * c.MYm;
    const double TJ = c.TJm * sc, UJ = c.UJm * sc;
    const double S = TJ * TJ + c.TY * c.TY + UJ * UJ + c.UY * c.UY;
    c.A_rel = 1.0 / (pi * pi * g.k * a * std::sqrt(g.q * S));
    return c;
}

Core make_core(const Angle& g, double a, int m, int l, const specfun::ScaledCylinderSeq& sy,
               const specfun::ScaledCylinderSeq& su) {
    return finish_core(g, a, l, make_core_base(g, a, m, sy, su));
}

struct Triple {
    double fr, fphi, fz;
};

Triple exterior_fields(const Angle& g, double a, int m, const Core& c, const specfun::ScaledCylinderSeq& sw,
                       double r) {
    const int am = std::abs(m);
    const double sg = order_sign(m);
    const double jw = sg * sw.j[am], jwp = sg * sw.jp[am], yw = sg * sw.y[am], ywp = sg * sw.yp[am];
    const int eJw = sw.ej[am], eYw = sw.ey[am];
    const int eTJY = c.s + eYw;
    double c0, c1, d0, d1;
    if (std::abs(eTJY) < 1000 && std::abs(eJw) < 1000) {
        const double fy = pow2(eTJY), fj = pow2(eJw);
        c0 = c.TJm * yw * fy - c.TY * jw * fj;
        c1 = c.TJm * ywp * fy - c.TY * jwp * fj;
        d0 = c.UY * jw * fj - c.UJm * yw * fy;
        d1 = c.UY * jwp * fj - c.UJm * ywp * fy;
    } else {
        c0 = std::ldexp(c.TJm * yw, eTJY) - std::ldexp(c.TY * jw, eJw);
        c1 = std::ldexp(c.TJm * ywp, eTJY) - std::ldexp(c.TY * jwp, eJw);
        d0 = std::ldexp(c.UY * jw, eJw) - std::ldexp(c.UJm * yw, eTJY);
        d1 = std::ldexp(c.UY * jwp, eJw) - std::ldexp(c.UJm * ywp, eTJY);
    }
    const double pref = 0.5 * pi * g.q * g.q * a * c.A_rel;
    const double qq = g.q * g.q * r;
    Triple t;
    t.fr = pref * (g.beta / g.q * c1 - m * g.k / qq * d0);
    t.fphi = pref * (-m * g.beta / qq * c0 + g.k / g.q * d1);
    t.fz = pref * c0;
    return t;
}

Triple interior_fields(const Angle& g, int m, int l, const Core& c, const specfun::ScaledCylinderSeq& sr, double r) {
    const int am = std::abs(m);
    const double sg = order_sign(m);
    const int e = sr.ej[am] - c.ref_exp;
    const double J = sg * std::ldexp(sr.j[am], e);
    const double Jp = sg * std::ldexp(sr.jp[am], e);
    const double kk = g.kappa * g.kappa * r;
    Triple t;
    t.fr = c.A_rel * (g.beta / g.kappa * Jp - l * m * g.k * c.eta / kk * J);
    t.fphi = c.A_rel * (-m * g.beta / kk * J + l * g.k * c.eta / g.kappa * Jp);
    t.fz = c.A_rel * J;
    return t;
}

void check_mode(double radius, int l) {
    if (!(radius > 0.0)) throw InvalidArgument("fiber radius must be positive");
    if (std::abs(l) != 1) throw InvalidArgument("radiation polarization l must be +-1");
}

}  // namespace

RadiationCoefficients radiation_coefficients(double n1, double radius, double k, double theta, int m, int l) {
    check_mode(radius, l);
    const Angle g = make_angle(n1, k, theta);
    const int am = std::abs(m);
    specfun::ScaledCylinderSeq sy, su;
    sy.compute(g.kappa * radius, am, false);
    su.compute(g.q * radius, am, true);
    const Core c = make_core(g, radius, m, l, sy, su);

    const int eJ = sy.ej[am] + su.ej[am], eY = c.ref_exp;
    const cplx I(0.0, 1.0);
    RadiationCoefficients out;
    out.kappa = g.kappa;
    out.q = g.q;
    out.beta = g.beta;
    out.eta_t = c.eta;
    out.A = std::ldexp(c.A_rel, -c.ref_exp);
    out.Bt = I * double(l) * c.eta * out.A;
    const cplx VJ = std::ldexp(c.VJm, eJ), MJ = std::ldexp(c.MJm, eJ), LJ = std::ldexp(c.LJm, eJ);
    const cplx VY = std::ldexp(c.VYm, eY), MY = std::ldexp(c.MYm, eY), LY = std::ldexp(c.LYm, eY);
    // H^(1)* = H^(2) = J - iY and H^(2)* = H^(1) for real arguments
    out.V[0] = VJ - I * VY;
    out.V[1] = VJ + I * VY;
    out.M[0] = MJ - I * MY;
    out.M[1] = MJ + I * MY;
    out.L[0] = LJ - I * LY;
    out.L[1] = LJ + I * LY;
    const cplx pre = I * pi * g.q * g.q * radius / 4.0;
    for (int j = 0; j < 2; ++j) {
        const double sgn_c = (j == 0) ? -1.0 : 1.0;  // (-1)^j for j = 1, 2
        out.C[j] = sgn_c * pre * (out.A * out.L[j] + I * out.Bt * out.V[j]);
        out.Dt[j] = -sgn_c * pre * (I * out.A * out.V[j] - out.Bt * out.M[j]);
    }
    return out;
}

ProfileVector radiation_profile(double n1, double radius, const RadiationModeIndex& idx, double r) {
    check_mode(radius, idx.l);
    if (!(r > 0.0)) throw DomainError("radiation profile needs r > 0");
    const double k = wavenumber(idx.omega);
    const Angle g = make_angle(n1, k, idx.theta);
    const int am = std::abs(idx.m);
    specfun::ScaledCylinderSeq sy, su, sr;
    sy.compute(g.kappa * radius, am, false);
    su.compute(g.q * radius, am, true);
    const Core c = make_core(g, radius, idx.m, idx.l, sy, su);
    Triple t;
    if (r < radius) {
        sr.compute(g.kappa * r, am, false);
        t = interior_fields(g, idx.m, idx.l, c, sr, r);
    } else {
        sr.compute(g.q * r, am, true);
        t = exterior_fields(g, radius, idx.m, c, sr, r);
    }
    ProfileVector out;
    out.v << cplx(0.0, t.fr), t.fphi, t.fz;
    out.basis = Basis::Cylindrical;
    return out;
}

ProfileVector radiation_profile(const FiberSpec& fiber, const RadiationModeIndex& idx, double r) {
    return radiation_profile(refractive_index_clamped(fiber, idx.omega), fiber.radius, idx, r);
}

void RadiationNode::compute(double n1, double radius, double k, double theta, int m_max,
                            const std::vector<double>& radii) {
    const Angle g = make_angle(n1, k, theta);
    m_max_ = m_max;
    n_r_ = static_cast<int>(radii.size());
    out_.resize(static_cast<std::size_t>(2 * (m_max + 1) * n_r_));
    sy_.compute(g.kappa * radius, m_max, false);
    su_.compute(g.q * radius, m_max, true);
    if (sw_.size() < radii.size()) sw_.resize(radii.size());
    for (int ir = 0; ir < n_r_; ++ir) {
        if (!(radii[ir] >= radius)) throw DomainError("RadiationNode evaluates exterior fields only");
        sw_[ir].compute(g.q * radii[ir], m_max, true);
    }
    for (int m = 0; m <= m_max; ++m) {
        const Core base = make_core_base(g, radius, m, sy_, su_);
        for (int l : {-1, 1}) {
            const Core c = finish_core(g, radius, l, base);
            for (int ir = 0; ir < n_r_; ++ir) {
                const Triple t = exterior_fields(g, radius, m, c, sw_[ir], radii[ir]);
                out_[(2 * m + (l > 0 ? 1 : 0)) * n_r_ + ir] = {t.fr, t.fphi, t.fz};
            }
        }
    }
}

}  // namespace nfqed
