#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/mode_functions.hpp"

using namespace nfqed;
using specfun::CylKind;

namespace {

const double lambda_a = 852e-9;
const double omega_a = omega_from_wavelength(lambda_a);
const double r_f = 250e-9;
const cplx I(0, 1);

FiberSpec silica() {
    FiberSpec f;
    f.radius = r_f;
    f.material = SellmeierModel::fused_silica();
    return f;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Radiation fields written out from the coefficient relations with complex
// Hankel functions and the conjugates taken literally.
struct VerbatimRadiation {
    double n1, a, k, theta;
    int m, l;
    double beta, q, kappa;
    cplx A, Bt, C[2], Dt[2], V[2], M[2], L[2];
    double eta;

    VerbatimRadiation(double n1_, double a_, double k_, double th, int m_, int l_, double A_)
        : n1(n1_), a(a_), k(k_), theta(th), m(m_), l(l_) {
        beta = k * std::cos(theta);
        q = k * std::sin(theta);
        kappa = std::sqrt(k * k * n1 * n1 - beta * beta);
        const double y = kappa * a, u = q * a;
        const double P = jm(y), Pp = jmp(y);
        for (int j = 0; j < 2; ++j) {
            const cplx Hs = std::conj(hm(j, u)), Hps = std::conj(hmp(j, u));
            V[j] = m * k * beta / (a * kappa * kappa * q * q) * (1 - n1 * n1) * P * Hs;
            M[j] = Pp * Hs / kappa - P * Hps / q;
            L[j] = n1 * n1 * Pp * Hs / kappa - P * Hps / q;
        }
        eta = std::sqrt((std::norm(V[0]) + std::norm(L[0])) / (std::norm(V[0]) + std::norm(M[0])));
        A = A_;
        Bt = I * double(l) * eta * A;
        for (int j = 0; j < 2; ++j) {
            const double sj = (j == 0) ? -1.0 : 1.0;
            C[j] = sj * I * pi * q * q * a / 4.0 * (A * L[j] + I * Bt * V[j]);
            Dt[j] = -sj * I * pi * q * q * a / 4.0 * (I * A * V[j] - Bt * M[j]);
        }
    }
    // signed-order cylinder functions
    double sgn() const { return (m < 0 && (std::abs(m) % 2)) ? -1.0 : 1.0; }
    double jm(double x) const { return sgn() * specfun::bessel_j(std::abs(m), x); }
    double jmp(double x) const { return sgn() * specfun::bessel_j_deriv(std::abs(m), x); }
    cplx hm(int j, double x) const {
        return sgn() * specfun::cyl_eval(j == 0 ? CylKind::Hankel1 : CylKind::Hankel2, std::abs(m), x);
    }
    cplx hmp(int j, double x) const {
        return sgn() * specfun::cyl_deriv(j == 0 ? CylKind::Hankel1 : CylKind::Hankel2, std::abs(m), x);
    }

    Vec3c E(double r) const {
        Vec3c e;
        if (r < a) {
            const double J = jm(kappa * r), Jp = jmp(kappa * r);
            e << I * beta / kappa * A * Jp - m * k / (kappa * kappa * r) * Bt * J,
                -m * beta / (kappa * kappa * r) * A * J - I / kappa * k * Bt * Jp, A * J;
        } else {
            e.setZero();
            for (int j = 0; j < 2; ++j) {
                const cplx H = hm(j, q * r), Hp = hmp(j, q * r);
                e(0) += I * beta / q * C[j] * Hp - m * k / (q * q * r) * Dt[j] * H;
                e(1) += -m * beta / (q * q * r) * C[j] * H - I / q * k * Dt[j] * Hp;
                e(2) += C[j] * H;
            }
        }
        return e;
    }
    // mu0 c H
    Vec3c H(double r) const {
        Vec3c h;
        if (r < a) {
            const double J = jm(kappa * r), Jp = jmp(kappa * r), n2 = n1 * n1;
            h << I * beta / kappa * Bt * Jp + m * k * n2 / (kappa * kappa * r) * A * J,
                -m * beta / (kappa * kappa * r) * Bt * J + I * k * n2 / kappa * A * Jp, Bt * J;
        } else {
            h.setZero();
            for (int j = 0; j < 2; ++j) {
                const cplx Hn = hm(j, q * r), Hp = hmp(j, q * r);
                h(0) += I * beta / q * Dt[j] * Hp + m * k / (q * q * r) * C[j] * Hn;
                h(1) += -m * beta / (q * q * r) * Dt[j] * Hn + I * k / q * C[j] * Hp;
                h(2) += Dt[j] * Hn;
            }
        }
        return h;
    }
};

}  // namespace

TEST_CASE("to_cartesian") {
    ProfileVector v;
    v.v << cplx(1, 2), cplx(-0.5, 0.3), cplx(0.2, -1);
    const ProfileVector c0 = to_cartesian(v, 0.0);
    CHECK(c0.basis == Basis::Cartesian);
    CHECK((c0.v - v.v).norm() == 0.0);
    const ProfileVector c1 = to_cartesian(v, pi / 2);
    CHECK(std::abs(c1.v(0) + v.v(1)) < 1e-15);
    CHECK(std::abs(c1.v(1) - v.v(0)) < 1e-15);

    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    for (int i = 0; i < 20; ++i) {
        ProfileVector w;
        w.v << cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng));
        CHECK(to_cartesian(w, 1.3).v.norm() == doctest::Approx(w.v.norm()).epsilon(1e-14));
    }
    CHECK_THROWS_AS(to_cartesian(c1, 0.1), InvalidArgument);
}

TEST_CASE("guided profile symmetries") {
    FiberDispersion disp(silica());
    const GuidedProfile prof(silica(), disp.solve_beta(omega_a));
    const double r = 1.2 * r_f, b = prof.point().beta;
    auto e = [&](int l, int f) { return prof.at({b, l, f}, r).v; };
    for (int l : {-1, 1}) {
        for (int f : {-1, 1}) {
            CHECK(e(l, f)(0) == e(-l, f)(0));
            CHECK(e(l, f)(0) == e(l, -f)(0));
            CHECK(e(l, f)(1) == -e(-l, f)(1));
            CHECK(e(l, f)(1) == e(l, -f)(1));
            CHECK(e(l, f)(2) == -e(l, -f)(2));
            CHECK(e(l, f)(2) == e(-l, f)(2));
        }
    }
}

TEST_CASE("guided normalization for all labels and three frequencies") {
    FiberDispersion disp(silica());
    for (double lam : {800e-9, 852e-9, 950e-9}) {
        const GuidedProfile prof(silica(), disp.solve_beta(omega_from_wavelength(lam)));
        const double n2 = prof.point().n1 * prof.point().n1;
        for (int l : {-1, 1}) {
            for (int f : {-1, 1}) {
                auto dens = [&](double r) { return prof.at({prof.point().beta, l, f}, r).v.squaredNorm() * r; };
                namespace bq = boost::math::quadrature;
                const double in = bq::gauss_kronrod<double, 31>::integrate(dens, 0.0, r_f, 8, 1e-12);
                const double out = bq::gauss_kronrod<double, 31>::integrate(dens, r_f, 60 * r_f, 10, 1e-12);
                const double total = 2 * pi * (n2 * in + out);
                CAPTURE(lam);
                CHECK(std::abs(total - 1.0) < 1e-8);
            }
        }
    }
}

TEST_CASE("guided boundary conditions at the fiber surface") {
    FiberDispersion disp(silica());
    const GuidedProfile prof(silica(), disp.solve_beta(omega_a));
    const double b = prof.point().beta, n2 = prof.point().n1 * prof.point().n1;
    const Vec3c in = prof.at({b, 1, 1}, r_f * (1 - 1e-13)).v;
    const Vec3c out = prof.at({b, 1, 1}, r_f).v;
    CHECK(rel(in(1), out(1)) < 1e-9);
    CHECK(rel(in(2), out(2)) < 1e-9);
    // the normal component of D is continuous only at the eigenvalue
    CHECK(rel(n2 * in(0), out(0)) < 1e-9);
}

TEST_CASE("radiation coefficients match the literal relations") {
    const double n1 = refractive_index(silica(), omega_a);
    const double k = wavenumber(omega_a);
    for (int m : {0, 1, 2, -3, 6}) {
        for (int l : {-1, 1}) {
            for (double th : {0.3, pi / 3, 2.0, 3.0}) {
                CAPTURE(m);
                CAPTURE(l);
                CAPTURE(th);
                const RadiationCoefficients rc = radiation_coefficients(n1, r_f, k, th, m, l);
                const VerbatimRadiation vr(n1, r_f, k, th, m, l, rc.A);
                CHECK(rc.A > 0);
                CHECK(rc.eta_t == doctest::Approx(vr.eta).epsilon(1e-12));
                for (int j = 0; j < 2; ++j) {
                    const double scale = std::abs(vr.V[j]) + std::abs(vr.M[j]) + std::abs(vr.L[j]);
                    CHECK(std::abs(rc.V[j] - vr.V[j]) < 1e-12 * scale);
                    CHECK(std::abs(rc.M[j] - vr.M[j]) < 1e-12 * scale);
                    CHECK(std::abs(rc.L[j] - vr.L[j]) < 1e-12 * scale);
                    const double cs = std::abs(vr.C[j]) + std::abs(vr.Dt[j]);
                    CHECK(std::abs(rc.C[j] - vr.C[j]) < 1e-12 * cs);
                    CHECK(std::abs(rc.Dt[j] - vr.Dt[j]) < 1e-12 * cs);
                    // normalization identity, each Hankel kind separately
                    const double norm =
                        16 * pi * pi * k * k / std::pow(vr.q, 3) * (std::norm(vr.C[j]) + std::norm(vr.Dt[j]));
                    CHECK(std::abs(norm - 1.0) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("radiation profile agrees with the literal field expressions") {
    const double n1 = refractive_index(silica(), omega_a);
    const double k = wavenumber(omega_a);
    for (int m : {0, 1, -2, 5}) {
        for (int l : {-1, 1}) {
            for (double th : {0.4, pi / 3, 2.5}) {
                const RadiationCoefficients rc = radiation_coefficients(n1, r_f, k, th, m, l);
                const VerbatimRadiation vr(n1, r_f, k, th, m, l, rc.A);
                for (double r : {0.3 * r_f, 0.9 * r_f, 1.1 * r_f, 1.4 * r_f, 3.0 * r_f}) {
                    const Vec3c e = radiation_profile(n1, r_f, {omega_a, th, m, l}, r).v;
                    const Vec3c ev = vr.E(r);
                    CAPTURE(m);
                    CAPTURE(r / r_f);
                    CHECK((e - ev).norm() < 1e-10 * ev.norm());
                }
            }
        }
    }
}

TEST_CASE("radiation fields satisfy all six boundary conditions") {
    const double n1 = refractive_index(silica(), omega_a);
    const double k = wavenumber(omega_a);
    for (int m : {0, 1, 3, -2}) {
        for (int l : {-1, 1}) {
            for (double th : {0.5, pi / 3, 2.2}) {
                CAPTURE(m);
                CAPTURE(l);
                CAPTURE(th);
                const RadiationCoefficients rc = radiation_coefficients(n1, r_f, k, th, m, l);
                const VerbatimRadiation vr(n1, r_f, k, th, m, l, rc.A);
                const double rin = r_f * (1 - 1e-13);
                const Vec3c ei = radiation_profile(n1, r_f, {omega_a, th, m, l}, rin).v;
                const Vec3c eo = radiation_profile(n1, r_f, {omega_a, th, m, l}, r_f).v;
                const double es = eo.norm();
                CHECK(std::abs(ei(1) - eo(1)) < 1e-8 * es);
                CHECK(std::abs(ei(2) - eo(2)) < 1e-8 * es);
                CHECK(std::abs(n1 * n1 * ei(0) - eo(0)) < 1e-8 * es);
                const Vec3c hi = vr.H(rin), ho = vr.H(r_f);
                const double hs = ho.norm();
                for (int c = 0; c < 3; ++c) CHECK(std::abs(hi(c) - ho(c)) < 1e-8 * hs);
            }
        }
    }
}

TEST_CASE("magnetic oracle is the curl of the electric field") {
    // curl E = i k (mu0 c H) for E = e(r) exp(i m phi + i beta z)
    const double n1 = refractive_index(silica(), omega_a);
    const double k = wavenumber(omega_a);
    const int m = 2, l = 1;
    const double th = 1.1;
    const RadiationCoefficients rc = radiation_coefficients(n1, r_f, k, th, m, l);
    const VerbatimRadiation vr(n1, r_f, k, th, m, l, rc.A);
    for (double r : {0.6 * r_f, 1.7 * r_f}) {
        const double h = 1e-4 * r;
        const Vec3c e = vr.E(r);
        auto rephi = [&](double rr) { return rr * vr.E(rr)(1); };
        const cplx drephi = (rephi(r + h) - rephi(r - h)) / (2 * h);
        const cplx dez = (vr.E(r + h)(2) - vr.E(r - h)(2)) / (2 * h);
        Vec3c curl;
        curl << I * double(m) / r * e(2) - I * rc.beta * e(1), I * rc.beta * e(0) - dez,
            (drephi - I * double(m) * e(0)) / r;
        const Vec3c hk = I * k * vr.H(r);
        CHECK((curl - hk).norm() < 1e-6 * hk.norm());
    }
}

TEST_CASE("negative orders mirror positive orders") {
    const double n1 = refractive_index(silica(), omega_a);
    for (int m : {1, 2, 5}) {
        for (int l : {-1, 1}) {
            for (double r : {0.5 * r_f, 1.3 * r_f}) {
                const Vec3c ep = radiation_profile(n1, r_f, {omega_a, 0.9, m, -l}, r).v;
                const Vec3c en = radiation_profile(n1, r_f, {omega_a, 0.9, -m, l}, r).v;
                const double s = (m % 2) ? -1.0 : 1.0;
                CHECK(std::abs(en(0) - s * ep(0)) < 1e-13 * ep.norm());
                CHECK(std::abs(en(1) + s * ep(1)) < 1e-13 * ep.norm());
                CHECK(std::abs(en(2) - s * ep(2)) < 1e-13 * ep.norm());
            }
        }
    }
}

TEST_CASE("radiation node matches single-mode evaluation") {
    const double n1 = refractive_index(silica(), omega_a * 3);
    const double k = wavenumber(omega_a * 3);
    RadiationNode node;
    const std::vector<double> radii = {r_f, 1.4 * r_f, 2.5 * r_f};
    node.compute(n1, r_f, k, 1.2, 40, radii);
    for (int m : {0, 3, 17, 40}) {
        for (int l : {-1, 1}) {
            for (int ir = 0; ir < 3; ++ir) {
                const Vec3c e = radiation_profile(n1, r_f, {omega_a * 3, 1.2, m, l}, radii[ir]).v;
                const auto& f = node.at(m, l, ir);
                CHECK(std::abs(e(0) - cplx(0, f.fr)) <= 1e-14 * e.norm());
                CHECK(std::abs(e(1) - f.fphi) <= 1e-14 * e.norm());
                CHECK(std::abs(e(2) - f.fz) <= 1e-14 * e.norm());
            }
        }
    }
}

TEST_CASE("high orders stay finite and decay") {
    const double n1 = 1.45;
    const double k = wavenumber(omega_a * 80);
    RadiationNode node;
    node.compute(n1, r_f, k, 0.7, 400, {1.4 * r_f});
    double prev = 1e300;
    for (int m = 250; m <= 400; m += 10) {
        const auto& f = node.at(m, 1, 0);
        const double mag = std::abs(f.fr) + std::abs(f.fphi) + std::abs(f.fz);
        CHECK(std::isfinite(mag));
        CHECK(mag < prev);
        prev = mag;
    }
}

TEST_CASE("radiation profile is continuous in theta") {
    const double n1 = refractive_index(silica(), omega_a);
    for (int m : {0, 1, 4}) {
        double prev_d = 0;
        Vec3c prev = radiation_profile(n1, r_f, {omega_a, 0.05, m, 1}, 1.4 * r_f).v;
        for (int i = 1; i < 300; ++i) {
            const double th = 0.05 + i * (pi - 0.1) / 300;
            const Vec3c e = radiation_profile(n1, r_f, {omega_a, th, m, 1}, 1.4 * r_f).v;
            const double d = (e - prev).norm();
            if (i > 1) CHECK(d < 3 * prev_d + 1e-3 * e.norm());
            prev_d = d;
            prev = e;
        }
    }
}

TEST_CASE("radiation inputs are validated") {
    CHECK_THROWS_AS(radiation_profile(1.45, r_f, {omega_a, 0.0, 0, 1}, 2 * r_f), DomainError);
    CHECK_THROWS_AS(radiation_profile(1.45, r_f, {omega_a, pi, 0, 1}, 2 * r_f), DomainError);
    CHECK_THROWS_AS(radiation_profile(1.45, r_f, {omega_a, 1.0, 0, 2}, 2 * r_f), InvalidArgument);
}
