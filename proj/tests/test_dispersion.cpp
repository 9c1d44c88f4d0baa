#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/fiber_dispersion.hpp"

using namespace nfqed;

namespace {

const double lambda_a = 852e-9;
const double omega_a = omega_from_wavelength(lambda_a);

FiberSpec silica(double radius) {
    FiberSpec f;
    f.radius = radius;
    f.material = SellmeierModel::load(NFQED_DATA_DIR "/silica_malitson.json");
    return f;
}

// HE eigenvalue equation in its textbook form, written out with Boost primitives.
double oracle_residual(double a, double k, double n1, double beta) {
    namespace bm = boost::math;
    const double kappa = std::sqrt(k * k * n1 * n1 - beta * beta);
    const double q = std::sqrt(beta * beta - k * k);
    const double y = kappa * a, u = q * a;
    const double lhs = bm::cyl_bessel_j(0, y) / (y * bm::cyl_bessel_j(1, y));
    const double kk = bm::cyl_bessel_k_prime(1, u) / (u * bm::cyl_bessel_k(1, u));
    const double n2 = n1 * n1;
    const double root = std::sqrt(std::pow((n2 - 1) / (2 * n2) * kk, 2) +
                                  std::pow(beta / (n1 * k), 2) * std::pow(1 / (u * u) + 1 / (y * y), 2));
    return lhs - (-(n2 + 1) / (2 * n2) * kk + 1 / (y * y) - root);
}

// Dense uniform scan in beta. A genuine root is a sign change where the
// residual is small on both sides; poles of 1/J1 flip sign through infinity.
std::vector<double> dense_scan_roots(double a, double k, double n1, int samples) {
    const double lo = k * (1 + 1e-9), hi = n1 * k * (1 - 1e-9);
    std::vector<double> roots;
    double b0 = lo, f0 = oracle_residual(a, k, n1, lo);
    for (int i = 1; i <= samples; ++i) {
        const double b1 = lo + (hi - lo) * i / samples;
        const double f1 = oracle_residual(a, k, n1, b1);
        if ((f0 < 0) != (f1 < 0)) {
            const double br = b0 - f0 * (b1 - b0) / (f1 - f0);
            // a J1 sign flip between the samples marks a pole, not a root
            const double jprod = boost::math::cyl_bessel_j(1, a * std::sqrt(k * k * n1 * n1 - b0 * b0)) *
                                 boost::math::cyl_bessel_j(1, a * std::sqrt(k * k * n1 * n1 - b1 * b1));
            if (jprod > 0) roots.push_back(br);
        }
        b0 = b1;
        f0 = f1;
    }
    return roots;
}

}  // namespace

TEST_CASE("Sellmeier index of silica") {
    const FiberSpec f = silica(250e-9);
    CHECK(refractive_index(f, omega_a) == doctest::Approx(1.4525).epsilon(1e-3 / 1.4525));
    CHECK(refractive_index(f, omega_from_wavelength(600e-9)) > refractive_index(f, omega_from_wavelength(1000e-9)));

    // direct evaluation of the formula as an independent check
    const double l = 0.852, l2 = l * l;
    const double n2 = 1 + 0.6961663 * l2 / (l2 - 0.0684043 * 0.0684043) +
                      0.4079426 * l2 / (l2 - 0.1162414 * 0.1162414) + 0.8974794 * l2 / (l2 - 9.896161 * 9.896161);
    CHECK(refractive_index(f, omega_a) == doctest::Approx(std::sqrt(n2)).epsilon(1e-12));
}

TEST_CASE("material file agrees with the built-in silica model") {
    const SellmeierModel file = SellmeierModel::load(NFQED_DATA_DIR "/silica_malitson.json");
    const SellmeierModel builtin = SellmeierModel::fused_silica();
    for (int i = 0; i < 3; ++i) {
        CHECK(file.B[i] == builtin.B[i]);
        CHECK(file.L_sq[i] == doctest::Approx(builtin.L_sq[i]).epsilon(1e-13));
    }
    CHECK(file.valid_min_um == 0.2);
    CHECK(file.valid_max_um == 6.7);
}

TEST_CASE("vacuum material gives n = 1 exactly") {
    FiberSpec f;
    f.material.B = {0, 0, 0};
    CHECK(refractive_index(f, omega_a) == 1.0);
    f.material = SellmeierModel::vacuum();
    CHECK(refractive_index(f, 1e18) == 1.0);
}

TEST_CASE("out-of-band frequencies") {
    const FiberSpec f = silica(250e-9);
    CHECK_THROWS_AS(refractive_index(f, omega_from_wavelength(100e-9)), DomainError);
    CHECK_THROWS_AS(refractive_index(f, omega_from_wavelength(10e-6)), DomainError);
    const double edge = refractive_index(f, omega_from_wavelength(0.2e-6));
    CHECK(refractive_index_clamped(f, omega_from_wavelength(50e-9)) == edge);
    CHECK(refractive_index_clamped(f, omega_a) == refractive_index(f, omega_a));
}

TEST_CASE("material parser rejects bad input") {
    CHECK_THROWS_AS(SellmeierModel::from_json_text("{\"B1\": 1}"), ConfigError);
    CHECK_THROWS_AS(SellmeierModel::from_json_text("{not json"), ConfigError);
    CHECK_THROWS_AS(SellmeierModel::from_json_text(
                        R"({"B1":1,"B2":1,"B3":1,"L1sq":0,"L2sq":0,"L3sq":0,"colour":"red"})"),
                    ConfigError);
    const SellmeierModel m = SellmeierModel::fused_silica();
    const SellmeierModel back = SellmeierModel::from_json_text(m.to_json_text());
    CHECK(back.B == m.B);
    CHECK(back.L_sq == m.L_sq);
}

TEST_CASE("HE11 root at the reference geometry") {
    const FiberSpec f = silica(250e-9);
    FiberDispersion disp(f);
    const GuidedDispersionPoint p = disp.solve_beta(omega_a);
    const double k = wavenumber(omega_a);
    const double neff = p.beta / k;
    CHECK(neff > 1.0);
    CHECK(neff < p.n1);
    CHECK(std::abs(he_eigen_residual(f, omega_a, p.n1, p.beta)) <= 1e-12);
    CHECK(std::abs(oracle_residual(f.radius, k, p.n1, p.beta)) <= 1e-10);
    CHECK(p.kappa * p.kappa == doctest::Approx(k * k * p.n1 * p.n1 - p.beta * p.beta).epsilon(1e-10));
    CHECK(p.q * p.q == doctest::Approx(p.beta * p.beta - k * k).epsilon(1e-10));
    CHECK(std::isfinite(p.s));

    const std::vector<double> roots = dense_scan_roots(f.radius, k, p.n1, 1000000);
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0] - p.beta) / p.beta < 1e-9);
    // regression value pinned from the dense scan above
    CHECK(neff == doctest::Approx(1.143991).epsilon(1e-5));
}

TEST_CASE("large-core limit approaches the bulk index") {
    const double a = 10 * lambda_a;
    const FiberSpec f = silica(a);
    CHECK_THROWS_AS(FiberDispersion(f).solve_beta(omega_a), MultimodeError);

    FiberDispersion disp(f, ModePolicy::Fundamental);
    const GuidedDispersionPoint p = disp.solve_beta(omega_a);
    const double k = wavenumber(omega_a);
    CHECK(std::abs(p.beta / k - p.n1) < 1e-2);
    const std::vector<double> roots = dense_scan_roots(a, k, p.n1, 1000000);
    REQUIRE(!roots.empty());
    CHECK(std::abs(roots.back() - p.beta) / p.beta < 1e-9);

    // group slowness against the bulk value n/c + omega (dn/domega)/c
    const double h = 1e-5;
    const double dn = (refractive_index(f, omega_a * (1 + h)) - refractive_index(f, omega_a * (1 - h))) / (2 * h * omega_a);
    const double bulk = (p.n1 + omega_a * dn) / PhysicalConstants::c;
    CHECK(std::abs(disp.beta_prime(omega_a) - bulk) / bulk < 1e-3);
}

TEST_CASE("no guided mode in a vacuum fiber") {
    FiberSpec f;
    f.material = SellmeierModel::vacuum();
    CHECK_THROWS_AS(FiberDispersion(f).solve_beta(omega_a), NoGuidedModeError);
}

TEST_CASE("group slowness") {
    FiberDispersion disp(silica(250e-9));
    const double bp = disp.beta_prime(omega_a);
    CHECK(bp > 1.0 / PhysicalConstants::c);

    // beta(w2) - beta(w1) against a 5-point Gauss-Legendre integral of beta'
    const double w1 = omega_a * 0.995, w2 = omega_a * 1.005;
    const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                         0.2369268850561891};
    double integral = 0;
    for (int i = 0; i < 5; ++i) integral += w[i] * disp.beta_prime(0.5 * (w1 + w2) + 0.5 * (w2 - w1) * x[i]);
    integral *= 0.5 * (w2 - w1);
    const double diff = disp.solve_beta(w2).beta - disp.solve_beta(w1).beta;
    CHECK(std::abs(integral - diff) / std::abs(diff) < 1e-6);
}

TEST_CASE("effective index rises with frequency") {
    FiberDispersion disp(silica(250e-9));
    double prev = 0;
    for (double lam = 1000e-9; lam >= 700e-9; lam -= 20e-9) {
        const double w = omega_from_wavelength(lam);
        const GuidedDispersionPoint p = disp.solve_beta(w);
        const double neff = p.beta / wavenumber(w);
        CHECK(neff > prev);
        prev = neff;
        CHECK(std::abs(he_eigen_residual(disp.fiber(), w, p.n1, p.beta)) <= 1e-10);
    }
}

TEST_CASE("memoized points are stable") {
    FiberDispersion disp(silica(250e-9));
    const GuidedDispersionPoint a = disp.point(omega_a);
    const GuidedDispersionPoint b = disp.point(omega_a * (1 + 1e-12));
    CHECK(a.beta == b.beta);
    CHECK(a.beta_prime == b.beta_prime);
    CHECK(a.beta_prime > 0);
}
