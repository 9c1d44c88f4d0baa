#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/green_vacuum.hpp"
#include "nfqed/pv_integrator.hpp"

using namespace nfqed;

namespace {

const double lambda_a = 852e-9;
const double omega_a = omega_from_wavelength(lambda_a);

template <class F>
SpectralTable synthetic(F f, double dx, double x_max, double x0 = 0.0) {
    SpectralTable t;
    t.x0 = x0;
    t.dx = dx;
    const auto n = static_cast<std::size_t>(std::floor((x_max - x0) / dx + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) t.values.push_back(f(t.x_at(i)));
    return t;
}

// two emitters 350 nm from the axis, separated along z by a lambda_a
PairSpec vacuum_pair(double a_over_lambda, const Vec3c& d) {
    PairSpec p;
    p.a = {350e-9, 0.0, 0.0};
    p.b = {350e-9, 0.0, a_over_lambda * lambda_a};
    p.d_a = d;
    p.d_b = d;
    return p;
}

double exact_v0(const PairSpec& p) {
    return v0_gamma0(p.d_a, p.d_b, p.a.cartesian(), p.b.cartesian(), omega_a).V.real();
}

}  // namespace

TEST_CASE("Lorentzian numerator against its Hilbert pair") {
    const double w = 0.1, w0 = 3.0, X = 40.0;
    auto L = [&](double x) { return w / ((x - w0) * (x - w0) + w * w); };
    // P int over the real line of L / (x - 1), from 1/(x - w0 - i w) being analytic below the axis
    const double full = pi * (w0 - 1) / ((w0 - 1) * (w0 - 1) + w * w);
    boost::math::quadrature::exp_sinh<double> tail;
    const double left = tail.integrate([&](double u) { return L(-u) / (-u - 1.0); }, 1e-13);
    const double right = tail.integrate([&](double u) { return L(X + u) / (X + u - 1.0); }, 1e-13);
    const double unfolded = full - left - right;
    const double reflected =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double x) { return L(x) / (x + 1.0); }, 0.0, X,
                                                                      15, 1e-13);

    const SpectralTable t = synthetic([&](double x) { return cplx(L(x)); }, 1.0 / 400, X + 0.01);
    CHECK(std::abs(pv_direct(t, X, false) - unfolded) < 1e-6);
    CHECK(std::abs(pv_direct(t, X, true) - (unfolded + reflected)) < 1e-6);
    CHECK(std::abs(pv_fourier(t, X, false) - unfolded) < 1e-5);
    CHECK(std::abs(pv_fourier(t, X, true) - (unfolded + reflected)) < 1e-5);
}

TEST_CASE("numerator even about the pole integrates to zero") {
    auto f = [](double x) { return cplx(std::exp(-(x - 1) * (x - 1) / 0.1) * (2.0 + std::cos(3 * (x - 1)))); };
    const SpectralTable t = synthetic(f, 1.0 / 100, 2.0);
    CHECK(std::abs(pv_direct(t, 2.0, false)) < 1e-12);
    CHECK(std::abs(pv_fourier(t, 2.0, false)) < 1e-12);
}

TEST_CASE("constant numerator reproduces the log ratio") {
    const double c = 0.37;
    const SpectralTable t = synthetic([&](double) { return cplx(c); }, 1.0 / 64, 6.0, 0.25);
    // symmetric truncation about the pole
    CHECK(std::abs(pv_direct(t, 1.75, false)) < 1e-8);
    CHECK(std::abs(pv_fourier(t, 1.75, false)) < 1e-8);
    // asymmetric, on and off the grid
    for (double xc : {3.0, 4.4321}) {
        CAPTURE(xc);
        CHECK(std::abs(pv_direct(t, xc, false) - c * std::log((xc - 1.0) / 0.75)) < 1e-8);
    }
}

TEST_CASE("direct and averaged strategies agree for compact numerators") {
    // smooth bump supported on [0.4, 1.9], below the averaging window
    auto bump = [](double x) {
        const double u = (x - 1.15) / 0.75;
        return cplx(std::abs(u) < 1 ? std::exp(-1.0 / (1 - u * u)) * (1 + 0.5 * x) : 0.0);
    };
    const SpectralTable t = synthetic(bump, 1.0 / 400, 5.0);
    const PvStrategy avg = PvStrategy::averaged(2.5, 4.5, 32);
    const cplx d = pv_direct(t, 4.0);
    const cplx a = pv_fourier_averaged(t, avg);
    CHECK(std::abs(d) > 1e-2);
    CHECK(std::abs(d - a) < 1e-6);
}

TEST_CASE("pole placement and grid checks") {
    const SpectralTable t = synthetic([](double x) { return cplx(x); }, 0.1, 3.0);
    CHECK_THROWS_AS(pv_direct(t, 1.1), InvalidArgument);   // one cell above the pole
    CHECK_THROWS_AS(pv_direct(t, 3.5), InvalidArgument);   // beyond the table
    CHECK_NOTHROW(pv_direct(t, 1.2));
    const SpectralTable late = synthetic([](double x) { return cplx(x); }, 0.1, 3.0, 0.9);
    CHECK_THROWS_AS(pv_direct(late, 2.0), InvalidArgument);  // pole one cell from the start
    const SpectralTable off = synthetic([](double x) { return cplx(x); }, 0.3, 3.0);
    CHECK_THROWS_AS(pv_direct(off, 2.0), InvalidArgument);  // pole between grid points

    SpectralTable coarse = synthetic([](double x) { return cplx(x); }, 0.1, 3.0);
    coarse.r_tilde_over_lambda = 2.0;
    try {
        (void)pv_fourier(coarse, 2.0);
        FAIL("coarse grid accepted");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("required <= 0.0625") != std::string::npos);
    }
}

TEST_CASE("strategy invariants") {
    CHECK_THROWS_AS(PvStrategy::direct(1.0), InvalidArgument);
    CHECK_THROWS_AS(PvStrategy::averaged(0.9, 3.0), InvalidArgument);
    CHECK_THROWS_AS(PvStrategy::averaged(3.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(PvStrategy::averaged(2.0, 3.0, 7), InvalidArgument);
    const PvStrategy s = PvStrategy::default_for(1.0);
    CHECK(s.kind == PvKind::FourierAveraged);
    CHECK(s.x_min_c == doctest::Approx(2.0));
    CHECK(s.x_max_c == doctest::Approx(10.0));
    CHECK(s.n_cutoffs == 32);
    // wide separations move the window up instead of crossing the pole
    const PvStrategy far = PvStrategy::default_for(4.0);
    CHECK(far.x_min_c == 1.5);
    CHECK(far.x_max_c == doctest::Approx(3.5));
    CHECK(default_grid_step(1.0) == 1.0 / 50);
    CHECK(default_grid_step(12.0) == 1.0 / 96);
}

TEST_CASE("vacuum benchmark, perpendicular dipoles") {
    for (double a : {0.3, 0.5, 1.0, 2.0}) {
        CAPTURE(a);
        const PairSpec p = vacuum_pair(a, Vec3c(1, 0, 0));
        const double v0 = exact_v0(p);
        REQUIRE(std::abs(v0) > 0.05);
        const double e_avg = std::abs(v0_numeric(p, omega_a, PvStrategy::default_for(a)).real() - v0) / std::abs(v0);
        const double e_dir =
            std::abs(v0_numeric(p, omega_a, PvStrategy::default_for(a, PvKind::DirectCutoff)).real() - v0) / std::abs(v0);
        CHECK(e_avg < 1e-2);
        CHECK(10 * e_avg < e_dir);
    }
}

TEST_CASE("vacuum benchmark, parallel dipoles") {
    const PairSpec p = vacuum_pair(1.0, Vec3c(0, 0, 1));
    const double v0 = exact_v0(p);
    CHECK(std::abs(v0_numeric(p, omega_a, PvStrategy::default_for(1.0)).real() - v0) < 1e-2 * std::abs(v0));

    // single-cutoff error over a sweep peaks next to a sign change of V0
    double worst = 0, worst_a = 0;
    std::vector<double> as, v0s;
    for (double a = 0.3; a <= 2.0 + 1e-9; a += 0.05) {
        const PairSpec q = vacuum_pair(a, Vec3c(0, 0, 1));
        const double ex = exact_v0(q);
        const double e =
            std::abs(v0_numeric(q, omega_a, PvStrategy::direct(10.0 / a)).real() - ex) / std::abs(ex);
        as.push_back(a);
        v0s.push_back(ex);
        if (e > worst) {
            worst = e;
            worst_a = a;
        }
    }
    bool near_zero = false;
    for (std::size_t i = 0; i + 1 < as.size(); ++i)
        if ((v0s[i] < 0) != (v0s[i + 1] < 0) && std::abs(as[i] - worst_a) < 0.11) near_zero = true;
    CHECK(near_zero);
}

TEST_CASE("averaging is stable under more cutoffs") {
    for (const Vec3c& d : {Vec3c(1, 0, 0), Vec3c(0, 0, 1)}) {
        const PairSpec p = vacuum_pair(1.0, d);
        const cplx v32 = v0_numeric(p, omega_a, PvStrategy::averaged(2.0, 10.0, 32));
        const cplx v64 = v0_numeric(p, omega_a, PvStrategy::averaged(2.0, 10.0, 64));
        CHECK(std::abs(v64 - v32) < 1e-3 * std::abs(v32));
    }
}

TEST_CASE("large-frequency envelope of the vacuum integrand") {
    // z-separated pair: z dipoles lie along the separation, x dipoles across it
    const double dx = 1.0 / 50;
    const SpectralTable along = vacuum_table(vacuum_pair(1.0, Vec3c(0, 0, 1)), omega_a, dx, 100.0);
    const SpectralTable across = vacuum_table(vacuum_pair(1.0, Vec3c(1, 0, 0)), omega_a, dx, 100.0);
    CHECK(fit_envelope_exponent(along, 20.0) == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(std::abs(fit_envelope_exponent(across, 20.0)) < 0.05);
    CHECK(along.values[0] == cplx(0.0));
    // f(1) is half the pair decay rate
    const PairSpec p = vacuum_pair(1.0, Vec3c(1, 0, 0));
    const double g12 = v0_gamma0(p.d_a, p.d_b, p.a.cartesian(), p.b.cartesian(), omega_a).Gamma.real();
    CHECK(across.values[50].real() == doctest::Approx(g12 / 2).epsilon(1e-12));
}

TEST_CASE("spectral cache") {
    const auto dir = std::filesystem::temp_directory_path() / "nfqed_test_cache";
    std::filesystem::remove_all(dir);
    SpectralCache cache(dir.string());
    std::vector<cplx> v = {{1.0, -0.0}, {std::nextafter(1.0, 2.0), 1e-310}, {-3.25e17, 0.1}};
    CHECK_FALSE(cache.load("key-a").has_value());
    cache.store("key-a", v);
    const auto back = cache.load("key-a");
    REQUIRE(back.has_value());
    REQUIRE(back->size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(std::memcmp(&(*back)[i], &v[i], sizeof(cplx)) == 0);
    }
    for (const auto& e : std::filesystem::directory_iterator(dir))
        CHECK(e.path().extension() == ".nfqt");  // no temporary left behind

    // a file under the wrong key, a truncated file and garbage are all rejected
    std::filesystem::copy_file(cache.path_for("key-a"), cache.path_for("key-b"));
    CHECK_THROWS_AS(cache.load("key-b"), CacheError);
    const auto size = std::filesystem::file_size(cache.path_for("key-a"));
    std::filesystem::resize_file(cache.path_for("key-a"), size - 3);
    CHECK_THROWS_AS(cache.load("key-a"), CacheError);
    {
        std::ofstream(cache.path_for("key-c")) << "hello";
    }
    CHECK_THROWS_AS(cache.load("key-c"), CacheError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fiber tables: vacuum limit, threads and cache") {
    FiberSpec vac;
    vac.material = SellmeierModel::vacuum();
    const PairSpec p = vacuum_pair(0.5, Vec3c(1, 0, 0));
    const double dx = 1.0 / 50;
    const RadiationQuadratureSpec quad;
    TableBuildInfo info;
    set_worker_threads(1);
    const SpectralTable one = build_radiation_tables(vac, {{p, 1.5}}, omega_a, dx, quad, nullptr, &info).front();
    CHECK(info.computed_series == 1);
    CHECK(info.worst_certificate < quad.rel_tol);
    const SpectralTable ref = vacuum_table(p, omega_a, dx, 1.5);
    REQUIRE(one.values.size() == ref.values.size());
    double err = 0;
    for (std::size_t i = 0; i < ref.values.size(); ++i) err = std::max(err, std::abs(one.values[i] - ref.values[i]));
    CHECK(err < 1e-4);

    set_worker_threads(3);
    const SpectralTable three = build_radiation_tables(vac, {{p, 1.5}}, omega_a, dx, quad).front();
    set_worker_threads(0);
    CHECK(three.values == one.values);

    const auto dir = std::filesystem::temp_directory_path() / "nfqed_test_tables";
    std::filesystem::remove_all(dir);
    SpectralCache cache(dir.string());
    (void)build_radiation_tables(vac, {{p, 1.5}}, omega_a, dx, quad, &cache, &info);
    CHECK(info.computed_series == 1);
    const SpectralTable again = build_radiation_tables(vac, {{p, 1.5}}, omega_a, dx, quad, &cache, &info).front();
    CHECK(info.cached_series == 1);
    CHECK(info.computed_series == 0);
    CHECK(again.values == one.values);
    std::filesystem::remove_all(dir);

    PairSpec inside = p;
    inside.a.r = 100e-9;
    CHECK_THROWS_AS(build_radiation_tables(FiberSpec{}, {{inside, 1.5}}, omega_a, dx, quad), DomainError);
}
