#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/coupling_matrices.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/green_vacuum.hpp"

using namespace nfqed;

namespace {

const double lambda_a = 852e-9;
const double omega_a = omega_from_wavelength(lambda_a);

FiberSpec vacuum_fiber() {
    FiberSpec f;
    f.material = SellmeierModel::vacuum();
    return f;
}

// a narrow averaging window keeps the tables to a couple of hundred samples
AssembleOptions cheap(Provenance mode, const SpectralCache* cache) {
    AssembleOptions o;
    o.mode = mode;
    o.pv_fixed = PvStrategy::averaged(1.5, 3.0, 8);
    o.cache = cache;
    return o;
}

const SpectralCache& test_cache() {
    static const SpectralCache c = [] {
        const auto dir = std::filesystem::temp_directory_path() / "nfqed_test_coupling";
        std::filesystem::remove_all(dir);
        return SpectralCache(dir.string());
    }();
    return c;
}

double max_rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("single emitter") {
    const FiberSpec fiber;
    const EmitterEnsemble ens = make_chain(fiber, 1, 0.0, 100e-9, Orientation::Normal, omega_a);
    const CouplingMatrices full = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    const CouplingMatrices guided = assemble(fiber, ens, cheap(Provenance::GuidedOnly, nullptr));
    CHECK(full.V(0, 0) == cplx(0.0));
    const double g_gd = gamma_guided(ens, FiberDispersion(fiber))(0, 0).real();
    const double g_rd = gamma_radiation(ens, fiber)(0, 0).real();
    CHECK(full.Gamma(0, 0).real() == doctest::Approx(g_gd + g_rd).epsilon(1e-12));
    CHECK(guided.Gamma(0, 0).real() == doctest::Approx(g_gd).epsilon(1e-12));
    CHECK(full.gamma_gd(0) == doctest::Approx(g_gd).epsilon(1e-12));
    CHECK(full.meta.guided_mode);
    CHECK(full.beta_a > wavenumber(omega_a));
}

TEST_CASE("two-emitter chain is reflection symmetric") {
    const FiberSpec fiber;
    const EmitterEnsemble ens = make_chain(fiber, 2, 0.5 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    const CouplingMatrices c = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    CHECK(std::abs(c.V(0, 1) - c.V(1, 0)) < 1e-14);
    CHECK(std::abs(c.Gamma(0, 0) - c.Gamma(1, 1)) < 1e-12);
    CHECK(c.meta.unique_pairs == 1);
    CHECK(c.meta.table_certificate < 1e-3);
}

TEST_CASE("exact and vacuum-approximated radiation differ only off the diagonal of V") {
    const FiberSpec fiber;
    const EmitterEnsemble ens = make_chain(fiber, 3, 0.5 * lambda_a, 100e-9, Orientation::Binormal, omega_a);
    const CouplingMatrices ex = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    const CouplingMatrices va = assemble(fiber, ens, cheap(Provenance::RadiationVacuumApprox, &test_cache()));
    CHECK(ex.Gamma == va.Gamma);
    CHECK(ex.V.diagonal() == va.V.diagonal());
    CHECK(std::abs(ex.V(0, 1) - va.V(0, 1)) > 1e-3);
    // the vacuum-approximated V is V^gd plus the free-space coupling
    const Eigen::MatrixXcd vgd = v_guided(ens, FiberDispersion(fiber));
    const cplx v0 = v0_gamma0(ens.dipoles[0], ens.dipoles[2], ens.positions[0].cartesian(),
                              ens.positions[2].cartesian(), omega_a)
                        .V;
    CHECK(std::abs(va.V(0, 2) - vgd(0, 2) - v0) < 1e-12);
}

TEST_CASE("rigid z translation leaves the matrices unchanged") {
    const FiberSpec fiber;
    EmitterEnsemble ens = make_chain(fiber, 3, 0.5 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    const CouplingMatrices a = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    for (auto& p : ens.positions) p.z += 3.3e-6;
    const CouplingMatrices b = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    CHECK(max_rel(b.V, a.V) < 1e-9);
    CHECK(max_rel(b.Gamma, a.Gamma) < 1e-9);
    CHECK(b.meta.series_cached == b.meta.unique_pairs);
}

TEST_CASE("entries depend only on the pair") {
    const FiberSpec fiber;
    const EmitterEnsemble ens = make_chain(fiber, 3, 0.5 * lambda_a, 100e-9, Orientation::Parallel, omega_a);
    EmitterEnsemble sub = ens;
    sub.positions = {ens.positions[0], ens.positions[2]};
    sub.dipoles = {ens.dipoles[0], ens.dipoles[2]};
    const CouplingMatrices all = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    const CouplingMatrices two = assemble(fiber, sub, cheap(Provenance::FullExact, &test_cache()));
    CHECK(std::abs(two.V(0, 1) - all.V(0, 2)) < 1e-12);
    CHECK(std::abs(two.Gamma(0, 1) - all.Gamma(0, 2)) < 1e-3 * std::abs(all.Gamma(0, 0)));
    CHECK(all.meta.unique_pairs == 2);
}

TEST_CASE("invariants of assembled matrices") {
    const FiberSpec fiber;
    EmitterEnsemble ens = make_chain(fiber, 4, 0.3 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    ens.positions[3].phi = 1.1;  // break the chain symmetry
    const CouplingMatrices c = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    CHECK((c.V - c.V.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((c.Gamma - c.Gamma.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c.Gamma);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
    for (int i = 0; i < 4; ++i) CHECK(c.V(i, i) == cplx(0.0));

    CouplingMatrices bad = c;
    bad.V(0, 1) += 1e-6;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = c;
    bad.Gamma(0, 0) = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("vacuum fiber has no guided part") {
    const FiberSpec fiber = vacuum_fiber();
    const EmitterEnsemble ens = make_chain(fiber, 2, 0.5 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    const CouplingMatrices c = assemble(fiber, ens, cheap(Provenance::FullExact, &test_cache()));
    CHECK_FALSE(c.meta.guided_mode);
    CHECK(c.beta_a == 0.0);
    const PairRates r = v0_gamma0(ens.dipoles[0], ens.dipoles[1], ens.positions[0].cartesian(),
                                  ens.positions[1].cartesian(), omega_a);
    CHECK(c.Gamma(0, 0).real() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(c.Gamma(0, 1) - r.Gamma) < 1e-3);
}

TEST_CASE("export formats") {
    const FiberSpec fiber;
    const EmitterEnsemble ens = make_chain(fiber, 2, 0.5 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    const CouplingMatrices c = assemble(fiber, ens, cheap(Provenance::RadiationVacuumApprox, nullptr));
    const nlohmann::json j = nlohmann::json::parse(matrices_to_json(c));
    CHECK(j["provenance"] == "vacuum-approx");
    CHECK(j["V"][0][1][0].get<double>() == c.V(0, 1).real());
    CHECK(j["Gamma"][1][1][0].get<double>() == c.Gamma(1, 1).real());
    CHECK(j["solver_meta"]["quad"]["rel_tol"].get<double>() == 1e-3);
    CHECK(j["solver_meta"]["pv"]["n_cutoffs"].get<int>() == 8);
    const std::string csv = matrices_to_csv(c);
    CHECK(csv.rfind("row,col,V_re,V_im,Gamma_re,Gamma_im\r\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("ensemble errors propagate") {
    const FiberSpec fiber;
    EmitterEnsemble ens = make_chain(fiber, 2, 0.5 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    ens.positions[1].z = ens.positions[0].z;
    ens.positions[1].phi = 2.0;
    CHECK_THROWS_AS(assemble(fiber, ens, cheap(Provenance::GuidedOnly, nullptr)), DomainError);
    ens = make_chain(fiber, 2, 0.5 * lambda_a, 100e-9, Orientation::Normal, omega_a);
    ens.dipoles[0] *= 1.1;
    CHECK_THROWS(assemble(fiber, ens, cheap(Provenance::GuidedOnly, nullptr)));
}
