#include "nfqed/coupling_matrices.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/green_vacuum.hpp"

namespace nfqed {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::GuidedOnly: return "guided-only";
        case Provenance::FullExact: return "exact";
        case Provenance::RadiationVacuumApprox: return "vacuum-approx";
    }
    return "unknown";
}

void CouplingMatrices::validate() const {
    const Eigen::Index n = V.rows();
    if (V.cols() != n || Gamma.rows() != n || Gamma.cols() != n) throw InvalidArgument("coupling matrices must be N x N");
    const double scale = std::max({1.0, V.cwiseAbs().maxCoeff(), Gamma.cwiseAbs().maxCoeff()});
    if ((V - V.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw DomainError("V is not hermitian");
    if ((Gamma - Gamma.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw DomainError("Gamma is not hermitian");
    for (Eigen::Index i = 0; i < n; ++i)
        if (V(i, i) != cplx(0.0)) throw DomainError("V has a nonzero diagonal");
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Gamma, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8) throw DomainError("Gamma is not positive semidefinite");
    }
}

namespace {

// pair geometry up to a common z shift, exact to the bit
std::string pair_signature(const PairSpec& p) {
    std::ostringstream s;
    s << std::hexfloat << p.a.r << ',' << p.a.phi << ',' << p.b.r << ',' << p.b.phi << ',' << (p.b.z - p.a.z);
    for (const Vec3c* d : {&p.d_a, &p.d_b})
        for (int i = 0; i < 3; ++i) s << ',' << (*d)(i).real() << ',' << (*d)(i).imag();
    return s.str();
}

PvStrategy strategy_for(const AssembleOptions& opt, double r_over_lambda) {
    return opt.pv_fixed ? *opt.pv_fixed : PvStrategy::default_for(r_over_lambda, opt.pv_kind);
}

// V^rd for every a < b, one table per distinct pair geometry
Eigen::MatrixXcd v_radiation(const FiberSpec& fiber, const EmitterEnsemble& ens, const AssembleOptions& opt,
                             SolverMeta& meta) {
    const int n = static_cast<int>(ens.size());
    const double lambda_a = wavelength_from_omega(ens.omega_a);
    std::map<std::string, int> index;
    std::vector<PairSpec> unique;
    std::vector<int> which(n * n, -1);
    double r_max = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            PairSpec p{ens.positions[a], ens.positions[b], ens.dipoles[a], ens.dipoles[b]};
            // separations are snapped to 1 fm so that rigidly shifted chains
            // produce bit-identical pair geometries
            p.b.z = std::round((p.b.z - p.a.z) * 1e15) * 1e-15;
            p.a.z = 0.0;
            const auto [it, fresh] = index.emplace(pair_signature(p), static_cast<int>(unique.size()));
            if (fresh) {
                unique.push_back(p);
                r_max = std::max(r_max, (p.a.cartesian() - p.b.cartesian()).norm());
            }
            which[a * n + b] = it->second;
        }
    }
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, n);
    meta.unique_pairs = static_cast<int>(unique.size());
    if (unique.empty()) return V;

    const double dx = default_grid_step(r_max / lambda_a);
    std::vector<TableRequest> req;
    std::vector<PvStrategy> strat;
    for (const PairSpec& p : unique) {
        const double rt = (p.a.cartesian() - p.b.cartesian()).norm() / lambda_a;
        if (!(rt > 0.0)) throw DomainError("coincident emitters");
        strat.push_back(strategy_for(opt, rt));
        req.push_back({p, strat.back().x_max() + 2.0 * dx});
    }
    TableBuildInfo info;
    const std::vector<SpectralTable> tables =
        build_radiation_tables(fiber, req, ens.omega_a, dx, opt.quad, opt.cache, &info);
    meta.grid_dx = dx;
    meta.series_computed = info.computed_series;
    meta.series_cached = info.cached_series;
    meta.table_certificate = info.worst_certificate;

    std::vector<cplx> v(unique.size());
    for (std::size_t i = 0; i < unique.size(); ++i) v[i] = v_from_table(tables[i], strat[i], unique[i], ens.omega_a);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            V(a, b) = v[which[a * n + b]];
            V(b, a) = std::conj(V(a, b));
        }
    }
    return V;
}

Eigen::MatrixXcd v_vacuum(const EmitterEnsemble& ens) {
    const int n = static_cast<int>(ens.size());
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            V(a, b) = v0_gamma0(ens.dipoles[a], ens.dipoles[b], ens.positions[a].cartesian(),
                                ens.positions[b].cartesian(), ens.omega_a)
                          .V;
            V(b, a) = std::conj(V(a, b));
        }
    }
    return V;
}

}  // namespace

CouplingMatrices assemble(const FiberSpec& fiber, const EmitterEnsemble& ens, const AssembleOptions& opt) {
    ens.validate(fiber);
    const int n = static_cast<int>(ens.size());
    CouplingMatrices out;
    out.provenance = opt.mode;
    out.meta.quad = opt.quad;
    out.meta.pv_kind = opt.pv_kind;
    out.meta.pv_fixed = opt.pv_fixed;
    out.V = Eigen::MatrixXcd::Zero(n, n);
    out.Gamma = Eigen::MatrixXcd::Zero(n, n);
    out.gamma_gd = Eigen::VectorXd::Zero(n);
    for (const CylPoint& p : ens.positions) out.z.push_back(p.z);
    if (n == 0) return out;

    try {
        FiberDispersion disp(fiber);
        out.Gamma = gamma_guided(ens, disp);
        out.gamma_gd = out.Gamma.diagonal().real();
        out.beta_a = disp.point(ens.omega_a).beta;
        if (n > 1) out.V = v_guided(ens, disp);
        out.meta.guided_mode = true;
    } catch (const NoGuidedModeError&) {
        out.meta.guided_mode = false;
    }
    if (opt.mode != Provenance::GuidedOnly) {
        RadiationResult info;
        out.Gamma += gamma_radiation(ens, fiber, opt.quad, &info);
        out.meta.gamma_certificate = info.achieved_tol;
        out.V += opt.mode == Provenance::FullExact ? v_radiation(fiber, ens, opt, out.meta) : v_vacuum(ens);
    }
    for (int i = 0; i < n; ++i) {
        out.V(i, i) = 0.0;
        out.Gamma(i, i) = out.Gamma(i, i).real();
    }
    out.validate();
    return out;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXcd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json strategy_json(const PvStrategy& s) {
    if (s.kind == PvKind::DirectCutoff) return {{"kind", "direct"}, {"x_c", s.x_c}};
    return {{"kind", "averaged"}, {"x_min_c", s.x_min_c}, {"x_max_c", s.x_max_c}, {"n_cutoffs", s.n_cutoffs}};
}

nlohmann::json meta_json(const SolverMeta& m) {
    nlohmann::json j;
    j["quad"] = {{"m_cut", m.quad.m_cut},
                 {"theta_order", m.quad.theta_order},
                 {"rel_tol", m.quad.rel_tol},
                 {"max_refinements", m.quad.max_refinements}};
    j["pv"] = m.pv_fixed ? strategy_json(*m.pv_fixed)
                         : nlohmann::json{{"kind", m.pv_kind == PvKind::DirectCutoff ? "direct" : "averaged"},
                                          {"window", "per pair: [2, 10] lambda_a / r_ab, 32 cutoffs"}};
    j["grid_dx_over_omega_a"] = m.grid_dx;
    j["unique_pairs"] = m.unique_pairs;
    j["table_series_computed"] = m.series_computed;
    j["table_series_cached"] = m.series_cached;
    j["gamma_rd_certificate"] = m.gamma_certificate;
    j["table_certificate"] = m.table_certificate;
    j["guided_mode"] = m.guided_mode;
    j["dispersion_policy"] = m.dispersion_policy;
    return j;
}

}  // namespace

std::string meta_to_json(const SolverMeta& m, int indent) { return meta_json(m).dump(indent); }

std::string matrices_to_json(const CouplingMatrices& c, int indent) {
    nlohmann::json j;
    j["provenance"] = provenance_name(c.provenance);
    j["unit"] = "gamma";
    j["V"] = matrix_json(c.V);
    j["Gamma"] = matrix_json(c.Gamma);
    j["solver_meta"] = meta_json(c.meta);
    return j.dump(indent);
}

std::string matrices_to_csv(const CouplingMatrices& c) {
    std::ostringstream s;
    s << std::setprecision(17);
    s << "row,col,V_re,V_im,Gamma_re,Gamma_im\r\n";
    for (Eigen::Index i = 0; i < c.V.rows(); ++i)
        for (Eigen::Index j = 0; j < c.V.cols(); ++j)
            s << i << ',' << j << ',' << c.V(i, j).real() << ',' << c.V(i, j).imag() << ',' << c.Gamma(i, j).real()
              << ',' << c.Gamma(i, j).imag() << "\r\n";
    return s.str();
}

}  // namespace nfqed
