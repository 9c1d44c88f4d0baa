#pragma once

#include <optional>
#include <vector>
#include <string>

#include <Eigen/Dense>

#include "nfqed/ensemble.hpp"
#include "nfqed/fiber_dispersion.hpp"
#include "nfqed/green_fiber.hpp"
#include "nfqed/pv_integrator.hpp"

namespace nfqed {

enum class Provenance { GuidedOnly, FullExact, RadiationVacuumApprox };

const char* provenance_name(Provenance p);

struct SolverMeta {
    RadiationQuadratureSpec quad;
    PvKind pv_kind = PvKind::FourierAveraged;
    std::optional<PvStrategy> pv_fixed;  // same strategy for every pair instead of the per-pair default
    double grid_dx = 0.0;                // table spacing in units of omega_a, 0 if no tables were built
    int unique_pairs = 0;
    int series_computed = 0;
    int series_cached = 0;
    double gamma_certificate = 0.0;  // achieved tolerance of Gamma^rd
    double table_certificate = 0.0;  // worst achieved tolerance over certified table samples
    bool guided_mode = false;        // false when the fiber has no bound mode
    std::string dispersion_policy = "Sellmeier index frozen at its band edge outside the validity band";
};

/// V and Gamma in units of gamma.
struct CouplingMatrices {
    Eigen::MatrixXcd V, Gamma;
    Provenance provenance = Provenance::FullExact;
    SolverMeta meta;
    // what the transmission stage needs from the geometry
    std::vector<double> z;           // emitter positions along the axis [m]
    Eigen::VectorXd gamma_gd;        // diagonal of Gamma^gd [gamma]
    double beta_a = 0.0;             // HE11 propagation constant at omega_a, 0 without a bound mode

    /// Hermiticity to 1e-10, Gamma eigenvalues >= -1e-8, zero diagonal of V.
    void validate() const;
};

struct AssembleOptions {
    Provenance mode = Provenance::FullExact;
    RadiationQuadratureSpec quad;
    PvKind pv_kind = PvKind::FourierAveraged;
    std::optional<PvStrategy> pv_fixed;
    const SpectralCache* cache = nullptr;
};

/// V = V^gd + V^rd (V^gd + V0 in RadiationVacuumApprox), Gamma = Gamma^gd +
/// Gamma^rd; GuidedOnly keeps the guided parts alone. A fiber without a bound
/// mode contributes zero guided parts. Pairs related by a z translation share
/// one V^rd table.
CouplingMatrices assemble(const FiberSpec& fiber, const EmitterEnsemble& ens, const AssembleOptions& opt = {});

std::string meta_to_json(const SolverMeta& m, int indent = -1);
/// {"provenance", "V": [[[re, im], ...], ...], "Gamma": ..., "solver_meta"}
std::string matrices_to_json(const CouplingMatrices& c, int indent = 2);
/// Header row then one row per (row, col): row,col,V_re,V_im,Gamma_re,Gamma_im
std::string matrices_to_csv(const CouplingMatrices& c);

}  // namespace nfqed
