#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nfqed/coupling_matrices.hpp"

namespace nfqed {

/// Weak probe in the forward guided mode. rabi is real, positive and in units
/// of gamma; detunings Delta = omega_p - omega_a are in units of gamma.
struct DriveSpec {
    double rabi = 1e-3;
    std::vector<double> detunings;

    /// 400 points over [-15, 15].
    static std::vector<double> default_detunings();
};

struct SpectrumResult {
    std::vector<double> detunings;
    std::vector<double> transmission;
    std::vector<Eigen::VectorXcd> amplitudes;  // empty unless requested
    Provenance provenance = Provenance::FullExact;
    std::string meta_json;
};

/// c = -(Delta + V + i Gamma / 2)^-1 eta with eta_a = rabi exp(i beta_a z_a).
/// SingularSystemError if the factorization is singular or the residual
/// exceeds 1e-12 |eta| after one refinement step.
Eigen::VectorXcd steady_state(const CouplingMatrices& m, const DriveSpec& drive, double delta);

/// T = |rabi e^{i beta z} + i sum_a (Gamma^gd_aa / 2) e^{i beta (z - z_a)} c_a|^2 / rabi^2
/// at an observation point z beyond the chain (default: the last emitter).
/// NoGuidedModeError when the matrices carry no guided mode and N > 0.
SpectrumResult transmission_spectrum(const CouplingMatrices& m, const DriveSpec& drive, bool keep_amplitudes = false,
                                     std::optional<double> z_obs = std::nullopt);

/// delta_over_gamma,T,provenance rows.
std::string spectrum_to_csv(const SpectrumResult& s);
std::string spectrum_to_json(const SpectrumResult& s, int indent = 2);

}  // namespace nfqed
