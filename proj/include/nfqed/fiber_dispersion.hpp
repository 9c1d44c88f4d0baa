#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace nfqed {

/// Three-term Sellmeier model n^2 = 1 + sum B_i l^2 / (l^2 - L_i), with the
/// vacuum wavelength l and the resonance terms L_i in micrometres.
struct SellmeierModel {
    std::array<double, 3> B{};
    std::array<double, 3> L_sq{};  // um^2
    double valid_min_um = 0.2;
    double valid_max_um = 6.7;

    static SellmeierModel fused_silica();
    static SellmeierModel vacuum();
    /// Reads the JSON material file (keys B1..B3, L1sq..L3sq, valid_range_um).
    static SellmeierModel load(const std::string& path);
    static SellmeierModel from_json_text(const std::string& text, const std::string& origin = "<string>");
    std::string to_json_text() const;

    bool is_vacuum() const { return B[0] == 0.0 && B[1] == 0.0 && B[2] == 0.0; }
};

struct FiberSpec {
    double radius = 250e-9;  // m
    SellmeierModel material = SellmeierModel::fused_silica();
    double n_exterior = 1.0;

    void validate() const;
};

struct GuidedDispersionPoint {
    double omega = 0.0;
    double n1 = 1.0;
    double beta = 0.0;        // 1/m
    double beta_prime = 0.0;  // s/m, zero until beta_prime() fills it
    double kappa = 0.0;       // interior transverse wavenumber
    double q = 0.0;           // exterior decay constant
    double s = 0.0;
};

/// How solve_beta treats more than one root of the HE eigenvalue equation.
enum class ModePolicy {
    SingleModeOnly,  // multiple roots are an error
    Fundamental,     // return the largest-beta root (HE11)
};

/// Refractive index inside the declared validity band; DomainError outside it.
double refractive_index(const FiberSpec& fiber, double omega);

/// Same formula, with omega outside the band frozen to the nearest band edge.
double refractive_index_clamped(const FiberSpec& fiber, double omega);

/// Residual of the HE eigenvalue equation in its dimensionless form.
double he_eigen_residual(const FiberSpec& fiber, double omega, double n1, double beta);

/// s-parameter of the HE11 field profile.
double he_s_parameter(double radius, double kappa, double q);

class FiberDispersion {
public:
    explicit FiberDispersion(FiberSpec fiber, ModePolicy policy = ModePolicy::SingleModeOnly);

    const FiberSpec& fiber() const { return fiber_; }
    ModePolicy policy() const { return policy_; }

    double refractive_index(double omega) const;
    GuidedDispersionPoint solve_beta(double omega) const;
    double beta_prime(double omega) const;
    /// solve_beta plus beta_prime, memoized per frequency.
    GuidedDispersionPoint point(double omega) const;

    static constexpr double bracket_eps = 1e-9;
    static constexpr double fd_step = 1e-6;

private:
    FiberSpec fiber_;
    ModePolicy policy_;
    mutable std::mutex mutex_;
    mutable std::map<long long, GuidedDispersionPoint> memo_;
};

}  // namespace nfqed
