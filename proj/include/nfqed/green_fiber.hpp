#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nfqed/ensemble.hpp"
#include "nfqed/fiber_dispersion.hpp"
#include "nfqed/types.hpp"

namespace nfqed {

/// Truncation of the radiation-mode sum and theta quadrature. Zero values
/// select the automatic rules of default_radiation_orders().
struct RadiationQuadratureSpec {
    int m_cut = 0;
    int theta_order = 0;
    double rel_tol = 1e-3;
    int max_refinements = 3;
};

/// Orders actually used by one evaluation. Each theta node sums
/// |m| <= min(m_cut, ceil(x) + margin) with x = max(q r_max, kappa r_f).
struct RadiationOrders {
    int m_cut = 0;
    int margin = 0;
    int theta_order = 0;

    RadiationOrders refined() const { return {m_cut + 2, margin + 2, 2 * theta_order}; }
    bool operator==(const RadiationOrders&) const = default;
};

/// m_cut = ceil(k r_max) + max(8, ceil(6 (k r_max)^(1/3))), margin alike but
/// per node, theta_order = max(64, ceil(1.5 (2 k r_max + k dz_max)) + 32).
RadiationOrders default_radiation_orders(double omega, double r_max, double dz_max);

/// Spec values override the automatic ones.
RadiationOrders resolve_orders(const RadiationQuadratureSpec& quad, double omega, double r_max, double dz_max);

struct PointPair {
    CylPoint a, b;
};

/// Im G^rd in Cartesian components for a batch of pairs at one frequency,
/// sharing the theta nodes and Bessel sequences. The theta integral starts
/// from ceil(theta_order / 15) Gauss-Kronrod panels and bisects a panel while
/// its error estimate exceeds panel_tol times the vacuum self value, scaled
/// by the panel length with a floor. No certificate.
std::vector<Mat3c> im_g_radiation_fixed(double n1, double radius, double omega, const std::vector<PointPair>& pairs,
                                        const RadiationOrders& orders, double panel_tol = 1e-4);

struct RadiationResult {
    std::vector<Mat3c> values;
    RadiationOrders orders;  // the finer of the two compared runs
    double achieved_tol = 0.0;
};

/// Evaluates with the resolved orders and with orders.refined(), returns the
/// finer result once every pair agrees within rel_tol, else refines again.
/// ConvergenceError with the achieved tolerance after max_refinements.
/// Pair errors are relative to max(|G|_F, k / (6 pi)).
RadiationResult im_g_radiation_certified(const FiberSpec& fiber, double omega, const std::vector<PointPair>& pairs,
                                         const RadiationQuadratureSpec& quad);

/// Single pair, certified.
Mat3c im_g_radiation(const FiberSpec& fiber, const CylPoint& a, const CylPoint& b, double omega,
                     const RadiationQuadratureSpec& quad = {});

/// Im G^gd in Cartesian components. Both points must lie outside the fiber.
Mat3c im_g_guided(const FiberDispersion& disp, const CylPoint& a, const CylPoint& b, double omega);

/// Guided decay matrix in units of gamma.
Eigen::MatrixXcd gamma_guided(const EmitterEnsemble& ens, const FiberDispersion& disp);

/// Guided coherent coupling in units of gamma, zero diagonal. DomainError if
/// two emitters share the same z.
Eigen::MatrixXcd v_guided(const EmitterEnsemble& ens, const FiberDispersion& disp);

/// Radiation decay matrix in units of gamma at omega_a.
Eigen::MatrixXcd gamma_radiation(const EmitterEnsemble& ens, const FiberSpec& fiber,
                                 const RadiationQuadratureSpec& quad = {}, RadiationResult* info = nullptr);

}  // namespace nfqed
