#include "nfqed/fiber_dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/specfun.hpp"

namespace nfqed {

namespace {

using nlohmann::json;

double wavelength_um(double omega) { return wavelength_from_omega(omega) * 1e6; }

double sellmeier_n(const SellmeierModel& m, double lam_um) {
    const double l2 = lam_um * lam_um;
    double n2 = 1.0;
    for (int i = 0; i < 3; ++i) n2 += m.B[i] * l2 / (l2 - m.L_sq[i]);
    if (!(n2 > 0.0)) throw DomainError("Sellmeier model gives n^2 <= 0 at " + std::to_string(lam_um) + " um");
    return std::sqrt(n2);
}

double key_number(const json& j, const char* key, const std::string& origin) {
    if (!j.contains(key)) throw ConfigError(origin + ": missing key '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(origin + ": key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

struct Residual {
    double natural;  // LHS - RHS of the eigenvalue equation
    double smooth;   // natural * J1(kappa a), free of the J1 poles
};

Residual eigen_residual(double a, double k, double n1, double beta) {
    const double kappa = std::sqrt(std::max(0.0, k * k * n1 * n1 - beta * beta));
    const double q = std::sqrt(std::max(0.0, beta * beta - k * k));
    const double y = kappa * a;
    const double u = q * a;
    const double j0 = specfun::bessel_j(0, y);
    const double j1 = specfun::bessel_j(1, y);
    const double kr = specfun::bessel_k_deriv(1, u) / (u * specfun::bessel_k(1, u));
    const double n2 = n1 * n1;
    const double iy2 = 1.0 / (y * y);
    const double iu2 = 1.0 / (u * u);
    const double t1 = (n2 - 1.0) / (2.0 * n2) * kr;
    const double t2 = beta / (n1 * k) * (iu2 + iy2);
    const double rhs = -(n2 + 1.0) / (2.0 * n2) * kr + iy2 - std::sqrt(t1 * t1 + t2 * t2);
    return {j0 / (y * j1) - rhs, j0 / y - j1 * rhs};
}

}  // namespace

SellmeierModel SellmeierModel::fused_silica() {
    SellmeierModel m;
    m.B = {0.6961663, 0.4079426, 0.8974794};
    m.L_sq = {0.0684043 * 0.0684043, 0.1162414 * 0.1162414, 9.896161 * 9.896161};
    return m;
}

SellmeierModel SellmeierModel::vacuum() {
    SellmeierModel m;
    m.B = {0.0, 0.0, 0.0};
    m.L_sq = {0.0, 0.0, 0.0};
    m.valid_min_um = 0.0;
    m.valid_max_um = std::numeric_limits<double>::infinity();
    return m;
}

SellmeierModel SellmeierModel::from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": material must be a JSON object");
    static const char* known[] = {"B1", "B2", "B3", "L1sq", "L2sq", "L3sq", "valid_range_um", "name", "reference"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(origin + ": unknown key '" + it.key() + "'");
    }
    SellmeierModel m;
    m.B = {key_number(j, "B1", origin), key_number(j, "B2", origin), key_number(j, "B3", origin)};
    m.L_sq = {key_number(j, "L1sq", origin), key_number(j, "L2sq", origin), key_number(j, "L3sq", origin)};
    if (j.contains("valid_range_um")) {
        const auto& r = j.at("valid_range_um");
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            throw ConfigError(origin + ": 'valid_range_um' must be a pair of numbers");
        m.valid_min_um = r[0].get<double>();
        m.valid_max_um = r[1].get<double>();
        if (!(m.valid_min_um >= 0.0 && m.valid_max_um > m.valid_min_um))
            throw ConfigError(origin + ": 'valid_range_um' must be increasing and non-negative");
    }
    for (double b : m.B)
        if (b < 0.0) throw ConfigError(origin + ": Sellmeier B coefficients must be non-negative");
    return m;
}

SellmeierModel SellmeierModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open material file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), path);
}

std::string SellmeierModel::to_json_text() const {
    json j;
    j["B1"] = B[0];
    j["B2"] = B[1];
    j["B3"] = B[2];
    j["L1sq"] = L_sq[0];
    j["L2sq"] = L_sq[1];
    j["L3sq"] = L_sq[2];
    if (std::isfinite(valid_max_um)) j["valid_range_um"] = {valid_min_um, valid_max_um};
    return j.dump();
}

void FiberSpec::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("fiber radius must be positive");
    if (n_exterior != 1.0) throw InvalidArgument("only a vacuum exterior (n = 1) is supported");
    for (double b : material.B)
        if (b < 0.0) throw InvalidArgument("Sellmeier B coefficients must be non-negative");
}

double refractive_index(const FiberSpec& fiber, double omega) {
    if (!(omega > 0.0)) throw DomainError("refractive_index requires omega > 0");
    if (fiber.material.is_vacuum()) return 1.0;
    const double lam = wavelength_um(omega);
    const double slack = 1e-12 * lam;
    if (lam < fiber.material.valid_min_um - slack || lam > fiber.material.valid_max_um + slack) {
        std::ostringstream os;
        os << "wavelength " << lam << " um outside the material validity band [" << fiber.material.valid_min_um
           << ", " << fiber.material.valid_max_um << "] um";
        throw DomainError(os.str());
    }
    return sellmeier_n(fiber.material, lam);
}

double refractive_index_clamped(const FiberSpec& fiber, double omega) {
    if (!(omega > 0.0)) throw DomainError("refractive_index requires omega > 0");
    if (fiber.material.is_vacuum()) return 1.0;
    const double lam = std::clamp(wavelength_um(omega), fiber.material.valid_min_um, fiber.material.valid_max_um);
    return sellmeier_n(fiber.material, lam);
}

double he_eigen_residual(const FiberSpec& fiber, double omega, double n1, double beta) {
    return eigen_residual(fiber.radius, wavenumber(omega), n1, beta).natural;
}

double he_s_parameter(double radius, double kappa, double q) {
    const double y = kappa * radius;
    const double u = q * radius;
    const double num = 1.0 / (y * y) + 1.0 / (u * u);
    const double den = specfun::bessel_j_deriv(1, y) / (y * specfun::bessel_j(1, y)) +
                       specfun::bessel_k_deriv(1, u) / (u * specfun::bessel_k(1, u));
    return num / den;
}

FiberDispersion::FiberDispersion(FiberSpec fiber, ModePolicy policy) : fiber_(std::move(fiber)), policy_(policy) {
    fiber_.validate();
}

double FiberDispersion::refractive_index(double omega) const { return nfqed::refractive_index(fiber_, omega); }

GuidedDispersionPoint FiberDispersion::solve_beta(double omega) const {
    const double n1 = refractive_index(omega);
    const double k = wavenumber(omega);
    const double a = fiber_.radius;
    if (!(n1 > 1.0)) throw NoGuidedModeError("no guided mode: core index is not above the exterior index");
    const double lo = k * (1.0 + bracket_eps);
    const double hi = n1 * k * (1.0 - bracket_eps);
    if (!(hi > lo)) throw NoGuidedModeError("no guided mode: empty propagation-constant bracket");

    // The scan runs uniformly in kappa*a, where the J-oscillations of the
    // residual are evenly spaced; the smooth form has no poles at J1 zeros.
    const double y_max = a * std::sqrt(k * k * n1 * n1 - lo * lo);
    const double y_min = a * std::sqrt(k * k * n1 * n1 - hi * hi);
    const int n_scan = std::max(2000, static_cast<int>(200.0 * y_max));
    auto beta_of_y = [&](double y) { return std::sqrt(k * k * n1 * n1 - (y / a) * (y / a)); };
    auto smooth = [&](double beta) { return eigen_residual(a, k, n1, beta).smooth; };

    std::vector<std::pair<double, double>> brackets;  // (beta_low, beta_high)
    double b_prev = hi;
    double f_prev = smooth(hi);
    for (int i = 1; i <= n_scan; ++i) {
        const double y = (i == n_scan) ? y_max : y_min + (y_max - y_min) * i / n_scan;
        const double b = (i == n_scan) ? lo : beta_of_y(y);
        const double f = smooth(b);
        if (f == 0.0 || (f < 0.0) != (f_prev < 0.0)) brackets.emplace_back(b, b_prev);
        b_prev = b;
        f_prev = f;
    }
    if (brackets.empty()) throw NoGuidedModeError("no guided mode: eigenvalue equation has no root in the bracket");
    if (brackets.size() > 1 && policy_ == ModePolicy::SingleModeOnly) {
        std::ostringstream os;
        os << brackets.size() << " roots of the HE eigenvalue equation at omega=" << omega
           << "; the fiber is multimode here, lower the frequency or the radius";
        throw MultimodeError(os.str());
    }
    // brackets[0] holds the largest beta, i.e. the fundamental mode.
    double bl = brackets.front().first, bh = brackets.front().second;
    double fl = smooth(bl);
    for (int it = 0; it < 200 && bh - bl > 4.0 * std::numeric_limits<double>::epsilon() * bh; ++it) {
        const double mid = 0.5 * (bl + bh);
        const double fm = smooth(mid);
        if (fm == 0.0) {
            bl = bh = mid;
            break;
        }
        if ((fm < 0.0) == (fl < 0.0)) {
            bl = mid;
            fl = fm;
        } else {
            bh = mid;
        }
    }
    double beta = 0.5 * (bl + bh);
    const double fh = smooth(bh);
    fl = smooth(bl);
    if (fh != fl) {
        const double sec = bl - fl * (bh - bl) / (fh - fl);
        if (sec >= bl && sec <= bh) beta = sec;
    }

    GuidedDispersionPoint p;
    p.omega = omega;
    p.n1 = n1;
    p.beta = beta;
    p.kappa = std::sqrt(k * k * n1 * n1 - beta * beta);
    p.q = std::sqrt(beta * beta - k * k);
    p.s = he_s_parameter(a, p.kappa, p.q);
    return p;
}

double FiberDispersion::beta_prime(double omega) const {
    auto diff = [&](double h) {
        return (solve_beta(omega * (1.0 + h)).beta - solve_beta(omega * (1.0 - h)).beta) / (2.0 * h * omega);
    };
    const double d1 = diff(fd_step);
    const double d2 = diff(0.5 * fd_step);
    if (std::abs(d1 - d2) > 1e-6 * std::abs(d2))
        throw ConvergenceError("beta' finite difference failed its step-halving check", std::abs(d1 - d2) / std::abs(d2));
    return d1;
}

GuidedDispersionPoint FiberDispersion::point(double omega) const {
    const long long key = std::llround(std::log(omega) * 1e9);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
    }
    GuidedDispersionPoint p = solve_beta(omega);
    p.beta_prime = beta_prime(omega);
    std::lock_guard<std::mutex> lock(mutex_);
    return memo_.emplace(key, p).first->second;
}

}  // namespace nfqed
