




#include "nfqed/green_fiber.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/green_vacuum.hpp"
#include "nfqed/mode_functions.hpp"

namespace nfqed {

namespace {

const cplx I(0.0, 1.0);

int order_margin(double x) { return std::max(8, static_cast<int>(std::ceil(6.0 * std::cbrt(x)))); }

Mat3c pairwise_sum(const std::vector<Mat3c>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    if (hi - lo == 2) return v[lo] + v[lo + 1];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

void check_outside(double radius, const CylPoint& p) {
    if (!(p.r > radius)) throw DomainError("emitter positions must lie outside the fiber (r > r_f)");
}

// cylindrical dyad at (phi_a, phi_b) -> Cartesian
Mat3c to_cartesian_dyad(const Mat3c& g, double phi_a, double phi_b) {
    return cyl_to_cart(phi_a).cast<cplx>() * g * cyl_to_cart(phi_b).transpose().cast<cplx>();
}

double max_radius(const std::vector<PointPair>& pairs) {
    double r = 0.0;
    for (const auto& p : pairs) r = std::max({r, p.a.r, p.b.r});
    return r;
}

double max_dz(const std::vector<PointPair>& pairs) {
    double d = 0.0;
    for (const auto& p : pairs) d = std::max(d, std::abs(p.a.z - p.b.z));
    return d;
}

}  // namespace

RadiationOrders default_radiation_orders(double omega, double r_max, double dz_max) {
    const double k = wavenumber(omega);
    const double x = k * r_max;
    RadiationOrders o;
    o.m_cut = static_cast<int>(std::ceil(x)) + order_margin(x);
    o.margin = order_margin(x);
    o.theta_order = std::max(64, static_cast<int>(std::ceil(1.5 * (2.0 * x + k * dz_max))) + 32);
    return o;
}

RadiationOrders resolve_orders(const RadiationQuadratureSpec& quad, double omega, double r_max, double dz_max) {
    if (quad.m_cut < 0 || quad.theta_order < 0) throw InvalidArgument("quadrature orders must be non-negative");
    RadiationOrders o = default_radiation_orders(omega, r_max, dz_max);
    if (quad.m_cut > 0) {
        o.m_cut = quad.m_cut;
        o.margin = std::max(o.margin, quad.m_cut);  // an explicit cut applies at every node
    }
    if (quad.theta_order > 0) o.theta_order = quad.theta_order;
    return o;
}

namespace {

// theta integrand for a batch of pairs: (pi/2)-free sum over m and l with
// the e^{i k cos(theta) dz} phase, cylindrical components.
class RadiationIntegrand {
public:
    RadiationIntegrand(double n1, double radius, double omega, const std::vector<PointPair>& pairs,
                       const RadiationOrders& orders)
        : n1_(n1), radius_(radius), k_(wavenumber(omega)), pairs_(pairs), orders_(orders) {
        for (const auto& p : pairs) {
            check_outside(radius, p.a);
            check_outside(radius, p.b);
            radii_.push_back(p.a.r);
            radii_.push_back(p.b.r);
        }
        std::sort(radii_.begin(), radii_.end());
        radii_.erase(std::unique(radii_.begin(), radii_.end()), radii_.end());
        auto index_of = [&](double r) {
            return static_cast<int>(std::lower_bound(radii_.begin(), radii_.end(), r) - radii_.begin());
        };
        for (const auto& p : pairs) {
            ia_.push_back(index_of(p.a.r));
            ib_.push_back(index_of(p.b.r));
        }
        r_max_ = radii_.empty() ? radius : radii_.back();
    }

    std::size_t size() const { return pairs_.size(); }
    double k() const { return k_; }

    void eval(double theta, std::vector<Mat3c>& out) {
        const double ct = std::cos(theta);
        const double q = k_ * std::sin(theta);
        const double kappa = k_ * std::sqrt(n1_ * n1_ - ct * ct);
        const double x = std::max(q * r_max_, kappa * radius_);
        const int m_node = std::min(orders_.m_cut, static_cast<int>(std::ceil(x)) + orders_.margin);
        node_.compute(n1_, radius_, k_, theta, m_node, radii_);
        terms_.resize(static_cast<std::size_t>(m_node + 1));
        out.resize(pairs_.size());
        for (std::size_t p = 0; p < pairs_.size(); ++p) {
            const double dphi = pairs_[p].a.phi - pairs_[p].b.phi;
            for (int m = 0; m <= m_node; ++m) {
                double F[3][3] = {};
                for (int l : {-1, 1}) {
                    const auto& fa = node_.at(m, l, ia_[p]);
                    const auto& fb = node_.at(m, l, ib_[p]);
                    const double va[3] = {fa.fr, fa.fphi, fa.fz}, vb[3] = {fb.fr, fb.fphi, fb.fz};
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) F[i][j] += va[i] * vb[j];
                }
                // e = (i fr, fphi, fz); +m and -m together give even entries
                // 2 cos(m dphi) and odd ones 2 i sin(m dphi), m = 0 counted once.
                const double c = (m == 0) ? 1.0 : 2.0 * std::cos(m * dphi);
                const double s = (m == 0) ? 0.0 : 2.0 * std::sin(m * dphi);
                Mat3c& T = terms_[m];
                T(0, 0) = c * F[0][0];
                T(0, 1) = -s * F[0][1];
                T(0, 2) = I * c * F[0][2];
                T(1, 0) = s * F[1][0];
                T(1, 1) = c * F[1][1];
                T(1, 2) = I * s * F[1][2];
                T(2, 0) = -I * c * F[2][0];
                T(2, 1) = I * s * F[2][1];
                T(2, 2) = c * F[2][2];
            }
            const cplx phase = std::exp(I * (k_ * ct * (pairs_[p].a.z - pairs_[p].b.z)));
            out[p] = phase * pairwise_sum(terms_, 0, terms_.size());
        }
    }

private:
    double n1_, radius_, k_;
    const std::vector<PointPair>& pairs_;
    RadiationOrders orders_;
    std::vector<double> radii_;
    std::vector<int> ia_, ib_;
    double r_max_ = 0.0;
    RadiationNode node_;
    std::vector<Mat3c> terms_;
};

constexpr int max_panel_depth = 24;
constexpr double panel_floor = 0.25;

}  // namespace

std::vector<Mat3c> im_g_radiation_fixed(double n1, double radius, double omega, const std::vector<PointPair>& pairs,
                                        const RadiationOrders& orders, double panel_tol) {
    if (!(omega > 0.0)) throw DomainError("frequency must be positive");
    if (orders.theta_order < 1 || orders.m_cut < 0) throw InvalidArgument("invalid radiation orders");
    RadiationIntegrand f(n1, radius, omega, pairs, orders);
    const std::size_t np = pairs.size();
    std::vector<Mat3c> acc(np, Mat3c::Zero());
    if (np == 0) return acc;

    // Gauss-Kronrod 15/7 panels, bisected depth-first until the embedded
    // error estimate of every pair falls below its share of the tolerance.
    // The share never drops below panel_floor of an initial panel's: narrow
    // leaky-mode resonances at high frequency would otherwise be chased to
    // full depth for a negligible change of the integral.
    using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
    using g7 = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = gk::abscissa();
    const auto& wk = gk::weights();
    const auto& wg = g7::weights();
    // integrated self term is about (k / 6 pi)(2 / pi) before the pi/2 prefactor
    const double tol = panel_tol * f.k() / (3.0 * pi * pi);
    const int panels = std::max(4, (orders.theta_order + 14) / 15);

    std::vector<Mat3c> kron(np), gauss(np), vp, vm;
    struct Panel {
        double a, b;
        int depth;
    };
    std::vector<Panel> stack;
    for (int i = panels - 1; i >= 0; --i) stack.push_back({pi * i / panels, pi * (i + 1) / panels, 0});
    while (!stack.empty()) {
        const Panel pn = stack.back();
        stack.pop_back();
        const double c = 0.5 * (pn.a + pn.b), h = 0.5 * (pn.b - pn.a);
        f.eval(c, vp);
        for (std::size_t p = 0; p < np; ++p) {
            kron[p] = wk[0] * vp[p];
            gauss[p] = wg[0] * vp[p];
        }
        for (std::size_t i = 1; i < xk.size(); ++i) {
            f.eval(c + h * xk[i], vp);
            f.eval(c - h * xk[i], vm);
            for (std::size_t p = 0; p < np; ++p) {
                const Mat3c s = vp[p] + vm[p];
                kron[p] += wk[i] * s;
                if (i % 2 == 0) gauss[p] += wg[i / 2] * s;
            }
        }
        double err = 0.0;
        for (std::size_t p = 0; p < np; ++p) err = std::max(err, h * (kron[p] - gauss[p]).norm());
        if (err > tol * std::max((pn.b - pn.a) / pi, panel_floor / panels) && pn.depth < max_panel_depth) {
            stack.push_back({c, pn.b, pn.depth + 1});
            stack.push_back({pn.a, c, pn.depth + 1});
            continue;
        }
        for (std::size_t p = 0; p < np; ++p) acc[p] += h * kron[p];
    }
    std::vector<Mat3c> out(np);
    for (std::size_t p = 0; p < np; ++p)
        out[p] = to_cartesian_dyad(0.5 * pi * acc[p], pairs[p].a.phi, pairs[p].b.phi);
    return out;
}

RadiationResult im_g_radiation_certified(const FiberSpec& fiber, double omega, const std::vector<PointPair>& pairs,
                                         const RadiationQuadratureSpec& quad) {
    if (!(quad.rel_tol > 0.0)) throw InvalidArgument("rel_tol must be positive");
    const double n1 = refractive_index_clamped(fiber, omega);
    RadiationOrders base = resolve_orders(quad, omega, max_radius(pairs), max_dz(pairs));
    std::vector<Mat3c> coarse = im_g_radiation_fixed(n1, fiber.radius, omega, pairs, base, 0.1 * quad.rel_tol);
    // errors are measured against the pair's own norm, floored at the vacuum
    // self value k / (6 pi) that sets the unit gamma of every coupling
    const double floor = wavenumber(omega) / (6.0 * pi);
    double err = 0.0;
    for (int attempt = 0; attempt <= quad.max_refinements; ++attempt) {
        const RadiationOrders fine_orders = base.refined();
        std::vector<Mat3c> fine = im_g_radiation_fixed(n1, fiber.radius, omega, pairs, fine_orders, 0.1 * quad.rel_tol);
        err = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p)
            err = std::max(err, (fine[p] - coarse[p]).norm() / std::max(fine[p].norm(), floor));
        if (err < quad.rel_tol) return {std::move(fine), fine_orders, err};
        base = fine_orders;
        coarse = std::move(fine);
    }
    throw ConvergenceError("radiation Green tensor did not reach rel_tol", err);
}

Mat3c im_g_radiation(const FiberSpec& fiber, const CylPoint& a, const CylPoint& b, double omega,
                     const RadiationQuadratureSpec& quad) {
    return im_g_radiation_certified(fiber, omega, {{a, b}}, quad).values.front();
}

// ---------------------------------------------------------------- guided

namespace {

struct GuidedChannels {
    double weight;  // c^2 beta' / (4 omega)
    double beta;
    GuidedProfile profile;
};

GuidedChannels guided_channels(const FiberDispersion& disp, double omega) {
    const GuidedDispersionPoint p = disp.point(omega);
    const double c = PhysicalConstants::c;
    return {c * c * p.beta_prime / (4.0 * omega), p.beta, GuidedProfile(disp.fiber(), p)};
}

// field of channel (f, l) at p in Cartesian components, with the phase e^{i l phi} e^{i f beta z}
Vec3c guided_field(const GuidedChannels& g, const CylPoint& p, int f, int l) {
    const Vec3c e = g.profile.at({g.beta, l, f}, p.r).v;
    return cyl_to_cart(p.phi).cast<cplx>() * e * std::exp(I * (l * p.phi + f * g.beta * p.z));
}

constexpr int channel_f[4] = {1, 1, -1, -1};
constexpr int channel_l[4] = {1, -1, 1, -1};

// u(alpha, channel) = d_alpha^dagger e_channel(r_alpha)
Eigen::MatrixXcd guided_amplitudes(const EmitterEnsemble& ens, const GuidedChannels& g) {
    Eigen::MatrixXcd u(ens.size(), 4);
    for (std::size_t a = 0; a < ens.size(); ++a)
        for (int ch = 0; ch < 4; ++ch)
            u(a, ch) = ens.dipoles[a].dot(guided_field(g, ens.positions[a], channel_f[ch], channel_l[ch]));
    return u;
}

}  // namespace

Mat3c im_g_guided(const FiberDispersion& disp, const CylPoint& a, const CylPoint& b, double omega) {
    const double radius = disp.fiber().radius;
    check_outside(radius, a);
    check_outside(radius, b);
    const GuidedChannels g = guided_channels(disp, omega);
    Mat3c out = Mat3c::Zero();
    for (int ch = 0; ch < 4; ++ch) {
        const Vec3c ea = guided_field(g, a, channel_f[ch], channel_l[ch]);
        const Vec3c eb = guided_field(g, b, channel_f[ch], channel_l[ch]);
        out += ea * eb.adjoint();
    }
    return g.weight * out;
}

Eigen::MatrixXcd gamma_guided(const EmitterEnsemble& ens, const FiberDispersion& disp) {
    ens.validate(disp.fiber());
    const int n = static_cast<int>(ens.size());
    if (n == 0) return Eigen::MatrixXcd(0, 0);
    const GuidedChannels g = guided_channels(disp, ens.omega_a);
    const Eigen::MatrixXcd u = guided_amplitudes(ens, g);
    const double scale = 6.0 * pi / wavenumber(ens.omega_a) * g.weight;
    Eigen::MatrixXcd out = scale * u * u.adjoint();
    for (int a = 0; a < n; ++a) out(a, a) = out(a, a).real();
    return out;
}

Eigen::MatrixXcd v_guided(const EmitterEnsemble& ens, const FiberDispersion& disp) {
    ens.validate(disp.fiber());
    const int n = static_cast<int>(ens.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    if (n == 0) return out;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (ens.positions[a].z == ens.positions[b].z)
                throw DomainError("guided coupling is undefined for emitters at equal z");
    const GuidedChannels g = guided_channels(disp, ens.omega_a);
    const Eigen::MatrixXcd u = guided_amplitudes(ens, g);
    const double scale = 6.0 * pi / wavenumber(ens.omega_a) * g.weight;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double sz = (ens.positions[a].z > ens.positions[b].z) ? 1.0 : -1.0;
            cplx s = 0.0;
            for (int ch = 0; ch < 4; ++ch) s += (channel_f[ch] * sz) * u(a, ch) * std::conj(u(b, ch));
            out(a, b) = 0.5 * I * scale * s;
            out(b, a) = std::conj(out(a, b));
        }
    }
    return out;
}

Eigen::MatrixXcd gamma_radiation(const EmitterEnsemble& ens, const FiberSpec& fiber,
                                 const RadiationQuadratureSpec& quad, RadiationResult* info) {
    ens.validate(fiber);
    const int n = static_cast<int>(ens.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    if (n == 0) return out;
    std::vector<PointPair> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) pairs.push_back({ens.positions[a], ens.positions[b]});
    RadiationResult res = im_g_radiation_certified(fiber, ens.omega_a, pairs, quad);
    const double scale = 6.0 * pi / wavenumber(ens.omega_a);
    std::size_t p = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b, ++p) {
            const cplx v = scale * sandwich(ens.dipoles[a], res.values[p], ens.dipoles[b]);
            out(a, b) = (a == b) ? cplx(v.real()) : v;
            out(b, a) = std::conj(out(a, b));
        }
    }
    if (info) *info = std::move(res);
    return out;
}

}  // namespace nfqed
