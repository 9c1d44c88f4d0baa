#include "nfqed/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "nfqed/errors.hpp"

namespace nfqed {

namespace {
const cplx I(0.0, 1.0);
}

std::vector<double> DriveSpec::default_detunings() {
    std::vector<double> d(400);
    for (int i = 0; i < 400; ++i) d[i] = -15.0 + 30.0 * i / 399.0;
    return d;
}

Eigen::VectorXcd steady_state(const CouplingMatrices& m, const DriveSpec& drive, double delta) {
    if (!(drive.rabi > 0.0) || !std::isfinite(drive.rabi)) throw InvalidArgument("rabi frequency must be positive");
    if (!std::isfinite(delta)) throw InvalidArgument("detuning must be finite");
    const Eigen::Index n = m.V.rows();
    if (static_cast<Eigen::Index>(m.z.size()) != n) throw InvalidArgument("matrices carry no emitter positions");
    Eigen::VectorXcd eta(n);
    for (Eigen::Index a = 0; a < n; ++a) eta(a) = drive.rabi * std::exp(I * (m.beta_a * m.z[a]));
    if (n == 0) return eta;

    const Eigen::MatrixXcd M = delta * Eigen::MatrixXcd::Identity(n, n) + m.V + 0.5 * I * m.Gamma;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) throw SingularSystemError("steady-state system is singular", delta);
    Eigen::VectorXcd c = lu.solve(-eta);
    Eigen::VectorXcd r = M * c + eta;
    if (r.norm() > 1e-12 * eta.norm()) {
        c -= lu.solve(r);
        r = M * c + eta;
    }
    if (!(r.norm() <= 1e-12 * eta.norm()))
        throw SingularSystemError("steady-state residual above 1e-12 |eta|", delta);
    return c;
}

SpectrumResult transmission_spectrum(const CouplingMatrices& m, const DriveSpec& drive, bool keep_amplitudes,
                                     std::optional<double> z_obs) {
    SpectrumResult out;
    out.provenance = m.provenance;
    out.detunings = drive.detunings;
    out.meta_json = meta_to_json(m.meta);
    const Eigen::Index n = m.V.rows();
    if (n > 0 && !(m.beta_a > 0.0)) throw NoGuidedModeError("transmission needs a guided mode");
    double z = 0.0;
    for (double za : m.z) z = std::max(z, za);
    if (z_obs) {
        if (n > 0 && *z_obs < z) throw InvalidArgument("observation point must lie beyond every emitter");
        z = *z_obs;
    }
    for (double delta : drive.detunings) {
        if (n == 0) {
            out.transmission.push_back(1.0);
            if (keep_amplitudes) out.amplitudes.emplace_back();
            continue;
        }
        const Eigen::VectorXcd c = steady_state(m, drive, delta);
        cplx e = drive.rabi * std::exp(I * (m.beta_a * z));
        for (Eigen::Index a = 0; a < n; ++a)
            e += I * (0.5 * m.gamma_gd(a)) * std::exp(I * (m.beta_a * (z - m.z[a]))) * c(a);
        out.transmission.push_back(std::norm(e) / (drive.rabi * drive.rabi));
        if (keep_amplitudes) out.amplitudes.push_back(c);
    }
    return out;
}

std::string spectrum_to_csv(const SpectrumResult& s) {
    std::ostringstream o;
    o << std::setprecision(17) << "delta_over_gamma,T,provenance\r\n";
    for (std::size_t i = 0; i < s.detunings.size(); ++i)
        o << s.detunings[i] << ',' << s.transmission[i] << ',' << provenance_name(s.provenance) << "\r\n";
    return o.str();
}

std::string spectrum_to_json(const SpectrumResult& s, int indent) {
    nlohmann::json j;
    j["provenance"] = provenance_name(s.provenance);
    j["delta_over_gamma"] = s.detunings;
    j["T"] = s.transmission;
    j["solver_meta"] = nlohmann::json::parse(s.meta_json);
    return j.dump(indent);
}

}  // namespace nfqed
