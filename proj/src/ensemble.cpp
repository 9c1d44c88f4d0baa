#include "nfqed/ensemble.hpp"

#include <cmath>

#include "nfqed/errors.hpp"

namespace nfqed {

void EmitterEnsemble::validate(const FiberSpec& fiber) const {
    if (positions.size() != dipoles.size()) throw InvalidArgument("ensemble needs one dipole per position");
    if (!(omega_a > 0.0) || !std::isfinite(omega_a)) throw DomainError("omega_a must be positive");
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!(positions[i].r > fiber.radius)) throw DomainError("emitter inside the fiber");
        if (std::abs(dipoles[i].norm() - 1.0) > 1e-12) throw InvalidArgument("dipole vectors must be unit-norm");
    }
}

Vec3c orientation_vector(Orientation o) {
    switch (o) {
        case Orientation::Parallel: return Vec3c(0, 0, 1);
        case Orientation::Binormal: return Vec3c(0, 1, 0);
        case Orientation::Normal: return Vec3c(1, 0, 0);
    }
    throw InvalidArgument("unknown orientation");
}

EmitterEnsemble make_chain(const FiberSpec& fiber, int n, double spacing, double x_a, Orientation o,
                           double omega_a) {
    if (n < 0) throw InvalidArgument("chain length must be non-negative");
    if (!(x_a > 0.0)) throw DomainError("x_a must be positive");
    if (n > 1 && !(spacing > 0.0)) throw DomainError("chain spacing must be positive");
    EmitterEnsemble e;
    e.omega_a = omega_a;
    for (int i = 0; i < n; ++i) {
        e.positions.push_back({fiber.radius + x_a, 0.0, i * spacing});
        e.dipoles.push_back(orientation_vector(o));
    }
    return e;
}

}  // namespace nfqed
