#pragma once

#include <vector>

#include "nfqed/fiber_dispersion.hpp"
#include "nfqed/types.hpp"

namespace nfqed {

/// Emitters outside the fiber: cylindrical positions [m], unit complex
/// Cartesian dipoles, common transition frequency omega_a [rad/s] and the
/// vacuum rate gamma [1/s] used as the unit of every coupling.
struct EmitterEnsemble {
    std::vector<CylPoint> positions;
    std::vector<Vec3c> dipoles;
    double omega_a = 0.0;
    double gamma = 1.0;

    std::size_t size() const { return positions.size(); }
    /// InvalidArgument / DomainError when a dipole is not unit-norm, sizes
    /// differ, or an emitter sits at r <= r_f.
    void validate(const FiberSpec& fiber) const;
};

enum class Orientation { Parallel, Binormal, Normal };

/// Chain of n emitters at radius r_f + x_a, phi = 0, z = (alpha - 1) a, all
/// with the same real dipole: z-hat (parallel), y-hat (binormal) or x-hat
/// (normal).
EmitterEnsemble make_chain(const FiberSpec& fiber, int n, double spacing, double x_a, Orientation o,
                           double omega_a);

Vec3c orientation_vector(Orientation o);

}  // namespace nfqed
