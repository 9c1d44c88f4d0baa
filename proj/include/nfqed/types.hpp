#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace nfqed {

using cplx = std::complex<double>;
using Vec3c = Eigen::Vector3cd;
using Vec3d = Eigen::Vector3d;
using Mat3c = Eigen::Matrix3cd;
using Mat3d = Eigen::Matrix3d;

/// Point in cylindrical coordinates about the fiber axis [m, rad, m].
struct CylPoint {
    double r = 0.0;
    double phi = 0.0;
    double z = 0.0;

    Vec3d cartesian() const { return {r * std::cos(phi), r * std::sin(phi), z}; }
};

/// Maps (r, phi, z) components at azimuth phi onto (x, y, z).
inline Mat3d cyl_to_cart(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    Mat3d R;
    R << c, -s, 0, s, c, 0, 0, 0, 1;
    return R;
}

}  // namespace nfqed
