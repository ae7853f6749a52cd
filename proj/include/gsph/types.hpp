#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace gsph {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using ParticleId = std::size_t;

/// Raised while building a simulation (bad geometry, degenerate metric, ...).
class SetupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised during time stepping when the state becomes unusable
/// (non-finite values, inverted deformation gradient).
class RuntimeFatal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }
inline bool all_finite(const Mat3& m) { return m.allFinite(); }

/// Ratio of largest to smallest singular value; infinity for singular input.
inline double condition_number(const Mat3& m)
{
    Eigen::JacobiSVD<Mat3> svd(m);
    const auto& s = svd.singularValues();
    if (!(s(2) > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / s(2);
}

inline Mat3 deviator(const Mat3& s) { return s - (s.trace() / 3.0) * Mat3::Identity(); }

} // namespace gsph
