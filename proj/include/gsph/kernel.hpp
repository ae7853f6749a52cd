#pragma once

#include "gsph/types.hpp"

namespace gsph::kernel {

/**
 * @brief Cubic B-spline smoothing kernel in generalized coordinates.
 *
 * W(q) = alpha_d * { 1 - 3/2 q^2 + 3/4 q^3   0 <= q < 1
 *                    1/4 (2 - q)^3          1 <= q < 2
 *                    0                      otherwise }
 * with q = |r| / h and alpha_d = 1 / (pi h^3).
 *
 * The 3-D normalization is used for every run; planar problems are modeled as
 * thin 3-D slabs.
 */
struct KernelParams {
    double h = 1.0;
    double alpha_d = 0.0;

    /// Throws std::invalid_argument unless h is finite and positive.
    static KernelParams make(double h);
};

/// Support radius in units of h.
inline constexpr double support_factor = 2.0;

/// Shape function without normalization. q at a branch limit takes the lower branch.
double shape(double q);

/// d(shape)/dq.
double shape_derivative(double q);

double kernel_value(const Vec3& r, double h);
double kernel_value(const Vec3& r, const KernelParams& params);

/// Gradient of W with respect to the first particle's coordinates, for
/// separation r = theta_a - theta_b. Antisymmetric in r.
Vec3 kernel_gradient(const Vec3& r, double h);
Vec3 kernel_gradient(const Vec3& r, const KernelParams& params);

} // namespace gsph::kernel
