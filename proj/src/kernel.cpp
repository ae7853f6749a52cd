#include "gsph/kernel.hpp"

#include <cmath>
#include <numbers>

namespace gsph::kernel {

namespace {

void require_finite(const Vec3& r)
{
    if (!r.allFinite()) {
        throw RuntimeFatal("kernel: non-finite separation vector (corrupted particle state)");
    }
}

} // namespace

KernelParams KernelParams::make(double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("kernel: smoothing length must be positive and finite");
    }
    return KernelParams{h, 1.0 / (std::numbers::pi * h * h * h)};
}

double shape(double q)
{
    if (q < 0.0) {
        q = -q;
    }
    if (q <= 1.0) {
        return 1.0 - 1.5 * q * q + 0.75 * q * q * q;
    }
    if (q < 2.0) {
        const double t = 2.0 - q;
        return 0.25 * t * t * t;
    }
    return 0.0;
}

double shape_derivative(double q)
{
    if (q <= 1.0) {
        return -3.0 * q + 2.25 * q * q;
    }
    if (q < 2.0) {
        const double t = 2.0 - q;
        return -0.75 * t * t;
    }
    return 0.0;
}

double kernel_value(const Vec3& r, const KernelParams& params)
{
    require_finite(r);
    return params.alpha_d * shape(r.norm() / params.h);
}

double kernel_value(const Vec3& r, double h) { return kernel_value(r, KernelParams::make(h)); }

Vec3 kernel_gradient(const Vec3& r, const KernelParams& params)
{
    require_finite(r);
    const double dist = r.norm();
    const double q = dist / params.h;
    if (dist == 0.0 || q >= support_factor) {
        return Vec3::Zero();
    }
    const double dw_dr = params.alpha_d * shape_derivative(q) / params.h;
    return (dw_dr / dist) * r;
}

Vec3 kernel_gradient(const Vec3& r, double h) { return kernel_gradient(r, KernelParams::make(h)); }

} // namespace gsph::kernel
