#pragma once

#include "gsph/domain.hpp"
#include "gsph/particles.hpp"
#include "gsph/types.hpp"

#include <span>
#include <vector>

namespace gsph::mapping {

/// Condition number above which a moment matrix is treated as singular.
inline constexpr double max_condition = 1e8;

/// Transformation matrices of one particle in one chart.
struct ChartMetric {
    int chart = 0;
    Mat3 dX_dTheta = Mat3::Identity();
    Mat3 dTheta_dX = Mat3::Identity();
    double jacobian_det = 1.0;
    /// Theta-space CSPM correction [sum V_b (theta_b - theta_a) (x) dW/dtheta_a]^-1.
    Mat3 cspm = Mat3::Identity();
    /// Volume of the particle measured in this chart's generalized space.
    double generalized_volume = 0.0;
    std::size_t neighbors = 0;
};

/**
 * Frozen reference-configuration geometry.
 *
 * Per particle: one ChartMetric per chart the particle is mapped into (owner
 * chart first). Per pair: the kernel gradient pushed to physical reference
 * space through the owning chart's metric at each end,
 * gamma = (dtheta/dX)^T dW/dtheta, and the generalized volumes of both ends in
 * that chart.
 */
struct MetricField {
    std::vector<std::size_t> offsets;
    std::vector<ChartMetric> entries;

    std::vector<Vec3> gamma_a;
    std::vector<Vec3> gamma_b;
    std::vector<double> volume_a;
    std::vector<double> volume_b;

    /// Smallest physical image of the owner chart's h at each particle.
    std::vector<double> h_phys;

    const ChartMetric& owner(ParticleId p) const { return entries[offsets[p]]; }
    const ChartMetric* in_chart(ParticleId p, int chart) const;

    Vec3 gamma_for(std::size_t pair, ParticleId p, const domain::Pair& pr) const
    {
        return p == pr.a ? gamma_a[pair] : gamma_b[pair];
    }
    /// Generalized volume of the partner of p in pair `pair`.
    double partner_volume(std::size_t pair, ParticleId p, const domain::Pair& pr) const
    {
        return p == pr.a ? volume_b[pair] : volume_a[pair];
    }
    double own_volume(std::size_t pair, ParticleId p, const domain::Pair& pr) const
    {
        return p == pr.a ? volume_a[pair] : volume_b[pair];
    }
};

/**
 * Builds dX/dtheta per particle and chart as the CSPM-corrected sum
 *   [sum_b V_b (X_b - X_a) (x) dW_ab/dtheta_a] [sum_b V_b (theta_b - theta_a) (x) dW_ab/dtheta_a]^-1
 * over the particle's neighbors in that chart (V_b = m0_b / rho0_b).
 *
 * Throws SetupError when either moment matrix has condition number above
 * max_condition, or when the chart orientation is not positive.
 */
MetricField build_metric(const ParticleSet& particles, const std::vector<domain::Subdomain>& subdomains,
                         const domain::PairTable& pairs);

/**
 * Physical-space kernel correction over the currently active bonds:
 *   L_a = [sum_b v_b (X_b - X_a) (x) gamma_ab]^-1,   g_ab = L_a^T gamma_ab.
 * Particles whose active neighborhood is degenerate are flagged invalid.
 */
struct Correction {
    std::vector<Mat3> L;
    std::vector<std::uint8_t> valid;

    Vec3 corrected(ParticleId p, const Vec3& gamma) const { return L[p].transpose() * gamma; }
};

Correction build_correction(const ParticleSet& particles, const domain::PairTable& pairs, const MetricField& metric);

/// Recomputes L for the listed particles only.
void update_correction(Correction& corr, const ParticleSet& particles, const domain::PairTable& pairs,
                       const MetricField& metric, std::span<const ParticleId> which);

/// Gathers the corrected difference-form sums over active bonds.
class FieldOperators {
public:
    FieldOperators(const ParticleSet& particles, const domain::PairTable& pairs, const MetricField& metric,
                   const Correction& correction)
        : particles_(particles), pairs_(pairs), metric_(metric), corr_(correction)
    {
    }

    /// Physical gradient of a scalar field at particle a.
    Vec3 grad_scalar(std::span<const double> field, ParticleId a) const;
    /// (grad u)_{alpha gamma} = d u_alpha / d X_gamma.
    Mat3 grad_vector(std::span<const Vec3> field, ParticleId a) const;
    double div_vector(std::span<const Vec3> field, ParticleId a) const;
    /// (div Psi)_gamma = d Psi_{beta gamma} / d X_beta.
    Vec3 div_tensor(std::span<const Mat3> field, ParticleId a) const;

private:
    void check(ParticleId a, std::size_t n) const;

    const ParticleSet& particles_;
    const domain::PairTable& pairs_;
    const MetricField& metric_;
    const Correction& corr_;
};

/// A : B = sum A_ab B_ab.
double tensor_inner(const Mat3& A, const Mat3& B);

} // namespace gsph::mapping
