#pragma once

#include "gsph/domain.hpp"
#include "gsph/mapping.hpp"
#include "gsph/particles.hpp"
#include "gsph/types.hpp"

#include <optional>
#include <vector>

namespace gsph::mechanics {

struct ViscosityParams {
    double beta1 = 1.0;
    double beta2 = 1.0;
    /// Average J F^-1 of both particles instead of using particle a alone.
    bool symmetric = false;
};

struct MomentumOptions {
    ViscosityParams viscosity;
    /// Apply the kernel correction to the momentum sum; off gives the raw
    /// gradients of plain SPH.
    bool corrected = true;
};

/// Deformation gradient F_a = sum_b v_b (x_b - x_a) (x) g_ab over active bonds.
/// Detached particles keep their F. Updates F and J; throws RuntimeFatal on
/// det F <= 0 naming the particle and `step`.
void compute_F(ParticleSet& particles, const domain::PairTable& pairs, const mapping::MetricField& metric,
               const mapping::Correction& corr, long step = -1);

/// F_dot from velocity differences, same sum as compute_F.
void compute_F_dot(ParticleSet& particles, const domain::PairTable& pairs, const mapping::MetricField& metric,
                   const mapping::Correction& corr);

/// rho = rho0 / J.
void update_density(ParticleSet& particles);
double density(double rho0, double J);

/// P = det(F) F^-1 sigma.
Mat3 assemble_pk1(const Mat3& sigma, const Mat3& F);

/// Scalar Monaghan term pi_ab. v_dot_x = v_ab . x_ab, r2 = |x_ab|^2.
double viscosity_scalar(double v_dot_x, double r2, double h_ab, double c_ab, double rho_ab,
                        const ViscosityParams& params);

/// Per-particle inputs of the viscosity term.
struct ViscosityInputs {
    std::vector<double> sound_speed;
    std::vector<double> h_phys;
};

/// Pi_ab = J (F^-1) pi_ab in physical space, with particle a's kinematics
/// (or the a/b average when params.symmetric).
Mat3 artificial_viscosity(ParticleId a, ParticleId b, const ParticleSet& particles, const ViscosityInputs& inputs,
                          const ViscosityParams& params);

/**
 * Acceleration of every particle from the pair sum
 *
 *   m_a dv_a/dt = sum_b  w_ab P_a^T g_a(b) - w_ba P_b^T g_b(a)
 *                      - w_sym rho0_a rho0_b Pi_ab^T (g_a(b) - g_b(a)) / 2
 *
 * over active bonds. g_p(q) is particle p's corrected gradient towards q,
 * w_ab = V0_a v_b rhoG_b / rhoG_a with v the generalized volume and
 * rhoG = m0 / v, and w_sym = (V0_a v_b + V0_b v_a) / 2. Pair forces are
 * antisymmetric on every chart (the viscous part when Pi is symmetrized).
 * Without correction on an identity chart this is
 * sum_b m0_b (P_a/rho0_a^2 + P_b/rho0_b^2 - Pi_ab)^T grad W_ab.
 *
 * `body` (may be empty) is added per particle. Throws RuntimeFatal on a
 * non-finite result.
 */
void momentum_rhs(ParticleSet& particles, const domain::PairTable& pairs, const mapping::MetricField& metric,
                  const mapping::Correction& corr, const ViscosityInputs& visc_inputs, const MomentumOptions& options,
                  const std::vector<Vec3>& body, long step = -1);

} // namespace gsph::mechanics
