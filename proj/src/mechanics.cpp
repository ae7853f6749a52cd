#include "gsph/mechanics.hpp"

#include <cmath>
#include <sstream>

namespace gsph::mechanics {

namespace {

Mat3 gather_difference(const std::vector<Vec3>& field, ParticleId a, const domain::PairTable& pairs,
                       const mapping::MetricField& metric, const mapping::Correction& corr)
{
    Mat3 sum = Mat3::Zero();
    pairs.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
        if (!pr.active) {
            return;
        }
        const ParticleId b = pr.other(a);
        sum += metric.partner_volume(k, a, pr) * (field[b] - field[a]) *
               corr.corrected(a, metric.gamma_for(k, a, pr)).transpose();
    });
    return sum;
}

} // namespace

void compute_F(ParticleSet& particles, const domain::PairTable& pairs, const mapping::MetricField& metric,
               const mapping::Correction& corr, long step)
{
    const auto n = static_cast<std::ptrdiff_t>(particles.size());
    std::ptrdiff_t inverted = -1;
#pragma omp parallel for schedule(static) reduction(max : inverted)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto a = static_cast<ParticleId>(i);
        if (particles.detached[a] != 0) {
            continue;
        }
        const Mat3 F = gather_difference(particles.x, a, pairs, metric, corr);
        const double J = F.determinant();
        particles.F[a] = F;
        particles.J[a] = J;
        if (!(J > 0.0)) {
            inverted = std::max(inverted, i);
        }
    }
    if (inverted >= 0) {
        // report the lowest offending id for a stable message
        for (ParticleId a = 0; a < particles.size(); ++a) {
            if (particles.detached[a] == 0 && !(particles.J[a] > 0.0)) {
                std::ostringstream msg;
                msg << "inverted deformation gradient at particle " << a << " (det F = " << particles.J[a] << ")";
                if (step >= 0) {
                    msg << " at step " << step;
                }
                throw RuntimeFatal(msg.str());
            }
        }
    }
}

void compute_F_dot(ParticleSet& particles, const domain::PairTable& pairs, const mapping::MetricField& metric,
                   const mapping::Correction& corr)
{
    const auto n = static_cast<std::ptrdiff_t>(particles.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto a = static_cast<ParticleId>(i);
        if (particles.detached[a] != 0) {
            particles.F_dot[a].setZero();
            continue;
        }
        particles.F_dot[a] = gather_difference(particles.v, a, pairs, metric, corr);
    }
}

double density(double rho0, double J) { return rho0 / J; }

void update_density(ParticleSet& particles)
{
    for (ParticleId a = 0; a < particles.size(); ++a) {
        particles.rho[a] = density(particles.rho0[a], particles.J[a]);
    }
}

Mat3 assemble_pk1(const Mat3& sigma, const Mat3& F) { return F.determinant() * F.inverse() * sigma; }

double viscosity_scalar(double v_dot_x, double r2, double h_ab, double c_ab, double rho_ab,
                        const ViscosityParams& params)
{
    if (v_dot_x >= 0.0) {
        return 0.0;
    }
    const double phi = h_ab * v_dot_x / (r2 + 0.01 * h_ab * h_ab);
    return (-params.beta1 * c_ab * phi + params.beta2 * phi * phi) / rho_ab;
}

Mat3 artificial_viscosity(ParticleId a, ParticleId b, const ParticleSet& particles, const ViscosityInputs& inputs,
                          const ViscosityParams& params)
{
    const Vec3 x_ab = particles.x[a] - particles.x[b];
    const Vec3 v_ab = particles.v[a] - particles.v[b];
    const double pi_ab =
        viscosity_scalar(v_ab.dot(x_ab), x_ab.squaredNorm(), 0.5 * (inputs.h_phys[a] + inputs.h_phys[b]),
                         0.5 * (inputs.sound_speed[a] + inputs.sound_speed[b]),
                         0.5 * (particles.rho[a] + particles.rho[b]), params);
    if (pi_ab == 0.0) {
        return Mat3::Zero();
    }
    const Mat3 map_a = particles.J[a] * particles.F[a].inverse();
    if (!params.symmetric) {
        return pi_ab * map_a;
    }
    const Mat3 map_b = particles.J[b] * particles.F[b].inverse();
    return pi_ab * 0.5 * (map_a + map_b);
}

namespace {

Vec3 gradient(const mapping::Correction& corr, const MomentumOptions& options, ParticleId p, const Vec3& gamma)
{
    return options.corrected && corr.valid[p] != 0 ? corr.corrected(p, gamma) : gamma;
}

} // namespace

void momentum_rhs(ParticleSet& particles, const domain::PairTable& pairs, const mapping::MetricField& metric,
                  const mapping::Correction& corr, const ViscosityInputs& visc_inputs, const MomentumOptions& options,
                  const std::vector<Vec3>& body, long step)
{
    const auto n = static_cast<std::ptrdiff_t>(particles.size());
    const bool viscous = options.viscosity.beta1 != 0.0 || options.viscosity.beta2 != 0.0;
    std::ptrdiff_t bad = -1;
#pragma omp parallel for schedule(static) reduction(max : bad)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto a = static_cast<ParticleId>(i);
        Vec3 acc = Vec3::Zero();
        if (particles.detached[a] == 0) {
            const double V0_a = particles.volume0(a);
            pairs.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
                if (!pr.active) {
                    return;
                }
                const ParticleId b = pr.other(a);
                const double vol_a = metric.partner_volume(k, b, pr);
                const double vol_b = metric.partner_volume(k, a, pr);
                const double V0_b = particles.volume0(b);
                const double rho_gen_a = particles.m0[a] / vol_a;
                const double rho_gen_b = particles.m0[b] / vol_b;
                // each stress term carries its own particle's corrected gradient
                const Vec3 g_a = gradient(corr, options, a, metric.gamma_for(k, a, pr));
                const Vec3 g_b = gradient(corr, options, b, metric.gamma_for(k, b, pr));
                const double w_ab = V0_a * vol_b * rho_gen_b / rho_gen_a;
                const double w_ba = V0_b * vol_a * rho_gen_a / rho_gen_b;
                acc += w_ab * (particles.P[a].transpose() * g_a) - w_ba * (particles.P[b].transpose() * g_b);
                if (viscous) {
                    const Mat3 Pi = artificial_viscosity(a, b, particles, visc_inputs, options.viscosity);
                    const double w = 0.5 * (V0_a * vol_b + V0_b * vol_a) * particles.rho0[a] * particles.rho0[b];
                    acc -= w * (Pi.transpose() * (0.5 * (g_a - g_b)));
                }
            });
            acc /= particles.m0[a];
        }
        if (!body.empty()) {
            acc += body[a];
        }
        particles.accel[a] = acc;
        if (!acc.allFinite()) {
            bad = std::max(bad, i);
        }
    }
    if (bad >= 0) {
        for (ParticleId a = 0; a < particles.size(); ++a) {
            if (!particles.accel[a].allFinite()) {
                std::ostringstream msg;
                msg << "non-finite acceleration at particle " << a;
                if (step >= 0) {
                    msg << " at step " << step;
                }
                throw RuntimeFatal(msg.str());
            }
        }
    }
}

} // namespace gsph::mechanics
