#include "gsph/material.hpp"

#include <algorithm>
#include <cmath>

namespace gsph::material {

ElasticParams ElasticParams::make(double E, double nu, double rho0)
{
    if (!(E > 0.0) || !std::isfinite(E)) {
        throw std::invalid_argument("material: E must be positive");
    }
    if (!(nu > 0.0 && nu < 0.5)) {
        throw std::invalid_argument("material: nu must lie in (0, 0.5)");
    }
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) {
        throw std::invalid_argument("material: rho0 must be positive");
    }
    ElasticParams p;
    p.E = E;
    p.nu = nu;
    p.rho0 = rho0;
    p.G = E / (2.0 * (1.0 + nu));
    p.K = E / (3.0 * (1.0 - 2.0 * nu));
    return p;
}

double ElasticParams::sound_speed() const { return std::sqrt(K / rho0); }

void JohnsonCookParams::validate() const
{
    if (!(T_m > T_r)) {
        throw std::invalid_argument("material: Johnson-Cook T_m must exceed T_r");
    }
    if (!(eps0_dot > 0.0)) {
        throw std::invalid_argument("material: Johnson-Cook eps0_dot must be positive");
    }
    if (!(Cp > 0.0)) {
        throw std::invalid_argument("material: Johnson-Cook Cp must be positive");
    }
}

double JohnsonCookParams::homologous_temperature(double T) const
{
    return std::clamp((T - T_r) / (T_m - T_r), 0.0, 1.0);
}

const JohnsonCookParams* MaterialModel::johnson_cook() const
{
    if (const auto* p = std::get_if<JCPlastic>(&law)) {
        return &p->jc;
    }
    if (const auto* d = std::get_if<JCDamage>(&law)) {
        return &d->jc;
    }
    return nullptr;
}

const JCDamageParams* MaterialModel::damage() const
{
    if (const auto* d = std::get_if<JCDamage>(&law)) {
        return &d->damage;
    }
    return nullptr;
}

SpinStretch spin_and_stretch(const Mat3& F, const Mat3& F_dot)
{
    SpinStretch out;
    out.L = F_dot * F.inverse();
    out.W = 0.5 * (out.L - out.L.transpose());
    out.D = 0.5 * (out.L + out.L.transpose());
    return out;
}

Mat3 jaumann_update(const Mat3& sigma, const Mat3& W, const Mat3& D_rate, const ElasticParams& elastic,
                    double dt)
{
    const Mat3 objective_rate = elastic.lambda() * D_rate.trace() * Mat3::Identity() + 2.0 * elastic.G * D_rate;
    const Mat3 rate = objective_rate + sigma * W.transpose() + W * sigma;
    const Mat3 updated = sigma + dt * rate;
    return 0.5 * (updated + updated.transpose());
}

double jc_yield_stress(double plastic_strain, double rate_star, double T, const JohnsonCookParams& params,
                       std::optional<double> damage)
{
    const double hardening = params.A + params.B * std::pow(std::max(plastic_strain, 0.0), params.n);
    const double rate = 1.0 + params.C * std::log(std::max(rate_star, 1.0));
    const double softening = 1.0 - std::pow(params.homologous_temperature(T), params.m);
    double sy = hardening * rate * softening;
    if (damage) {
        sy *= (1.0 - std::clamp(*damage, 0.0, 1.0));
    }
    return std::max(sy, 0.0);
}

double jc_yield_stress(const PlasticState& state, const JohnsonCookParams& params, bool damaged)
{
    if (damaged) {
        // r_dot = (1 - D) eps_dot, normalized like the undamaged rate.
        const double r_rate = (1.0 - state.D) * state.eps_pl_rate;
        return jc_yield_stress(state.r_damage, r_rate / params.eps0_dot, state.T, params, state.D);
    }
    return jc_yield_stress(state.eps_pl_bar, state.eps_pl_rate / params.eps0_dot, state.T, params);
}

double von_mises(const Mat3& sigma)
{
    const Mat3 s = deviator(sigma);
    return std::sqrt(1.5 * (s.array() * s.array()).sum());
}

double triaxiality(const Mat3& sigma, double reference_stress)
{
    constexpr double clamp_limit = 1.5;
    const double mean = sigma.trace() / 3.0;
    const double eq = von_mises(sigma);
    if (eq < 1e-6 * std::abs(reference_stress) || eq == 0.0) {
        if (mean == 0.0) {
            return 0.0;
        }
        if (eq == 0.0) {
            return mean > 0.0 ? clamp_limit : -clamp_limit;
        }
        return std::clamp(mean / eq, -clamp_limit, clamp_limit);
    }
    return mean / eq;
}

double fracture_strain(double triaxiality, double rate_star, double T_star, const JCDamageParams& p)
{
    return (p.D1 + p.D2 * std::exp(p.D3 * triaxiality)) * std::pow(1.0 + std::max(rate_star, 0.0), p.D4) *
           (1.0 + p.D5 * T_star);
}

double fracture_strain(const Mat3& sigma, const PlasticState& state, const JohnsonCookParams& jc,
                       const JCDamageParams& params)
{
    return fracture_strain(triaxiality(sigma, jc.A), state.eps_pl_rate / jc.eps0_dot,
                           jc.homologous_temperature(state.T), params);
}

ReturnMapResult return_map(const Mat3& sigma_trial, const PlasticState& state, const ElasticParams& elastic,
                           const JohnsonCookParams& jc, const JCDamageParams* damage, double rho, double dt)
{
    ReturnMapResult out;
    out.state = state;
    out.sigma = sigma_trial;
    out.yield_stress = jc_yield_stress(state, jc, damage != nullptr);

    const double pressure_part = sigma_trial.trace() / 3.0;
    const Mat3 S = sigma_trial - pressure_part * Mat3::Identity();
    const double SS = (S.array() * S.array()).sum();
    const double eq = std::sqrt(1.5 * SS); // sqrt(3 J2)

    if (eq <= out.yield_stress || eq == 0.0) {
        out.state.eps_pl_rate = 0.0;
        return out;
    }

    out.c_f = std::min(out.yield_stress / eq, 1.0);
    const Mat3 S_n = out.c_f * S;
    out.sigma = S_n + pressure_part * Mat3::Identity();

    out.d_eps_pl = ((1.0 - out.c_f) / (2.0 * elastic.G)) * S;
    out.d_eps_pl_bar = ((1.0 - out.c_f) / (3.0 * elastic.G)) * std::sqrt(1.5 * SS);
    out.d_w_p = (out.d_eps_pl.array() * S_n.array()).sum();

    auto& st = out.state;
    st.eps_pl_bar += out.d_eps_pl_bar;
    st.w_p += out.d_w_p;
    st.T += jc.chi * out.d_w_p / (rho * jc.Cp);
    st.eps_pl_rate = dt > 0.0 ? out.d_eps_pl_bar / dt : 0.0;

    if (damage != nullptr) {
        st.r_damage += (1.0 - state.D) * out.d_eps_pl_bar;
        const double eps_f = fracture_strain(out.sigma, st, jc, *damage);
        if (eps_f > 0.0) {
            st.D = std::min(1.0, st.D + out.d_eps_pl_bar / eps_f);
        } else {
            st.D = 1.0;
        }
    }
    return out;
}

double bond_stretch(const Vec3& Xa, const Vec3& Xb, const Vec3& xa, const Vec3& xb)
{
    const double r0 = (Xa - Xb).norm();
    return ((xa - xb).norm() - r0) / r0;
}

bool rankine_check(const Vec3& Xa, const Vec3& Xb, const Vec3& xa, const Vec3& xb, const RankineParams& params)
{
    return bond_stretch(Xa, Xb, xa, xb) >= params.eps_max;
}

} // namespace gsph::material
