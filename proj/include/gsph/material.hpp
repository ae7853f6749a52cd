#pragma once

#include "gsph/types.hpp"

#include <optional>
#include <string>
#include <variant>

namespace gsph::material {

struct ElasticParams {
    double E = 0.0;
    double nu = 0.0;
    double rho0 = 0.0;
    double G = 0.0;
    double K = 0.0;

    /// Derives G and K; throws std::invalid_argument outside 0 < nu < 0.5, E > 0, rho0 > 0.
    static ElasticParams make(double E, double nu, double rho0);

    double lambda() const { return K - 2.0 * G / 3.0; }
    double sound_speed() const;
};

struct JohnsonCookParams {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double n = 1.0;
    double m = 1.0;
    double eps0_dot = 1.0;
    double T_r = 293.0;
    double T_m = 1800.0;
    double Cp = 452.0;
    double chi = 0.9;

    void validate() const;
    double homologous_temperature(double T) const;
};

struct JCDamageParams {
    double D1 = 0.0705;
    double D2 = 1.732;
    double D3 = -0.54;
    double D4 = -0.015;
    double D5 = 0.0;
};

struct RankineParams {
    double eps_max = 0.03;
};

struct PlasticState {
    double eps_pl_bar = 0.0;
    double r_damage = 0.0;
    double D = 0.0;
    double T = 293.0;
    double w_p = 0.0;
    /// Effective plastic strain rate of the previous update (drives the rate terms).
    double eps_pl_rate = 0.0;
};

struct Hypoelastic {};
struct JCPlastic {
    JohnsonCookParams jc;
};
struct JCDamage {
    JohnsonCookParams jc;
    JCDamageParams damage;
};

using Constitutive = std::variant<Hypoelastic, JCPlastic, JCDamage>;

/// One material: elastic moduli, a constitutive law and optional Rankine bond failure.
struct MaterialModel {
    std::string name;
    ElasticParams elastic;
    Constitutive law = Hypoelastic{};
    std::optional<RankineParams> rankine;
    double T0 = 293.0;

    const JohnsonCookParams* johnson_cook() const;
    const JCDamageParams* damage() const;
};

// ---------------------------------------------------------------------------

struct SpinStretch {
    Mat3 L;
    Mat3 W;
    Mat3 D;
};

/// L = F_dot F^-1 with its skew (spin) and symmetric (stretching) parts.
SpinStretch spin_and_stretch(const Mat3& F, const Mat3& F_dot);

/// Explicit Jaumann update with a hypoelastic Hooke rate:
/// sigma += dt (lambda tr(D) I + 2 G D + sigma W^T + W sigma), then symmetrized.
Mat3 jaumann_update(const Mat3& sigma, const Mat3& W, const Mat3& D_rate, const ElasticParams& elastic,
                    double dt);

/// Johnson-Cook flow stress. `plastic_strain` is eps_pl_bar (or r for the
/// damaged form), `rate_star` the normalized rate; it is clamped to >= 1 before
/// the natural log. T* is clamped to [0, 1]. With `damage` the (1 - D) factor
/// is applied.
double jc_yield_stress(double plastic_strain, double rate_star, double T, const JohnsonCookParams& params,
                       std::optional<double> damage = std::nullopt);

/// Convenience overload reading the strain measure and rate from the state.
double jc_yield_stress(const PlasticState& state, const JohnsonCookParams& params, bool damaged);

struct ReturnMapResult {
    Mat3 sigma;
    PlasticState state;
    double yield_stress = 0.0; ///< sigma_y used for the radial return
    double c_f = 1.0;
    double d_eps_pl_bar = 0.0;
    Mat3 d_eps_pl = Mat3::Zero();
    double d_w_p = 0.0;
};

/**
 * Wilkins radial return onto the von Mises surface.
 *
 * c_f = min(sigma_y / sqrt(3 J2), 1) scales the deviator; pressure is kept.
 * Plastic strain, effective plastic strain, plastic work and adiabatic heating
 * are accumulated into the returned state. With a damage model r and D are
 * also advanced (D capped at 1).
 *
 * `rho` is the current density used for the temperature rise.
 */
ReturnMapResult return_map(const Mat3& sigma_trial, const PlasticState& state, const ElasticParams& elastic,
                           const JohnsonCookParams& jc, const JCDamageParams* damage, double rho, double dt);

/// Johnson-Cook fracture strain for the current stress and state.
double fracture_strain(const Mat3& sigma, const PlasticState& state, const JohnsonCookParams& jc,
                       const JCDamageParams& params);

/// Same, from already reduced inputs (triaxiality, normalized plastic rate, T*).
double fracture_strain(double triaxiality, double rate_star, double T_star, const JCDamageParams& params);

/// Stress triaxiality sigma_m / sigma_eq with the clamp used near sigma_eq = 0.
double triaxiality(const Mat3& sigma, double reference_stress);

double von_mises(const Mat3& sigma);

/// Reference-normalized bond stretch.
double bond_stretch(const Vec3& Xa, const Vec3& Xb, const Vec3& xa, const Vec3& xb);

/// True if the bond must break (stretch >= eps_max).
bool rankine_check(const Vec3& Xa, const Vec3& Xb, const Vec3& xa, const Vec3& xb, const RankineParams& params);

} // namespace gsph::material
