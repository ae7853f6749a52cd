#pragma once

#include "gsph/material.hpp"
#include "gsph/types.hpp"

#include <cstdint>
#include <vector>

namespace gsph {

/**
 * Structure-of-arrays particle state.
 *
 * Reference quantities (X, m0, rho0) are fixed after setup. Everything else is
 * advanced by the time loop. `owner` is the owning subdomain index, filled by
 * domain::assign_subdomains.
 */
struct ParticleSet {
    // reference configuration
    std::vector<Vec3> X;
    std::vector<double> m0;
    std::vector<double> rho0;
    std::vector<int> material;
    std::vector<int> owner;

    // current configuration
    std::vector<Vec3> x;
    std::vector<Vec3> v;
    std::vector<Vec3> accel;
    std::vector<double> rho;

    // kinematics
    std::vector<Mat3> F;
    std::vector<Mat3> F_dot;
    std::vector<double> J;

    // stress
    std::vector<Mat3> sigma;
    std::vector<Mat3> P;

    std::vector<material::PlasticState> plastic;
    std::vector<std::uint32_t> broken_bonds;
    std::vector<std::uint8_t> detached;

    std::size_t size() const { return X.size(); }

    /// Appends one particle at rest in its reference configuration.
    ParticleId add(const Vec3& X0, double mass, double density, int material_id = 0);

    /// Volume in the reference configuration.
    double volume0(ParticleId a) const { return m0[a] / rho0[a]; }

    /// Reorders every per-particle array so that entry i becomes old entry order[i].
    void permute(const std::vector<ParticleId>& order);
};

} // namespace gsph
