#pragma once

#include "gsph/config.hpp"
#include "gsph/domain.hpp"
#include "gsph/io.hpp"
#include "gsph/mapping.hpp"
#include "gsph/material.hpp"
#include "gsph/mechanics.hpp"
#include "gsph/particles.hpp"
#include "gsph/timeloop.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace gsph::testing {

/// Frozen reference geometry without a time loop.
struct Geometry {
    ParticleSet particles;
    std::vector<domain::Subdomain> subdomains;
    domain::PairTable pairs;
    mapping::MetricField metric;
    mapping::Correction corr;

    Geometry(ParticleSet p, const std::vector<domain::SubdomainSpec>& specs) : particles(std::move(p))
    {
        subdomains = domain::assign_subdomains(specs, particles);
        pairs = domain::build_pairs(subdomains, particles.size());
        metric = mapping::build_metric(particles, subdomains, pairs);
        corr = mapping::build_correction(particles, pairs, metric);
    }

    mapping::FieldOperators ops() const { return {particles, pairs, metric, corr}; }
};

inline config::LatticeSpec lattice(const Vec3& lo, const Vec3& hi, double spacing)
{
    config::LatticeSpec l;
    l.lo = lo;
    l.hi = hi;
    l.spacing = spacing;
    return l;
}

/// nx * ny * nz identity-chart box of spacing d starting at the origin.
inline ParticleSet box(int nx, int ny, int nz, double d, double rho0 = 1000.0)
{
    return io::generate_lattice(lattice(Vec3::Zero(), Vec3(nx * d, ny * d, nz * d), d), Chart::identity(), rho0);
}

inline domain::SubdomainSpec single(double h, Chart chart = Chart::identity())
{
    domain::SubdomainSpec s;
    s.name = "main";
    s.rank = 0;
    s.chart = std::move(chart);
    s.region = domain::Region::everything();
    s.h = h;
    return s;
}

/// Cylindrical sector lattice, uniform in (r, s phi, z).
inline ParticleSet sector(double r0, double r1, double phi0, double phi1, double z1, int nr, double s,
                          double rho0 = 1000.0)
{
    const double d = (r1 - r0) / nr;
    return io::generate_lattice(lattice(Vec3(r0, s * phi0, 0.0), Vec3(r1, s * phi1, z1), d),
                                Chart::cylindrical(Vec3::Zero(), Vec3::UnitZ(), s), rho0);
}

inline material::MaterialModel elastic(double E = 200e9, double nu = 0.3, double rho0 = 7850.0)
{
    material::MaterialModel m;
    m.name = "elastic";
    m.elastic = material::ElasticParams::make(E, nu, rho0);
    return m;
}

/// Quarter of a thick ring: a Cartesian core r < r1 (identity chart, rank 0)
/// and a cylindrical annulus r1 < r < r2 (rank 1) with an overlap band of
/// width 2h of the core. Both lattices have spacing d and `layers` z layers.
struct QuarterCylinder {
    ParticleSet particles;
    std::vector<domain::SubdomainSpec> specs;
    double d = 0.0;
    double angle_scale = 1.0;
    std::size_t core_count = 0;
};

inline QuarterCylinder quarter_cylinder(double r1, double r2, double d, int layers, double rho0 = 7850.0,
                                        int material_id = 0)
{
    QuarterCylinder q;
    q.d = d;
    const double h = 1.2 * d;
    const double zmax = layers * d;
    auto core = lattice(Vec3::Zero(), Vec3(r1, r1, zmax), d);
    core.clip = domain::Region::annulus(Vec3::Zero(), Vec3::UnitZ(), 0.0, r1);
    io::append_lattice(q.particles, core, Chart::identity(), rho0, material_id);
    q.core_count = q.particles.size();

    // angular cells of arc length close to d at r1
    const double quarter = std::numbers::pi / 2.0;
    const long n_phi = std::lround(r1 * quarter / d);
    q.angle_scale = static_cast<double>(n_phi) * d / quarter;
    const Chart cyl = Chart::cylindrical(Vec3::Zero(), Vec3::UnitZ(), q.angle_scale);
    io::append_lattice(q.particles, lattice(Vec3(r1, 0.0, 0.0), Vec3(r2, q.angle_scale * quarter, zmax), d), cyl,
                       rho0, material_id);

    domain::SubdomainSpec inner;
    inner.name = "core";
    inner.rank = 0;
    inner.chart = Chart::identity();
    inner.region = domain::Region::annulus(Vec3::Zero(), Vec3::UnitZ(), 0.0, r1);
    inner.h = h;
    domain::SubdomainSpec outer;
    outer.name = "ring";
    outer.rank = 1;
    outer.chart = cyl;
    outer.region = domain::Region::annulus(Vec3::Zero(), Vec3::UnitZ(), r1, 2.0 * r2);
    outer.h = h;
    outer.overlap_width = 2.0 * h;
    q.specs = {inner, outer};
    return q;
}

/// Largest absolute entry.
inline double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

/// True if every neighbor within the full kernel support exists (no truncation).
inline bool interior(const ParticleSet& p, ParticleId a, const Vec3& lo, const Vec3& hi, double margin)
{
    return ((p.X[a] - lo).array() > margin).all() && ((hi - p.X[a]).array() > margin).all();
}

} // namespace gsph::testing
