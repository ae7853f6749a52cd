#pragma once

#include "gsph/config.hpp"
#include "gsph/domain.hpp"
#include "gsph/mapping.hpp"
#include "gsph/material.hpp"
#include "gsph/mechanics.hpp"
#include "gsph/particles.hpp"
#include "gsph/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsph::timeloop {

/// Everything except the particle cloud and subdomains needed to build a Simulation.
struct Settings {
    std::vector<material::MaterialModel> materials;
    config::IntegratorSettings integrator;
    std::vector<config::FixedVelocity> fixed_velocity;
    std::vector<config::BodyForce> body_force;
};

/**
 * One TL-GSPH run: reference geometry frozen at construction, state advanced
 * by velocity Verlet.
 */
class Simulation {
public:
    /// Assigns subdomains, builds pairs, metric and correction, then evaluates
    /// F, stress and the initial acceleration. Particle velocities already set
    /// in `particles` are kept (fixed-velocity BCs are applied on top).
    Simulation(ParticleSet particles, const std::vector<domain::SubdomainSpec>& specs, Settings settings);

    ParticleSet particles;
    std::vector<domain::Subdomain> subdomains;
    domain::PairTable pairs;
    mapping::MetricField metric;
    mapping::Correction correction;
    Settings settings;
    mechanics::ViscosityInputs viscosity_inputs;

    long step_index = 0;
    double time = 0.0;
    double last_dt = 0.0;

    /// Records the phase names of every step when non-null.
    std::vector<std::string>* trace = nullptr;

    /// Breaks a bond before or during the run (e.g. a pre-cut notch) and
    /// refreshes the kernel correction of both ends.
    void break_bond(ParticleId a, ParticleId b);

    /// Time step for the next step: the fixed dt or the CFL estimate.
    double next_dt() const;
    double stable_dt() const;

    /// Advances by dt (defaults to next_dt()).
    void step(std::optional<double> dt = std::nullopt);

    /// Re-evaluates F, stress, P and the acceleration at the current state
    /// without advancing (used after editing positions or velocities).
    void refresh();

    /// Takes a particle out of the continuum: its remaining bonds break, its
    /// stress is cleared and it moves ballistically from now on.
    void detach(ParticleId a);

    std::size_t transient_count() const;
    std::size_t broken_bond_count() const { return pairs.broken_count(); }
    std::size_t detached_count() const;

    double kinetic_energy() const;
    /// Stored elastic energy accumulated as the trapezoidal sum of sigma : D V dt.
    double strain_energy() const;
    Vec3 linear_momentum() const;
    double max_speed() const;

private:
    void apply_fixed_velocity();
    std::vector<Vec3> body_accelerations(double t) const;
    void kinematics();
    void constitutive(double dt);
    void bonds();
    void acceleration();
    void mark(const char* phase);

    std::vector<double> strain_energy_;
};

/**
 * Moves the reference positions of particles inside `options.region` to
 * reduce the acceleration a uniform pressure would produce on them, so that
 * the discrete stress divergence is balanced where lattices meet. Each
 * iteration rebuilds pairs, metric and correction. A move that would change
 * the owning subdomain is rejected. Masses are unchanged and x is reset to X.
 * Returns the largest remaining dimensionless residual among moved particles.
 */
double relax_reference(ParticleSet& particles, const std::vector<domain::SubdomainSpec>& specs,
                       const config::Relaxation& options);

/// Builds particles, subdomains and BCs from a validated configuration.
/// Relative file paths in the configuration resolve against `base_dir`.
Simulation setup(const config::SimConfig& cfg, const std::string& base_dir = ".");

struct RunOptions {
    bool write_snapshots = true;
    std::string output_dir = "output";
    config::SnapshotFormat format = config::SnapshotFormat::csv;
    long output_every = 1;
    /// Progress lines go here when non-null.
    std::ostream* progress = nullptr;
    /// Called after every step.
    std::function<void(const Simulation&)> on_step;
};

struct RunSummary {
    long steps = 0;
    double time = 0.0;
    double min_dt = 0.0;
    std::size_t snapshots = 0;
    std::vector<std::string> files;
};

/// Executes n_end steps with snapshots at step 0, every output_every steps and
/// at the final step.
RunSummary run(Simulation& sim, long n_end, const RunOptions& options);

} // namespace gsph::timeloop
