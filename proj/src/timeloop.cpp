#include "gsph/timeloop.hpp"

#include "gsph/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

namespace gsph::timeloop {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path)
{
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / p).string();
}

void settle(Simulation& sim, std::vector<ParticleId> touched)
{
    while (!touched.empty()) {
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        mapping::update_correction(sim.correction, sim.particles, sim.pairs, sim.metric, touched);
        std::vector<ParticleId> next;
        for (const ParticleId p : touched) {
            if (sim.correction.valid[p] != 0 || sim.particles.detached[p] != 0) {
                continue;
            }
            sim.pairs.for_each_pair_of(p, [&](std::size_t, const domain::Pair& pr) {
                if (pr.active) {
                    next.push_back(pr.other(p));
                }
            });
            sim.detach(p);
        }
        touched.swap(next);
    }
}

} // namespace

Simulation::Simulation(ParticleSet particles_in, const std::vector<domain::SubdomainSpec>& specs, Settings settings_in)
    : particles(std::move(particles_in)), settings(std::move(settings_in))
{
    const std::size_t n = particles.size();
    if (n == 0) {
        throw SetupError("setup: no particles");
    }
    if (settings.materials.empty()) {
        throw SetupError("setup: no materials");
    }
    for (ParticleId a = 0; a < n; ++a) {
        const int m = particles.material[a];
        if (m < 0 || static_cast<std::size_t>(m) >= settings.materials.size()) {
            throw SetupError("setup: particle " + std::to_string(a) + " refers to unknown material index " +
                             std::to_string(m));
        }
    }
    subdomains = domain::assign_subdomains(specs, particles);
    pairs = domain::build_pairs(subdomains, n);
    metric = mapping::build_metric(particles, subdomains, pairs);
    correction = mapping::build_correction(particles, pairs, metric);

    viscosity_inputs.h_phys = metric.h_phys;
    viscosity_inputs.sound_speed.resize(n);
    for (ParticleId a = 0; a < n; ++a) {
        const auto& mat = settings.materials[static_cast<std::size_t>(particles.material[a])];
        viscosity_inputs.sound_speed[a] = mat.elastic.sound_speed();
        particles.plastic[a].T = mat.T0;
    }
    strain_energy_.assign(n, 0.0);

    // a particle without a usable neighborhood from the start is left out
    std::vector<ParticleId> bad;
    for (ParticleId a = 0; a < n; ++a) {
        if (correction.valid[a] == 0) {
            bad.push_back(a);
        }
    }
    settle(*this, std::move(bad));

    apply_fixed_velocity();
    refresh();
}

void Simulation::mark(const char* phase)
{
    if (trace != nullptr) {
        trace->emplace_back(phase);
    }
}

void Simulation::apply_fixed_velocity()
{
    for (const auto& bc : settings.fixed_velocity) {
        for (ParticleId a = 0; a < particles.size(); ++a) {
            if (!bc.region.contains(a, particles.X[a])) {
                continue;
            }
            for (int d = 0; d < 3; ++d) {
                if (bc.components[static_cast<std::size_t>(d)]) {
                    particles.v[a](d) = bc.velocity(d);
                }
            }
        }
    }
}

std::vector<Vec3> Simulation::body_accelerations(double t) const
{
    if (settings.body_force.empty()) {
        return {};
    }
    std::vector<Vec3> body(particles.size(), Vec3::Zero());
    for (const auto& f : settings.body_force) {
        const double ramp = f.ramp_time > 0.0 ? std::min(1.0, t / f.ramp_time) : 1.0;
        const Vec3 axis = f.axis.normalized();
        for (ParticleId a = 0; a < particles.size(); ++a) {
            if (!f.region.contains(a, particles.X[a])) {
                continue;
            }
            if (f.kind == config::BodyForce::Kind::uniform) {
                body[a] += ramp * f.value;
            } else {
                const Vec3 d = particles.x[a] - f.origin;
                body[a] += ramp * f.omega2 * (d - d.dot(axis) * axis);
            }
        }
    }
    return body;
}

void Simulation::kinematics()
{
    mechanics::compute_F(particles, pairs, metric, correction, step_index);
    mechanics::compute_F_dot(particles, pairs, metric, correction);
    mechanics::update_density(particles);
}

void Simulation::constitutive(double dt)
{
    const auto n = static_cast<std::ptrdiff_t>(particles.size());
    std::ptrdiff_t bad = -1;
#pragma omp parallel for schedule(static) reduction(max : bad)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto a = static_cast<ParticleId>(i);
        if (particles.detached[a] != 0) {
            continue;
        }
        const auto& mat = settings.materials[static_cast<std::size_t>(particles.material[a])];
        const auto rates = material::spin_and_stretch(particles.F[a], particles.F_dot[a]);
        const Mat3 sigma_old = particles.sigma[a];
        Mat3 sigma = material::jaumann_update(sigma_old, rates.W, rates.D, mat.elastic, dt);
        if (const auto* jc = mat.johnson_cook()) {
            const auto rm = material::return_map(sigma, particles.plastic[a], mat.elastic, *jc, mat.damage(),
                                                 particles.rho[a], dt);
            sigma = rm.sigma;
            particles.plastic[a] = rm.state;
        }
        particles.sigma[a] = sigma;
        particles.P[a] = mechanics::assemble_pk1(sigma, particles.F[a]);
        strain_energy_[a] += 0.5 * mapping::tensor_inner(sigma_old + sigma, rates.D) * particles.volume0(a) *
                             particles.J[a] * dt;
        if (!particles.P[a].allFinite()) {
            bad = std::max(bad, i);
        }
    }
    if (bad >= 0) {
        for (ParticleId a = 0; a < particles.size(); ++a) {
            if (particles.detached[a] == 0 && !particles.P[a].allFinite()) {
                throw RuntimeFatal("non-finite stress at particle " + std::to_string(a) + " at step " +
                                   std::to_string(step_index));
            }
        }
    }
}

namespace {

/// Smallest Rankine threshold of the two ends, if either material has one.
std::optional<double> bond_threshold(const material::MaterialModel& ma, const material::MaterialModel& mb)
{
    if (ma.rankine && mb.rankine) {
        return std::min(ma.rankine->eps_max, mb.rankine->eps_max);
    }
    if (ma.rankine) {
        return ma.rankine->eps_max;
    }
    if (mb.rankine) {
        return mb.rankine->eps_max;
    }
    return std::nullopt;
}

} // namespace

void Simulation::detach(ParticleId a)
{
    particles.detached[a] = 1;
    particles.sigma[a].setZero();
    particles.P[a].setZero();
    particles.F_dot[a].setZero();
    pairs.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
        if (pairs.deactivate_bond(k)) {
            ++particles.broken_bonds[pr.a];
            ++particles.broken_bonds[pr.b];
        }
    });
}


void Simulation::bonds()
{
    const auto np = static_cast<std::ptrdiff_t>(pairs.size());
    std::vector<std::uint8_t> breaking(pairs.size(), 0);
    bool any_rankine = false;
    for (const auto& m : settings.materials) {
        any_rankine = any_rankine || m.rankine.has_value();
    }
    if (!any_rankine) {
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) {
        const auto& pr = pairs.pairs[static_cast<std::size_t>(i)];
        if (!pr.active) {
            continue;
        }
        const auto limit = bond_threshold(settings.materials[static_cast<std::size_t>(particles.material[pr.a])],
                                          settings.materials[static_cast<std::size_t>(particles.material[pr.b])]);
        if (!limit) {
            continue;
        }
        const double s = material::bond_stretch(particles.X[pr.a], particles.X[pr.b], particles.x[pr.a],
                                                particles.x[pr.b]);
        if (s >= *limit) {
            breaking[static_cast<std::size_t>(i)] = 1;
        }
    }
    std::vector<ParticleId> touched;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (breaking[k] != 0 && pairs.deactivate_bond(k)) {
            const auto& pr = pairs.pairs[k];
            ++particles.broken_bonds[pr.a];
            ++particles.broken_bonds[pr.b];
            touched.push_back(pr.a);
            touched.push_back(pr.b);
        }
    }
    settle(*this, std::move(touched));
}

void Simulation::break_bond(ParticleId a, ParticleId b)
{
    const auto k = pairs.find(a, b);
    if (!k) {
        throw SetupError("break_bond: particles " + std::to_string(a) + " and " + std::to_string(b) +
                         " are not neighbors");
    }
    if (!pairs.deactivate_bond(*k)) {
        return;
    }
    ++particles.broken_bonds[a];
    ++particles.broken_bonds[b];
    settle(*this, {a, b});
}

void Simulation::acceleration()
{
    mechanics::momentum_rhs(particles, pairs, metric, correction, viscosity_inputs, settings.integrator.momentum,
                            body_accelerations(time), step_index);
}

void Simulation::refresh()
{
    kinematics();
    for (ParticleId a = 0; a < particles.size(); ++a) {
        if (particles.detached[a] == 0) {
            particles.P[a] = mechanics::assemble_pk1(particles.sigma[a], particles.F[a]);
        }
    }
    acceleration();
}

double Simulation::stable_dt() const
{
    double dt = std::numeric_limits<double>::infinity();
    for (ParticleId a = 0; a < particles.size(); ++a) {
        if (particles.detached[a] != 0) {
            continue;
        }
        const double c = viscosity_inputs.sound_speed[a] + particles.v[a].norm();
        dt = std::min(dt, viscosity_inputs.h_phys[a] / c);
    }
    if (!std::isfinite(dt)) {
        throw RuntimeFatal("no particle left to derive a stable time step from");
    }
    return settings.integrator.cfl * dt;
}

double Simulation::next_dt() const
{
    return settings.integrator.dt ? *settings.integrator.dt : stable_dt();
}

void Simulation::step(std::optional<double> dt_in)
{
    const double dt = dt_in ? *dt_in : next_dt();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw RuntimeFatal("invalid time step " + std::to_string(dt) + " at step " + std::to_string(step_index + 1));
    }
    const double half = 0.5 * dt;
    const std::size_t n = particles.size();

    mark("half_kick");
    for (ParticleId a = 0; a < n; ++a) {
        particles.v[a] += half * particles.accel[a];
    }
    apply_fixed_velocity();

    mark("drift");
    for (ParticleId a = 0; a < n; ++a) {
        particles.x[a] += dt * particles.v[a];
    }
    ++step_index;
    time += dt;

    mark("kinematics");
    kinematics();

    mark("constitutive");
    constitutive(dt);

    mark("bonds");
    bonds();

    mark("acceleration");
    acceleration();

    mark("half_kick");
    for (ParticleId a = 0; a < n; ++a) {
        particles.v[a] += half * particles.accel[a];
    }
    apply_fixed_velocity();
    last_dt = dt;
}

std::size_t Simulation::transient_count() const
{
    std::vector<std::uint8_t> seen(particles.size(), 0);
    for (const auto& s : subdomains) {
        for (const ParticleId p : s.transient_ids) {
            seen[p] = 1;
        }
    }
    return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), std::uint8_t{1}));
}

std::size_t Simulation::detached_count() const
{
    return static_cast<std::size_t>(std::count(particles.detached.begin(), particles.detached.end(), std::uint8_t{1}));
}

double Simulation::kinetic_energy() const
{
    double e = 0.0;
    for (ParticleId a = 0; a < particles.size(); ++a) {
        e += 0.5 * particles.m0[a] * particles.v[a].squaredNorm();
    }
    return e;
}

double Simulation::strain_energy() const
{
    double e = 0.0;
    for (const double s : strain_energy_) {
        e += s;
    }
    return e;
}

Vec3 Simulation::linear_momentum() const
{
    Vec3 p = Vec3::Zero();
    for (ParticleId a = 0; a < particles.size(); ++a) {
        p += particles.m0[a] * particles.v[a];
    }
    return p;
}

double Simulation::max_speed() const
{
    double m = 0.0;
    for (const auto& v : particles.v) {
        m = std::max(m, v.norm());
    }
    return m;
}

// ---------------------------------------------------------------------------

double relax_reference(ParticleSet& particles, const std::vector<domain::SubdomainSpec>& specs,
                       const config::Relaxation& options)
{
    std::vector<const domain::SubdomainSpec*> by_rank;
    for (const auto& s : specs) {
        by_rank.push_back(&s);
    }
    std::stable_sort(by_rank.begin(), by_rank.end(), [](auto* l, auto* r) { return l->rank < r->rank; });
    auto owner_at = [&](ParticleId a, const Vec3& X) -> int {
        for (std::size_t k = 0; k < by_rank.size(); ++k) {
            if (by_rank[k]->region.contains(a, X)) {
                return static_cast<int>(k);
            }
        }
        return -1;
    };
    std::vector<ParticleId> movers;
    for (ParticleId a = 0; a < particles.size(); ++a) {
        if (options.region.contains(a, particles.X[a])) {
            movers.push_back(a);
        }
    }
    const Vec3 mask(options.components[0] ? 1.0 : 0.0, options.components[1] ? 1.0 : 0.0,
                    options.components[2] ? 1.0 : 0.0);
    mechanics::MomentumOptions momentum;
    momentum.viscosity.beta1 = 0.0;
    momentum.viscosity.beta2 = 0.0;
    double worst = 0.0;
    for (long it = 0; it <= options.iterations && !movers.empty(); ++it) {
        ParticleSet probe = particles;
        probe.x = probe.X;
        const auto subs = domain::assign_subdomains(specs, probe);
        const auto pairs = domain::build_pairs(subs, probe.size());
        const auto metric = mapping::build_metric(probe, subs, pairs);
        const auto corr = mapping::build_correction(probe, pairs, metric);
        std::fill(probe.P.begin(), probe.P.end(), Mat3(-Mat3::Identity()));
        mechanics::ViscosityInputs inputs;
        inputs.sound_speed.assign(probe.size(), 0.0);
        inputs.h_phys = metric.h_phys;
        mechanics::momentum_rhs(probe, pairs, metric, corr, inputs, momentum, {});
        worst = 0.0;
        for (const auto a : movers) {
            // dimensionless residual of a unit pressure
            Vec3 s = (probe.accel[a] * probe.rho0[a] * metric.h_phys[a]).cwiseProduct(mask);
            worst = std::max(worst, s.norm());
            if (it == options.iterations) {
                continue;
            }
            if (s.norm() > 1.0) {
                s.normalize();
            }
            const Vec3 moved = particles.X[a] + options.step * metric.h_phys[a] * s;
            if (owner_at(a, moved) == owner_at(a, particles.X[a])) {
                particles.X[a] = moved;
            }
        }
    }
    particles.x = particles.X;
    return worst;
}

Simulation setup(const config::SimConfig& cfg, const std::string& base_dir)
{
    ParticleSet particles;
    std::vector<domain::SubdomainSpec> specs;
    for (const auto& s : cfg.subdomains) {
        config::ChartSpec chart_spec = s.chart;
        if (chart_spec.kind == ChartKind::per_particle_table) {
            chart_spec.table_path = resolve(base_dir, chart_spec.table_path);
        }
        domain::SubdomainSpec spec;
        spec.name = s.name;
        spec.rank = s.rank;
        spec.chart = chart_spec.build();
        spec.overlap_width = s.overlap_width;
        std::vector<ParticleId> ids;
        if (s.lattice) {
            const int mid = cfg.material_index(s.lattice->material);
            if (mid < 0) {
                throw SetupError("setup: subdomain '" + s.name + "' uses unknown material '" + s.lattice->material +
                                 "'");
            }
            try {
                ids = io::append_lattice(particles, *s.lattice, spec.chart,
                                         cfg.materials[static_cast<std::size_t>(mid)].elastic.rho0, mid);
            } catch (const SetupError& e) {
                throw SetupError("setup: subdomain '" + s.name + "': " + e.what());
            }
        }
        spec.h = s.h ? *s.h : s.h_factor * (s.lattice ? s.lattice->spacing : 0.0);
        spec.region = s.region ? *s.region : domain::Region::id_list({ids.begin(), ids.end()});
        specs.push_back(std::move(spec));
    }
    if (cfg.particle_csv) {
        std::string mat = cfg.particle_csv->material;
        if (mat.empty()) {
            mat = cfg.materials.front().name;
        }
        io::append_particle_csv(particles, resolve(base_dir, cfg.particle_csv->path), cfg, mat);
    }
    if (cfg.relaxation) {
        relax_reference(particles, specs, *cfg.relaxation);
    }
    for (const auto& iv : cfg.initial_velocity) {
        for (ParticleId a = 0; a < particles.size(); ++a) {
            if (iv.region.contains(a, particles.X[a])) {
                particles.v[a] = iv.velocity + iv.gradient * (particles.X[a] - iv.origin);
            }
        }
    }
    Settings settings;
    settings.materials = cfg.materials;
    settings.integrator = cfg.integrator;
    settings.fixed_velocity = cfg.fixed_velocity;
    settings.body_force = cfg.body_force;
    return Simulation(std::move(particles), specs, std::move(settings));
}

RunSummary run(Simulation& sim, long n_end, const RunOptions& options)
{
    RunSummary summary;
    summary.min_dt = std::numeric_limits<double>::infinity();
    const long every = std::max(1L, options.output_every);
    double interval_min_dt = std::numeric_limits<double>::infinity();

    auto output = [&]() {
        if (options.write_snapshots) {
            const auto files =
                io::write_snapshot(options.output_dir, io::make_snapshot(sim.particles, sim.step_index, sim.time),
                                   options.format);
            summary.files.insert(summary.files.end(), files.begin(), files.end());
            ++summary.snapshots;
        }
        if (options.progress != nullptr) {
            std::ostringstream line;
            line << "step " << sim.step_index << " time " << sim.time << " min_dt "
                 << (std::isfinite(interval_min_dt) ? interval_min_dt : 0.0) << " max_v " << sim.max_speed()
                 << " broken_bonds " << sim.broken_bond_count() << '\n';
            *options.progress << line.str() << std::flush;
        }
        interval_min_dt = std::numeric_limits<double>::infinity();
    };

    output();
    for (long i = 1; i <= n_end; ++i) {
        sim.step();
        interval_min_dt = std::min(interval_min_dt, sim.last_dt);
        summary.min_dt = std::min(summary.min_dt, sim.last_dt);
        if (options.on_step) {
            options.on_step(sim);
        }
        if (i % every == 0 || i == n_end) {
            output();
        }
    }
    summary.steps = n_end;
    summary.time = sim.time;
    if (!std::isfinite(summary.min_dt)) {
        summary.min_dt = 0.0;
    }
    return summary;
}

} // namespace gsph::timeloop
