#pragma once

#include "gsph/chart.hpp"
#include "gsph/domain.hpp"
#include "gsph/material.hpp"
#include "gsph/mechanics.hpp"
#include "gsph/types.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsph::config {

/// All problems found while loading a configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct ChartSpec {
    ChartKind kind = ChartKind::identity;
    Vec3 origin = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    double angle_scale = 1.0;
    std::string table_path; ///< per-particle table charts

    Chart build() const;
};

/// Particles uniform in the chart's generalized coordinates: cell centres of
/// [lo, hi] with spacing `spacing`.
struct LatticeSpec {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
    double spacing = 0.0;
    std::string material;
    std::optional<domain::Region> clip;
};

struct SubdomainConfig {
    std::string name;
    int rank = 0;
    ChartSpec chart;
    /// Ownership predicate. Without it the subdomain owns its own lattice.
    std::optional<domain::Region> region;
    std::optional<double> h;
    double h_factor = 1.2;
    double overlap_width = 0.0;
    std::optional<LatticeSpec> lattice;
};

struct ParticleCsvSpec {
    std::string path;
    std::string material; ///< default when the file has no material column
};

struct FixedVelocity {
    domain::Region region;
    Vec3 velocity = Vec3::Zero();
    std::array<bool, 3> components{true, true, true};
};

struct InitialVelocity {
    domain::Region region;
    Vec3 velocity = Vec3::Zero();
    /// Optional affine part: v += gradient (X - origin).
    Mat3 gradient = Mat3::Zero();
    Vec3 origin = Vec3::Zero();
};

struct BodyForce {
    enum class Kind { uniform, centrifugal };
    Kind kind = Kind::uniform;
    domain::Region region;
    Vec3 value = Vec3::Zero(); ///< uniform acceleration (m/s^2)
    double omega2 = 0.0;       ///< centrifugal: acceleration = omega2 * radial offset
    Vec3 origin = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    double ramp_time = 0.0;    ///< linear ramp from zero over this time (0: immediate)
};

/// Reference-configuration relaxation run once at setup: particles inside
/// `region` are moved down the force a uniform pressure would exert on them
/// until the discrete stress divergence is nearly balanced. Used to smooth
/// irregular particle spacing where two lattices meet.
struct Relaxation {
    domain::Region region;
    long iterations = 200;
    double step = 0.1; ///< largest move per iteration, in physical smoothing lengths
    std::array<bool, 3> components{true, true, true};
};

struct IntegratorSettings {
    std::optional<double> dt;
    double cfl = 0.3;
    long n_end = 0;
    long output_every = 1;
    mechanics::MomentumOptions momentum;
};

enum class SnapshotFormat { csv, vtk, both };

struct OutputSettings {
    std::string directory = "output";
    SnapshotFormat format = SnapshotFormat::csv;
    bool enabled = true;
};

struct SimConfig {
    std::vector<material::MaterialModel> materials;
    std::vector<SubdomainConfig> subdomains;
    std::optional<ParticleCsvSpec> particle_csv;
    std::vector<FixedVelocity> fixed_velocity;
    std::vector<InitialVelocity> initial_velocity;
    std::vector<BodyForce> body_force;
    std::optional<Relaxation> relaxation;
    IntegratorSettings integrator;
    OutputSettings output;

    /// Index of a material by name, or -1.
    int material_index(const std::string& name) const;
};

/// Parses and validates; throws ConfigError listing every problem found.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig parse_config_text(const std::string& text);
/// Throws IoError if the file cannot be read.
SimConfig load_config(const std::string& path);

nlohmann::json to_json(const SimConfig& cfg);

domain::Region parse_region(const nlohmann::json& j);
nlohmann::json region_to_json(const domain::Region& r);

} // namespace gsph::config
