#pragma once

#include "gsph/chart.hpp"
#include "gsph/config.hpp"
#include "gsph/particles.hpp"
#include "gsph/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gsph::io {

/**
 * Appends particles on the cell centres of a lattice that is uniform in the
 * chart's generalized coordinates. Physical positions come from the chart
 * inverse and each mass is rho0 |det dX/dtheta| spacing^3.
 *
 * Returns the ids of the new particles. Throws SetupError for a zero or
 * negative extent, a non-positive spacing or a chart without inverse.
 */
std::vector<ParticleId> append_lattice(ParticleSet& particles, const config::LatticeSpec& spec, const Chart& chart,
                                       double rho0, int material_id);

/// Same as append_lattice into an empty set.
ParticleSet generate_lattice(const config::LatticeSpec& spec, const Chart& chart, double rho0, int material_id = 0);

/**
 * Reads a particle cloud: header row, then one row per particle with columns
 * X,Y,Z,mass and optionally material (a material name). Column order follows
 * the header. Rows without a material column use `default_material`.
 */
std::vector<ParticleId> append_particle_csv(ParticleSet& particles, const std::string& path,
                                            const config::SimConfig& cfg, const std::string& default_material);

/// One particle row of a snapshot.
struct SnapshotRecord {
    ParticleId id = 0;
    int subdomain = 0;
    Vec3 X = Vec3::Zero();
    Vec3 x = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    double rho = 0.0;
    std::array<double, 6> sigma{}; ///< xx yy zz xy yz xz
    double J = 0.0;
    double eps_pl = 0.0;
    double D = 0.0;
    std::uint32_t broken_bonds = 0;
};

struct Snapshot {
    long step = 0;
    double time = 0.0;
    std::vector<SnapshotRecord> records;
};

Snapshot make_snapshot(const ParticleSet& particles, long step, double time);

/// Column names of the CSV snapshot, in order.
const std::vector<std::string>& snapshot_columns();

void write_snapshot_csv(std::ostream& out, const Snapshot& snap);
void write_snapshot_vtk(std::ostream& out, const Snapshot& snap);

/// Writes snapshot_<step, 6 digits>.csv / .vtk into `directory`, creating it.
/// Returns the paths written. Throws IoError when the files cannot be written.
std::vector<std::string> write_snapshot(const std::string& directory, const Snapshot& snap,
                                        config::SnapshotFormat format);

Snapshot read_snapshot_csv(std::istream& in);
Snapshot read_snapshot_csv(const std::string& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

} // namespace gsph::io
