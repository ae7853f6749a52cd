#pragma once

#include "gsph/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>

namespace gsph {

enum class ChartKind { identity, cylindrical, per_particle_table };

std::string to_string(ChartKind kind);

/**
 * Map from reference physical positions to generalized coordinates for one
 * subdomain.
 *
 * The cylindrical chart uses theta = (r, s * phi, z) in a local frame given by
 * an origin and an axis direction; s (angle_scale, default 1) sets the length
 * that one radian of phi occupies in generalized space. phi lies in (-pi, pi].
 *
 * A per-particle table chart carries theta explicitly for each particle id and
 * has no analytic inverse.
 */
class Chart {
public:
    static Chart identity();
    static Chart cylindrical(const Vec3& origin, const Vec3& axis, double angle_scale = 1.0);
    static Chart table(std::unordered_map<ParticleId, Vec3> theta_by_id);

    ChartKind kind() const { return kind_; }

    /// Generalized coordinates of particle `id` at reference position X.
    /// Table charts look the id up and return nullopt if it is absent.
    std::optional<Vec3> forward(ParticleId id, const Vec3& X) const;

    /// Physical position of theta. Not available for table charts.
    Vec3 inverse(const Vec3& theta) const;

    /// Analytic dX/dtheta at theta (columns are the covariant basis vectors).
    /// Not available for table charts.
    Mat3 jacobian(const Vec3& theta) const;

    bool has_inverse() const { return kind_ != ChartKind::per_particle_table; }

    const Vec3& origin() const { return origin_; }
    const Vec3& axis() const { return e3_; }
    double angle_scale() const { return angle_scale_; }

    /// Local cylindrical frame helpers (also used by region predicates).
    /// Returns (r, phi, z) about this chart's axis.
    Vec3 cylindrical_coords(const Vec3& X) const;

private:
    ChartKind kind_ = ChartKind::identity;
    Vec3 origin_ = Vec3::Zero();
    Vec3 e1_ = Vec3::UnitX();
    Vec3 e2_ = Vec3::UnitY();
    Vec3 e3_ = Vec3::UnitZ();
    double angle_scale_ = 1.0;
    std::shared_ptr<const std::unordered_map<ParticleId, Vec3>> table_;
};

/// Builds an orthonormal frame (e1, e2, e3) with e3 along `axis`. For the z
/// axis this is the canonical x, y, z frame.
void axis_frame(const Vec3& axis, Vec3& e1, Vec3& e2, Vec3& e3);

/// Reads "id,theta1,theta2,theta3" rows (optional header) into a table chart.
Chart load_table_chart(const std::string& path);

} // namespace gsph
