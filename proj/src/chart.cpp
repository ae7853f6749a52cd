#include "gsph/chart.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gsph {

std::string to_string(ChartKind kind)
{
    switch (kind) {
    case ChartKind::identity:
        return "identity";
    case ChartKind::cylindrical:
        return "cylindrical";
    case ChartKind::per_particle_table:
        return "table";
    }
    return "unknown";
}

void axis_frame(const Vec3& axis, Vec3& e1, Vec3& e2, Vec3& e3)
{
    const double n = axis.norm();
    if (!(n > 0.0) || !axis.allFinite()) {
        throw SetupError("chart: cylinder axis must be a non-zero finite vector");
    }
    e3 = axis / n;
    // Pick the reference direction closest to global x that is orthogonal to e3.
    Vec3 seed = Vec3::UnitX();
    if (std::abs(e3.dot(seed)) > 0.9) {
        seed = Vec3::UnitY();
    }
    e1 = (seed - seed.dot(e3) * e3).normalized();
    e2 = e3.cross(e1);
}

Chart Chart::identity() { return Chart{}; }

Chart Chart::cylindrical(const Vec3& origin, const Vec3& axis, double angle_scale)
{
    if (!(angle_scale > 0.0) || !std::isfinite(angle_scale)) {
        throw SetupError("chart: cylindrical angle_scale must be positive");
    }
    Chart c;
    c.kind_ = ChartKind::cylindrical;
    c.origin_ = origin;
    axis_frame(axis, c.e1_, c.e2_, c.e3_);
    c.angle_scale_ = angle_scale;
    return c;
}

Chart Chart::table(std::unordered_map<ParticleId, Vec3> theta_by_id)
{
    Chart c;
    c.kind_ = ChartKind::per_particle_table;
    c.table_ = std::make_shared<const std::unordered_map<ParticleId, Vec3>>(std::move(theta_by_id));
    return c;
}

Vec3 Chart::cylindrical_coords(const Vec3& X) const
{
    const Vec3 d = X - origin_;
    const double x = d.dot(e1_);
    const double y = d.dot(e2_);
    return {std::hypot(x, y), std::atan2(y, x), d.dot(e3_)};
}

std::optional<Vec3> Chart::forward(ParticleId id, const Vec3& X) const
{
    switch (kind_) {
    case ChartKind::identity:
        return X;
    case ChartKind::cylindrical: {
        const Vec3 c = cylindrical_coords(X);
        return Vec3{c(0), angle_scale_ * c(1), c(2)};
    }
    case ChartKind::per_particle_table: {
        const auto it = table_->find(id);
        if (it == table_->end()) {
            return std::nullopt;
        }
        return it->second;
    }
    }
    return std::nullopt;
}

Vec3 Chart::inverse(const Vec3& theta) const
{
    switch (kind_) {
    case ChartKind::identity:
        return theta;
    case ChartKind::cylindrical: {
        const double r = theta(0);
        const double phi = theta(1) / angle_scale_;
        return origin_ + r * std::cos(phi) * e1_ + r * std::sin(phi) * e2_ + theta(2) * e3_;
    }
    case ChartKind::per_particle_table:
        break;
    }
    throw SetupError("chart: table charts have no analytic inverse");
}

Mat3 Chart::jacobian(const Vec3& theta) const
{
    switch (kind_) {
    case ChartKind::identity:
        return Mat3::Identity();
    case ChartKind::cylindrical: {
        const double r = theta(0);
        const double phi = theta(1) / angle_scale_;
        Mat3 j;
        j.col(0) = std::cos(phi) * e1_ + std::sin(phi) * e2_;
        j.col(1) = (r / angle_scale_) * (-std::sin(phi) * e1_ + std::cos(phi) * e2_);
        j.col(2) = e3_;
        return j;
    }
    case ChartKind::per_particle_table:
        break;
    }
    throw SetupError("chart: table charts have no analytic Jacobian");
}

Chart load_table_chart(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("chart table: cannot open '" + path + "'");
    }
    std::unordered_map<ParticleId, Vec3> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long long id = 0;
        Vec3 t;
        if (!(ls >> id >> t(0) >> t(1) >> t(2))) {
            if (line_no == 1) {
                continue; // header
            }
            throw SetupError("chart table '" + path + "': malformed row at line " + std::to_string(line_no));
        }
        if (id < 0) {
            throw SetupError("chart table '" + path + "': negative particle id at line " + std::to_string(line_no));
        }
        table[static_cast<ParticleId>(id)] = t;
    }
    return Chart::table(std::move(table));
}

} // namespace gsph
