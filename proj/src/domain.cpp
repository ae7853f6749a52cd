#include "gsph/domain.hpp"

#include "gsph/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace gsph::domain {

Region Region::box(const Vec3& lo, const Vec3& hi)
{
    Region r;
    r.kind = Kind::box;
    r.lo = lo;
    r.hi = hi;
    return r;
}

Region Region::annulus(const Vec3& origin, const Vec3& axis, double r_min, double r_max)
{
    Region r;
    r.kind = Kind::annulus;
    r.origin = origin;
    r.axis = axis;
    r.r_min = r_min;
    r.r_max = r_max;
    return r;
}

Region Region::id_list(std::set<ParticleId> ids)
{
    Region r;
    r.kind = Kind::ids;
    r.ids = std::move(ids);
    return r;
}

bool Region::contains(ParticleId id, const Vec3& X) const
{
    switch (kind) {
    case Kind::all:
        return true;
    case Kind::box:
        return (X.array() >= lo.array()).all() && (X.array() <= hi.array()).all();
    case Kind::annulus: {
        Vec3 e1;
        Vec3 e2;
        Vec3 e3;
        axis_frame(axis, e1, e2, e3);
        const Vec3 d = X - origin;
        const double x = d.dot(e1);
        const double y = d.dot(e2);
        const double r = std::hypot(x, y);
        if (r < r_min || r > r_max) {
            return false;
        }
        const double phi = std::atan2(y, x);
        if (phi_min && phi < *phi_min) {
            return false;
        }
        if (phi_max && phi > *phi_max) {
            return false;
        }
        const double z = d.dot(e3);
        if (z_min && z < *z_min) {
            return false;
        }
        if (z_max && z > *z_max) {
            return false;
        }
        return true;
    }
    case Kind::ids:
        return ids.count(id) != 0;
    }
    return false;
}

std::optional<Vec3> Subdomain::theta_of(ParticleId p) const
{
    const auto it = std::lower_bound(mapped.begin(), mapped.end(), p);
    if (it == mapped.end() || *it != p) {
        return std::nullopt;
    }
    return theta[static_cast<std::size_t>(it - mapped.begin())];
}

// ---------------------------------------------------------------------------
// cell grid

namespace {

struct CellKey {
    std::int64_t i, j, k;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& c) const noexcept
    {
        std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(c.j) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(c.k) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

class CellGrid {
public:
    CellGrid(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell)
    {
        for (std::size_t i = 0; i < points.size(); ++i) {
            cells_[key_of(points[i])].push_back(i);
        }
    }

    CellKey key_of(const Vec3& p) const
    {
        return {static_cast<std::int64_t>(std::floor(p(0) / cell_)),
                static_cast<std::int64_t>(std::floor(p(1) / cell_)),
                static_cast<std::int64_t>(std::floor(p(2) / cell_))};
    }

    /// Calls fn(j) for every stored point j in the 27 cells around `p`.
    template <class Fn>
    void visit_near(const Vec3& p, Fn&& fn) const
    {
        const CellKey c = key_of(p);
        for (std::int64_t di = -1; di <= 1; ++di) {
            for (std::int64_t dj = -1; dj <= 1; ++dj) {
                for (std::int64_t dk = -1; dk <= 1; ++dk) {
                    const auto it = cells_.find({c.i + di, c.j + dj, c.k + dk});
                    if (it == cells_.end()) {
                        continue;
                    }
                    for (const std::size_t j : it->second) {
                        fn(j);
                    }
                }
            }
        }
    }

private:
    const std::vector<Vec3>& points_;
    double cell_;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

void check_points(const std::vector<Vec3>& points)
{
    for (const auto& p : points) {
        if (!p.allFinite()) {
            throw SetupError("neighbor search: non-finite coordinates");
        }
    }
}

std::uint64_t pair_key(ParticleId a, ParticleId b)
{
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

} // namespace

std::vector<std::pair<std::size_t, std::size_t>> close_pairs(const std::vector<Vec3>& points, double radius)
{
    check_points(points);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (points.empty()) {
        return out;
    }
    const CellGrid grid(points, radius);
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < points.size(); ++i) {
        grid.visit_near(points[i], [&](std::size_t j) {
            if (j > i && (points[i] - points[j]).squaredNorm() < r2) {
                out.emplace_back(i, j);
            }
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Subdomain> assign_subdomains(const std::vector<SubdomainSpec>& specs_in, ParticleSet& particles)
{
    if (specs_in.empty()) {
        throw SetupError("domain: at least one subdomain is required");
    }
    std::vector<SubdomainSpec> specs = specs_in;
    std::stable_sort(specs.begin(), specs.end(),
                     [](const SubdomainSpec& l, const SubdomainSpec& r) { return l.rank < r.rank; });
    for (std::size_t s = 1; s < specs.size(); ++s) {
        if (specs[s].rank == specs[s - 1].rank) {
            throw SetupError("domain: subdomains '" + specs[s - 1].name + "' and '" + specs[s].name +
                             "' share precedence rank " + std::to_string(specs[s].rank));
        }
    }

    std::vector<Subdomain> subs(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        if (!(specs[s].h > 0.0)) {
            throw SetupError("domain: subdomain '" + specs[s].name + "' has non-positive smoothing length");
        }
        subs[s].id = static_cast<int>(s);
        subs[s].rank = specs[s].rank;
        subs[s].name = specs[s].name;
        subs[s].chart = specs[s].chart;
        subs[s].h = specs[s].h;
        subs[s].overlap_width = specs[s].overlap_width;
    }

    const std::size_t n = particles.size();
    particles.owner.assign(n, -1);
    for (ParticleId p = 0; p < n; ++p) {
        int first = -1;
        bool banded = false;
        for (std::size_t s = 0; s < specs.size(); ++s) {
            if (!specs[s].region.contains(p, particles.X[p])) {
                continue;
            }
            if (first < 0) {
                first = static_cast<int>(s);
                banded = specs[s].overlap_width > 0.0;
                continue;
            }
            if (!banded && !(specs[s].overlap_width > 0.0)) {
                throw SetupError("domain: overlapping subdomain regions '" + specs[first].name + "' and '" +
                                 specs[s].name + "' without declared overlap band (particle " +
                                 std::to_string(p) + ")");
            }
        }
        if (first < 0) {
            std::ostringstream msg;
            msg << "domain: particle " << p << " at (" << particles.X[p].transpose()
                << ") is not covered by any subdomain region";
            throw SetupError(msg.str());
        }
        particles.owner[p] = first;
        subs[static_cast<std::size_t>(first)].member_ids.push_back(p);
    }

    // every particle gets coordinates in its owner chart
    std::vector<std::vector<std::pair<ParticleId, Vec3>>> mapped(subs.size());
    for (auto& sub : subs) {
        for (const ParticleId p : sub.member_ids) {
            const auto th = sub.chart.forward(p, particles.X[p]);
            if (!th || !th->allFinite()) {
                throw SetupError("domain: particle " + std::to_string(p) + " cannot be mapped into chart of '" +
                                 sub.name + "'");
            }
            mapped[static_cast<std::size_t>(sub.id)].emplace_back(p, *th);
        }
    }

    // transient bands
    for (std::size_t t = 1; t < subs.size(); ++t) {
        const double width = subs[t].overlap_width;
        if (!(width > 0.0)) {
            continue;
        }
        for (std::size_t s = 0; s < t; ++s) {
            if (subs[s].member_ids.empty()) {
                continue;
            }
            if (width < 2.0 * subs[s].h * (1.0 - 1e-12)) {
                std::ostringstream msg;
                msg << "domain: overlap band of '" << subs[t].name << "' (" << width << ") is thinner than 2h ("
                    << 2.0 * subs[s].h << ") of '" << subs[s].name << "'; kernel support would be truncated";
                throw SetupError(msg.str());
            }
            std::vector<Vec3> anchors;
            anchors.reserve(subs[s].member_ids.size());
            for (const auto& [p, th] : mapped[s]) {
                if (particles.owner[p] == static_cast<int>(s)) {
                    anchors.push_back(th);
                }
            }
            const CellGrid grid(anchors, width);
            const double w2 = width * width;
            for (const ParticleId p : subs[t].member_ids) {
                const auto th = subs[s].chart.forward(p, particles.X[p]);
                if (!th || !th->allFinite()) {
                    continue;
                }
                bool near = false;
                grid.visit_near(*th, [&](std::size_t j) {
                    if (!near && (anchors[j] - *th).squaredNorm() <= w2) {
                        near = true;
                    }
                });
                if (near) {
                    subs[s].transient_ids.push_back(p);
                    mapped[s].emplace_back(p, *th);
                }
            }
        }
    }

    for (auto& sub : subs) {
        auto& m = mapped[static_cast<std::size_t>(sub.id)];
        std::sort(m.begin(), m.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        sub.mapped.reserve(m.size());
        sub.theta.reserve(m.size());
        for (const auto& [p, th] : m) {
            sub.mapped.push_back(p);
            sub.theta.push_back(th);
        }
        std::sort(sub.transient_ids.begin(), sub.transient_ids.end());
    }
    return subs;
}

// ---------------------------------------------------------------------------

PairTable build_pairs(const std::vector<Subdomain>& subdomains, std::size_t particle_count)
{
    PairTable table;
    std::unordered_map<std::uint64_t, int> owned; // pair key -> owner chart

    for (const auto& sub : subdomains) {
        const auto params = kernel::KernelParams::make(sub.h);
        const auto found = close_pairs(sub.theta, kernel::support_factor * sub.h);
        for (const auto& [i, j] : found) {
            ParticleId a = sub.mapped[i];
            ParticleId b = sub.mapped[j];
            Vec3 r = sub.theta[i] - sub.theta[j];
            if (a > b) {
                std::swap(a, b);
                r = -r;
            }
            const Vec3 grad = kernel::kernel_gradient(r, params);
            const auto key = pair_key(a, b);
            if (owned.count(key) != 0) {
                table.chart_links.push_back(ChartLink{a, b, sub.id, grad});
                continue;
            }
            owned.emplace(key, sub.id);
            Pair pair;
            pair.a = a;
            pair.b = b;
            pair.owner = sub.id;
            pair.grad_a = grad;
            pair.W = kernel::kernel_value(r, params);
            table.pairs.push_back(pair);
        }
    }

    std::sort(table.pairs.begin(), table.pairs.end(),
              [](const Pair& l, const Pair& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
    std::sort(table.chart_links.begin(), table.chart_links.end(), [](const ChartLink& l, const ChartLink& r) {
        return std::tie(l.chart, l.a, l.b) < std::tie(r.chart, r.a, r.b);
    });

    std::vector<std::size_t> counts(particle_count, 0);
    for (const auto& p : table.pairs) {
        if (p.a >= particle_count || p.b >= particle_count) {
            throw SetupError("domain: pair references unknown particle");
        }
        ++counts[p.a];
        ++counts[p.b];
    }
    table.offsets.assign(particle_count + 1, 0);
    for (std::size_t p = 0; p < particle_count; ++p) {
        if (counts[p] == 0) {
            throw SetupError("domain: particle " + std::to_string(p) + " has no neighbors");
        }
        table.offsets[p + 1] = table.offsets[p] + counts[p];
    }
    table.adjacency.assign(table.offsets.back(), 0);
    std::vector<std::size_t> cursor(table.offsets.begin(), table.offsets.end() - 1);
    // pairs are sorted by (a, b); filling in pair order gives partner-sorted rows
    // for the `a` side, the `b` side is sorted afterwards
    for (std::size_t k = 0; k < table.pairs.size(); ++k) {
        table.adjacency[cursor[table.pairs[k].a]++] = k;
        table.adjacency[cursor[table.pairs[k].b]++] = k;
    }
    for (std::size_t p = 0; p < particle_count; ++p) {
        auto first = table.adjacency.begin() + static_cast<std::ptrdiff_t>(table.offsets[p]);
        auto last = table.adjacency.begin() + static_cast<std::ptrdiff_t>(table.offsets[p + 1]);
        std::sort(first, last, [&](std::size_t l, std::size_t r) {
            return table.pairs[l].other(p) < table.pairs[r].other(p);
        });
    }
    return table;
}

std::size_t PairTable::active_count(ParticleId p) const
{
    std::size_t n = 0;
    for (std::size_t k = offsets[p]; k < offsets[p + 1]; ++k) {
        n += pairs[adjacency[k]].active ? 1 : 0;
    }
    return n;
}

std::optional<std::size_t> PairTable::find(ParticleId p, ParticleId q) const
{
    for (std::size_t k = offsets[p]; k < offsets[p + 1]; ++k) {
        if (pairs[adjacency[k]].other(p) == q) {
            return adjacency[k];
        }
    }
    return std::nullopt;
}

bool PairTable::deactivate_bond(std::size_t pair_index)
{
    auto& pair = pairs.at(pair_index);
    const bool was = pair.active;
    pair.active = false;
    return was;
}

std::size_t PairTable::broken_count() const
{
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const Pair& p) { return !p.active; }));
}

} // namespace gsph::domain
