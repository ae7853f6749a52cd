#pragma once

#include "gsph/chart.hpp"
#include "gsph/particles.hpp"
#include "gsph/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gsph::domain {

/// Physical-space predicate used for subdomain ownership and BC selection.
struct Region {
    enum class Kind { all, box, annulus, ids };

    Kind kind = Kind::all;
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
    // annulus: about `origin` along `axis`; phi measured like the cylindrical chart
    Vec3 origin = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    double r_min = 0.0;
    double r_max = 0.0;
    std::optional<double> phi_min;
    std::optional<double> phi_max;
    std::optional<double> z_min;
    std::optional<double> z_max;
    std::set<ParticleId> ids;

    bool contains(ParticleId id, const Vec3& X) const;

    static Region everything() { return Region{}; }
    static Region box(const Vec3& lo, const Vec3& hi);
    static Region annulus(const Vec3& origin, const Vec3& axis, double r_min, double r_max);
    static Region id_list(std::set<ParticleId> ids);
};

struct SubdomainSpec {
    std::string name;
    int rank = 0;             ///< precedence; lower is more comprehensive
    Chart chart = Chart::identity();
    Region region;
    double h = 0.0;           ///< smoothing length in this chart's generalized units
    double overlap_width = 0; ///< transient band width, measured in the higher-precedence chart
};

/**
 * One generalized-coordinate chart together with the particles it sees.
 *
 * `mapped` lists every particle with coordinates in this chart (members plus
 * transients arriving from lower-precedence subdomains), sorted by id, with
 * `theta` parallel to it.
 */
struct Subdomain {
    int id = 0; ///< position in precedence order (0 = most comprehensive)
    int rank = 0;
    std::string name;
    Chart chart = Chart::identity();
    double h = 0.0;
    double overlap_width = 0.0;
    std::vector<ParticleId> member_ids;
    std::vector<ParticleId> transient_ids;
    std::vector<ParticleId> mapped;
    std::vector<Vec3> theta;

    /// Generalized coordinates of particle `p` in this chart, if mapped.
    std::optional<Vec3> theta_of(ParticleId p) const;
};

/**
 * Orders subdomains by rank, assigns each particle to the subdomain whose
 * region contains it and flags transient particles.
 *
 * A particle inside several regions is owned by the most comprehensive one,
 * which is only allowed when one of the involved subdomains declares an
 * overlap band. A particle of subdomain t becomes transient into every
 * higher-precedence subdomain s whose members lie within t's overlap width of
 * it in chart s. The width must be at least 2 h_s.
 *
 * Writes the owner index into particles.owner.
 */
std::vector<Subdomain> assign_subdomains(const std::vector<SubdomainSpec>& specs, ParticleSet& particles);

struct Pair {
    ParticleId a = 0;
    ParticleId b = 0; ///< a < b
    int owner = 0;    ///< owning subdomain index
    Vec3 grad_a = Vec3::Zero(); ///< dW_ab/dtheta_a in the owner chart
    double W = 0.0;
    bool active = true;

    Vec3 grad_b() const { return -grad_a; }
    ParticleId other(ParticleId p) const { return p == a ? b : a; }
    /// Kernel gradient seen from particle p (which must be a or b).
    Vec3 grad_for(ParticleId p) const { return p == a ? grad_a : Vec3(-grad_a); }
};

/// A neighbor relation found in a chart that does not own the pair. Only used
/// to complete the per-chart metric sums of transient particles.
struct ChartLink {
    ParticleId a = 0;
    ParticleId b = 0;
    int chart = 0;
    Vec3 grad_a = Vec3::Zero();
};

struct PairTable {
    std::vector<Pair> pairs;
    std::vector<ChartLink> chart_links;
    /// CSR adjacency: pairs of particle p are adjacency[offsets[p] .. offsets[p+1]),
    /// ordered by partner id.
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> adjacency;

    std::size_t size() const { return pairs.size(); }

    template <class Fn>
    void for_each_pair_of(ParticleId p, Fn&& fn) const
    {
        for (std::size_t k = offsets[p]; k < offsets[p + 1]; ++k) {
            fn(adjacency[k], pairs[adjacency[k]]);
        }
    }

    std::size_t neighbor_count(ParticleId p) const { return offsets[p + 1] - offsets[p]; }
    std::size_t active_count(ParticleId p) const;

    /// Index of pair {p, q}, if present.
    std::optional<std::size_t> find(ParticleId p, ParticleId q) const;

    /// Marks the bond inactive for good. Returns true if it was active before.
    bool deactivate_bond(std::size_t pair_index);

    std::size_t broken_count() const;
};

/**
 * Builds reference-configuration interaction pairs.
 *
 * Subdomains are processed in precedence order. In each chart a cell grid of
 * side 2h collects every pair of mapped particles closer than 2h; a pair
 * already owned by an earlier chart is recorded only as a ChartLink. Kernel
 * values and gradients are evaluated once here and never change.
 *
 * Throws SetupError if a particle ends up with no neighbors.
 */
PairTable build_pairs(const std::vector<Subdomain>& subdomains, std::size_t particle_count);

/// All index pairs (i < j) of `points` closer than `radius`, sorted. Cell-grid search.
std::vector<std::pair<std::size_t, std::size_t>> close_pairs(const std::vector<Vec3>& points, double radius);

} // namespace gsph::domain
