#include "gsph/mapping.hpp"

#include <sstream>

namespace gsph::mapping {

const ChartMetric* MetricField::in_chart(ParticleId p, int chart) const
{
    for (std::size_t k = offsets[p]; k < offsets[p + 1]; ++k) {
        if (entries[k].chart == chart) {
            return &entries[k];
        }
    }
    return nullptr;
}

namespace {

struct Accumulator {
    Mat3 moment_X = Mat3::Zero();
    Mat3 moment_theta = Mat3::Zero();
    std::size_t count = 0;
};

std::size_t entry_index(const MetricField& m, ParticleId p, int chart)
{
    for (std::size_t k = m.offsets[p]; k < m.offsets[p + 1]; ++k) {
        if (m.entries[k].chart == chart) {
            return k;
        }
    }
    throw SetupError("mapping: particle " + std::to_string(p) + " is not mapped into chart " +
                     std::to_string(chart));
}

[[noreturn]] void degenerate(ParticleId p, const domain::Subdomain& sub, std::size_t neighbors, const char* what,
                             double cond)
{
    std::ostringstream msg;
    msg << "mapping: singular " << what << " at particle " << p << " in chart '" << sub.name << "' ("
        << neighbors << " neighbors, condition number " << cond << ")";
    throw SetupError(msg.str());
}

} // namespace

MetricField build_metric(const ParticleSet& particles, const std::vector<domain::Subdomain>& subdomains,
                         const domain::PairTable& pairs)
{
    const std::size_t n = particles.size();
    MetricField metric;

    // charts per particle: owner first, then every chart it is transient into
    std::vector<std::vector<int>> charts(n);
    for (ParticleId p = 0; p < n; ++p) {
        if (particles.owner[p] < 0) {
            throw SetupError("mapping: particle " + std::to_string(p) + " has no owning subdomain");
        }
        charts[p].push_back(particles.owner[p]);
    }
    for (const auto& sub : subdomains) {
        for (const ParticleId p : sub.transient_ids) {
            charts[p].push_back(sub.id);
        }
    }
    metric.offsets.assign(n + 1, 0);
    for (ParticleId p = 0; p < n; ++p) {
        metric.offsets[p + 1] = metric.offsets[p] + charts[p].size();
    }
    metric.entries.resize(metric.offsets.back());
    std::vector<Vec3> theta(metric.entries.size());
    for (ParticleId p = 0; p < n; ++p) {
        for (std::size_t c = 0; c < charts[p].size(); ++c) {
            const std::size_t k = metric.offsets[p] + c;
            const auto& sub = subdomains[static_cast<std::size_t>(charts[p][c])];
            metric.entries[k].chart = sub.id;
            const auto th = sub.theta_of(p);
            if (!th) {
                throw SetupError("mapping: particle " + std::to_string(p) + " missing coordinates in chart '" +
                                 sub.name + "'");
            }
            theta[k] = *th;
        }
    }

    std::vector<Accumulator> acc(metric.entries.size());
    auto accumulate = [&](ParticleId a, ParticleId b, int chart, const Vec3& grad_a) {
        const std::size_t ka = entry_index(metric, a, chart);
        const std::size_t kb = entry_index(metric, b, chart);
        const Vec3 grad_b = -grad_a;
        acc[ka].moment_X += particles.volume0(b) * (particles.X[b] - particles.X[a]) * grad_a.transpose();
        acc[ka].moment_theta += particles.volume0(b) * (theta[kb] - theta[ka]) * grad_a.transpose();
        ++acc[ka].count;
        acc[kb].moment_X += particles.volume0(a) * (particles.X[a] - particles.X[b]) * grad_b.transpose();
        acc[kb].moment_theta += particles.volume0(a) * (theta[ka] - theta[kb]) * grad_b.transpose();
        ++acc[kb].count;
    };
    for (const auto& pr : pairs.pairs) {
        accumulate(pr.a, pr.b, pr.owner, pr.grad_a);
    }
    for (const auto& link : pairs.chart_links) {
        accumulate(link.a, link.b, link.chart, link.grad_a);
    }

    for (ParticleId p = 0; p < n; ++p) {
        for (std::size_t k = metric.offsets[p]; k < metric.offsets[p + 1]; ++k) {
            auto& e = metric.entries[k];
            const auto& sub = subdomains[static_cast<std::size_t>(e.chart)];
            const double cond_theta = condition_number(acc[k].moment_theta);
            if (!(cond_theta <= max_condition)) {
                degenerate(p, sub, acc[k].count, "kernel moment matrix", cond_theta);
            }
            const double cond_X = condition_number(acc[k].moment_X);
            if (!(cond_X <= max_condition)) {
                degenerate(p, sub, acc[k].count, "coordinate transformation matrix", cond_X);
            }
            e.cspm = acc[k].moment_theta.inverse();
            e.dX_dTheta = acc[k].moment_X * e.cspm;
            e.dTheta_dX = e.dX_dTheta.inverse();
            e.jacobian_det = e.dX_dTheta.determinant();
            e.neighbors = acc[k].count;
            if (!(e.jacobian_det > 0.0)) {
                std::ostringstream msg;
                msg << "mapping: non-positive metric determinant " << e.jacobian_det << " at particle " << p
                    << " in chart '" << sub.name << "'";
                throw SetupError(msg.str());
            }
            e.generalized_volume = particles.volume0(p) / e.jacobian_det;
        }
    }

    metric.h_phys.resize(n);
    for (ParticleId p = 0; p < n; ++p) {
        const auto& e = metric.owner(p);
        Eigen::JacobiSVD<Mat3> svd(e.dX_dTheta);
        metric.h_phys[p] = subdomains[static_cast<std::size_t>(e.chart)].h * svd.singularValues()(2);
    }

    const std::size_t np = pairs.size();
    metric.gamma_a.resize(np);
    metric.gamma_b.resize(np);
    metric.volume_a.resize(np);
    metric.volume_b.resize(np);
    for (std::size_t k = 0; k < np; ++k) {
        const auto& pr = pairs.pairs[k];
        const auto* ea = metric.in_chart(pr.a, pr.owner);
        const auto* eb = metric.in_chart(pr.b, pr.owner);
        metric.gamma_a[k] = ea->dTheta_dX.transpose() * pr.grad_a;
        metric.gamma_b[k] = eb->dTheta_dX.transpose() * pr.grad_b();
        metric.volume_a[k] = ea->generalized_volume;
        metric.volume_b[k] = eb->generalized_volume;
    }
    return metric;
}

namespace {

void correct_one(Correction& corr, const ParticleSet& particles, const domain::PairTable& pairs,
                 const MetricField& metric, ParticleId a)
{
    Mat3 moment = Mat3::Zero();
    std::size_t active = 0;
    pairs.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
        if (!pr.active) {
            return;
        }
        const ParticleId b = pr.other(a);
        moment += metric.partner_volume(k, a, pr) * (particles.X[b] - particles.X[a]) *
                  metric.gamma_for(k, a, pr).transpose();
        ++active;
    });
    if (active == 0 || !(condition_number(moment) <= max_condition)) {
        corr.L[a] = Mat3::Identity();
        corr.valid[a] = 0;
        return;
    }
    corr.L[a] = moment.inverse();
    corr.valid[a] = 1;
}

} // namespace

Correction build_correction(const ParticleSet& particles, const domain::PairTable& pairs, const MetricField& metric)
{
    Correction corr;
    const std::size_t n = particles.size();
    corr.L.assign(n, Mat3::Identity());
    corr.valid.assign(n, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        correct_one(corr, particles, pairs, metric, static_cast<ParticleId>(i));
    }
    return corr;
}

void update_correction(Correction& corr, const ParticleSet& particles, const domain::PairTable& pairs,
                       const MetricField& metric, std::span<const ParticleId> which)
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(which.size()); ++i) {
        correct_one(corr, particles, pairs, metric, which[static_cast<std::size_t>(i)]);
    }
}

// ---------------------------------------------------------------------------

void FieldOperators::check(ParticleId a, std::size_t n) const
{
    if (a >= particles_.size()) {
        throw std::out_of_range("mapping: unknown particle id " + std::to_string(a));
    }
    if (n != particles_.size()) {
        throw std::invalid_argument("mapping: field size does not match particle count");
    }
}

Vec3 FieldOperators::grad_scalar(std::span<const double> field, ParticleId a) const
{
    check(a, field.size());
    Vec3 g = Vec3::Zero();
    pairs_.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
        if (!pr.active) {
            return;
        }
        const ParticleId b = pr.other(a);
        g += metric_.partner_volume(k, a, pr) * (field[b] - field[a]) *
             corr_.corrected(a, metric_.gamma_for(k, a, pr));
    });
    return g;
}

Mat3 FieldOperators::grad_vector(std::span<const Vec3> field, ParticleId a) const
{
    check(a, field.size());
    Mat3 g = Mat3::Zero();
    pairs_.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
        if (!pr.active) {
            return;
        }
        const ParticleId b = pr.other(a);
        g += metric_.partner_volume(k, a, pr) * (field[b] - field[a]) *
             corr_.corrected(a, metric_.gamma_for(k, a, pr)).transpose();
    });
    return g;
}

double FieldOperators::div_vector(std::span<const Vec3> field, ParticleId a) const
{
    return grad_vector(field, a).trace();
}

Vec3 FieldOperators::div_tensor(std::span<const Mat3> field, ParticleId a) const
{
    check(a, field.size());
    Vec3 d = Vec3::Zero();
    pairs_.for_each_pair_of(a, [&](std::size_t k, const domain::Pair& pr) {
        if (!pr.active) {
            return;
        }
        const ParticleId b = pr.other(a);
        const Vec3 g = corr_.corrected(a, metric_.gamma_for(k, a, pr));
        d += metric_.partner_volume(k, a, pr) * (field[b] - field[a]).transpose() * g;
    });
    return d;
}

double tensor_inner(const Mat3& A, const Mat3& B) { return (A.array() * B.array()).sum(); }

} // namespace gsph::mapping
