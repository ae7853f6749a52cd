#include "doctest.h"

#include "helpers.hpp"

#include "gsph/kernel.hpp"

using namespace gsph;
using namespace gsph::testing;

namespace {

std::vector<double> scalar_field(const ParticleSet& p, auto&& f)
{
    std::vector<double> out(p.size());
    for (ParticleId a = 0; a < p.size(); ++a) {
        out[a] = f(p.X[a]);
    }
    return out;
}

std::vector<Vec3> vector_field(const ParticleSet& p, auto&& f)
{
    std::vector<Vec3> out(p.size());
    for (ParticleId a = 0; a < p.size(); ++a) {
        out[a] = f(p.X[a]);
    }
    return out;
}

Geometry cube(int n = 8, double d = 0.1) { return Geometry(box(n, n, n, d), {single(1.2 * d)}); }

Geometry cylinder(int nr = 16, double s = 1.0)
{
    // r in [1, 3], phi in [-0.5625, 0.5625] so that a particle sits on phi = 0
    const double d = 2.0 / nr;
    const double half = (std::round(0.5625 / d) + 0.5) * d;
    auto p = io::generate_lattice(lattice(Vec3(1.0, -s * half, 0.0), Vec3(3.0, s * half, 5 * d), d),
                                  Chart::cylindrical(Vec3::Zero(), Vec3::UnitZ(), s), 1000.0);
    return Geometry(std::move(p), {single(1.2 * d, Chart::cylindrical(Vec3::Zero(), Vec3::UnitZ(), s))});
}

Mat3 sample_matrix()
{
    Mat3 A;
    A << 0.3, -0.2, 0.1, 0.05, 0.4, -0.3, 0.2, 0.1, -0.15;
    return A;
}

} // namespace

TEST_CASE("identity chart metric is the identity at every particle")
{
    const auto g = cube();
    for (ParticleId a = 0; a < g.particles.size(); ++a) {
        const auto& e = g.metric.owner(a);
        CHECK(max_abs(e.dX_dTheta - Mat3::Identity()) < 1e-8);
        CHECK(max_abs(e.dX_dTheta * e.dTheta_dX - Mat3::Identity()) < 1e-10);
        CHECK(e.jacobian_det > 0.0);
        CHECK(e.generalized_volume == doctest::Approx(g.particles.volume0(a)).epsilon(1e-8));
    }
}

TEST_CASE("cylindrical metric matches the analytic Jacobian")
{
    const auto g = cylinder(16);
    const Chart chart = g.subdomains[0].chart;
    // particle closest to r = 2, phi = 0, not on a z face
    ParticleId best = 0;
    double dist = 1e9;
    for (ParticleId a = 0; a < g.particles.size(); ++a) {
        const Vec3 c = chart.cylindrical_coords(g.particles.X[a]);
        const double dd = std::hypot(c(0) - 2.0, c(1)) + std::abs(c(2) - 2.5 * 0.125);
        if (dd < dist) {
            dist = dd;
            best = a;
        }
    }
    const Vec3 theta = *g.subdomains[0].theta_of(best);
    CHECK(theta(1) == doctest::Approx(0.0));
    const Mat3 exact = chart.jacobian(theta);
    const Mat3 disc = g.metric.owner(best).dX_dTheta;
    CHECK(max_abs(disc - exact) / max_abs(exact) < 0.02);
    CHECK(exact(1, 1) == doctest::Approx(theta(0)));

    // metric inverse consistency everywhere
    for (ParticleId a = 0; a < g.particles.size(); ++a) {
        const auto& e = g.metric.owner(a);
        CHECK(max_abs(e.dX_dTheta * e.dTheta_dX - Mat3::Identity()) < 1e-10);
        CHECK(e.jacobian_det > 0.0);
    }
}

TEST_CASE("collinear neighborhoods are rejected")
{
    ParticleSet p;
    for (int i = 0; i < 4; ++i) {
        p.add(Vec3(0.1 * i, 0, 0), 1.0, 1000.0);
    }
    CHECK_THROWS_WITH_AS(Geometry(std::move(p), {single(0.12)}), doctest::Contains("neighbors"), SetupError);
}

TEST_CASE("theta-space CSPM factor on an interior lattice")
{
    // The discrete first moment of the cubic spline at h = 1.2 spacing is an
    // isotropic multiple of I, though not exactly I; the physical correction
    // absorbs it.
    const auto g = cube(9);
    const Vec3 lo = Vec3::Zero();
    const Vec3 hi = Vec3::Constant(0.9);
    for (ParticleId a = 0; a < g.particles.size(); ++a) {
        if (!interior(g.particles, a, lo, hi, 0.24)) {
            continue;
        }
        const Mat3 c = g.metric.owner(a).cspm;
        const double s = c(0, 0);
        CHECK(max_abs(c - s * Mat3::Identity()) < 1e-8 * s);
        CHECK(std::abs(s - 1.0) < 0.05);
        CHECK(max_abs(g.corr.L[a] - c) < 1e-10);
    }
}

TEST_CASE("tensor inner product")
{
    CHECK(mapping::tensor_inner(Mat3::Identity(), Mat3::Identity()) == 3.0);
    CHECK(mapping::tensor_inner(sample_matrix(), Mat3::Zero()) == 0.0);
    Mat3 A = Mat3::Zero();
    A(0, 0) = 1;
    A(0, 1) = 2;
    A(1, 0) = 3;
    A(1, 1) = 4;
    CHECK(mapping::tensor_inner(A, A) == 30.0);
}

TEST_CASE("gradient operators are exact for affine fields on the identity chart")
{
    const auto g = cube();
    const auto ops = g.ops();
    const auto& p = g.particles;
    const Mat3 A = sample_matrix();
    const auto constant = scalar_field(p, [](const Vec3&) { return 4.2; });
    const auto linear = scalar_field(p, [](const Vec3& X) { return X(0); });
    const auto affine = scalar_field(p, [](const Vec3& X) { return 2.0 - X(0) + 3.0 * X(1) + 0.5 * X(2); });
    const auto translation = vector_field(p, [](const Vec3&) { return Vec3(1, -2, 3); });
    const auto Ax = vector_field(p, [&](const Vec3& X) { return Vec3(A * X + Vec3(1, 2, 3)); });
    const auto rotation = vector_field(p, [](const Vec3& X) { return Vec3(-X(1), X(0), 0); });
    const auto position = vector_field(p, [](const Vec3& X) { return X; });
    const std::vector<Mat3> const_tensor(p.size(), A);

    for (ParticleId a = 0; a < p.size(); ++a) {
        CHECK(ops.grad_scalar(constant, a).norm() < 1e-12);
        CHECK((ops.grad_scalar(linear, a) - Vec3(1, 0, 0)).norm() < 1e-8);
        CHECK((ops.grad_scalar(affine, a) - Vec3(-1, 3, 0.5)).norm() < 1e-8);
        CHECK(max_abs(ops.grad_vector(translation, a)) < 1e-12);
        CHECK(max_abs(ops.grad_vector(Ax, a) - A) < 1e-8);
        CHECK(std::abs(ops.div_vector(rotation, a)) < 1e-8);
        CHECK(std::abs(ops.div_vector(position, a) - 3.0) < 1e-8);
        CHECK(ops.div_tensor(const_tensor, a).norm() < 1e-12);
    }
}

TEST_CASE("tensor divergence of an affine tensor field")
{
    const auto g = cube(6);
    const auto ops = g.ops();
    const auto& p = g.particles;
    // Psi_{beta gamma} = X_beta * c_gamma  ->  div = 3 c (sum over beta of dX_beta/dX_beta)
    const Vec3 c(1.0, -2.0, 0.5);
    std::vector<Mat3> psi(p.size());
    for (ParticleId a = 0; a < p.size(); ++a) {
        psi[a] = p.X[a] * c.transpose();
    }
    for (ParticleId a = 0; a < p.size(); ++a) {
        CHECK((ops.div_tensor(psi, a) - 3.0 * c).norm() < 1e-8);
    }
}

TEST_CASE("operators on the cylindrical chart")
{
    const auto g = cylinder(16);
    const auto ops = g.ops();
    const auto& p = g.particles;
    const double d = 0.125;
    const Mat3 A = sample_matrix();
    const auto Ax = vector_field(p, [&](const Vec3& X) { return Vec3(A * X); });
    const auto radius = scalar_field(p, [](const Vec3& X) { return std::hypot(X(0), X(1)); });
    double worst_interior = 0.0;
    double worst_edge = 0.0;
    for (ParticleId a = 0; a < p.size(); ++a) {
        // affine fields stay exact through the curved chart
        CHECK(max_abs(ops.grad_vector(Ax, a) - A) < 1e-8);
        const Vec3 er = Vec3(p.X[a](0), p.X[a](1), 0).normalized();
        const double err = (ops.grad_scalar(radius, a) - er).norm();
        const Vec3 th = *g.subdomains[0].theta_of(a);
        const bool inside = th(0) > 1.0 + 2.4 * d && th(0) < 3.0 - 2.4 * d && std::abs(th(1)) < 0.5625 - 2.4 * d &&
                            th(2) > 2.4 * d && th(2) < 5 * d - 2.4 * d;
        double& worst = inside ? worst_interior : worst_edge;
        worst = std::max(worst, err);
    }
    // second-order accurate where the stencil is complete, first order at the edges
    CHECK(worst_interior < 0.02);
    CHECK(worst_edge < 0.1);
}

TEST_CASE("identity chart operators equal a plain SPH evaluation")
{
    // Plain SPH: kernel gradients in X, volumes m/rho0, CSPM in X.
    auto g = cube(6);
    const auto& p = g.particles;
    const double h = 0.12;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> f(p.size());
    for (auto& v : f) {
        v = u(rng);
    }
    const auto ops = g.ops();
    for (ParticleId a = 0; a < p.size(); ++a) {
        Mat3 moment = Mat3::Zero();
        Vec3 raw = Vec3::Zero();
        for (ParticleId b = 0; b < p.size(); ++b) {
            if (b == a) {
                continue;
            }
            const Vec3 w = kernel::kernel_gradient(p.X[a] - p.X[b], h);
            if (w.isZero(0.0)) {
                continue;
            }
            moment += p.volume0(b) * (p.X[b] - p.X[a]) * w.transpose();
            raw += p.volume0(b) * (f[b] - f[a]) * w;
        }
        const Vec3 plain = moment.inverse().transpose() * raw;
        CHECK((ops.grad_scalar(f, a) - plain).norm() <= 1e-12 * std::max(1.0, plain.norm()));
    }
}

TEST_CASE("gradient through the cylindrical chart agrees with the identity chart on the same cloud")
{
    const auto cyl = cylinder(16);
    // same physical particles, identity chart with h covering the widest spacing
    const double widest = 3.0 * 0.125;
    const Geometry flat(cyl.particles, {single(1.2 * widest)});
    auto f = [](const Vec3& X) { return X(0) + 0.02 * X(1) * X(1) + 0.01 * X(0) * X(0); };
    const auto field = scalar_field(cyl.particles, f);
    const auto c_ops = cyl.ops();
    const auto f_ops = flat.ops();
    double worst = 0.0;
    int compared = 0;
    for (ParticleId a = 0; a < cyl.particles.size(); ++a) {
        const Vec3 X = cyl.particles.X[a];
        const double r = std::hypot(X(0), X(1));
        const double phi = std::atan2(X(1), X(0));
        if (r < 1.6 || r > 2.4 || std::abs(phi) > 0.25) {
            continue;
        }
        const Vec3 exact(1.0 + 0.02 * X(0), 0.04 * X(1), 0.0);
        const Vec3 gc = c_ops.grad_scalar(field, a);
        const Vec3 gf = f_ops.grad_scalar(field, a);
        worst = std::max(worst, (gc - gf).norm() / exact.norm());
        CHECK((gc - exact).norm() / exact.norm() < 0.02);
        ++compared;
    }
    CHECK(compared > 20);
    CHECK(worst < 0.02);
}

TEST_CASE("field operators reject bad input")
{
    const auto g = cube(4);
    const auto ops = g.ops();
    std::vector<double> f(g.particles.size(), 0.0);
    CHECK_THROWS_AS(ops.grad_scalar(f, g.particles.size()), std::out_of_range);
    std::vector<double> short_field(3, 0.0);
    CHECK_THROWS_AS(ops.grad_scalar(short_field, 0), std::invalid_argument);
}

TEST_CASE("physical correction reproduces affine fields after bonds break")
{
    auto g = cube(6);
    // break a few bonds of particle 100 and refresh its correction
    std::vector<ParticleId> touched;
    int broken = 0;
    g.pairs.for_each_pair_of(100, [&](std::size_t k, const domain::Pair& pr) {
        if (broken < 10 && pr.other(100) % 3 == 0) {
            g.pairs.deactivate_bond(k);
            touched.push_back(pr.a);
            touched.push_back(pr.b);
            ++broken;
        }
    });
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    mapping::update_correction(g.corr, g.particles, g.pairs, g.metric, touched);
    const Mat3 A = sample_matrix();
    const auto Ax = vector_field(g.particles, [&](const Vec3& X) { return Vec3(A * X); });
    for (const ParticleId a : touched) {
        CHECK(max_abs(g.ops().grad_vector(Ax, a) - A) < 1e-8);
    }
}
