#include "gsph/particles.hpp"

namespace gsph {

ParticleId ParticleSet::add(const Vec3& X0, double mass, double density, int material_id)
{
    X.push_back(X0);
    m0.push_back(mass);
    rho0.push_back(density);
    material.push_back(material_id);
    owner.push_back(-1);
    x.push_back(X0);
    v.push_back(Vec3::Zero());
    accel.push_back(Vec3::Zero());
    rho.push_back(density);
    F.push_back(Mat3::Identity());
    F_dot.push_back(Mat3::Zero());
    J.push_back(1.0);
    sigma.push_back(Mat3::Zero());
    P.push_back(Mat3::Zero());
    plastic.emplace_back();
    broken_bonds.push_back(0);
    detached.push_back(0);
    return X.size() - 1;
}

namespace {

template <class T>
void apply(std::vector<T>& field, const std::vector<ParticleId>& order)
{
    std::vector<T> out;
    out.reserve(order.size());
    for (const ParticleId i : order) {
        out.push_back(field[i]);
    }
    field.swap(out);
}

} // namespace

void ParticleSet::permute(const std::vector<ParticleId>& order)
{
    apply(X, order);
    apply(m0, order);
    apply(rho0, order);
    apply(material, order);
    apply(owner, order);
    apply(x, order);
    apply(v, order);
    apply(accel, order);
    apply(rho, order);
    apply(F, order);
    apply(F_dot, order);
    apply(J, order);
    apply(sigma, order);
    apply(P, order);
    apply(plastic, order);
    apply(broken_bonds, order);
    apply(detached, order);
}

} // namespace gsph
