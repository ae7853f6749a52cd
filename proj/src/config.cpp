#include "gsph/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gsph::config {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& errors)
{
    std::ostringstream out;
    out << errors.size() << " configuration error(s):";
    for (const auto& e : errors) {
        out << "\n  " << e;
    }
    return out.str();
}

/// Walks a JSON document collecting every schema violation with its key path.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

    bool object(const json& j, const std::string& path)
    {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        return true;
    }

    void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
    {
        if (!j.is_object()) {
            return;
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, _] : j.items()) {
            if (ok.count(key) == 0) {
                fail(join_path(path, key), "unknown key");
            }
        }
    }

    static std::string join_path(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }

    std::optional<double> number(const json& j, const std::string& path, const char* key, bool required)
    {
        const auto p = join_path(path, key);
        if (!j.contains(key)) {
            if (required) {
                fail(p, "required number is missing");
            }
            return std::nullopt;
        }
        const auto& v = j.at(key);
        if (!v.is_number()) {
            fail(p, "expected a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(p, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    double positive(const json& j, const std::string& path, const char* key, bool required, double fallback)
    {
        const auto v = number(j, path, key, required);
        if (!v) {
            return fallback;
        }
        if (!(*v > 0.0)) {
            fail(join_path(path, key), "must be positive");
        }
        return *v;
    }

    double non_negative(const json& j, const std::string& path, const char* key, double fallback)
    {
        const auto v = number(j, path, key, false);
        if (!v) {
            return fallback;
        }
        if (*v < 0.0) {
            fail(join_path(path, key), "must not be negative");
        }
        return *v;
    }

    std::optional<long> integer(const json& j, const std::string& path, const char* key, bool required)
    {
        const auto p = join_path(path, key);
        if (!j.contains(key)) {
            if (required) {
                fail(p, "required integer is missing");
            }
            return std::nullopt;
        }
        const auto& v = j.at(key);
        if (!v.is_number_integer()) {
            fail(p, "expected an integer");
            return std::nullopt;
        }
        return v.get<long>();
    }

    std::optional<std::string> string(const json& j, const std::string& path, const char* key, bool required)
    {
        const auto p = join_path(path, key);
        if (!j.contains(key)) {
            if (required) {
                fail(p, "required string is missing");
            }
            return std::nullopt;
        }
        if (!j.at(key).is_string()) {
            fail(p, "expected a string");
            return std::nullopt;
        }
        return j.at(key).get<std::string>();
    }

    std::optional<bool> boolean(const json& j, const std::string& path, const char* key)
    {
        if (!j.contains(key)) {
            return std::nullopt;
        }
        if (!j.at(key).is_boolean()) {
            fail(join_path(path, key), "expected true or false");
            return std::nullopt;
        }
        return j.at(key).get<bool>();
    }

    std::optional<Vec3> vec3(const json& j, const std::string& path, const char* key, bool required)
    {
        const auto p = join_path(path, key);
        if (!j.contains(key)) {
            if (required) {
                fail(p, "required 3-vector is missing");
            }
            return std::nullopt;
        }
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
            fail(p, "expected an array of 3 numbers");
            return std::nullopt;
        }
        Vec3 out(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
        if (!out.allFinite()) {
            fail(p, "must be finite");
            return std::nullopt;
        }
        return out;
    }

    std::optional<Mat3> mat3(const json& j, const std::string& path, const char* key)
    {
        const auto p = join_path(path, key);
        if (!j.contains(key)) {
            return std::nullopt;
        }
        const auto& v = j.at(key);
        bool ok = v.is_array() && v.size() == 3;
        Mat3 m = Mat3::Zero();
        for (std::size_t r = 0; ok && r < 3; ++r) {
            ok = v[r].is_array() && v[r].size() == 3;
            for (std::size_t c = 0; ok && c < 3; ++c) {
                ok = v[r][c].is_number();
                if (ok) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
                }
            }
        }
        if (!ok || !m.allFinite()) {
            fail(p, "expected a 3x3 array of numbers");
            return std::nullopt;
        }
        return m;
    }

    std::optional<domain::Region> region(const json& j, const std::string& path)
    {
        if (!object(j, path)) {
            return std::nullopt;
        }
        const auto type = string(j, path, "type", true);
        if (!type) {
            return std::nullopt;
        }
        domain::Region r;
        if (*type == "all") {
            keys(j, path, {"type"});
            r.kind = domain::Region::Kind::all;
        } else if (*type == "box") {
            keys(j, path, {"type", "lo", "hi"});
            r.kind = domain::Region::Kind::box;
            r.lo = vec3(j, path, "lo", true).value_or(Vec3::Zero());
            r.hi = vec3(j, path, "hi", true).value_or(Vec3::Zero());
            if ((r.hi.array() < r.lo.array()).any()) {
                fail(path, "box hi must not be below lo");
            }
        } else if (*type == "annulus") {
            keys(j, path, {"type", "origin", "axis", "r_min", "r_max", "phi_min", "phi_max", "z_min", "z_max"});
            r.kind = domain::Region::Kind::annulus;
            r.origin = vec3(j, path, "origin", false).value_or(Vec3::Zero());
            r.axis = vec3(j, path, "axis", false).value_or(Vec3::UnitZ());
            if (!(r.axis.norm() > 0.0)) {
                fail(join_path(path, "axis"), "must be non-zero");
                r.axis = Vec3::UnitZ();
            }
            r.r_min = non_negative(j, path, "r_min", 0.0);
            r.r_max = positive(j, path, "r_max", true, 1.0);
            if (r.r_max < r.r_min) {
                fail(path, "r_max must not be below r_min");
            }
            r.phi_min = number(j, path, "phi_min", false);
            r.phi_max = number(j, path, "phi_max", false);
            r.z_min = number(j, path, "z_min", false);
            r.z_max = number(j, path, "z_max", false);
        } else if (*type == "ids") {
            keys(j, path, {"type", "ids"});
            r.kind = domain::Region::Kind::ids;
            if (!j.contains("ids") || !j.at("ids").is_array()) {
                fail(join_path(path, "ids"), "expected an array of particle ids");
            } else {
                for (const auto& v : j.at("ids")) {
                    if (!v.is_number_unsigned()) {
                        fail(join_path(path, "ids"), "ids must be non-negative integers");
                        break;
                    }
                    r.ids.insert(v.get<ParticleId>());
                }
            }
        } else {
            fail(join_path(path, "type"), "unknown region type '" + *type + "' (all, box, annulus, ids)");
            return std::nullopt;
        }
        return r;
    }
};

material::MaterialModel read_material(Reader& rd, const json& j, const std::string& path, const std::string& name)
{
    material::MaterialModel m;
    m.name = name;
    if (!rd.object(j, path)) {
        return m;
    }
    rd.keys(j, path, {"model", "E", "nu", "rho0", "T0", "johnson_cook", "damage", "rankine"});
    const auto model = rd.string(j, path, "model", true).value_or("elastic");
    const double E = rd.positive(j, path, "E", true, 1.0);
    const auto nu = rd.number(j, path, "nu", true);
    if (nu && !(*nu > 0.0 && *nu < 0.5)) {
        rd.fail(Reader::join_path(path, "nu"), "must lie in (0, 0.5)");
    }
    const double rho0 = rd.positive(j, path, "rho0", true, 1.0);
    const double nu_v = (nu && *nu > 0.0 && *nu < 0.5) ? *nu : 0.25;
    m.elastic = material::ElasticParams::make(E > 0.0 ? E : 1.0, nu_v, rho0 > 0.0 ? rho0 : 1.0);

    auto read_jc = [&](bool required) {
        material::JohnsonCookParams jc;
        const auto p = Reader::join_path(path, "johnson_cook");
        if (!j.contains("johnson_cook")) {
            if (required) {
                rd.fail(p, "required for model '" + model + "'");
            }
            return jc;
        }
        const auto& o = j.at("johnson_cook");
        if (!rd.object(o, p)) {
            return jc;
        }
        rd.keys(o, p, {"A", "B", "C", "n", "m", "eps0_dot", "T_r", "T_m", "Cp", "chi"});
        jc.A = rd.non_negative(o, p, "A", 0.0);
        if (!o.contains("A")) {
            rd.fail(Reader::join_path(p, "A"), "required number is missing");
        }
        jc.B = rd.non_negative(o, p, "B", 0.0);
        jc.C = rd.non_negative(o, p, "C", 0.0);
        jc.n = rd.positive(o, p, "n", false, 1.0);
        jc.m = rd.positive(o, p, "m", false, 1.0);
        jc.eps0_dot = rd.positive(o, p, "eps0_dot", false, 1.0);
        jc.T_r = rd.positive(o, p, "T_r", false, 293.0);
        jc.T_m = rd.positive(o, p, "T_m", false, 1800.0);
        jc.Cp = rd.positive(o, p, "Cp", false, 452.0);
        jc.chi = rd.non_negative(o, p, "chi", 0.9);
        if (!(jc.T_m > jc.T_r)) {
            rd.fail(p, "T_m must exceed T_r");
        }
        return jc;
    };

    if (model == "elastic") {
        m.law = material::Hypoelastic{};
        if (j.contains("johnson_cook")) {
            rd.fail(Reader::join_path(path, "johnson_cook"), "not used by model 'elastic'");
        }
    } else if (model == "jc_plastic") {
        m.law = material::JCPlastic{read_jc(true)};
    } else if (model == "jc_damage") {
        material::JCDamage d{read_jc(true), {}};
        if (j.contains("damage")) {
            const auto p = Reader::join_path(path, "damage");
            const auto& o = j.at("damage");
            if (rd.object(o, p)) {
                rd.keys(o, p, {"D1", "D2", "D3", "D4", "D5"});
                d.damage.D1 = rd.number(o, p, "D1", false).value_or(d.damage.D1);
                d.damage.D2 = rd.number(o, p, "D2", false).value_or(d.damage.D2);
                d.damage.D3 = rd.number(o, p, "D3", false).value_or(d.damage.D3);
                d.damage.D4 = rd.number(o, p, "D4", false).value_or(d.damage.D4);
                d.damage.D5 = rd.number(o, p, "D5", false).value_or(d.damage.D5);
            }
        }
        m.law = d;
    } else {
        rd.fail(Reader::join_path(path, "model"), "unknown model '" + model + "' (elastic, jc_plastic, jc_damage)");
    }
    if (model != "jc_damage" && j.contains("damage")) {
        rd.fail(Reader::join_path(path, "damage"), "only used by model 'jc_damage'");
    }
    if (j.contains("rankine")) {
        const auto p = Reader::join_path(path, "rankine");
        const auto& o = j.at("rankine");
        if (rd.object(o, p)) {
            rd.keys(o, p, {"eps_max"});
            m.rankine = material::RankineParams{rd.positive(o, p, "eps_max", false, 0.03)};
        }
    }
    if (const auto* jc = m.johnson_cook()) {
        m.T0 = jc->T_r;
    }
    m.T0 = rd.positive(j, path, "T0", false, m.T0);
    return m;
}

ChartSpec read_chart(Reader& rd, const json& j, const std::string& path)
{
    ChartSpec c;
    if (!rd.object(j, path)) {
        return c;
    }
    const auto type = rd.string(j, path, "type", true).value_or("identity");
    if (type == "identity") {
        rd.keys(j, path, {"type"});
        c.kind = ChartKind::identity;
    } else if (type == "cylindrical") {
        rd.keys(j, path, {"type", "origin", "axis", "angle_scale"});
        c.kind = ChartKind::cylindrical;
        c.origin = rd.vec3(j, path, "origin", false).value_or(Vec3::Zero());
        c.axis = rd.vec3(j, path, "axis", false).value_or(Vec3::UnitZ());
        if (!(c.axis.norm() > 0.0)) {
            rd.fail(Reader::join_path(path, "axis"), "must be non-zero");
            c.axis = Vec3::UnitZ();
        }
        c.angle_scale = rd.positive(j, path, "angle_scale", false, 1.0);
    } else if (type == "table") {
        rd.keys(j, path, {"type", "path"});
        c.kind = ChartKind::per_particle_table;
        c.table_path = rd.string(j, path, "path", true).value_or("");
    } else {
        rd.fail(Reader::join_path(path, "type"), "unknown chart type '" + type + "' (identity, cylindrical, table)");
    }
    return c;
}

std::optional<LatticeSpec> read_lattice(Reader& rd, const json& j, const std::string& path)
{
    if (!rd.object(j, path)) {
        return std::nullopt;
    }
    rd.keys(j, path, {"lo", "hi", "spacing", "material", "clip"});
    LatticeSpec l;
    l.lo = rd.vec3(j, path, "lo", true).value_or(Vec3::Zero());
    l.hi = rd.vec3(j, path, "hi", true).value_or(Vec3::Zero());
    l.spacing = rd.positive(j, path, "spacing", true, 1.0);
    l.material = rd.string(j, path, "material", true).value_or("");
    if ((l.hi.array() <= l.lo.array()).any()) {
        rd.fail(path, "lattice extent must be positive along every axis (hi > lo)");
    }
    if (j.contains("clip")) {
        l.clip = rd.region(j.at("clip"), Reader::join_path(path, "clip"));
    }
    return l;
}

bool regions_overlap(const domain::Region& a, const domain::Region& b)
{
    using K = domain::Region::Kind;
    if (a.kind == K::box && b.kind == K::box) {
        return (a.lo.array() < b.hi.array()).all() && (b.lo.array() < a.hi.array()).all();
    }
    if (a.kind == K::annulus && b.kind == K::annulus && a.origin == b.origin && a.axis == b.axis) {
        const bool r = a.r_min < b.r_max && b.r_min < a.r_max;
        const bool phi = !(a.phi_max && b.phi_min && *a.phi_max <= *b.phi_min) &&
                         !(b.phi_max && a.phi_min && *b.phi_max <= *a.phi_min);
        const bool z = !(a.z_max && b.z_min && *a.z_max <= *b.z_min) && !(b.z_max && a.z_min && *b.z_max <= *a.z_min);
        return r && phi && z;
    }
    if (a.kind == K::all && b.kind == K::all) {
        return true;
    }
    // other combinations are checked per particle during setup
    return false;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : std::runtime_error(join(errors)), errors_(std::move(errors))
{
}

Chart ChartSpec::build() const
{
    switch (kind) {
    case ChartKind::identity:
        return Chart::identity();
    case ChartKind::cylindrical:
        return Chart::cylindrical(origin, axis, angle_scale);
    case ChartKind::per_particle_table:
        return load_table_chart(table_path);
    }
    return Chart::identity();
}

int SimConfig::material_index(const std::string& name) const
{
    for (std::size_t i = 0; i < materials.size(); ++i) {
        if (materials[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

domain::Region parse_region(const json& j)
{
    Reader rd;
    auto r = rd.region(j, "region");
    if (!rd.errors.empty() || !r) {
        throw ConfigError(rd.errors);
    }
    return *r;
}

SimConfig parse_config(const json& doc)
{
    Reader rd;
    SimConfig cfg;
    if (!rd.object(doc, "<root>")) {
        throw ConfigError(rd.errors);
    }
    rd.keys(doc, "", {"materials", "subdomains", "particles", "boundary_conditions", "relaxation", "integrator",
                     "output"});

    // materials
    if (!doc.contains("materials")) {
        rd.fail("materials", "at least one material block is required");
    } else if (rd.object(doc.at("materials"), "materials")) {
        if (doc.at("materials").empty()) {
            rd.fail("materials", "at least one material block is required");
        }
        for (const auto& [name, block] : doc.at("materials").items()) {
            cfg.materials.push_back(read_material(rd, block, "materials." + name, name));
        }
    }

    // subdomains
    if (!doc.contains("subdomains") || !doc.at("subdomains").is_array() || doc.at("subdomains").empty()) {
        rd.fail("subdomains", "expected a non-empty array of subdomain blocks");
    } else {
        std::set<std::string> names;
        std::set<long> ranks;
        const auto& arr = doc.at("subdomains");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = "subdomains[" + std::to_string(i) + "]";
            const auto& j = arr[i];
            if (!rd.object(j, path)) {
                continue;
            }
            rd.keys(j, path, {"name", "rank", "chart", "region", "h", "h_factor", "overlap_width", "lattice"});
            SubdomainConfig s;
            s.name = rd.string(j, path, "name", true).value_or("subdomain" + std::to_string(i));
            if (!names.insert(s.name).second) {
                rd.fail(Reader::join_path(path, "name"), "duplicate subdomain name '" + s.name + "'");
            }
            const auto rank = rd.integer(j, path, "rank", false).value_or(static_cast<long>(i));
            if (!ranks.insert(rank).second) {
                rd.fail(Reader::join_path(path, "rank"), "duplicate precedence rank " + std::to_string(rank));
            }
            s.rank = static_cast<int>(rank);
            if (j.contains("chart")) {
                s.chart = read_chart(rd, j.at("chart"), Reader::join_path(path, "chart"));
            }
            if (j.contains("region")) {
                s.region = rd.region(j.at("region"), Reader::join_path(path, "region"));
            }
            if (j.contains("h")) {
                s.h = rd.positive(j, path, "h", true, 1.0);
            }
            s.h_factor = rd.positive(j, path, "h_factor", false, 1.2);
            s.overlap_width = rd.non_negative(j, path, "overlap_width", 0.0);
            if (j.contains("lattice")) {
                s.lattice = read_lattice(rd, j.at("lattice"), Reader::join_path(path, "lattice"));
                if (s.lattice && cfg.material_index(s.lattice->material) < 0 && !s.lattice->material.empty()) {
                    rd.fail(Reader::join_path(path, "lattice.material"),
                            "unknown material '" + s.lattice->material + "'");
                }
                if (s.lattice && s.chart.kind == ChartKind::per_particle_table) {
                    rd.fail(Reader::join_path(path, "lattice"), "table charts are not invertible; load particles from CSV");
                }
            }
            if (!s.h && !s.lattice) {
                rd.fail(path, "needs either 'h' or a 'lattice' to derive h from");
            }
            if (!s.region && !s.lattice) {
                rd.fail(path, "needs a 'region' when it does not generate its own lattice");
            }
            cfg.subdomains.push_back(std::move(s));
        }
        // regions that overlap geometrically need a declared band
        for (std::size_t a = 0; a < cfg.subdomains.size(); ++a) {
            for (std::size_t b = a + 1; b < cfg.subdomains.size(); ++b) {
                const auto& A = cfg.subdomains[a];
                const auto& B = cfg.subdomains[b];
                if (A.region && B.region && regions_overlap(*A.region, *B.region) && !(A.overlap_width > 0.0) &&
                    !(B.overlap_width > 0.0)) {
                    rd.fail("subdomains", "overlapping subdomain regions '" + A.name + "' and '" + B.name +
                                              "' without declared overlap band");
                }
            }
        }
    }

    // particle CSV
    if (doc.contains("particles")) {
        const auto& j = doc.at("particles");
        if (rd.object(j, "particles")) {
            rd.keys(j, "particles", {"csv", "material"});
            ParticleCsvSpec p;
            p.path = rd.string(j, "particles", "csv", true).value_or("");
            p.material = rd.string(j, "particles", "material", false).value_or("");
            if (!p.material.empty() && cfg.material_index(p.material) < 0) {
                rd.fail("particles.material", "unknown material '" + p.material + "'");
            }
            cfg.particle_csv = p;
        }
    }
    bool any_lattice = false;
    for (const auto& s : cfg.subdomains) {
        any_lattice = any_lattice || s.lattice.has_value();
    }
    if (!any_lattice && !cfg.particle_csv && doc.contains("subdomains")) {
        rd.fail("particles", "no particle source: give a subdomain lattice or particles.csv");
    }

    // boundary conditions
    if (doc.contains("boundary_conditions")) {
        const auto& bc = doc.at("boundary_conditions");
        const std::string bpath = "boundary_conditions";
        if (rd.object(bc, bpath)) {
            rd.keys(bc, bpath, {"fixed_velocity", "initial_velocity", "body_force"});
            auto each = [&](const char* key, auto&& fn) {
                if (!bc.contains(key)) {
                    return;
                }
                const auto& arr = bc.at(key);
                const auto p = Reader::join_path(bpath, key);
                if (!arr.is_array()) {
                    rd.fail(p, "expected an array");
                    return;
                }
                for (std::size_t i = 0; i < arr.size(); ++i) {
                    const auto ip = p + "[" + std::to_string(i) + "]";
                    if (rd.object(arr[i], ip)) {
                        fn(arr[i], ip);
                    }
                }
            };
            auto region_of = [&](const json& j, const std::string& p) {
                if (!j.contains("region")) {
                    rd.fail(Reader::join_path(p, "region"), "required region is missing");
                    return domain::Region::everything();
                }
                return rd.region(j.at("region"), Reader::join_path(p, "region")).value_or(domain::Region::everything());
            };
            each("fixed_velocity", [&](const json& j, const std::string& p) {
                rd.keys(j, p, {"region", "velocity", "components"});
                FixedVelocity f;
                f.region = region_of(j, p);
                f.velocity = rd.vec3(j, p, "velocity", false).value_or(Vec3::Zero());
                if (j.contains("components")) {
                    const auto& c = j.at("components");
                    if (!c.is_array() || c.size() != 3 || !c[0].is_boolean() || !c[1].is_boolean() ||
                        !c[2].is_boolean()) {
                        rd.fail(Reader::join_path(p, "components"), "expected an array of 3 booleans");
                    } else {
                        f.components = {c[0].get<bool>(), c[1].get<bool>(), c[2].get<bool>()};
                    }
                }
                cfg.fixed_velocity.push_back(f);
            });
            each("initial_velocity", [&](const json& j, const std::string& p) {
                rd.keys(j, p, {"region", "velocity", "gradient", "origin"});
                InitialVelocity f;
                f.region = region_of(j, p);
                f.velocity = rd.vec3(j, p, "velocity", false).value_or(Vec3::Zero());
                f.gradient = rd.mat3(j, p, "gradient").value_or(Mat3::Zero());
                f.origin = rd.vec3(j, p, "origin", false).value_or(Vec3::Zero());
                cfg.initial_velocity.push_back(f);
            });
            each("body_force", [&](const json& j, const std::string& p) {
                rd.keys(j, p, {"region", "kind", "value", "omega2", "origin", "axis", "ramp_time"});
                BodyForce f;
                f.region = j.contains("region") ? region_of(j, p) : domain::Region::everything();
                const auto kind = rd.string(j, p, "kind", false).value_or("uniform");
                if (kind == "uniform") {
                    f.kind = BodyForce::Kind::uniform;
                    f.value = rd.vec3(j, p, "value", true).value_or(Vec3::Zero());
                } else if (kind == "centrifugal") {
                    f.kind = BodyForce::Kind::centrifugal;
                    f.omega2 = rd.number(j, p, "omega2", true).value_or(0.0);
                    f.origin = rd.vec3(j, p, "origin", false).value_or(Vec3::Zero());
                    f.axis = rd.vec3(j, p, "axis", false).value_or(Vec3::UnitZ());
                    if (!(f.axis.norm() > 0.0)) {
                        rd.fail(Reader::join_path(p, "axis"), "must be non-zero");
                        f.axis = Vec3::UnitZ();
                    }
                } else {
                    rd.fail(Reader::join_path(p, "kind"), "unknown body force kind '" + kind + "' (uniform, centrifugal)");
                }
                f.ramp_time = rd.non_negative(j, p, "ramp_time", 0.0);
                cfg.body_force.push_back(f);
            });
        }
    }

    // reference relaxation
    if (doc.contains("relaxation")) {
        const auto& j = doc.at("relaxation");
        const std::string p = "relaxation";
        if (rd.object(j, p)) {
            rd.keys(j, p, {"region", "iterations", "step", "components"});
            Relaxation r;
            if (!j.contains("region")) {
                rd.fail(Reader::join_path(p, "region"), "required region is missing");
            } else {
                r.region = rd.region(j.at("region"), Reader::join_path(p, "region")).value_or(domain::Region::everything());
            }
            r.iterations = rd.integer(j, p, "iterations", false).value_or(200);
            if (r.iterations < 0) {
                rd.fail(Reader::join_path(p, "iterations"), "must not be negative");
            }
            r.step = rd.positive(j, p, "step", false, 0.1);
            if (r.step > 0.5) {
                rd.fail(Reader::join_path(p, "step"), "must not exceed 0.5");
            }
            if (j.contains("components")) {
                const auto& c = j.at("components");
                if (!c.is_array() || c.size() != 3 || !c[0].is_boolean() || !c[1].is_boolean() ||
                    !c[2].is_boolean()) {
                    rd.fail(Reader::join_path(p, "components"), "expected an array of 3 booleans");
                } else {
                    r.components = {c[0].get<bool>(), c[1].get<bool>(), c[2].get<bool>()};
                }
            }
            cfg.relaxation = r;
        }
    }

    // integrator
    if (!doc.contains("integrator")) {
        rd.fail("integrator", "required block is missing");
    } else {
        const auto& j = doc.at("integrator");
        const std::string p = "integrator";
        if (rd.object(j, p)) {
            rd.keys(j, p, {"dt", "cfl", "n_end", "output_every", "beta1", "beta2", "symmetric_viscosity",
                           "corrected_momentum"});
            auto& in = cfg.integrator;
            if (j.contains("dt")) {
                in.dt = rd.positive(j, p, "dt", true, 1.0);
            }
            in.cfl = rd.positive(j, p, "cfl", false, 0.3);
            if (in.cfl > 1.0) {
                rd.fail(Reader::join_path(p, "cfl"), "must lie in (0, 1]");
            }
            in.n_end = rd.integer(j, p, "n_end", true).value_or(0);
            if (in.n_end < 0) {
                rd.fail(Reader::join_path(p, "n_end"), "must not be negative");
            }
            in.output_every = rd.integer(j, p, "output_every", false).value_or(1);
            if (in.output_every < 1) {
                rd.fail(Reader::join_path(p, "output_every"), "must be at least 1");
            }
            in.momentum.viscosity.beta1 = rd.non_negative(j, p, "beta1", 1.0);
            in.momentum.viscosity.beta2 = rd.non_negative(j, p, "beta2", 1.0);
            in.momentum.viscosity.symmetric = rd.boolean(j, p, "symmetric_viscosity").value_or(false);
            in.momentum.corrected = rd.boolean(j, p, "corrected_momentum").value_or(true);
        }
    }

    // output
    if (doc.contains("output")) {
        const auto& j = doc.at("output");
        const std::string p = "output";
        if (rd.object(j, p)) {
            rd.keys(j, p, {"directory", "format", "enabled"});
            cfg.output.directory = rd.string(j, p, "directory", false).value_or("output");
            const auto fmt = rd.string(j, p, "format", false).value_or("csv");
            if (fmt == "csv") {
                cfg.output.format = SnapshotFormat::csv;
            } else if (fmt == "vtk") {
                cfg.output.format = SnapshotFormat::vtk;
            } else if (fmt == "both") {
                cfg.output.format = SnapshotFormat::both;
            } else {
                rd.fail(Reader::join_path(p, "format"), "unknown format '" + fmt + "' (csv, vtk, both)");
            }
            cfg.output.enabled = rd.boolean(j, p, "enabled").value_or(true);
        }
    }

    if (!rd.errors.empty()) {
        throw ConfigError(rd.errors);
    }
    return cfg;
}

SimConfig parse_config_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }
    return parse_config(doc);
}

SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read configuration '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// serialization

namespace {

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json mat_json(const Mat3& m)
{
    json out = json::array();
    for (int r = 0; r < 3; ++r) {
        out.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    }
    return out;
}

json chart_json(const ChartSpec& c)
{
    switch (c.kind) {
    case ChartKind::identity:
        return {{"type", "identity"}};
    case ChartKind::cylindrical:
        return {{"type", "cylindrical"}, {"origin", vec_json(c.origin)}, {"axis", vec_json(c.axis)},
                {"angle_scale", c.angle_scale}};
    case ChartKind::per_particle_table:
        return {{"type", "table"}, {"path", c.table_path}};
    }
    return {};
}

json jc_json(const material::JohnsonCookParams& jc)
{
    return {{"A", jc.A}, {"B", jc.B}, {"C", jc.C}, {"n", jc.n}, {"m", jc.m}, {"eps0_dot", jc.eps0_dot},
            {"T_r", jc.T_r}, {"T_m", jc.T_m}, {"Cp", jc.Cp}, {"chi", jc.chi}};
}

} // namespace

json region_to_json(const domain::Region& r)
{
    using K = domain::Region::Kind;
    switch (r.kind) {
    case K::all:
        return {{"type", "all"}};
    case K::box:
        return {{"type", "box"}, {"lo", vec_json(r.lo)}, {"hi", vec_json(r.hi)}};
    case K::annulus: {
        json j = {{"type", "annulus"}, {"origin", vec_json(r.origin)}, {"axis", vec_json(r.axis)},
                  {"r_min", r.r_min}, {"r_max", r.r_max}};
        if (r.phi_min) {
            j["phi_min"] = *r.phi_min;
        }
        if (r.phi_max) {
            j["phi_max"] = *r.phi_max;
        }
        if (r.z_min) {
            j["z_min"] = *r.z_min;
        }
        if (r.z_max) {
            j["z_max"] = *r.z_max;
        }
        return j;
    }
    case K::ids:
        return {{"type", "ids"}, {"ids", std::vector<ParticleId>(r.ids.begin(), r.ids.end())}};
    }
    return {};
}

json to_json(const SimConfig& cfg)
{
    json doc;
    json mats = json::object();
    for (const auto& m : cfg.materials) {
        json j = {{"E", m.elastic.E}, {"nu", m.elastic.nu}, {"rho0", m.elastic.rho0}, {"T0", m.T0}};
        if (std::holds_alternative<material::Hypoelastic>(m.law)) {
            j["model"] = "elastic";
        } else if (const auto* p = std::get_if<material::JCPlastic>(&m.law)) {
            j["model"] = "jc_plastic";
            j["johnson_cook"] = jc_json(p->jc);
        } else if (const auto* d = std::get_if<material::JCDamage>(&m.law)) {
            j["model"] = "jc_damage";
            j["johnson_cook"] = jc_json(d->jc);
            j["damage"] = {{"D1", d->damage.D1}, {"D2", d->damage.D2}, {"D3", d->damage.D3},
                           {"D4", d->damage.D4}, {"D5", d->damage.D5}};
        }
        if (m.rankine) {
            j["rankine"] = {{"eps_max", m.rankine->eps_max}};
        }
        mats[m.name] = j;
    }
    doc["materials"] = mats;

    json subs = json::array();
    for (const auto& s : cfg.subdomains) {
        json j = {{"name", s.name}, {"rank", s.rank}, {"chart", chart_json(s.chart)}, {"h_factor", s.h_factor},
                  {"overlap_width", s.overlap_width}};
        if (s.region) {
            j["region"] = region_to_json(*s.region);
        }
        if (s.h) {
            j["h"] = *s.h;
        }
        if (s.lattice) {
            json l = {{"lo", vec_json(s.lattice->lo)}, {"hi", vec_json(s.lattice->hi)},
                      {"spacing", s.lattice->spacing}, {"material", s.lattice->material}};
            if (s.lattice->clip) {
                l["clip"] = region_to_json(*s.lattice->clip);
            }
            j["lattice"] = l;
        }
        subs.push_back(j);
    }
    doc["subdomains"] = subs;

    if (cfg.particle_csv) {
        doc["particles"] = {{"csv", cfg.particle_csv->path}};
        if (!cfg.particle_csv->material.empty()) {
            doc["particles"]["material"] = cfg.particle_csv->material;
        }
    }

    json bc = json::object();
    if (!cfg.fixed_velocity.empty()) {
        json arr = json::array();
        for (const auto& f : cfg.fixed_velocity) {
            arr.push_back({{"region", region_to_json(f.region)},
                           {"velocity", vec_json(f.velocity)},
                           {"components", {f.components[0], f.components[1], f.components[2]}}});
        }
        bc["fixed_velocity"] = arr;
    }
    if (!cfg.initial_velocity.empty()) {
        json arr = json::array();
        for (const auto& f : cfg.initial_velocity) {
            arr.push_back({{"region", region_to_json(f.region)},
                           {"velocity", vec_json(f.velocity)},
                           {"gradient", mat_json(f.gradient)},
                           {"origin", vec_json(f.origin)}});
        }
        bc["initial_velocity"] = arr;
    }
    if (!cfg.body_force.empty()) {
        json arr = json::array();
        for (const auto& f : cfg.body_force) {
            json j = {{"region", region_to_json(f.region)}, {"ramp_time", f.ramp_time}};
            if (f.kind == BodyForce::Kind::uniform) {
                j["kind"] = "uniform";
                j["value"] = vec_json(f.value);
            } else {
                j["kind"] = "centrifugal";
                j["omega2"] = f.omega2;
                j["origin"] = vec_json(f.origin);
                j["axis"] = vec_json(f.axis);
            }
            arr.push_back(j);
        }
        bc["body_force"] = arr;
    }
    if (!bc.empty()) {
        doc["boundary_conditions"] = bc;
    }

    if (cfg.relaxation) {
        const auto& r = *cfg.relaxation;
        doc["relaxation"] = {{"region", region_to_json(r.region)},
                             {"iterations", r.iterations},
                             {"step", r.step},
                             {"components", {r.components[0], r.components[1], r.components[2]}}};
    }

    const auto& in = cfg.integrator;
    json integ = {{"cfl", in.cfl},
                  {"n_end", in.n_end},
                  {"output_every", in.output_every},
                  {"beta1", in.momentum.viscosity.beta1},
                  {"beta2", in.momentum.viscosity.beta2},
                  {"symmetric_viscosity", in.momentum.viscosity.symmetric},
                  {"corrected_momentum", in.momentum.corrected}};
    if (in.dt) {
        integ["dt"] = *in.dt;
    }
    doc["integrator"] = integ;

    const char* fmt = cfg.output.format == SnapshotFormat::csv   ? "csv"
                      : cfg.output.format == SnapshotFormat::vtk ? "vtk"
                                                                 : "both";
    doc["output"] = {{"directory", cfg.output.directory}, {"format", fmt}, {"enabled", cfg.output.enabled}};
    return doc;
}

} // namespace gsph::config
