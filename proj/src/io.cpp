#include "gsph/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace gsph::io {

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& text, const std::string& where)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw IoError(where + ": cannot parse number '" + text + "'");
    }
    return v;
}

unsigned long long parse_unsigned(const std::string& text, const std::string& where)
{
    unsigned long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw IoError(where + ": cannot parse integer '" + text + "'");
    }
    return v;
}

long parse_long(const std::string& text, const std::string& where)
{
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw IoError(where + ": cannot parse integer '" + text + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') {
            ++start;
        }
        out.push_back(cell.substr(start));
    }
    return out;
}

} // namespace

std::vector<ParticleId> append_lattice(ParticleSet& particles, const config::LatticeSpec& spec, const Chart& chart,
                                       double rho0, int material_id)
{
    if (!chart.has_inverse()) {
        throw SetupError("lattice: chart '" + to_string(chart.kind()) + "' is not invertible");
    }
    if (!(spec.spacing > 0.0)) {
        throw SetupError("lattice: spacing must be positive");
    }
    std::array<long, 3> count{};
    for (int d = 0; d < 3; ++d) {
        const double extent = spec.hi(d) - spec.lo(d);
        if (!(extent > 0.0)) {
            throw SetupError("lattice: zero or negative extent along axis " + std::to_string(d));
        }
        count[static_cast<std::size_t>(d)] = std::max(1L, std::lround(extent / spec.spacing));
    }
    const double cell = spec.spacing * spec.spacing * spec.spacing;
    std::vector<ParticleId> ids;
    // x fastest, then y, then z
    for (long k = 0; k < count[2]; ++k) {
        for (long j = 0; j < count[1]; ++j) {
            for (long i = 0; i < count[0]; ++i) {
                const Vec3 theta = spec.lo + spec.spacing * Vec3(static_cast<double>(i) + 0.5,
                                                                 static_cast<double>(j) + 0.5,
                                                                 static_cast<double>(k) + 0.5);
                const Vec3 X = chart.inverse(theta);
                if (spec.clip && !spec.clip->contains(particles.size(), X)) {
                    continue;
                }
                const double det = std::abs(chart.jacobian(theta).determinant());
                if (!(det > 0.0) || !X.allFinite()) {
                    std::ostringstream msg;
                    msg << "lattice: chart is singular at theta = (" << theta.transpose() << ")";
                    throw SetupError(msg.str());
                }
                ids.push_back(particles.add(X, rho0 * det * cell, rho0, material_id));
            }
        }
    }
    return ids;
}

ParticleSet generate_lattice(const config::LatticeSpec& spec, const Chart& chart, double rho0, int material_id)
{
    ParticleSet set;
    append_lattice(set, spec, chart, rho0, material_id);
    return set;
}

std::vector<ParticleId> append_particle_csv(ParticleSet& particles, const std::string& path,
                                            const config::SimConfig& cfg, const std::string& default_material)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("particles: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("particles: '" + path + "' is empty");
    }
    const auto header = split(line);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
    }
    for (const char* name : {"X", "Y", "Z", "mass"}) {
        if (col.count(name) == 0) {
            throw IoError("particles: '" + path + "' has no '" + name + "' column");
        }
    }
    const bool has_material = col.count("material") != 0;
    std::vector<ParticleId> ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (cells.size() != header.size()) {
            throw IoError(where + ": expected " + std::to_string(header.size()) + " columns");
        }
        const Vec3 X(parse_double(cells[col["X"]], where), parse_double(cells[col["Y"]], where),
                     parse_double(cells[col["Z"]], where));
        const double mass = parse_double(cells[col["mass"]], where);
        const std::string mat = has_material ? cells[col["material"]] : default_material;
        const int mid = cfg.material_index(mat);
        if (mid < 0) {
            throw IoError(where + ": unknown material '" + mat + "'");
        }
        if (!(mass > 0.0) || !X.allFinite()) {
            throw IoError(where + ": mass must be positive and coordinates finite");
        }
        ids.push_back(particles.add(X, mass, cfg.materials[static_cast<std::size_t>(mid)].elastic.rho0, mid));
    }
    return ids;
}

// ---------------------------------------------------------------------------
// snapshots

Snapshot make_snapshot(const ParticleSet& particles, long step, double time)
{
    Snapshot snap;
    snap.step = step;
    snap.time = time;
    snap.records.resize(particles.size());
    for (ParticleId a = 0; a < particles.size(); ++a) {
        auto& r = snap.records[a];
        const Mat3& s = particles.sigma[a];
        r.id = a;
        r.subdomain = particles.owner[a];
        r.X = particles.X[a];
        r.x = particles.x[a];
        r.v = particles.v[a];
        r.rho = particles.rho[a];
        r.sigma = {s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(1, 2), s(0, 2)};
        r.J = particles.J[a];
        r.eps_pl = particles.plastic[a].eps_pl_bar;
        r.D = particles.plastic[a].D;
        r.broken_bonds = particles.broken_bonds[a];
    }
    return snap;
}

const std::vector<std::string>& snapshot_columns()
{
    static const std::vector<std::string> cols = {
        "step", "time", "id",  "subdomain", "X",   "Y",   "Z",   "x",   "y",  "z",      "vx", "vy",
        "vz",   "rho",  "sxx", "syy",       "szz", "sxy", "syz", "sxz", "J",  "eps_pl", "D",  "broken_bonds"};
    return cols;
}

void write_snapshot_csv(std::ostream& out, const Snapshot& snap)
{
    const auto& cols = snapshot_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
    const std::string step = std::to_string(snap.step);
    const std::string time = format_double(snap.time);
    std::string row;
    for (const auto& r : snap.records) {
        row.clear();
        row += step;
        row += ',';
        row += time;
        row += ',';
        row += std::to_string(r.id);
        row += ',';
        row += std::to_string(r.subdomain);
        auto put = [&](double v) {
            row += ',';
            row += format_double(v);
        };
        for (int d = 0; d < 3; ++d) {
            put(r.X(d));
        }
        for (int d = 0; d < 3; ++d) {
            put(r.x(d));
        }
        for (int d = 0; d < 3; ++d) {
            put(r.v(d));
        }
        put(r.rho);
        for (const double s : r.sigma) {
            put(s);
        }
        put(r.J);
        put(r.eps_pl);
        put(r.D);
        row += ',';
        row += std::to_string(r.broken_bonds);
        row += '\n';
        out << row;
    }
}

void write_snapshot_vtk(std::ostream& out, const Snapshot& snap)
{
    const std::size_t n = snap.records.size();
    out << "# vtk DataFile Version 3.0\n";
    out << "gsph snapshot step " << snap.step << " time " << format_double(snap.time) << '\n';
    out << "ASCII\n";
    out << "DATASET POLYDATA\n";
    out << "POINTS " << n << " double\n";
    for (const auto& r : snap.records) {
        out << format_double(r.x(0)) << ' ' << format_double(r.x(1)) << ' ' << format_double(r.x(2)) << '\n';
    }
    out << "VERTICES " << n << ' ' << 2 * n << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << "1 " << i << '\n';
    }
    out << "POINT_DATA " << n << '\n';
    auto scalars = [&](const char* name, const char* type, auto&& get) {
        out << "SCALARS " << name << ' ' << type << " 1\nLOOKUP_TABLE default\n";
        for (const auto& r : snap.records) {
            out << get(r) << '\n';
        }
    };
    scalars("id", "long", [](const SnapshotRecord& r) { return std::to_string(r.id); });
    scalars("subdomain", "int", [](const SnapshotRecord& r) { return std::to_string(r.subdomain); });
    scalars("rho", "double", [](const SnapshotRecord& r) { return format_double(r.rho); });
    scalars("J", "double", [](const SnapshotRecord& r) { return format_double(r.J); });
    scalars("eps_pl", "double", [](const SnapshotRecord& r) { return format_double(r.eps_pl); });
    scalars("D", "double", [](const SnapshotRecord& r) { return format_double(r.D); });
    scalars("broken_bonds", "int", [](const SnapshotRecord& r) { return std::to_string(r.broken_bonds); });
    auto vectors = [&](const char* name, auto&& get) {
        out << "VECTORS " << name << " double\n";
        for (const auto& r : snap.records) {
            const Vec3 v = get(r);
            out << format_double(v(0)) << ' ' << format_double(v(1)) << ' ' << format_double(v(2)) << '\n';
        }
    };
    vectors("velocity", [](const SnapshotRecord& r) { return r.v; });
    vectors("displacement", [](const SnapshotRecord& r) { return Vec3(r.x - r.X); });
    out << "TENSORS stress double\n";
    for (const auto& r : snap.records) {
        const auto& s = r.sigma;
        // xx yy zz xy yz xz -> row-major 3x3
        const double m[9] = {s[0], s[3], s[5], s[3], s[1], s[4], s[5], s[4], s[2]};
        for (int i = 0; i < 9; ++i) {
            out << format_double(m[i]) << ((i % 3 == 2) ? '\n' : ' ');
        }
    }
}

std::vector<std::string> write_snapshot(const std::string& directory, const Snapshot& snap,
                                        config::SnapshotFormat format)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) {
        throw IoError("output: cannot create directory '" + directory + "': " + ec.message());
    }
    char stem[32];
    std::snprintf(stem, sizeof(stem), "snapshot_%06ld", snap.step);
    std::vector<std::string> written;
    auto emit = [&](const char* ext, auto&& writer) {
        const std::string path = (fs::path(directory) / (std::string(stem) + ext)).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("output: cannot write '" + path + "'");
        }
        writer(out, snap);
        out.flush();
        if (!out) {
            throw IoError("output: write failed for '" + path + "'");
        }
        written.push_back(path);
    };
    if (format != config::SnapshotFormat::vtk) {
        emit(".csv", [](std::ostream& o, const Snapshot& s) { write_snapshot_csv(o, s); });
    }
    if (format != config::SnapshotFormat::csv) {
        emit(".vtk", [](std::ostream& o, const Snapshot& s) { write_snapshot_vtk(o, s); });
    }
    return written;
}

Snapshot read_snapshot_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("snapshot: empty input");
    }
    const auto header = split(line);
    if (header != snapshot_columns()) {
        throw IoError("snapshot: unexpected header '" + line + "'");
    }
    Snapshot snap;
    std::size_t line_no = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto c = split(line);
        const std::string where = "snapshot line " + std::to_string(line_no);
        if (c.size() != header.size()) {
            throw IoError(where + ": expected " + std::to_string(header.size()) + " columns");
        }
        const long step = parse_long(c[0], where);
        const double time = parse_double(c[1], where);
        if (first) {
            snap.step = step;
            snap.time = time;
            first = false;
        }
        SnapshotRecord r;
        r.id = static_cast<ParticleId>(parse_unsigned(c[2], where));
        r.subdomain = static_cast<int>(parse_long(c[3], where));
        std::size_t k = 4;
        for (int d = 0; d < 3; ++d) {
            r.X(d) = parse_double(c[k++], where);
        }
        for (int d = 0; d < 3; ++d) {
            r.x(d) = parse_double(c[k++], where);
        }
        for (int d = 0; d < 3; ++d) {
            r.v(d) = parse_double(c[k++], where);
        }
        r.rho = parse_double(c[k++], where);
        for (double& s : r.sigma) {
            s = parse_double(c[k++], where);
        }
        r.J = parse_double(c[k++], where);
        r.eps_pl = parse_double(c[k++], where);
        r.D = parse_double(c[k++], where);
        r.broken_bonds = static_cast<std::uint32_t>(parse_unsigned(c[k++], where));
        snap.records.push_back(r);
    }
    return snap;
}

Snapshot read_snapshot_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("snapshot: cannot open '" + path + "'");
    }
    return read_snapshot_csv(in);
}

} // namespace gsph::io
