// Acceptance runner: `acceptance [N...]` prints one PASS/FAIL line per
// criterion and exits non-zero if any selected criterion fails.

#include "scenarios.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <vector>

namespace {

using Scenario = gsph::acceptance::Outcome (*)();

const std::vector<Scenario> criteria = {
    gsph::acceptance::kernel_joints,
    gsph::acceptance::operator_consistency,
    gsph::acceptance::metric_oracle,
    gsph::acceptance::gsph_equals_sph,
    gsph::acceptance::affine_patch,
    gsph::acceptance::pair_oracle,
    gsph::acceptance::momentum_conservation,
    gsph::acceptance::wave_speed,
    gsph::acceptance::constant_acceleration,
    gsph::acceptance::return_map,
    gsph::acceptance::johnson_cook_scalars,
    gsph::acceptance::rankine,
    gsph::acceptance::jaumann_objectivity,
    gsph::acceptance::overset_quarter_cylinder,
    gsph::acceptance::determinism,
};

bool run_one(std::size_t n)
{
    const auto start = std::chrono::steady_clock::now();
    gsph::acceptance::Outcome out;
    try {
        out = criteria[n - 1]();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("CRITERION %zu %s (%.1f s): %s\n", n, out.pass ? "PASS" : "FAIL", seconds, out.detail.c_str());
    std::fflush(stdout);
    return out.pass;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const long n = std::strtol(argv[i], nullptr, 10);
        if (n < 1 || n > static_cast<long>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion '%s' (expected 1-%zu)\n", argv[i], criteria.size());
            return 2;
        }
        selected.push_back(static_cast<std::size_t>(n));
    }
    if (selected.empty()) {
        for (std::size_t n = 1; n <= criteria.size(); ++n) {
            selected.push_back(n);
        }
    }
    bool all = true;
    for (const auto n : selected) {
        all = run_one(n) && all;
    }
    return all ? 0 : 1;
}
