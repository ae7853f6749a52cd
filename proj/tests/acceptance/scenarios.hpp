#pragma once

#include <string>

namespace gsph::acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome kernel_joints();
Outcome operator_consistency();
Outcome metric_oracle();
Outcome gsph_equals_sph();
Outcome affine_patch();
Outcome pair_oracle();
Outcome momentum_conservation();
Outcome wave_speed();
Outcome constant_acceleration();
Outcome return_map();
Outcome johnson_cook_scalars();
Outcome rankine();
Outcome jaumann_objectivity();
Outcome overset_quarter_cylinder();
Outcome determinism();

} // namespace gsph::acceptance
