// Small models shared by the unit and acceptance tests.
#pragma once

#include <memory>

#include "rstp/environment.hpp"
#include "rstp/geometry.hpp"

namespace fixtures {

using namespace rstp;

inline std::shared_ptr<const EnvironmentModel> full_shift(int l)
{
    return std::make_shared<const EnvironmentModel>(EnvironmentModel::full_shift(l));
}

inline std::shared_ptr<const EnvironmentModel> golden_mean()
{
    return std::make_shared<const EnvironmentModel>(
        EnvironmentModel::constant(2, BinaryMatrix::from_rows({{1, 1}, {1, 0}})));
}

// deterministic alternation between an l=2 and an l=3 full shift
inline std::shared_ptr<const EnvironmentModel> alternating_2_3()
{
    EnvState a, b;
    a.l = 2;
    b.l = 3;
    a.a_to.emplace(1, BinaryMatrix(2, 3, true));
    b.a_to.emplace(0, BinaryMatrix(3, 2, true));
    return std::make_shared<const EnvironmentModel>(EnvironmentModel({a, b}, {{0.0, 1.0}, {1.0, 0.0}}));
}

inline OmegaPath path_of(std::shared_ptr<const EnvironmentModel> m, std::size_t horizon, std::uint64_t seed = 1)
{
    return sample_environment_path(std::move(m), seed, horizon);
}

inline HighReal third() { return HighReal(1) / 3; }

// g1(x) = x/3, g2(x) = x/3 + 2/3 on [0,1]
inline MapFamily cantor_maps(const EnvironmentModel& m)
{
    return MapFamily::interval({{third(), HighReal(0)}, {third(), HighReal(2) / 3}}, m);
}

// same maps at every state, l symbols with ratio r placed at offsets k / l
inline MapFamily uniform_maps(const EnvironmentModel& m, HighReal ratio)
{
    std::vector<std::vector<MapSpec>> per_state;
    for (std::size_t st = 0; st < m.size(); ++st) {
        const int l = m.state(static_cast<int>(st)).l;
        std::vector<MapSpec> row;
        for (int s = 0; s < l; ++s) {
            MapSpec spec;
            spec.ratio = ratio;
            spec.offset = {HighReal(s) / l, HighReal(0)};
            row.push_back(spec);
        }
        per_state.push_back(row);
    }
    return MapFamily(1, {HighReal(0), HighReal(0)}, {HighReal(1), HighReal(0)}, per_state, m);
}

} // namespace fixtures
