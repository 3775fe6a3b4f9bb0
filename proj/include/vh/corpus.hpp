#pragma once

#include "vh/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vh {

struct CorpusMember {
    std::string name;
    std::string generator;
    SampledFunction f;
};

// gaussian, gaussian_derivative, mexican_hat, psi_bump, psi_bump_fine, mollified_step,
// mollified_indicator, wavepackets, zero
std::vector<std::string> corpus_generators();

// Default plan: the seven fixed generators followed by seeded wave packets.
std::vector<CorpusMember> make_corpus(const Grid& grid, std::size_t count, std::uint64_t seed);
// One member per named generator; index feeds the seed of random generators.
std::vector<CorpusMember> make_corpus(const Grid& grid, const std::vector<std::string>& generators,
                                      std::uint64_t seed);
CorpusMember make_member(const Grid& grid, const std::string& generator, std::size_t index, std::uint64_t seed);

// psi_j(x - c) on the grid from the analytic multiplier.
SampledFunction psi_bump(const Grid& grid, int j, double c);

} // namespace vh
