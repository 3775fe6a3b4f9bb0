#pragma once

#include "vh/calderon.hpp"
#include "vh/corpus.hpp"
#include "vh/filterbank.hpp"
#include "vh/grid.hpp"
#include "vh/varexp.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vh {

struct ExponentSpec {
    std::string kind = "constant";   // constant | piecewise | smoothstep
    double value = 1.0;
    std::vector<double> breaks;
    std::vector<double> values;
    double p_left = 1.0;
    double p_right = 1.0;
    double x0 = -1.0;
    double x1 = 1.0;

    ExponentFunction build(const Grid& grid) const;
};

struct SymbolSpec {
    std::string kind = "log_abs";    // log_abs | indicator | corpus | constant
    double delta = 1.0 / 64.0;
    double a = 0.0;
    double b = 1.0;
    std::size_t index = 0;
    double value = 1.0;

    SampledFunction build(const Grid& grid, std::uint64_t seed) const;
};

struct Tolerances {
    double reconstruction = 1e-3;
    double identity = 1e-2;
    double stability = 2.0;
    double atom = 1e-6;
    double route = 1e-4;
};

struct RunConfig {
    double R = 8.0;
    int L = 12;
    int N = 2;
    int j_min = -3;
    int j_max = 5;
    int M = 3;
    ExponentSpec exponent;
    SymbolSpec symbol;
    std::string op = "hilbert";
    double op_scale = 1.0;
    std::size_t corpus_count = 10;
    std::vector<std::string> generators;   // overrides the default plan when nonempty
    std::uint64_t seed = 1;
    int czo_j_lo = -3;
    int czo_j_hi = 3;
    std::vector<int> levels;               // grid levels for refinement comparisons
    bool export_atoms = false;
    Tolerances tol;

    nlohmann::json canonical;              // normalized configuration (after overrides)
    std::string hash;                      // FNV-1a 64 of canonical.dump()

    Grid grid() const { return Grid::make(R, L); }
    Grid grid_at(int level) const { return Grid::make(R, level); }
    std::vector<CorpusMember> corpus(const Grid& g) const;
};

// Parses and validates; every cross-module constraint is checked here. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j, std::optional<int> grid_level = std::nullopt,
                       std::optional<std::uint64_t> seed = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<int> grid_level = std::nullopt,
                      std::optional<std::uint64_t> seed = std::nullopt);

std::string fnv1a_hex(const std::string& bytes);

} // namespace vh
