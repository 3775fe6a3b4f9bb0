#include "vh/config.hpp"

#include "vh/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vh {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

double number(const json& obj, const std::string& key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj.at(key).get<double>();
}

int integer(const json& obj, const std::string& key, const std::string& where, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return obj.at(key).get<int>();
}

} // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExponentFunction ExponentSpec::build(const Grid& grid) const {
    if (kind == "constant") return ExponentFunction::constant(grid, value);
    if (kind == "piecewise") return ExponentFunction::piecewise(grid, breaks, values);
    if (kind == "smoothstep") return ExponentFunction::smoothstep(grid, p_left, p_right, x0, x1);
    throw ConfigError("unknown exponent kind '" + kind + "'");
}

SampledFunction SymbolSpec::build(const Grid& grid, std::uint64_t seed) const {
    if (kind == "log_abs") {
        const double d = delta;
        return SampledFunction::sample(grid, [d](double x) { return std::log(std::max(std::abs(x), d)); });
    }
    if (kind == "indicator") {
        const double lo = a, hi = b;
        return SampledFunction::sample(grid, [lo, hi](double x) { return x >= lo && x < hi ? 1.0 : 0.0; });
    }
    if (kind == "constant") {
        const double c = value;
        return SampledFunction::sample(grid, [c](double) { return c; });
    }
    if (kind == "corpus") {
        auto members = make_corpus(grid, index + 1, seed);
        return members[index].f;
    }
    throw ConfigError("unknown symbol kind '" + kind + "'");
}

std::vector<CorpusMember> RunConfig::corpus(const Grid& g) const {
    if (!generators.empty()) return make_corpus(g, generators, seed);
    return make_corpus(g, corpus_count, seed);
}

RunConfig parse_config(const json& j, std::optional<int> grid_level, std::optional<std::uint64_t> seed) {
    check_keys(j, "config",
               {"grid", "lattice", "filterbank", "exponent", "symbol", "operator", "corpus", "czo", "tolerances",
                "export_atoms"});
    RunConfig c;
    const json empty = json::object();
    const json& grid = j.value("grid", empty);
    check_keys(grid, "grid", {"R", "L"});
    c.R = number(grid, "R", "grid", c.R);
    c.L = integer(grid, "L", "grid", c.L);
    if (grid_level) c.L = *grid_level;

    const json& lat = j.value("lattice", empty);
    check_keys(lat, "lattice", {"N", "j_min", "j_max"});
    c.N = integer(lat, "N", "lattice", c.N);
    c.j_min = integer(lat, "j_min", "lattice", c.j_min);
    c.j_max = integer(lat, "j_max", "lattice", c.j_max);

    const json& fb = j.value("filterbank", empty);
    check_keys(fb, "filterbank", {"M"});
    c.M = integer(fb, "M", "filterbank", c.M);

    const json& ex = j.value("exponent", empty);
    check_keys(ex, "exponent", {"kind", "value", "breaks", "values", "p_left", "p_right", "x0", "x1"});
    c.exponent.kind = get<std::string>(ex, "kind", "exponent", c.exponent.kind);
    c.exponent.value = number(ex, "value", "exponent", c.exponent.value);
    c.exponent.breaks = get<std::vector<double>>(ex, "breaks", "exponent", {});
    c.exponent.values = get<std::vector<double>>(ex, "values", "exponent", {});
    c.exponent.p_left = number(ex, "p_left", "exponent", c.exponent.p_left);
    c.exponent.p_right = number(ex, "p_right", "exponent", c.exponent.p_right);
    c.exponent.x0 = number(ex, "x0", "exponent", c.exponent.x0);
    c.exponent.x1 = number(ex, "x1", "exponent", c.exponent.x1);

    const json& sym = j.value("symbol", empty);
    check_keys(sym, "symbol", {"kind", "delta", "a", "b", "index", "value"});
    c.symbol.kind = get<std::string>(sym, "kind", "symbol", c.symbol.kind);
    c.symbol.delta = number(sym, "delta", "symbol", c.symbol.delta);
    c.symbol.a = number(sym, "a", "symbol", c.symbol.a);
    c.symbol.b = number(sym, "b", "symbol", c.symbol.b);
    c.symbol.index = static_cast<std::size_t>(integer(sym, "index", "symbol", 0));
    c.symbol.value = number(sym, "value", "symbol", c.symbol.value);

    const json& op = j.value("operator", empty);
    check_keys(op, "operator", {"name", "scale"});
    c.op = get<std::string>(op, "name", "operator", c.op);
    c.op_scale = number(op, "scale", "operator", c.op_scale);

    const json& corp = j.value("corpus", empty);
    check_keys(corp, "corpus", {"count", "seed", "generators"});
    const int count = integer(corp, "count", "corpus", static_cast<int>(c.corpus_count));
    if (count < 0 || count > 64) throw ConfigError("corpus.count must lie in [0, 64]");
    c.corpus_count = static_cast<std::size_t>(count);
    if (corp.contains("seed") && !corp.at("seed").is_number_unsigned())
        throw ConfigError("corpus.seed must be a nonnegative integer");
    c.seed = corp.value("seed", c.seed);
    if (seed) c.seed = *seed;
    c.generators = get<std::vector<std::string>>(corp, "generators", "corpus", {});

    const json& cz = j.value("czo", empty);
    check_keys(cz, "czo", {"j_lo", "j_hi", "levels"});
    c.czo_j_lo = integer(cz, "j_lo", "czo", c.czo_j_lo);
    c.czo_j_hi = integer(cz, "j_hi", "czo", c.czo_j_hi);
    c.levels = get<std::vector<int>>(cz, "levels", "czo", {});

    c.export_atoms = get<bool>(j, "export_atoms", "config", false);

    const json& tol = j.value("tolerances", empty);
    check_keys(tol, "tolerances", {"reconstruction", "identity", "stability", "atom", "route"});
    c.tol.reconstruction = number(tol, "reconstruction", "tolerances", c.tol.reconstruction);
    c.tol.identity = number(tol, "identity", "tolerances", c.tol.identity);
    c.tol.stability = number(tol, "stability", "tolerances", c.tol.stability);
    c.tol.atom = number(tol, "atom", "tolerances", c.tol.atom);
    c.tol.route = number(tol, "route", "tolerances", c.tol.route);

    // Cross-module constraints, before any computation.
    std::vector<int> all_levels = c.levels;
    all_levels.push_back(c.L);
    try {
        for (int level : all_levels) {
            const Grid g = Grid::make(c.R, level);
            const auto lattice = build_lattice(g, c.N, c.j_min, c.j_max);
            (void)lattice;
            for (int s : {c.j_min, c.j_max}) {
                const double w = std::ldexp(1.0, -s);
                if (w < 4.0 * g.spacing() || w > g.half_width())
                    throw ConfigError("scale " + std::to_string(s) + " not resolvable at level " +
                                      std::to_string(level));
            }
            (void)c.exponent.build(g);
            for (const auto& gen : c.generators) (void)make_member(g, gen, 0, c.seed);
        }
        if (c.M < 0 || c.M > 8) throw ConfigError("filterbank.M must lie in [0, 8]");
        if (c.czo_j_lo > c.czo_j_hi || c.czo_j_lo < c.j_min || c.czo_j_hi > c.j_max)
            throw ConfigError("czo scale range must lie inside the lattice range");
        for (const auto& [name, v] :
             {std::pair{"reconstruction", c.tol.reconstruction}, std::pair{"identity", c.tol.identity},
              std::pair{"atom", c.tol.atom}, std::pair{"route", c.tol.route}})
            if (!(v > 0.0)) throw ConfigError(std::string("tolerance ") + name + " must be positive");
        if (!(c.tol.stability >= 1.0)) throw ConfigError("tolerance stability must be >= 1");
        if (c.symbol.kind == "log_abs" && !(c.symbol.delta > 0.0)) throw ConfigError("symbol.delta must be positive");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    json canon = {
        {"grid", {{"R", c.R}, {"L", c.L}}},
        {"lattice", {{"N", c.N}, {"j_min", c.j_min}, {"j_max", c.j_max}}},
        {"filterbank", {{"M", c.M}}},
        {"exponent",
         {{"kind", c.exponent.kind},
          {"value", c.exponent.value},
          {"breaks", c.exponent.breaks},
          {"values", c.exponent.values},
          {"p_left", c.exponent.p_left},
          {"p_right", c.exponent.p_right},
          {"x0", c.exponent.x0},
          {"x1", c.exponent.x1}}},
        {"symbol",
         {{"kind", c.symbol.kind},
          {"delta", c.symbol.delta},
          {"a", c.symbol.a},
          {"b", c.symbol.b},
          {"index", c.symbol.index},
          {"value", c.symbol.value}}},
        {"operator", {{"name", c.op}, {"scale", c.op_scale}}},
        {"corpus", {{"count", c.corpus_count}, {"seed", c.seed}, {"generators", c.generators}}},
        {"czo", {{"j_lo", c.czo_j_lo}, {"j_hi", c.czo_j_hi}, {"levels", c.levels}}},
        {"export_atoms", c.export_atoms},
        {"tolerances",
         {{"reconstruction", c.tol.reconstruction},
          {"identity", c.tol.identity},
          {"stability", c.tol.stability},
          {"atom", c.tol.atom},
          {"route", c.tol.route}}},
    };
    c.canonical = canon;
    c.hash = fnv1a_hex(canon.dump());
    return c;
}

RunConfig load_config(const std::string& path, std::optional<int> grid_level, std::optional<std::uint64_t> seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, grid_level, seed);
}

} // namespace vh
