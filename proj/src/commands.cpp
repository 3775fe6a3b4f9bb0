#include "vh/commands.hpp"

#include "vh/atomic.hpp"
#include "vh/calderon.hpp"
#include "vh/czo.hpp"
#include "vh/errors.hpp"
#include "vh/paraproduct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace vh {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Setup {
    Grid grid;
    FilterBank bank;
    CubeLattice lattice;
};

Setup make_setup(const RunConfig& cfg, int level) {
    const Grid g = cfg.grid_at(level);
    return {g, build_filterbank(g, cfg.N, cfg.j_min, cfg.j_max, cfg.M), build_lattice(g, cfg.N, cfg.j_min, cfg.j_max)};
}

std::vector<int> run_levels(const RunConfig& cfg) {
    std::vector<int> levels = cfg.levels;
    if (levels.empty()) levels.push_back(cfg.L);
    return levels;
}

std::string num(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json header(const RunConfig& cfg, const std::string& command) {
    return {{"command", command},
            {"config_hash", cfg.hash},
            {"config", cfg.canonical},
            {"tolerances",
             {{"reconstruction", cfg.tol.reconstruction},
              {"identity", cfg.tol.identity},
              {"stability", cfg.tol.stability},
              {"atom", cfg.tol.atom},
              {"route", cfg.tol.route}}}};
}

json stats(const std::vector<double>& v) {
    std::vector<double> f;
    for (double x : v)
        if (std::isfinite(x)) f.push_back(x);
    if (f.empty()) return {{"min", nullptr}, {"max", nullptr}, {"count", 0}};
    return {{"min", *std::min_element(f.begin(), f.end())},
            {"max", *std::max_element(f.begin(), f.end())},
            {"count", f.size()}};
}

json truncation_tails(const std::vector<CorpusMember>& corpus, const FilterBank& bank) {
    json t = json::object();
    for (const auto& m : corpus) t[m.name] = 1.0 - bank.band_energy_fraction(m.f);
    return t;
}

double ratio(double a, double b) { return b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN(); }

// sup over |x| <= R/2 of |a - b|
double inner_sup_gap(const SampledFunction& a, const SampledFunction& b) {
    const Grid& g = a.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.point(i)) <= 0.5 * g.half_width()) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

} // namespace

int cmd_norm(const RunConfig& cfg, const fs::path& out) {
    json rep = header(cfg, "norm");
    Csv csv(out / "norm.csv", {"level", "member", "name", "lebesgue_norm", "hardy_norm_maximal", "hardy_norm_gd",
                               "gd_over_maximal", "lebesgue_over_hardy", "band_tail"});
    json levels = json::array();
    std::vector<double> max_ratio_per_level;
    for (int level : run_levels(cfg)) {
        const auto s = make_setup(cfg, level);
        const auto p = cfg.exponent.build(s.grid);
        const auto corpus = cfg.corpus(s.grid);
        json members = json::array();
        std::vector<double> eq, emb;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto& f = corpus[i].f;
            const double leb = luxemburg_norm(f, p);
            const double hm = hardy_norm(f, p, s.bank, s.lattice, HardyMethod::SmoothMaximal);
            const double hg = hardy_norm(f, p, s.bank, s.lattice, HardyMethod::DiscreteSquare);
            const double tail = 1.0 - s.bank.band_energy_fraction(f);
            eq.push_back(ratio(hg, hm));
            emb.push_back(ratio(leb, hm));
            members.push_back({{"name", corpus[i].name},
                               {"lebesgue_norm", leb},
                               {"hardy_norm_maximal", hm},
                               {"hardy_norm_gd", hg},
                               {"gd_over_maximal", eq.back()},
                               {"lebesgue_over_hardy", emb.back()},
                               {"truncation_tail", tail}});
            csv.row({std::to_string(level), std::to_string(i), corpus[i].name, num(leb), num(hm), num(hg),
                     num(eq.back()), num(emb.back()), num(tail)});
        }
        const json es = stats(eq);
        rep["truncation_tails"][std::to_string(level)] = truncation_tails(corpus, s.bank);
        levels.push_back({{"level", level},
                          {"members", members},
                          {"equivalence_ratios", {{"gd_over_maximal", es}, {"lebesgue_over_hardy", stats(emb)}}}});
        max_ratio_per_level.push_back(es["max"].is_null() ? 0.0 : es["max"].get<double>());
    }
    rep["levels"] = levels;
    bool pass = true;
    if (max_ratio_per_level.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(max_ratio_per_level.begin(), max_ratio_per_level.end());
        const bool all_zero = *hi == 0.0;
        const bool stable = all_zero || (*lo > 0.0 && *hi / *lo <= cfg.tol.stability);
        rep["ratio_stability"] = {{"max_over_min", all_zero ? 1.0 : ratio(*hi, *lo)}, {"stable", stable}};
        pass = stable;
    }
    rep["pass"] = pass;
    write_json(out / "norm.json", rep);
    return pass ? ExitPass : ExitVerification;
}

int cmd_decompose(const RunConfig& cfg, const fs::path& out) {
    json rep = header(cfg, "decompose");
    const auto s = make_setup(cfg, cfg.L);
    const auto p = cfg.exponent.build(s.grid);
    const auto corpus = cfg.corpus(s.grid);
    Csv csv(out / "atoms.csv", {"member", "atom", "lambda", "j", "k", "qstar_first", "qstar_count", "level", "norm",
                                "bound", "worst_moment", "pass"});
    json members = json::array();
    std::size_t failed = 0;
    std::vector<double> a_ratios;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& f = corpus[i].f;
        const auto dec = atomic_decompose(f, p, s.bank, s.lattice);
        const double hn = hardy_norm(f, p, s.bank, s.lattice, HardyMethod::SmoothMaximal);
        json atoms = json::array();
        std::size_t member_failed = 0;
        std::unique_ptr<Csv> values;
        const std::string values_name = "atoms_" + corpus[i].name + ".csv";
        if (cfg.export_atoms) values = std::make_unique<Csv>(out / values_name, std::vector<std::string>{"atom", "i", "x", "value"});
        for (std::size_t k = 0; k < dec.atoms.size(); ++k) {
            const auto& a = dec.atoms[k];
            const auto chk = atom_validate(a, p, 2.0, dec.moment_order, cfg.tol.atom);
            if (!chk.pass()) ++member_failed;
            atoms.push_back({{"lambda", dec.lambdas[k]},
                             {"cube", {{"j", a.cube.scale}, {"k", a.cube.index}}},
                             {"qstar", {{"first", a.qstar.first}, {"count", a.qstar.count}}},
                             {"level", a.level},
                             {"atom_csv_ref", cfg.export_atoms ? json(values_name + "#" + std::to_string(k)) : json()}});
            csv.row({corpus[i].name, std::to_string(k), num(dec.lambdas[k]), std::to_string(a.cube.scale),
                     std::to_string(a.cube.index), std::to_string(a.qstar.first), std::to_string(a.qstar.count),
                     std::to_string(a.level), num(chk.norm), num(chk.bound), num(chk.worst_moment),
                     chk.pass() ? "1" : "0"});
            if (values)
                for (std::size_t w = 0; w < a.window.size(); ++w)
                    values->row({std::to_string(k), std::to_string(a.first + w), num(s.grid.point(a.first + w)),
                                 num(a.window[w])});
        }
        failed += member_failed;
        json audit = nullptr;
        if (!f.is_zero()) {
            const auto levels = level_sets(f, s.bank);
            const auto sel = select_cubes(levels, s.lattice);
            const auto au = audit_selection(levels, sel, s.lattice);
            audit = {{"cubes_checked", au.cubes_checked},
                     {"anchor_ratio", au.anchor_ratio},
                     {"covering_ratio", au.covering_ratio},
                     {"pass", au.pass}};
        }
        a_ratios.push_back(ratio(dec.a_functional, hn));
        members.push_back({{"name", corpus[i].name},
                           {"atom_count", dec.atoms.size()},
                           {"atoms_failed", member_failed},
                           {"a_functional", dec.a_functional},
                           {"hardy_norm", hn},
                           {"a_over_hardy", a_ratios.back()},
                           {"defect_l2", dec.defect_l2},
                           {"defect_lp", dec.defect_lp},
                           {"reconstruction_pass", dec.defect_l2 < cfg.tol.reconstruction},
                           {"dilation_constant", dec.dilation_constant},
                           {"unassigned", dec.unassigned},
                           {"levels", {{"min", dec.l_min}, {"max", dec.l_max}}},
                           {"selection_audit", audit},
                           {"atoms", atoms}});
    }
    rep["truncation_tails"] = truncation_tails(corpus, s.bank);
    rep["moment_order"] = minimal_moment_order(p);
    rep["members"] = members;
    rep["a_over_hardy"] = stats(a_ratios);
    rep["atoms_failed"] = failed;
    rep["pass"] = failed == 0;
    write_json(out / "decompose.json", rep);
    return failed == 0 ? ExitPass : ExitVerification;
}

int cmd_paraproduct(const RunConfig& cfg, const fs::path& out) {
    json rep = header(cfg, "paraproduct");
    const auto s = make_setup(cfg, cfg.L);
    const auto p = cfg.exponent.build(s.grid);
    const ParaproductConfig pc(s.bank, s.lattice);
    const Paraproduct pi(BmoSymbol::make(cfg.symbol.build(s.grid, cfg.seed)), pc);
    const auto& b = pi.symbol().b;
    const auto one = domain_constant(s.grid);
    const auto pib1 = pi.apply(one);
    const auto adj1 = pi.adjoint(one);
    const auto bproj = band_projection_periodic(b, s.bank);

    Csv ident(out / "identity.csv", {"i", "x", "b", "band_projection", "pi_b_one", "pi_b_adjoint_one"});
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        ident.row({std::to_string(i), num(s.grid.point(i)), num(b[i]), num(bproj[i]), num(pib1[i]), num(adj1[i])});

    const double bsup = b.sup_norm();
    const double defect_b = inner_sup_gap(pib1, b);
    const double defect_proj = inner_sup_gap(pib1, bproj);
    const double adj_sup = inner_sup_gap(adj1, SampledFunction(s.grid));
    const double scale = bsup > 0.0 ? bsup : 1.0;
    const bool identity_pass = defect_proj <= cfg.tol.identity * scale && adj_sup <= cfg.tol.identity;

    const double carleson = pi.carleson();
    const double bmo = pi.symbol().bmo;
    const auto sample = make_kernel_sample(0.5 * s.grid.half_width(), std::max(s.grid.spacing(), std::ldexp(1.0, -7)), 400, cfg.seed);
    const auto kb = kernel_bounds(pi, sample, 1.0);

    const auto corpus = cfg.corpus(s.grid);
    Csv csv(out / "paraproduct.csv", {"member", "name", "l2_ratio", "hardy_ratio", "lebesgue_over_hardy"});
    std::vector<double> l2r, hr, lr;
    json members = json::array();
    const bool lh = p.log_holder().pass;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& f = corpus[i].f;
        const auto pf = pi.apply(f);
        l2r.push_back(ratio(pf.l2_norm(), bmo * f.l2_norm()));
        double h_ratio = std::numeric_limits<double>::quiet_NaN();
        double l_ratio = std::numeric_limits<double>::quiet_NaN();
        if (lh) {
            const double hf = hardy_norm(f, p, s.bank, s.lattice, HardyMethod::SmoothMaximal);
            h_ratio = ratio(hardy_norm(pf, p, s.bank, s.lattice, HardyMethod::SmoothMaximal), hf);
            l_ratio = ratio(luxemburg_norm(pf, p), hf);
        }
        hr.push_back(h_ratio);
        lr.push_back(l_ratio);
        members.push_back({{"name", corpus[i].name},
                           {"l2_ratio", l2r.back()},
                           {"hardy_ratio", h_ratio},
                           {"lebesgue_over_hardy", l_ratio}});
        csv.row({std::to_string(i), corpus[i].name, num(l2r.back()), num(h_ratio), num(l_ratio)});
    }

    rep["truncation_tails"] = truncation_tails(corpus, s.bank);
    rep["bmo_norm"] = bmo;
    rep["carleson_sup"] = carleson;
    rep["carleson_ratio"] = ratio(carleson, bmo * bmo);
    rep["identity"] = {{"b_sup", bsup},
                       {"pi_b_one_minus_b", defect_b},
                       {"pi_b_one_minus_band_projection", defect_proj},
                       {"pi_b_adjoint_one_sup", adj_sup},
                       {"truncation_tail", 1.0 - s.bank.band_energy_fraction(b)},
                       {"pass", identity_pass}};
    rep["kernel_bound_ratios"] = {{"size_sup", kb.size_sup},
                                  {"size_ratio", kb.size_ratio},
                                  {"smooth_x_sup", kb.smooth_x_sup},
                                  {"smooth_y_sup", kb.smooth_y_sup}};
    rep["l2_ratio"] = stats(l2r);
    rep["hardy_ratio"] = stats(hr);
    rep["lebesgue_over_hardy"] = stats(lr);
    rep["members"] = members;
    rep["pass"] = identity_pass;
    write_json(out / "paraproduct.json", rep);
    return identity_pass ? ExitPass : ExitVerification;
}

int cmd_verify_czo(const RunConfig& cfg, const fs::path& out) {
    json rep = header(cfg, "verify-czo");
    const auto T = make_operator(cfg.op, cfg.op_scale);
    const auto base = make_setup(cfg, cfg.L);
    const auto kc = kernel_condition_check(T, 4000, cfg.seed);
    const double t1 = pairing_battery_max(T, base.grid, PairingSide::Right);
    const double t1s = pairing_battery_max(T, base.grid, PairingSide::Left);
    rep["operator"] = {{"name", T.name()}, {"scale", T.scale()}, {"epsilon", T.epsilon()},
                       {"size_constant", T.size_constant()}};
    rep["kernel_conditions"] = {{"size_sup", kc.size_sup},     {"smooth_x_sup", kc.smooth_x_sup},
                                {"smooth_y_sup", kc.smooth_y_sup}, {"size_ratio", kc.size_ratio},
                                {"samples", kc.pairs},         {"pass", kc.pass}};
    rep["pairings"] = {{"T1_battery_max", t1}, {"Tstar1_battery_max", t1s}, {"tolerance", pairing_tolerance}};

    Csv csv(out / "orthogonality.csv", {"level", "j", "jp", "max_ratio", "max_coeff", "pairs", "route_gap"});
    OrthogonalityOptions opt;
    opt.j_lo = cfg.czo_j_lo;
    opt.j_hi = cfg.czo_j_hi;
    opt.route_tol = cfg.tol.route;
    json orth = json::array();
    std::vector<double> cemp;
    bool hypothesis_ok = false;
    for (int level : run_levels(cfg)) {
        const auto s = make_setup(cfg, level);
        const auto r = almost_orthogonality_check(T, s.bank, s.lattice, opt);
        hypothesis_ok = r.hypothesis_ok;
        for (const auto& row : r.rows)
            csv.row({std::to_string(level), std::to_string(row.j), std::to_string(row.jp), num(row.max_ratio),
                     num(row.max_coeff), std::to_string(row.pairs), num(row.route_gap)});
        orth.push_back({{"level", level},
                        {"c_emp", r.c_emp},
                        {"finite", r.finite},
                        {"flagged", r.flagged},
                        {"note", r.note},
                        {"max_route_gap", r.max_route_gap}});
        if (r.hypothesis_ok) cemp.push_back(r.c_emp);
    }
    rep["orthogonality"] = orth;
    bool pass = true;
    if (hypothesis_ok) {
        for (double c : cemp) pass = pass && std::isfinite(c);
        if (cemp.size() >= 2) {
            const bool stable = refinement_stable(*std::min_element(cemp.begin(), cemp.end()),
                                                  *std::max_element(cemp.begin(), cemp.end()), cfg.tol.stability);
            rep["orthogonality_stable"] = stable;
            pass = pass && stable;
        }
    }

    const auto p = cfg.exponent.build(base.grid);
    const auto corpus = cfg.corpus(base.grid);
    std::vector<SampledFunction> fs;
    for (const auto& m : corpus) fs.push_back(m.f);
    json harness;
    try {
        const auto h1 = hardy_boundedness_harness(T, p, fs, base.bank, base.lattice);
        const auto h2 = hardy_boundedness_harness(T.scaled(2.0), p, fs, base.bank, base.lattice);
        double homog = 0.0;
        for (std::size_t i = 0; i < h1.ratios.size(); ++i)
            if (std::isfinite(h1.ratios[i]) && h1.ratios[i] > 0.0)
                homog = std::max(homog, std::abs(h2.ratios[i] / h1.ratios[i] - 2.0));
        harness = {{"refused", false},          {"ratios", h1.ratios},         {"max_ratio", h1.max_ratio},
                   {"median_ratio", h1.median_ratio}, {"finite", h1.finite}, {"gate_value", h1.gate_value},
                   {"homogeneity_defect", homog}};
        if (hypothesis_ok) pass = pass && h1.finite;
    } catch (const GateRefusal& e) {
        harness = {{"refused", true}, {"reason", e.what()}};
    } catch (const PreconditionError& e) {
        harness = {{"skipped", true}, {"reason", e.what()}};
    }
    rep["harness"] = harness;
    rep["truncation_tails"] = truncation_tails(corpus, base.bank);

    if (t1 > pairing_tolerance && t1s <= pairing_tolerance) {
        const auto corrected = correct_operator(T, base.bank, base.lattice);
        const double after = corrected.battery_max(PairingSide::Right);
        const double adj_after = corrected.battery_max(PairingSide::Left);
        rep["correction"] = {{"T1_before", t1},
                             {"T1_after", after},
                             {"drop_factor", ratio(t1, after)},
                             {"Tstar1_before", t1s},
                             {"Tstar1_after", adj_after},
                             {"t1_bmo_norm", corrected.correction().symbol().bmo}};
    }
    rep["hypothesis_ok"] = hypothesis_ok;
    rep["pass"] = pass;
    write_json(out / "verify_czo.json", rep);
    return pass ? ExitPass : ExitVerification;
}

int run_command(const CommandOptions& opt, std::ostream& err) {
    try {
        const auto cfg = load_config(opt.config_path, opt.grid_level, opt.seed);
        const fs::path out(opt.out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw ConfigError("cannot create output directory '" + opt.out_dir + "'");
        if (opt.command == "norm") return cmd_norm(cfg, out);
        if (opt.command == "decompose") return cmd_decompose(cfg, out);
        if (opt.command == "paraproduct") return cmd_paraproduct(cfg, out);
        if (opt.command == "verify-czo") return cmd_verify_czo(cfg, out);
        throw ConfigError("unknown command '" + opt.command + "'");
    } catch (const NumericalIntegrityError& e) {
        err << "numerical integrity error: " << e.what() << '\n';
        return ExitIntegrity;
    } catch (const Error& e) {
        err << "configuration error: " << e.what() << '\n';
        return ExitConfig;
    }
}

} // namespace vh
