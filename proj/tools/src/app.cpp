#include "obsmix_cli/app.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "obsmix/combinatorics.hpp"
#include "obsmix/entropy.hpp"
#include "obsmix/errors.hpp"
#include "obsmix/lattice.hpp"
#include "obsmix/lift.hpp"
#include "obsmix/thermo.hpp"
#include "obsmix_cli/config.hpp"

#ifndef OBSMIX_VERSION
#define OBSMIX_VERSION "0.0.0"
#endif

namespace obsmix::cli {

namespace {

namespace cb = obsmix::combinatorics;

struct Table {
    std::vector<std::string> metadata; ///< "key: value" lines after the config echo
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    bool verification_failed = false;
    std::string plot_script; ///< gnuplot text; %DATA% is replaced by the CSV path
};

struct Context {
    Config &config;
    std::uint64_t seed;
    int threads;
    std::optional<double> entropy;
};

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string csv_cell(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

int as_int(long long v, const char *what) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(std::string(what) + " is out of range");
    return static_cast<int>(v);
}

lattice::Couplings read_couplings(Config &c) {
    lattice::Couplings k;
    k.t1 = c.get_double("lattice", "t1", k.t1);
    k.v1 = c.get_double("lattice", "v1", k.v1);
    k.t2 = c.get_double("lattice", "t2", k.t2);
    k.v2 = c.get_double("lattice", "v2", k.v2);
    return k;
}

lattice::LatticeSpec read_lattice(Config &c) {
    lattice::LatticeSpec spec;
    spec.L_A = as_int(c.get_int("lattice", "L_A", 6), "L_A");
    spec.L_B = as_int(c.get_int("lattice", "L_B", 4), "L_B");
    spec.N_plus = as_int(c.get_int("lattice", "N_plus", 2), "N_plus");
    spec.N_minus = as_int(c.get_int("lattice", "N_minus", 2), "N_minus");
    spec.couplings = read_couplings(c);
    spec.occupancy = lattice::occupancy_from_string(c.get_string("lattice", "occupancy", "independent-species"));
    spec.statistics = lattice::statistics_from_string(c.get_string("lattice", "statistics", "fermion"));
    return spec;
}

// ---- volumes ---------------------------------------------------------------

Table cmd_volumes(Context &ctx) {
    Config &c = ctx.config;
    const int L_A = as_int(c.get_int("volumes", "L_A", 5), "L_A");
    const int L_B = as_int(c.get_int("volumes", "L_B", 5), "L_B");
    const auto labels = c.get_string_list("volumes", "labels", {"3:3:3:6"});
    const auto observers = c.get_string_list("volumes", "observers", {"rick", "morty1", "morty2", "morty3"});
    c.reject_unknown({"volumes"});

    std::vector<cb::Observer> parsed;
    for (const auto &name : observers) parsed.push_back(cb::observer_from_string(name));
    const cb::BoxGeometry geom(L_A, L_B);

    Table t;
    t.header = {"observer", "L_A", "L_B", "i", "N_plus", "N_A", "N", "ln_V_exact", "ln_V_stirling", "rel_err", "error"};
    for (const auto &text : labels) {
        const auto parts = split_list(text, ':');
        if (parts.size() != 4) throw ConfigError("volume label '" + text + "' must be i:N_plus:N_A:N");
        cb::RickLabel label;
        try {
            label = {std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2]), std::stoi(parts[3])};
        } catch (const std::logic_error &) {
            throw ConfigError("volume label '" + text + "' must contain integers");
        }
        for (auto observer : parsed) {
            std::vector<std::string> row{std::string(cb::to_string(observer)), num(L_A), num(L_B), num(label.i),
                                         num(label.N_plus), num(label.N_A), num(label.N)};
            try {
                cb::ExactVolume V;
                switch (observer) {
                case cb::Observer::rick:
                    label.validate(geom);
                    V = cb::volume_rick(geom, label);
                    break;
                case cb::Observer::morty1: V = cb::volume_morty1(geom, {label.N_plus, label.N_A, label.N}); break;
                case cb::Observer::morty2: V = cb::volume_morty2(geom, label.N_A, label.N); break;
                case cb::Observer::morty3: V = cb::volume_morty3_perceived(geom, label.N_A, label.N); break;
                }
                if (V == 0) throw DomainError("empty macrostate");
                const double exact = cb::log_exact(V);
                const double approx = cb::stirling_log_volume(observer, geom, label);
                const double rel = exact == 0.0 ? (approx == 0.0 ? 0.0 : std::abs(approx))
                                                : std::abs(approx - exact) / std::abs(exact);
                row.insert(row.end(), {num(exact), num(approx), num(rel), ""});
            } catch (const DomainError &e) {
                row.insert(row.end(), {"nan", "nan", "nan", e.what()});
            }
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

// ---- static-scan -----------------------------------------------------------

Table cmd_static_scan(Context &ctx) {
    Config &c = ctx.config;
    lattice::ScanOptions opt;
    opt.couplings = read_couplings(c);
    opt.occupancy = lattice::occupancy_from_string(c.get_string("lattice", "occupancy", "independent-species"));
    opt.statistics = lattice::statistics_from_string(c.get_string("lattice", "statistics", "fermion"));
    opt.threads = ctx.threads;

    const std::string ladder = c.get_string("scan", "ladder", "symmetric");
    std::vector<lattice::ScanPoint> points;
    if (ladder == "symmetric") {
        const auto L = c.get_int_list("scan", "L", {6, 8, 10, 12});
        const int n = as_int(c.get_int("scan", "n", 2), "n");
        points = lattice::symmetric_ladder(L, n);
    } else if (ladder == "asymmetric") {
        const auto L_A = c.get_int_list("scan", "L_A", {6, 7});
        const int N_A = as_int(c.get_int("scan", "N_A", 3), "N_A");
        const int N_B = as_int(c.get_int("scan", "N_B", 2), "N_B");
        points = lattice::asymmetric_ladder(L_A, N_A, N_B);
    } else if (ladder == "explicit") {
        for (const auto &item : c.get_string_list("scan", "points", {})) {
            const auto parts = split_list(item, ':');
            if (parts.size() != 4) throw ConfigError("scan point '" + item + "' must be L_A:L_B:N_A:N_B");
            try {
                points.push_back({std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2]), std::stoi(parts[3])});
            } catch (const std::logic_error &) {
                throw ConfigError("scan point '" + item + "' must contain integers");
            }
        }
    } else {
        throw ConfigError("[scan] ladder must be symmetric, asymmetric or explicit");
    }
    opt.solver_tol = c.get_double("scan", "solver_tol", opt.solver_tol);
    opt.spectrum_limit = static_cast<std::size_t>(c.get_uint("scan", "spectrum_limit", opt.spectrum_limit));
    const bool plot = c.get_bool("output", "plot", false);
    c.reject_unknown({"lattice", "scan", "output"});

    const auto records = lattice::run_static_scan(points, opt);
    Table t;
    t.metadata = {"ensemble: fixed (N_plus, N_minus) block", "observers: rick vs morty1",
                  "expansion point: morty1 observational temperature"};
    t.header = {"L_A", "L_B", "N_A", "N_B", "dim_block", "dS", "T_obs", "dW_exact", "dW_0", "dW_1", "dW_2",
                "dW_av", "dW_av2", "error"};
    for (const auto &r : records) {
        const bool ok = r.error.empty();
        auto v = [&](double x) { return ok ? num(x) : std::string("nan"); };
        t.rows.push_back({num(r.point.L_A), num(r.point.L_B), num(r.point.N_A), num(r.point.N_B), num(r.dim_block),
                          num(r.dS), v(r.T_obs), v(r.dW_exact), v(r.dW0), v(r.dW1), v(r.dW2), v(r.dW_av),
                          v(r.dW_av2), r.error});
    }
    if (plot)
        t.plot_script = "set datafile separator ','\n"
                        "set key autotitle columnhead\n"
                        "set xlabel 'L_A + L_B'\n"
                        "set ylabel 'work difference'\n"
                        "plot '%DATA%' using ($1+$2):8 with linespoints, \\\n"
                        "     '' using ($1+$2):9 with linespoints, \\\n"
                        "     '' using ($1+$2):10 with linespoints, \\\n"
                        "     '' using ($1+$2):11 with linespoints, \\\n"
                        "     '' using ($1+$2):12 with linespoints, \\\n"
                        "     '' using ($1+$2):13 with linespoints\n";
    return t;
}

// ---- evolve ----------------------------------------------------------------

Table cmd_evolve(Context &ctx) {
    Config &c = ctx.config;
    const auto spec = read_lattice(c);
    lattice::EvolutionPlan plan;
    const int points = as_int(c.get_int("evolve", "points", 60), "points");
    const double t_max = c.get_double("evolve", "t_max", 20.0);
    plan.times = lattice::EvolutionPlan::uniform_grid(points, t_max);
    plan.method = lattice::method_from_string(c.get_string("evolve", "method", "auto"));
    plan.initial = lattice::initial_mode_from_string(c.get_string("evolve", "initial", "haar-in-macrostate"));
    plan.krylov_tol = c.get_double("evolve", "krylov_tol", plan.krylov_tol);
    plan.krylov_dim = as_int(c.get_int("evolve", "krylov_dim", plan.krylov_dim), "krylov_dim");
    plan.dense_threshold = static_cast<std::size_t>(c.get_uint("evolve", "dense_threshold", plan.dense_threshold));
    plan.spectrum_limit = static_cast<std::size_t>(c.get_uint("evolve", "spectrum_limit", plan.spectrum_limit));
    lattice::RickTarget target = lattice::RickTarget::segregated(spec);
    target.blue_left = as_int(c.get_int("evolve", "blue_left", target.blue_left), "blue_left");
    target.red_left = as_int(c.get_int("evolve", "red_left", target.red_left), "red_left");
    const bool plot = c.get_bool("output", "plot", false);
    c.reject_unknown({"lattice", "evolve", "output"});
    plan.seed = ctx.seed;
    plan.threads = ctx.threads;

    const auto series = lattice::run_mixing_timeseries(spec, plan, target);
    Table t;
    t.metadata = {"S_init: " + num(series.S_init),
                  "S_fin: " + num(series.S_fin),
                  "E0: " + num(series.E0),
                  "dimension: " + num(series.dimension),
                  "method: " + std::string(lattice::to_string(series.method)),
                  "max_step_error: " + num(series.max_step_error),
                  "initial: " + std::string(lattice::to_string(plan.initial)),
                  "ensemble: fixed (N_plus, N_minus) block"};
    t.header = {"t", "S_rick", "S_morty1", "E_mean", "beta_obs", "W", "dW_exact", "dW_av", "dW_av2"};
    for (const auto &r : series.records)
        t.rows.push_back({num(r.t), num(r.S_rick), num(r.S_morty1), num(r.E_mean), num(r.beta_obs), num(r.W),
                          num(r.dW_exact), num(r.dW_av), num(r.dW_av2)});
    if (plot)
        t.plot_script = "set datafile separator ','\n"
                        "set key autotitle columnhead\n"
                        "set multiplot layout 2,1\n"
                        "set xlabel 't'\n"
                        "plot '%DATA%' using 1:2 with lines, '' using 1:3 with lines\n"
                        "plot '%DATA%' using 1:6 with lines, '' using 1:7 with lines, \\\n"
                        "     '' using 1:8 with lines, '' using 1:9 with lines\n"
                        "unset multiplot\n";
    return t;
}

// ---- gas-table -------------------------------------------------------------

Table cmd_gas_table(Context &ctx) {
    Config &c = ctx.config;
    const auto models = c.get_string_list(
        "gas", "models", {"ideal", "debye-low-T", "quantum-critical-metal", "liquid-helium", "s-wave-superconductor"});
    const double dS_per_N = c.get_double("gas", "dS_per_N", std::numbers::ln2);
    const double k = c.get_double("gas", "k", 1.0);
    std::set<std::string> sections{"gas"};

    Table t;
    t.header = {"model", "N", "T", "dS", "heat_capacity", "log_slope", "zeroth", "first", "second", "bracket",
                "bracket_general", "dW", "warning"};
    std::vector<thermo::GasModel> parsed;
    for (const auto &name : models) {
        thermo::GasModel g;
        g.kind = thermo::gas_kind_from_string(name);
        const std::string s = "gas:" + name;
        sections.insert(s);
        g.k = k;
        g.N = c.get_double(s, "N", 1.0);
        g.T = c.get_double(s, "T", g.kind == thermo::GasKind::liquid_helium ? 1.5 : 1.0);
        switch (g.kind) {
        case thermo::GasKind::ideal: break;
        case thermo::GasKind::debye_low_t: g.T_D = c.get_double(s, "T_D", 10.0); break;
        case thermo::GasKind::quantum_critical_metal:
            g.m = c.get_double(s, "m", 1.0);
            g.A = c.get_double(s, "A", 1.0);
            break;
        case thermo::GasKind::liquid_helium:
            g.T_c = c.get_double(s, "T_c", 1.0);
            g.A = c.get_double(s, "A", 1.0);
            g.B = c.get_double(s, "B", 1.0);
            g.alpha = c.get_double(s, "alpha", 0.1);
            break;
        case thermo::GasKind::s_wave_superconductor:
            g.A = c.get_double(s, "A", 1.0);
            g.Delta = c.get_double(s, "Delta", 1.0);
            break;
        }
        parsed.push_back(g);
    }
    c.reject_unknown(sections);
    for (const auto &section : c.sections())
        if (section.starts_with("gas:") && !sections.contains(section))
            throw ConfigError("section [" + section + "] names a model missing from [gas] models");

    for (const auto &g : parsed) {
        const double dS = dS_per_N * g.N;
        const auto terms = thermo::gas_model_terms(g, dS);
        const double C = thermo::gas_heat_capacity(g, g.T);
        const double slope = thermo::gas_log_heat_capacity_slope(g);
        const double general = thermo::heat_capacity_bracket(C, slope, dS, 2);
        std::vector<std::string> warnings;
        if (std::abs(dS / C) > 0.1)
            warnings.push_back(fmt::format("dS/C = {:.3g}; expansion holds only for small entropy differences", dS / C));
        if (g.kind == thermo::GasKind::liquid_helium && g.T / g.T_c - 1.0 < 0.05)
            warnings.push_back("close to T_c; second-order factor diverges");
        if (std::abs(terms.second) > std::abs(terms.first))
            warnings.push_back("second-order term exceeds first-order term");
        std::string warning;
        for (const auto &w : warnings) warning += (warning.empty() ? "" : "; ") + w;
        t.rows.push_back({std::string(thermo::to_string(g.kind)), num(g.N), num(g.T), num(dS), num(C), num(slope),
                          num(terms.zeroth), num(terms.first), num(terms.second), num(terms.total()), num(general),
                          num(g.k * g.T * dS * terms.total()), warning});
    }
    return t;
}

// ---- verify-lift -----------------------------------------------------------

Table cmd_verify_lift(Context &ctx) {
    Config &c = ctx.config;
    const int L = as_int(c.get_int("lift", "L", 3), "L");
    const int N = as_int(c.get_int("lift", "N", 2), "N");
    const int lemma_samples = as_int(c.get_int("lift", "lemma_samples", 200), "lemma_samples");
    const double lemma_tol = c.get_double("lift", "lemma_tol", 1e-10);
    lift::WorkEqualityOptions opt;
    opt.unitary_samples = as_int(c.get_int("lift", "unitary_samples", 20), "unitary_samples");
    opt.fiber_samples = as_int(c.get_int("lift", "fiber_samples", 3), "fiber_samples");
    opt.tol = c.get_double("lift", "work_tol", 1e-8);
    c.reject_unknown({"lift"});
    opt.seed = ctx.seed;

    const auto lemma = lift::verify_lemma_overlap(lemma_samples, lemma_tol, ctx.seed);
    const auto perceived = lift::PerceivedSystem::random(L, N, ctx.seed);
    const auto work = lift::verify_work_equality(perceived, opt);

    Table t;
    t.header = {"check", "value", "tol", "passed", "detail"};
    auto pass = [](bool ok) { return std::string(ok ? "PASS" : "FAIL"); };
    t.rows.push_back({"lemma_overlap", num(lemma.max_deviation), num(lemma.tol), pass(lemma.passed()),
                      fmt::format("samples={} seed={}", lemma.samples, lemma.seed)});
    t.rows.push_back({"work_equality", num(work.max_deviation), num(work.tol), pass(work.max_deviation <= work.tol),
                      fmt::format("pairs={} L={} N={} seed={}", work.pairs, L, N, work.seed)});
    t.rows.push_back({"fiber_independence", num(work.max_fiber_spread), num(2.0 * work.tol),
                      pass(work.max_fiber_spread <= 2.0 * work.tol), fmt::format("fibers={}", opt.fiber_samples)});
    for (const auto &a : work.assumptions)
        t.rows.push_back({"assumption " + a.name, num(a.deviation), num(work.tol), pass(a.passed), a.description});
    t.rows.push_back({"coarse_grained_average", num(std::abs(work.cg_sample_mean - work.cg_exact)),
                      num(5.0 * work.cg_standard_error + 1e-12), pass(work.cg_passed),
                      fmt::format("mean={} exact={}", num(work.cg_sample_mean), num(work.cg_exact))});
    for (const auto &ctl : work.controls)
        t.rows.push_back({"negative control: " + ctl.name, num(ctl.deviation), "", pass(ctl.flagged()),
                          "expected " + ctl.expected + "; detected " + (ctl.violated.empty() ? "none" : ctl.violated)});
    t.verification_failed = !(lemma.passed() && work.passed());
    return t;
}

// ---- selftest --------------------------------------------------------------

Table cmd_selftest(Context &ctx) {
    ctx.config.reject_unknown({"selftest"});
    Table t;
    t.header = {"check", "passed", "detail"};
    auto record = [&](const std::string &name, bool ok, const std::string &detail) {
        t.rows.push_back({name, ok ? "PASS" : "FAIL", detail});
        if (!ok) t.verification_failed = true;
    };

    {
        long cases = 0;
        bool ok = true;
        for (int LA = 1; LA <= 4; ++LA)
            for (int LB = 1; LB <= 4; ++LB) {
                const cb::BoxGeometry g(LA, LB);
                for (int N = 0; N <= 4; ++N) {
                    for (int NA = 0; NA <= N; ++NA) {
                        cb::ExactVolume m2 = 0;
                        for (int Np = 0; Np <= N; ++Np) {
                            cb::ExactVolume m1 = 0;
                            for (int i = 0; i <= std::min(Np, NA); ++i) {
                                const cb::RickLabel l{i, Np, NA, N};
                                if (l.fits(g)) m1 += cb::volume_rick(g, l);
                            }
                            ok = ok && m1 == cb::volume_morty1(g, {Np, NA, N});
                            m2 += m1;
                            ++cases;
                        }
                        ok = ok && m2 == cb::volume_morty2(g, NA, N) && m2 == cb::volume_morty2_symmetric(g, NA, N);
                    }
                    for (int Np = 0; Np <= N; ++Np) {
                        cb::ExactVolume total = 0;
                        for (int NA = 0; NA <= N; ++NA) total += cb::volume_morty1(g, {Np, NA, N});
                        ok = ok && total == cb::volume_accessible(g, Np, N);
                    }
                }
            }
        record("volume sum identities", ok, fmt::format("{} (N+, N_A, N) cases on boxes up to 4x4", cases));
    }
    {
        bool ok = true;
        int blocks = 0;
        for (int LA = 1; LA <= 3; ++LA)
            for (int LB = 1; LB <= 3; ++LB)
                for (int Np = 0; Np <= 2; ++Np)
                    for (int Nm = 0; Nm <= 2; ++Nm) {
                        lattice::LatticeSpec spec;
                        spec.L_A = LA;
                        spec.L_B = LB;
                        spec.N_plus = Np;
                        spec.N_minus = Nm;
                        const auto basis = lattice::Basis::build(spec);
                        const auto rick = lattice::rick_partition(spec, basis);
                        const cb::BoxGeometry g(LA, LB);
                        for (const auto &s : rick.sectors()) {
                            const cb::RickLabel l{s.key[0], Np, s.key[0] + s.key[1], Np + Nm};
                            ok = ok && cb::volume_rick(g, l) == s.volume();
                        }
                        ++blocks;
                    }
        record("lattice sectors match volumes", ok, fmt::format("{} blocks", blocks));
    }
    {
        lattice::LatticeSpec a;
        a.L_A = 3;
        a.L_B = 2;
        a.N_plus = 2;
        a.N_minus = 1;
        lattice::LatticeSpec b = a;
        std::swap(b.N_plus, b.N_minus);
        const auto ea = lattice::eigenvalues(lattice::build_hamiltonian(a, lattice::Basis::build(a)));
        const auto eb = lattice::eigenvalues(lattice::build_hamiltonian(b, lattice::Basis::build(b)));
        const double dev = (ea - eb).cwiseAbs().maxCoeff();
        record("color-swap isospectrality", dev <= 1e-10, fmt::format("max deviation {:.3g}", dev));
    }
    {
        const auto spectrum = lattice::block_spectrum([] {
            lattice::LatticeSpec s;
            s.L_A = 3;
            s.L_B = 3;
            s.N_plus = 2;
            s.N_minus = 1;
            return s;
        }());
        double worst = 0.0;
        const double lo = std::log(static_cast<double>(spectrum.ground_degeneracy()));
        const double hi = std::log(static_cast<double>(spectrum.dimension()));
        for (int k = 1; k < 20; ++k) {
            const double target = lo + (hi - lo) * k / 20.0;
            const double beta = thermo::solve_beta_for_entropy(spectrum, target);
            worst = std::max(worst, std::abs(thermo::thermal_entropy(spectrum, beta) - target));
        }
        record("temperature solver roundtrip", worst <= 1e-10, fmt::format("max residual {:.3g}", worst));
    }
    {
        const auto lemma = lift::verify_lemma_overlap(50, 1e-10, ctx.seed);
        record("lifted overlap lemma", lemma.passed(), fmt::format("max deviation {:.3g}", lemma.max_deviation));
    }
    return t;
}

// ---- temperature -----------------------------------------------------------

Table cmd_temperature(Context &ctx) {
    Config &c = ctx.config;
    const auto spec = read_lattice(c);
    if (ctx.entropy) c.set("temperature", "entropy", format_double(*ctx.entropy));
    if (!c.has("temperature", "entropy")) throw ConfigError("temperature needs --entropy or [temperature] entropy");
    const double S = c.get_double("temperature", "entropy", 0.0);
    const double tol = c.get_double("temperature", "tol", 1e-10);
    const auto limit = static_cast<std::size_t>(c.get_uint("temperature", "spectrum_limit", 8192));
    c.reject_unknown({"lattice", "temperature"});

    const auto spectrum = lattice::block_spectrum(spec, limit);
    const double beta = thermo::solve_beta_for_entropy(spectrum, S, tol);
    const auto point = thermo::thermal_stats(spectrum, beta);
    Table t;
    t.header = {"S_target", "beta", "T", "S_vN", "mean_E", "ln_d", "ln_g0", "dimension"};
    t.rows.push_back({num(S), num(beta), beta > 0.0 ? num(1.0 / beta) : "inf", num(point.S_vN), num(point.mean_E),
                      num(std::log(static_cast<double>(spectrum.dimension()))),
                      num(std::log(static_cast<double>(spectrum.ground_degeneracy()))),
                      num(static_cast<long long>(spectrum.dimension()))});
    return t;
}

using Command = std::function<Table(Context &)>;

const std::map<std::string, Command> &commands() {
    static const std::map<std::string, Command> table{
        {"volumes", cmd_volumes},         {"static-scan", cmd_static_scan}, {"evolve", cmd_evolve},
        {"gas-table", cmd_gas_table},     {"verify-lift", cmd_verify_lift}, {"selftest", cmd_selftest},
        {"temperature", cmd_temperature},
    };
    return table;
}

const std::map<std::string, std::set<std::string>> &command_sections() {
    static const std::map<std::string, std::set<std::string>> table{
        {"volumes", {"volumes"}},
        {"static-scan", {"lattice", "scan", "output"}},
        {"evolve", {"lattice", "evolve", "output"}},
        {"gas-table", {"gas"}},
        {"verify-lift", {"lift"}},
        {"selftest", {"selftest"}},
        {"temperature", {"lattice", "temperature"}},
    };
    return table;
}

std::string render(const std::string &command, const Config &config, std::uint64_t seed, const Table &t) {
    std::string out;
    out += "# obsmix " OBSMIX_VERSION "\n";
    out += "# command: " + command + "\n";
    out += "# seed: " + std::to_string(seed) + "\n";
    out += "# config: " + config.origin() + "\n";
    for (const auto &line : config.echo()) out += "#   " + line + "\n";
    for (const auto &line : t.metadata) out += "# " + line + "\n";
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
    out += "\n";
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
        out += "\n";
    }
    return out;
}

int resolve_threads(const Options &options, Config &config) {
    const bool in_file = config.has("run", "threads");
    const int from_file = in_file ? as_int(config.get_int("run", "threads", 1), "threads") : 1;
    if (options.threads) return std::max(1, *options.threads);
    if (const char *env = std::getenv("OBSMIX_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::logic_error &) {
            throw ConfigError(std::string("OBSMIX_THREADS='") + env + "' is not an integer");
        }
    }
    return std::max(1, from_file);
}

} // namespace

const std::map<std::string, std::string> &presets() {
    static const std::map<std::string, std::string> table{
        {"ladder-symmetric", "; Symmetric ladder: two blue particles left, two red right, L/2 sites per side.\n"
                           "[lattice]\nt1 = 1\nv1 = 1\nt2 = 0.96\nv2 = 0.96\n\n"
                           "[scan]\nladder = symmetric\nL = 6, 8, 10, 12, 14\nn = 2\nspectrum_limit = 9000\n"},
        {"ladder-asymmetric", "; Asymmetric ladder: three blue left, two red right, L_B = floor(2 L_A / 3).\n"
                            "[lattice]\nt1 = 1\nv1 = 1\nt2 = 0.96\nv2 = 0.96\n\n"
                            "[scan]\nladder = asymmetric\nL_A = 6, 7\nN_A = 3\nN_B = 2\nspectrum_limit = 10000\n"},
        {"mixing-desk", "; Mixing run at desk scale: 6 + 4 sites, two particles of each color.\n"
                      "[lattice]\nL_A = 6\nL_B = 4\nN_plus = 2\nN_minus = 2\nt1 = 1\nv1 = 1\nt2 = 0.96\nv2 = 0.96\n\n"
                      "[evolve]\npoints = 60\nt_max = 20\nmethod = auto\ninitial = haar-in-macrostate\n\n"
                      "[run]\nseed = 1\n"},
    };
    return table;
}

const std::vector<std::string> &command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto &[name, fn] : commands()) out.push_back(name);
        return out;
    }();
    return names;
}

int execute(const Options &options, std::ostream &out, std::ostream &err) {
    try {
        const auto it = commands().find(options.command);
        if (it == commands().end()) throw ConfigError("unknown command '" + options.command + "'");
        if (options.config_path && options.preset) throw ConfigError("--config and --preset are mutually exclusive");

        Config config;
        if (options.config_path) {
            config = Config::from_file(*options.config_path);
        } else if (options.preset) {
            const auto p = presets().find(*options.preset);
            if (p == presets().end()) throw ConfigError("unknown preset '" + *options.preset + "'");
            config = Config::from_string(p->second, "preset:" + *options.preset);
        }
        const int threads = resolve_threads(options, config);
        if (options.seed) config.set("run", "seed", std::to_string(*options.seed));
        const std::uint64_t seed = config.get_uint("run", "seed", 1);
        config.reject_unknown({"run"});

        Context ctx{config, seed, threads, options.entropy};
        const Table table = it->second(ctx);
        const auto &allowed = command_sections().at(options.command);
        for (const auto &section : config.sections())
            if (section != "run" && !allowed.contains(section) &&
                !(options.command == "gas-table" && section.starts_with("gas:")))
                throw ConfigError("section [" + section + "] is not used by " + options.command);
        const std::string document = render(options.command, config, seed, table);

        if (options.out_path) {
            std::ofstream file(*options.out_path, std::ios::binary);
            if (!file) throw ConfigError("cannot write '" + *options.out_path + "'");
            file << document;
            if (!table.plot_script.empty()) {
                std::string script = table.plot_script;
                for (auto pos = script.find("%DATA%"); pos != std::string::npos; pos = script.find("%DATA%"))
                    script.replace(pos, 6, *options.out_path);
                std::ofstream gp(*options.out_path + ".gp", std::ios::binary);
                if (!gp) throw ConfigError("cannot write '" + *options.out_path + ".gp'");
                gp << script;
            }
        } else {
            out << document;
        }
        if (table.verification_failed) {
            err << "obsmix: verification failed\n";
            return exit_verification;
        }
        return exit_ok;
    } catch (const ConfigError &e) {
        err << "obsmix: config error: " << e.what() << "\n";
        return exit_config;
    } catch (const OutOfRange &e) {
        err << "obsmix: out of range: " << e.what() << "\n";
        return exit_domain;
    } catch (const DomainError &e) {
        err << "obsmix: domain error: " << e.what() << "\n";
        return exit_domain;
    }
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Observational entropy and ergotropy of a two-color lattice gas", "obsmix"};
    app.set_version_flag("--version", OBSMIX_VERSION);
    app.require_subcommand(1);

    Options options;
    std::string config_path, out_path, preset;
    std::uint64_t seed = 0;
    int threads = 0;
    double entropy = 0.0;

    const std::map<std::string, std::string> help{
        {"volumes", "Exact and Stirling log-volumes per observer"},
        {"static-scan", "Rick versus Morty 1 work differences over a geometry ladder"},
        {"evolve", "Entropy and ergotropy time series of the mixing quench"},
        {"gas-table", "Second-order work-difference bracket for model gases"},
        {"verify-lift", "Numerical checks of the color-blind lift"},
        {"selftest", "Exhaustive small-instance oracle checks"},
        {"temperature", "Observational temperature for a target entropy on the block spectrum"},
    };
    for (const auto &name : command_names()) {
        auto *sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config_path, "Configuration file (sections of key = value)");
        sub->add_option("--out", out_path, "Write CSV here instead of standard output");
        sub->add_option("--seed", seed, "Override [run] seed");
        sub->add_option("--threads", threads, "Worker threads (falls back to OBSMIX_THREADS)");
        sub->add_option("--preset", preset, "Built-in configuration")
            ->check(CLI::IsMember([] {
                std::vector<std::string> names;
                for (const auto &[n, text] : presets()) names.push_back(n);
                return names;
            }()));
        if (name == "temperature") sub->add_option("--entropy", entropy, "Target entropy in nats");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion &) {
        out << OBSMIX_VERSION << "\n";
        return exit_ok;
    } catch (const CLI::ParseError &e) {
        std::ostringstream msg;
        app.exit(e, msg, msg);
        err << msg.str();
        return exit_config;
    }

    for (auto *sub : app.get_subcommands()) {
        options.command = sub->get_name();
        if (sub->count("--config")) options.config_path = config_path;
        if (sub->count("--out")) options.out_path = out_path;
        if (sub->count("--seed")) options.seed = seed;
        if (sub->count("--threads")) options.threads = threads;
        if (sub->count("--preset")) options.preset = preset;
        if (options.command == "temperature" && sub->count("--entropy")) options.entropy = entropy;
    }
    return execute(options, out, err);
}

} // namespace obsmix::cli
