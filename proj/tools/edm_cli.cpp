// Command-line front end: single runs, diagonalization reports, fixed-point
// tables, phase-diagram sweeps, and truncated quantum oracle runs.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "edm/config.hpp"
#include "edm/diag.hpp"
#include "edm/dynamics.hpp"
#include "edm/io.hpp"
#include "edm/model.hpp"
#include "edm/oracle.hpp"
#include "edm/semiclassical.hpp"

namespace {

using namespace edm;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    long long seed = -1;
    bool check = false;
};

Config resolve_config(const CommonOpts& o) {
    Config cfg = default_config();
    if (!o.preset.empty()) {
        const auto text = preset_text(o.preset);
        if (!text) throw ConfigError("unknown preset: " + o.preset);
        cfg.merge(Config::parse_string(*text, "preset:" + o.preset));
    }
    if (!o.config_path.empty()) cfg.merge(Config::parse_file(o.config_path));
    if (o.seed >= 0) cfg.set("run", "seed", std::to_string(o.seed));
    return cfg;
}

ModelParams model_from_config(const Config& c) {
    ModelParams mp;
    mp.omega = c.get_double("model", "omega");
    mp.e_z = c.get_double("model", "e_z");
    mp.g = c.get_double("model", "g");
    mp.eps = c.get_double("model", "eps");
    mp.s = c.get_double("model", "s");
    mp.kappa1 = c.get_double("model", "kappa1");
    mp.kappa2 = c.get_double("model", "kappa2");
    mp.validate();
    return mp;
}

std::function<State(const State&, double)> make_rhs(const RunConfig& rc) {
    const ModelParams mp = rc.params;
    switch (rc.dissipator) {
    case DissipatorKind::Unitary:
        return [mp](const State& st, double) { return unitary_rhs(st, mp); };
    case DissipatorKind::Bare:
        return [mp](const State& st, double) { return bare_rhs(st, mp); };
    case DissipatorKind::AdHocRotated: {
        const SRMinimum sr = superradiant_minimum(mp, rc.branch);
        return [mp, sr](const State& st, double) { return adhoc_rotated_rhs(st, mp, sr); };
    }
    case DissipatorKind::Dressed: {
        const DiagonalizationResult dg = diagonalize(mp, rc.branch);
        const DressedCoefficients dc = dressed_coefficients(dg, mp);
        const auto keff = effective_viscosities(dg, rc.bath_a, rc.bath_s, mp);
        return [mp, dg, dc, keff](const State& st, double) {
            return dressed_rhs(st, mp, dg, dc, keff);
        };
    }
    }
    throw ConfigError("unknown dissipator kind");
}

int cmd_simulate(const Config& cfg, const CommonOpts& o) {
    const RunConfig rc = run_from_config(cfg);
    std::mt19937_64 rng(rc.seed);
    const State initial = make_initial_state(rc, rng);
    const auto rhs = make_rhs(rc);
    const Trajectory<State> traj = integrate(rhs, initial, rc.solver);

    std::optional<State> target;
    std::string target_label = "none";
    if (rc.dissipator == DissipatorKind::Bare) {
        const auto pts = bare_fixed_points(rc.params);
        double best = std::numeric_limits<double>::infinity();
        for (const State& fp : pts) {
            const double d = (traj.back() - fp).inf_norm();
            if (d < best) {
                best = d;
                target = fp;
            }
        }
        target_label = "bare fixed point";
    } else if (rc.dissipator == DissipatorKind::AdHocRotated ||
               rc.dissipator == DissipatorKind::Dressed) {
        target = superradiant_minimum(rc.params, rc.branch).state();
        target_label = "superradiant minimum";
    }

    std::optional<double> converged_at;
    const double ceps = cfg.get_double("run", "convergence_eps");
    if (target) converged_at = detect_convergence(traj, *target, ceps);

    json summary;
    summary["config"] = config_to_json(cfg);
    summary["initial_state"] = state_to_json(initial);
    summary["final_state"] = state_to_json(traj.back());
    summary["final_time"] = traj.t_back();
    summary["final_energy"] = energy(traj.back(), rc.params);
    summary["normal_energy"] = normal_minimum(rc.params).second;
    const auto minima = superradiant_minima(rc.params);
    summary["superradiant_energy"] = minima ? json(minima->first.energy) : json(nullptr);
    summary["target"] = target_label;
    summary["target_state"] = target ? state_to_json(*target) : json(nullptr);
    summary["target_energy"] = target ? json(energy(*target, rc.params)) : json(nullptr);
    summary["converged_at"] = converged_at ? json(*converged_at) : json(nullptr);
    summary["convergence_eps"] = ceps;

    std::ostringstream csv;
    write_trajectory_csv(csv, traj, rc.params, cfg);
    const std::filesystem::path dir(o.out_dir);
    write_text_file(dir / "trajectory.csv", csv.str());
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");

    std::cout << "final t=" << fmt17(traj.t_back()) << " energy="
              << fmt17(energy(traj.back(), rc.params)) << " target=" << target_label
              << (converged_at ? " converged_at=" + fmt17(*converged_at) : " not converged")
              << "\n"
              << "wrote " << (dir / "trajectory.csv").string() << ", "
              << (dir / "summary.json").string() << "\n";
    return 0;
}

int cmd_diagonalize(const Config& cfg, const CommonOpts& o) {
    const ModelParams mp = model_from_config(cfg);
    const int branch = static_cast<int>(cfg.get_int("run", "branch"));
    const DiagonalizationResult dg = diagonalize(mp, branch);
    const BogoliubovCoefficients bc = bogoliubov_coefficients(dg, mp);

    json j = diag_to_json(dg, bc);
    j["model"] = model_to_json(mp);
    j["normalization"] = json{{"channel1", bc.norm1()}, {"channel2", bc.norm2()}};
    const BathSpec ba = bath_from_config(cfg, "bath_a");
    const BathSpec bs = bath_from_config(cfg, "bath_s");
    const auto keff = effective_viscosities(dg, ba, bs, mp);
    j["kappa_eff"] = json{{"channel1", keff.first}, {"channel2", keff.second}};

    if (o.check) {
        const auto [e1_chi, e2_chi] = energies_full(mp, dg);
        const auto [e1_quad, e2_quad] = energies_quadratic(mp, dg);
        const double cross = std::max(std::fabs(e1_chi - e1_quad) / e1_quad,
                                      std::fabs(e2_chi - e2_quad) / e2_quad);
        const Eigen::Matrix4d round_trip =
            bogoliubov_forward_matrix(bc) * bogoliubov_inverse_matrix(dg, mp) -
            Eigen::Matrix4d::Identity();
        const DressedCoefficients closed = dressed_coefficients(dg, mp);
        const DressedCoefficients generic = dressed_coefficients_generic(bc, mp);
        const double table = std::max(
            {std::fabs(closed.a1 - generic.a1), std::fabs(closed.b1 - generic.b1),
             std::fabs(closed.c1 - generic.c1), std::fabs(closed.d1 - generic.d1),
             std::fabs(closed.e1 - generic.e1), std::fabs(closed.f1 - generic.f1),
             std::fabs(closed.a2 - generic.a2), std::fabs(closed.b2 - generic.b2),
             std::fabs(closed.c2 - generic.c2), std::fabs(closed.d2 - generic.d2),
             std::fabs(closed.e2 - generic.e2), std::fabs(closed.f2 - generic.f2)});
        j["check"] = json{{"spectrum_cross_route", cross},
                          {"bogoliubov_round_trip", round_trip.cwiseAbs().maxCoeff()},
                          {"coefficient_table", table}};
    }
    j["config"] = config_to_json(cfg);

    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    write_text_file(std::filesystem::path(o.out_dir) / "diagonalization.json", text);
    return 0;
}

int cmd_fixed_points(const Config& cfg, const CommonOpts& o) {
    const ModelParams mp = model_from_config(cfg);
    const auto pts = bare_fixed_points(mp);
    auto rhs = [&mp](const State& st, double) { return bare_rhs(st, mp); };

    json arr = json::array();
    std::cout << "analytic stationary points of the damped bare flow (" << pts.size()
              << "):\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const State& fp = pts[i];
        const State refined = refine_fixed_point(rhs, fp);
        const double resid = bare_rhs(refined, mp).inf_norm();
        json entry;
        entry["analytic"] = state_to_json(fp);
        entry["refined"] = state_to_json(refined);
        entry["energy"] = energy(fp, mp);
        entry["refined_energy"] = energy(refined, mp);
        entry["analytic_vs_refined"] = (fp - refined).inf_norm();
        entry["rhs_norm_at_refined"] = resid;
        arr.push_back(entry);
        std::cout << "  #" << i << " energy=" << fmt17(energy(fp, mp))
                  << " |analytic-refined|=" << fmt17((fp - refined).inf_norm()) << "\n";
    }

    json j;
    j["fixed_points"] = arr;
    j["normal_energy"] = normal_minimum(mp).second;
    const auto minima = superradiant_minima(mp);
    j["superradiant_energy"] = minima ? json(minima->first.energy) : json(nullptr);
    try {
        const auto [gc, eps_c] = damped_critical_values(mp);
        j["g_c_damped"] = gc;
        j["eps_c_damped"] = eps_c;
    } catch (const PhaseError&) {
        j["g_c_damped"] = nullptr;
        j["eps_c_damped"] = nullptr;
    }
    j["config"] = config_to_json(cfg);
    write_text_file(std::filesystem::path(o.out_dir) / "fixed_points.json", j.dump(2) + "\n");
    std::cout << "wrote " << (std::filesystem::path(o.out_dir) / "fixed_points.json").string()
              << "\n";
    return 0;
}

int cmd_sweep(const Config& cfg, const CommonOpts& o) {
    const ModelParams base = model_from_config(cfg);
    const double g_min = cfg.get_double("sweep", "g_min");
    const double g_max = cfg.get_double("sweep", "g_max");
    const long g_steps = cfg.get_int("sweep", "g_steps");
    const double eps_min = cfg.get_double("sweep", "eps_min");
    const double eps_max = cfg.get_double("sweep", "eps_max");
    const long eps_steps = cfg.get_int("sweep", "eps_steps");
    if (g_steps < 2 || eps_steps < 2) throw ConfigError("sweep: need at least 2 steps per axis");
    long threads = cfg.get_int("sweep", "threads");
    if (threads <= 0) threads = static_cast<long>(std::thread::hardware_concurrency());
    threads = std::max(1L, std::min(threads, g_steps * eps_steps));

    struct Cell {
        double g, eps;
        std::string row;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(g_steps * eps_steps));
    for (long ie = 0; ie < eps_steps; ++ie)
        for (long ig = 0; ig < g_steps; ++ig) {
            auto& cell = cells[static_cast<std::size_t>(ie * g_steps + ig)];
            cell.g = g_min + (g_max - g_min) * static_cast<double>(ig) /
                                 static_cast<double>(g_steps - 1);
            cell.eps = eps_min + (eps_max - eps_min) * static_cast<double>(ie) /
                                     static_cast<double>(eps_steps - 1);
        }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto work = [&](Cell& cell) {
        ModelParams mp = base;
        mp.g = cell.g;
        mp.eps = cell.eps;
        const Phase ph = classify_phase(mp);
        const double e_normal = normal_minimum(mp).second;
        const auto minima = superradiant_minima(mp);
        const double e_sr = minima ? minima->first.energy : nan;
        double gc = nan;
        try {
            gc = critical_coupling_undamped(mp);
        } catch (const PhaseError&) {
        }
        double gc_damped = nan, eps_c = nan;
        try {
            std::tie(gc_damped, eps_c) = damped_critical_values(mp);
        } catch (const PhaseError&) {
        }
        std::ostringstream row;
        row << fmt17(cell.g) << ',' << fmt17(cell.eps) << ','
            << (ph == Phase::Superradiant ? "superradiant" : "normal") << ','
            << fmt17(e_normal) << ',' << fmt17(e_sr) << ',' << fmt17(gc) << ','
            << fmt17(gc_damped) << ',' << fmt17(eps_c);
        cell.row = row.str();
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            work(cells[i]);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (long i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << comment_block(cfg);
    csv << "g,eps,phase,e_normal,e_sr,g_c,g_c_damped,eps_c\n";
    for (const Cell& cell : cells) csv << cell.row << '\n';
    const auto path = std::filesystem::path(o.out_dir) / "sweep.csv";
    write_text_file(path, csv.str());
    std::cout << "swept " << cells.size() << " cells on " << threads << " threads; wrote "
              << path.string() << "\n";
    return 0;
}

int cmd_oracle(const Config& cfg, const CommonOpts& o) {
    const ModelParams mp = model_from_config(cfg);
    const int branch = static_cast<int>(cfg.get_int("run", "branch"));
    const DiagonalizationResult dg = diagonalize(mp, branch);
    const BogoliubovCoefficients bc = bogoliubov_coefficients(dg, mp);

    FockTruncation tr;
    tr.n_c = static_cast<int>(cfg.get_int("oracle", "n_c"));
    tr.n_b = static_cast<int>(cfg.get_int("oracle", "n_b"));
    tr.guard = cfg.get_double("oracle", "guard");
    tr.validate();

    const ModeOperators modes = build_mode_operators(tr);
    const DressedOperators dressed = build_dressed_operators(modes, bc);
    const SpMat H = hamiltonian_matrix(dg, dressed);
    const auto [e_ground, gs] = ground_state(H);

    const double temperature = cfg.get_double("oracle", "temperature");
    const std::string kind = cfg.get("oracle", "channels");
    std::vector<Channel> channels;
    std::vector<double> rates;
    if (kind == "dressed") {
        const BathSpec ba = bath_from_config(cfg, "bath_a");
        const BathSpec bs = bath_from_config(cfg, "bath_s");
        const auto keff = effective_viscosities(dg, ba, bs, mp);
        const double n1 = temperature > 0.0 ? bose_einstein(dg.eps1, temperature) : 0.0;
        const double n2 = temperature > 0.0 ? bose_einstein(dg.eps2, temperature) : 0.0;
        channels.push_back(make_channel(dressed.d1, keff.first, n1));
        channels.push_back(make_channel(dressed.d2, keff.second, n2));
        rates = {keff.first, keff.second};
    } else if (kind == "bare") {
        const double rate = cfg.get_double("oracle", "bare_rate");
        const double n = temperature > 0.0 ? bose_einstein(mp.omega, temperature) : 0.0;
        channels.push_back(make_channel(modes.c, rate, n));
        rates = {rate};
    } else if (kind == "none") {
        // pure von Neumann evolution; useful for drift checks
    } else {
        throw ConfigError("config key [oracle] channels: unknown kind '" + kind + "'");
    }

    double dt = cfg.get_double("oracle", "dt");
    if (dt == 0.0) {
        std::vector<double> scales = {dg.eps1, dg.eps2};
        scales.insert(scales.end(), rates.begin(), rates.end());
        double m = 0.0;
        for (double sc : scales) m = std::max(m, sc);
        dt = 0.01 / m;
    }
    const double t_end = cfg.get_double("oracle", "t_end");
    const int record_every = static_cast<int>(cfg.get_int("oracle", "record_every"));

    const SpMat n1op = number_op(dressed.d1);
    const SpMat n2op = number_op(dressed.d2);
    EvolutionResult res = evolve(vacuum_density(tr.dim()), H, channels, t_end, dt, tr,
                                 {H, n1op, n2op}, record_every);

    json j;
    j["params"] = model_to_json(mp);
    j["truncation"] = json{{"n_c", tr.n_c}, {"n_b", tr.n_b}, {"guard", tr.guard}};
    j["T"] = temperature;
    j["channels"] = kind;
    j["dt"] = dt;
    j["t_end"] = t_end;
    j["steady_energy"] = res.observables.back().at(0);
    j["ground_energy"] = e_ground;
    j["fidelity"] = fidelity(res.rho, gs);
    j["occupations"] = json{{"n1", res.observables.back().at(1)},
                            {"n2", res.observables.back().at(2)}};
    j["residuals"] = json{{"max_trace_err", res.max_trace_err},
                          {"min_eigenvalue", min_eigenvalue(res.rho)},
                          {"max_edge_c", res.max_edge_c},
                          {"max_edge_b", res.max_edge_b},
                          {"cmn_identity", cmn_identity_residual(dg, mp, tr)}};
    j["diagonalization"] = diag_to_json(dg, bc);
    j["config"] = config_to_json(cfg);

    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    write_text_file(std::filesystem::path(o.out_dir) / "oracle.json", text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dissipative dynamics of the extended Dicke model"};
    app.require_subcommand(1);

    CommonOpts o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "config file with [section] key = value lines");
        sub->add_option("--preset", o.preset, "built-in preset: fig2 | fig3 | dressed | oracle");
        sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "override [run] seed");
        sub->add_flag("--check", o.check, "run internal cross-validations");
    };

    CLI::App* sim = app.add_subcommand("simulate", "integrate a semiclassical trajectory");
    CLI::App* dia = app.add_subcommand("diagonalize", "polariton spectrum and coefficients");
    CLI::App* fix = app.add_subcommand("fixed-points", "stationary points of the damped bare flow");
    CLI::App* swp = app.add_subcommand("sweep", "phase diagram grid over (g, eps)");
    CLI::App* orc = app.add_subcommand("oracle", "truncated two-mode quantum evolution");
    for (CLI::App* sub : {sim, dia, fix, swp, orc}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        const edm::Config cfg = resolve_config(o);
        if (sim->parsed()) return cmd_simulate(cfg, o);
        if (dia->parsed()) return cmd_diagonalize(cfg, o);
        if (fix->parsed()) return cmd_fixed_points(cfg, o);
        if (swp->parsed()) return cmd_sweep(cfg, o);
        if (orc->parsed()) return cmd_oracle(cfg, o);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const edm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const edm::TruncationError& e) {
        std::cerr << "truncation error: " << e.what() << "\n";
        return 5;
    } catch (const edm::PhaseError& e) {
        std::cerr << "phase error: " << e.what() << "\n";
        return 4;
    } catch (const edm::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
