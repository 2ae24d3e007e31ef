// Command-line front end: config-driven simulation and verification runs
// with deterministic seeding and CSV/JSON outputs.
//
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numerical failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "bvflow/config.hpp"
#include "bvflow/csv.hpp"
#include "bvflow/derivative.hpp"
#include "bvflow/errors.hpp"
#include "bvflow/flow.hpp"
#include "bvflow/local_time.hpp"
#include "bvflow/lyapunov.hpp"
#include "bvflow/parallel.hpp"
#include "bvflow/stationary.hpp"
#include "bvflow/verify.hpp"

namespace {

using bvflow::ExperimentConfig;
using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty()) throw bvflow::ConfigError("config: --config is required");
    json raw = bvflow::parse_config_file(args.config_path);
    if (args.seed_set) raw["seed"] = args.seed;
    return bvflow::resolve_config(raw);
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    std::filesystem::create_directories(args.out_dir);
    return (std::filesystem::path(args.out_dir) / name).string();
}

int cmd_simulate(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    if (cfg.initial_points.empty())
        throw bvflow::ConfigError("config: missing field 'initial_points'");
    auto drift = std::make_shared<bvflow::BVDrift>(cfg.drift);
    bvflow::NoisePath noise = bvflow::make_noise(cfg.grid, cfg.seed, 0);
    bvflow::FlowTrajectory traj = bvflow::simulate_flow(drift, cfg.initial_points, cfg.grid, noise);

    bvflow::CsvWriter csv(out_path(args, "trajectory.csv"));
    std::vector<std::string> head{"t"};
    for (std::size_t j = 0; j < traj.n_points(); ++j)
        head.push_back("x_" + std::to_string(j + 1));
    csv.header(head);
    for (std::int64_t k = 0; k <= cfg.grid.n_steps; ++k) {
        std::vector<double> row{static_cast<double>(k) * cfg.grid.dt};
        for (std::size_t j = 0; j < traj.n_points(); ++j) row.push_back(traj.state(k, j));
        csv.row(row);
    }
    json summary;
    summary["ordering_violations"] = traj.ordering_violations;
    summary["config"] = cfg.resolved;
    write_json(out_path(args, "simulate.json"), summary);
    return 0;
}

int cmd_localtime(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    if (cfg.initial_points.empty())
        throw bvflow::ConfigError("config: missing field 'initial_points'");
    auto drift = std::make_shared<bvflow::BVDrift>(cfg.drift);
    bvflow::NoisePath noise = bvflow::make_noise(cfg.grid, cfg.seed, 0);
    bvflow::FlowTrajectory traj = bvflow::simulate_flow(drift, cfg.initial_points, cfg.grid, noise);

    std::vector<double> levels = cfg.level_grid;
    if (levels.empty()) {
        auto range = traj.visited_range(0);
        double lo = std::floor((range.first - cfg.epsilon) / cfg.epsilon) * cfg.epsilon;
        for (double y = lo; y <= range.second + cfg.epsilon; y += cfg.epsilon)
            levels.push_back(y);
    }
    bvflow::LocalTimeProfile occ = bvflow::occupation_profile_at(traj, 0, levels, cfg.epsilon);
    bvflow::LocalTimeProfile tan = bvflow::tanaka_profile(traj, noise, *drift, 0, levels);

    bvflow::CsvWriter csv(out_path(args, "localtime.csv"));
    csv.header({"y", "L_occupation", "L_tanaka"});
    for (std::size_t m = 0; m < levels.size(); ++m)
        csv.row({levels[m], occ.values[m], tan.values[m]});
    json summary;
    summary["config"] = cfg.resolved;
    write_json(out_path(args, "localtime.json"), summary);
    return 0;
}

int cmd_derivative(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    if (cfg.initial_points.empty())
        throw bvflow::ConfigError("config: missing field 'initial_points'");
    auto drift = std::make_shared<bvflow::BVDrift>(cfg.drift);

    bvflow::CsvWriter csv(out_path(args, "derivative.csv"));
    csv.header({"method", "t", "x", "psi"});
    for (std::size_t j = 0; j < cfg.initial_points.size(); ++j) {
        double x = cfg.initial_points[j];
        bvflow::NoisePath noise = bvflow::make_noise(cfg.grid, cfg.seed, j);
        bvflow::FlowTrajectory traj = bvflow::simulate_flow(drift, {x}, cfg.grid, noise);

        auto range = traj.visited_range(0);
        double level0 = std::floor((range.first - 2.0 * cfg.epsilon) / cfg.epsilon) * cfg.epsilon;
        std::size_t count = static_cast<std::size_t>(
                                std::ceil((range.second + 2.0 * cfg.epsilon - level0) / cfg.epsilon)) +
                            1;
        bvflow::LocalTimeProfile prof = bvflow::occupation_profile(traj, 0, level0, count, cfg.epsilon);
        bvflow::DerivativeEstimate lt = bvflow::derivative_via_local_time(prof, *drift);
        csv.raw_row({"local_time_formula", bvflow::format_g17(cfg.grid.horizon),
                     bvflow::format_g17(x), bvflow::format_g17(lt.psi)});

        if (drift->has_smooth_derivative()) {
            bvflow::DerivativeEstimate ode = bvflow::smooth_derivative(traj, 0);
            csv.raw_row({"smooth_ode", bvflow::format_g17(cfg.grid.horizon),
                         bvflow::format_g17(x), bvflow::format_g17(ode.psi)});
        }
        bvflow::DerivativeEstimate fd =
            bvflow::finite_difference(drift, x, cfg.h, cfg.grid, noise);
        csv.raw_row({"finite_difference", bvflow::format_g17(cfg.grid.horizon),
                     bvflow::format_g17(x), bvflow::format_g17(fd.psi)});
    }
    json summary;
    summary["config"] = cfg.resolved;
    write_json(out_path(args, "derivative.json"), summary);
    return 0;
}

int cmd_stationary(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    bvflow::StationarySpec spec = bvflow::StationarySpec::build(cfg.drift);

    bvflow::CsvWriter csv(out_path(args, "density.csv"));
    csv.header({"y", "p_stat"});
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
        double y = spec.support_lo() + (spec.support_hi() - spec.support_lo()) * i / n;
        csv.row({y, spec.pdf(y)});
    }
    json summary;
    summary["a"] = spec.limit_pos();
    summary["b"] = spec.limit_neg();
    summary["Z"] = spec.normalization();
    summary["lambda_formula"] = bvflow::lyapunov_formula(spec);
    summary["config"] = cfg.resolved;
    write_json(out_path(args, "stationary.json"), summary);
    return 0;
}

int cmd_lyapunov(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    if (cfg.initial_points.size() != 2)
        throw bvflow::ConfigError("config: 'initial_points' must hold exactly two points");
    auto drift = std::make_shared<bvflow::BVDrift>(cfg.drift);
    bvflow::LyapunovSummary summary = bvflow::empirical_lyapunov(
        drift, cfg.initial_points[0], cfg.initial_points[1], cfg.grid, cfg.seeds, args.threads);

    bvflow::CsvWriter csv(out_path(args, "lyapunov_seeds.csv"));
    csv.header({"seed", "lambda_hat", "t_end_effective", "clamped"});
    for (const auto& run : summary.runs)
        csv.row({static_cast<double>(run.seed), run.lambda_hat, run.t_end_effective,
                 run.clamped ? 1.0 : 0.0});

    json doc;
    doc["lambda_empirical_mean"] = summary.mean;
    doc["stderr"] = summary.std_error;
    doc["excluded_runs"] = summary.excluded;
    bvflow::StationarySpec spec = bvflow::StationarySpec::build(cfg.drift);
    doc["lambda_formula"] = bvflow::lyapunov_formula(spec);
    if (spec.two_level_closed_form())
        doc["lambda_closed_form"] = spec.limit_pos() * spec.limit_neg();
    doc["config"] = cfg.resolved;
    write_json(out_path(args, "lyapunov.json"), doc);
    return 0;
}

int cmd_verify(const CommonArgs& args, bool quick, bool force_fail) {
    bvflow::VerifyOptions opt;
    opt.quick = quick;
    opt.threads = args.threads;
    opt.seed = args.seed_set ? args.seed : 1;
    opt.force_fail = force_fail;
    std::filesystem::create_directories(args.out_dir);
    opt.out_dir = args.out_dir;
    int failed = bvflow::run_verification(opt, std::cout);
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic-flow toolkit for SDEs with bounded-variation drift"};
    app.require_subcommand(1);

    CommonArgs args;
    std::vector<CLI::Option*> seed_opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path,
                        "experiment config (flat key-value or JSON)");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
        seed_opts.push_back(sub->add_option("--seed", args.seed, "master seed (overrides config)"));
    };

    auto* sim = app.add_subcommand("simulate", "coupled Euler-Maruyama trajectories -> CSV");
    auto* loc = app.add_subcommand("localtime", "occupation and Tanaka local-time profiles");
    auto* der = app.add_subcommand("derivative", "flow-derivative estimates, all methods");
    auto* sta = app.add_subcommand("stationary", "scale function, stationary density, rate integral");
    auto* lya = app.add_subcommand("lyapunov", "two-point exponent estimates across seeds");
    auto* ver = app.add_subcommand("verify", "run the built-in verification suite");
    for (CLI::App* sub : {sim, loc, der, sta, lya, ver}) add_common(sub);
    bool quick = false, force_fail = false;
    ver->add_flag("--quick", quick, "reduced protocol: T=50, 5 seeds, doubled tolerances");
    ver->add_flag("--force-fail", force_fail, "test hook: perturb a formula target")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
        for (CLI::Option* o : seed_opts)
            if (o->count() > 0) args.seed_set = true;
        if (sim->parsed()) return cmd_simulate(args);
        if (loc->parsed()) return cmd_localtime(args);
        if (der->parsed()) return cmd_derivative(args);
        if (sta->parsed()) return cmd_stationary(args);
        if (lya->parsed()) return cmd_lyapunov(args);
        if (ver->parsed()) return cmd_verify(args, quick, force_fail);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const bvflow::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const bvflow::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
