#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavefilter/asymptotics.hpp"
#include "wavefilter/config.hpp"
#include "wavefilter/io.hpp"
#include "wavefilter/kalman.hpp"
#include "wavefilter/mcmc.hpp"
#include "wavefilter/truthgen.hpp"
#include "wavefilter/version.hpp"

namespace wavefilter::experiments {

struct RunOptions {
    std::string out_dir = "out";
    bool check = false;
    int seeds_override = 0;  // > 0 overrides run.seeds
};

namespace detail {

struct CheckResult {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    bool ok() const { return failures.empty(); }
};

inline CovarianceSpec read_covariance(const Config& cfg, const std::string& section,
                                      const std::string& default_kind, double default_sigma2,
                                      double default_scale, double default_exponent,
                                      double default_shift) {
    const std::string kind = cfg.get_string(section + ".kind", default_kind);
    if (kind == "grid_white")
        return CovarianceSpec(GridWhite{cfg.get_double(section + ".sigma2", default_sigma2)});
    if (kind == "laplacian_power")
        return CovarianceSpec(LaplacianPower{cfg.get_double(section + ".scale", default_scale),
                                             cfg.get_double(section + ".exponent", default_exponent),
                                             cfg.get_double(section + ".shift", default_shift)});
    throw std::runtime_error("config key " + section + ".kind: unknown covariance kind '" +
                             kind + "'");
}

inline ScenarioConfig read_scenario(const Config& cfg, const WavenumberLattice& lattice) {
    const double dt = cfg.get_double("model.dt", 0.1);
    SpectralField u = paper_truth_ic(lattice);
    CovarianceSpec noise = read_covariance(cfg, "noise", "grid_white", 1e-4, 1.0, 2.0, 0.0);

    ScenarioConfig sc(std::move(u), std::move(noise));
    sc.kind = parse_scenario_kind(cfg.get_string("scenario.kind", "none"));
    sc.model_c = {cfg.get_double("model.c1", -0.5), cfg.get_double("model.c2", -1.0)};
    sc.dt = dt;
    sc.params.delta_c = {cfg.get_double("scenario.delta_c1", 0.0),
                         cfg.get_double("scenario.delta_c2", 0.0)};
    sc.params.alpha = {cfg.get_double("scenario.alpha1", 0.5),
                       cfg.get_double("scenario.alpha2", 0.5)};
    sc.params.beta = cfg.get_double("scenario.beta", 1.0);
    sc.params.epsilon = cfg.get_double("scenario.epsilon", 0.1);
    sc.n_obs = cfg.get_int("run.n_obs", 1024);
    sc.noise_seed = static_cast<std::uint64_t>(cfg.get_long("run.noise_seed", 1));
    sc.path_seed = static_cast<std::uint64_t>(cfg.get_long("run.path_seed", 1));
    if (sc.n_obs < 1) throw std::runtime_error("run.n_obs: must be >= 1");
    return sc;
}

inline CurveConfig read_curve(const Config& cfg, const RunOptions& opt) {
    CurveConfig curve;
    const int first = cfg.get_int("run.checkpoint_first", 8);
    const int last = cfg.get_int("run.checkpoint_last", 1024);
    if (first < 1 || last < first)
        throw std::runtime_error("run.checkpoint_first/last: invalid checkpoint range");
    curve.checkpoints = CurveConfig::geometric(first, last);
    curve.num_seeds = cfg.get_int("run.seeds", 10);
    if (opt.seeds_override > 0) curve.num_seeds = opt.seeds_override;
    curve.base_seed = static_cast<std::uint64_t>(cfg.get_long("run.base_seed", 1));
    curve.s = cfg.get_double("sobolev.s", 0.0);
    curve.fit_discard = cfg.get_int("fit.discard", 2);
    if (curve.fit_discard < 0 ||
        curve.fit_discard + 2 > static_cast<int>(curve.checkpoints.size()))
        throw std::runtime_error("fit.discard: leaves fewer than two fit points");
    return curve;
}

inline LimitTarget read_target(const Config& cfg, const SpectralField& u) {
    const std::string kind = cfg.get_string("target.kind", "truth");
    if (kind == "truth") return LimitTarget::truth(u);
    if (kind == "projection")
        return LimitTarget::projection(u, cfg.get_int("target.p", 2), cfg.get_int("target.q", 2));
    if (kind == "average") return LimitTarget::average(u);
    if (kind == "shifted")
        return LimitTarget::shifted(u, {cfg.get_double("target.alpha1", 0.5),
                                        cfg.get_double("target.alpha2", 0.5)});
    throw std::runtime_error("config key target.kind: unknown target '" + kind + "'");
}

inline std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// The manifest is written before any artifact: experiment name, code version,
// the fully resolved configuration (defaults included), and the output list.
// Timestamps live here and nowhere else.
inline void write_manifest(const std::string& path, const std::string& experiment,
                           const Config& cfg, const RunOptions& opt,
                           const std::vector<std::string>& outputs) {
    auto out = wavefilter::detail::open_out(path);
    out << "# wavefilter run manifest\n";
    out << "experiment = " << experiment << "\n";
    out << "version = " << kVersion << "\n";
    out << "timestamp = " << now_iso8601() << "\n";
    out << "out_dir = " << opt.out_dir << "\n";
    out << "check = " << (opt.check ? "true" : "false") << "\n";
    for (const auto& [k, v] : cfg.resolved()) out << "config." << k << " = " << v << "\n";
    for (const auto& o : outputs) out << "output = " << o << "\n";
}

inline int run_curve_experiment(const std::string& experiment, const Config& cfg,
                                const RunOptions& opt) {
    // Resolve the whole configuration first: the manifest goes out before any
    // computation, and unknown keys fail the run immediately.
    const int max_mode = cfg.get_int("lattice.max_mode", 15);
    const int grid_size = cfg.get_int("lattice.grid_size", 32);
    const WavenumberLattice lattice(max_mode, grid_size);

    ScenarioConfig scenario = read_scenario(cfg, lattice);
    const CovarianceSpec prior = read_covariance(cfg, "prior", "laplacian_power", 1e-4, 50.0, 1.0, 1.0);
    const CovarianceSpec gamma = read_covariance(cfg, "gamma", "grid_white", 1e-4, 1.0, 2.0, 0.0);
    const CurveConfig curve = read_curve(cfg, opt);
    const bool fit_squared = cfg.get_bool("fit.squared", experiment == "rate-fit");
    const SpectralField m0 = SpectralField::zero(lattice);

    const bool want_smoother = experiment != "filter-limit";
    std::optional<LimitTarget> target;
    if (want_smoother) target = read_target(cfg, scenario.truth_ic);

    const bool slope_band = cfg.has("check.slope_min") || cfg.has("check.slope_max");
    const double slope_lo = cfg.get_double("check.slope_min", -10.0);
    const double slope_hi = cfg.get_double("check.slope_max", 10.0);
    const bool monotone_required = cfg.get_bool("check.monotone", false);
    const bool want_plateau = cfg.has("check.plateau_value");
    const double plateau_value = cfg.get_double("check.plateau_value", 0.0);
    const double plateau_rel = cfg.get_double("check.plateau_rel", 0.2);
    const bool dump_observations = cfg.get_bool("run.dump_observations", false);

    const std::string base = opt.out_dir + "/" + experiment;
    const std::string curve_csv = base + "_curve.csv";
    const std::string fit_csv = base + "_fit.csv";
    const std::string plateau_csv = base + "_plateau_curve.csv";
    const std::string mean_pgm = base + "_mean.pgm";
    const std::string state_csv = base + "_state.csv";
    const std::string obs_csv = base + "_observations.csv";
    std::vector<std::string> outputs{curve_csv, fit_csv};
    if (want_plateau) outputs.push_back(plateau_csv);
    outputs.push_back(mean_pgm);
    outputs.push_back(state_csv);
    if (dump_observations) outputs.push_back(obs_csv);

    cfg.fail_on_unknown_keys();
    std::filesystem::create_directories(opt.out_dir);
    write_manifest(opt.out_dir + "/manifest.txt", experiment, cfg, opt, outputs);

    const ErrorCurves curves =
        run_error_curves(scenario, m0, prior, gamma, target, curve);
    const RateFit& main_fit =
        (experiment == "smoother-limit") ? curves.smoother : curves.filter;

    // Fitting the squared error doubles the log-log slope and intercept of
    // the RMS curve exactly; the squared curve is what the rate figure plots.
    const double effective_slope = fit_squared ? 2.0 * main_fit.slope : main_fit.slope;

    CheckResult check;
    if (opt.check && slope_band) {
        check.expect(!main_fit.degenerate, "degenerate fit (zero error); no slope");
        check.expect(effective_slope >= slope_lo && effective_slope <= slope_hi,
                     "slope " + std::to_string(effective_slope) + " outside [" +
                         std::to_string(slope_lo) + ", " + std::to_string(slope_hi) + "]");
    }
    if (opt.check && monotone_required) {
        for (std::size_t i = 1; i < main_fit.points.size(); ++i)
            check.expect(main_fit.points[i].error_mean < main_fit.points[i - 1].error_mean,
                         "error not decreasing between n=" +
                             std::to_string(main_fit.points[i - 1].n) + " and n=" +
                             std::to_string(main_fit.points[i].n));
    }

    // Optional plateau check: the same scenario measured against the full
    // truth must level off at the stated value (wrong-target residual).
    std::optional<RateFit> plateau_fit;
    if (want_plateau) {
        plateau_fit = run_error_curves(scenario, m0, prior, gamma,
                                       LimitTarget::truth(scenario.truth_ic), curve)
                          .smoother;
        const double final_err = plateau_fit->points.back().error_mean;
        if (opt.check)
            check.expect(std::abs(final_err - plateau_value) <= plateau_rel * plateau_value,
                         "plateau " + std::to_string(final_err) + " not within " +
                             std::to_string(plateau_rel) + " of " +
                             std::to_string(plateau_value));
    }

    // Figure-style artifact: the smoother mean field after all observations,
    // first realization's data.
    ScenarioConfig snap = scenario;
    snap.noise_seed = mix_seed(curve.base_seed, 0);
    snap.path_seed = mix_seed(curve.base_seed, 1000);
    snap.n_obs = curve.checkpoints.back();
    const auto observations = generate_observations(snap);
    const AdvectionOperator model_op(
        realize_scenario(snap.kind, snap.model_c, snap.params, snap.dt, snap.n_obs,
                         snap.path_seed)
            .model);
    const AssimilationState final_state =
        smoother_closed_form(m0, prior, gamma, model_op, observations, snap.dt);

    write_curve_csv(curve_csv, main_fit);
    RateFit summary_fit = main_fit;
    if (fit_squared) {
        summary_fit.slope *= 2.0;
        summary_fit.intercept *= 2.0;
    }
    write_fit_summary(fit_csv, summary_fit);
    if (plateau_fit) write_curve_csv(plateau_csv, *plateau_fit);
    write_field_pgm(mean_pgm, final_state.smoother_mean);
    write_state_csv(state_csv, final_state);
    if (dump_observations) write_observations_csv(obs_csv, observations);

    std::cout << experiment << ": slope=" << main_fit.slope
              << " (squared=" << 2.0 * main_fit.slope << ") r2=" << main_fit.r2 << "\n";
    for (const auto& f : check.failures) std::cout << "CHECK FAIL: " << f << "\n";
    return check.ok() ? 0 : 1;
}

inline int run_mcmc_ic(const Config& cfg, const RunOptions& opt) {
    const int max_mode = cfg.get_int("lattice.max_mode", 15);
    const int grid_size = cfg.get_int("lattice.grid_size", 32);
    const WavenumberLattice lattice(max_mode, grid_size);

    ScenarioConfig scenario = read_scenario(cfg, lattice);
    scenario.n_obs = cfg.get_int("mcmc.n_obs", scenario.n_obs);
    const CovarianceSpec prior = read_covariance(cfg, "prior", "laplacian_power", 1e-4, 1.0, 2.0, 0.0);
    if (!scenario.obs_noise.is_grid_white())
        throw std::runtime_error("mcmc-ic: noise.kind must be grid_white");
    const double sigma2 = cfg.get_double("mcmc.sigma2",
                                         scenario.obs_noise.grid_white().sigma2);

    PcnConfig pcn;
    pcn.step_beta = cfg.get_double("mcmc.beta", 0.05);
    pcn.n_burn = cfg.get_long("mcmc.burn", 10000);
    pcn.n_keep = cfg.get_long("mcmc.keep", 100000);
    pcn.thin = cfg.get_int("mcmc.thin", 1);
    pcn.seed = static_cast<std::uint64_t>(cfg.get_long("mcmc.seed", 1));
    pcn.phi_trace_stride = cfg.get_int("mcmc.phi_trace_stride", 100);
    pcn.batch_count = cfg.get_int("mcmc.batch_count", 100);

    const std::string init_kind = cfg.get_string("mcmc.init", "smoother");
    if (init_kind != "smoother" && init_kind != "prior")
        throw std::runtime_error("mcmc.init: expected 'smoother' or 'prior'");
    const bool oracle_check = cfg.get_bool("check.oracle", true);
    const double z_max_allowed = cfg.get_double("check.z_max", 3.0);

    const std::string mean_csv = opt.out_dir + "/mcmc_ic_mean.csv";
    const std::string mean_pgm = opt.out_dir + "/mcmc_ic_mean.pgm";
    const std::string phi_csv = opt.out_dir + "/mcmc_ic_chain.csv";
    cfg.fail_on_unknown_keys();
    std::filesystem::create_directories(opt.out_dir);
    write_manifest(opt.out_dir + "/manifest.txt", "mcmc-ic", cfg, opt,
                   {mean_csv, mean_pgm, phi_csv});

    const auto observations = generate_observations(scenario);

    // Default chain seeding: the Kalman smoother mean under the model
    // velocity, per the metastability guidance; mcmc.init = prior gives the
    // cold start (paper-scale budgets are then required for deep data).
    std::optional<SpectralField> v_init;
    if (init_kind == "smoother") {
        const AdvectionOperator model_op(VelocityPath::constant(scenario.model_c));
        v_init = smoother_closed_form(SpectralField::zero(lattice), prior,
                                      CovarianceSpec(GridWhite{sigma2}), model_op,
                                      observations, scenario.dt)
                     .smoother_mean;
    }
    const auto summary = pcn_sample_initial_condition(pcn, lattice, prior, scenario.model_c,
                                                      observations, scenario.dt, sigma2,
                                                      v_init ? &*v_init : nullptr);

    CheckResult check;
    if (opt.check && oracle_check) {
        const AdvectionOperator model_op(VelocityPath::constant(scenario.model_c));
        const auto oracle =
            smoother_closed_form(SpectralField::zero(lattice), prior,
                                 CovarianceSpec(GridWhite{sigma2}), model_op, observations,
                                 scenario.dt);
        double worst = 0.0;
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const double se = summary.mean_std_error[i];
            if (se <= 0.0) continue;
            const double z = std::abs(summary.mean.coeff(i) - oracle.smoother_mean.coeff(i)) / se;
            worst = std::max(worst, z);
        }
        check.expect(worst <= z_max_allowed,
                     "pCN vs Kalman worst z = " + std::to_string(worst));
        std::cout << "mcmc-ic: oracle max z = " << worst << "\n";
    }

    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    std::vector<std::string> outputs;
    const std::string mean_csv = opt.out_dir + "/mcmc_ic_mean.csv";
    write_coeff_csv(mean_csv, summary.mean);
    outputs.push_back(mean_csv);
    const std::string mean_pgm = opt.out_dir + "/mcmc_ic_mean.pgm";
    write_field_pgm(mean_pgm, summary.mean);
    outputs.push_back(mean_pgm);
    {
        std::vector<ChainRow> rows(summary.phi_trace.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i] = {static_cast<long>(i) * pcn.phi_trace_stride, scenario.model_c.x,
                       scenario.model_c.y, summary.phi_trace[i], 1};
        const std::string phi_csv = opt.out_dir + "/mcmc_ic_chain.csv";
        write_chain_csv(phi_csv, rows);
        outputs.push_back(phi_csv);
    }

    cfg.fail_on_unknown_keys();
    write_manifest(opt.out_dir + "/manifest.txt", "mcmc-ic", cfg, opt, outputs);
    std::cout << "mcmc-ic: acceptance=" << summary.acceptance_rate << "\n";
    for (const auto& f : check.failures) std::cout << "CHECK FAIL: " << f << "\n";
    return check.ok() ? 0 : 1;
}

inline int run_gibbs_velocity(const Config& cfg, const RunOptions& opt) {
    const int max_mode = cfg.get_int("lattice.max_mode", 3);
    const int grid_size = cfg.get_int("lattice.grid_size", 8);
    const WavenumberLattice lattice(max_mode, grid_size);

    ScenarioConfig scenario = read_scenario(cfg, lattice);
    const CovarianceSpec prior = read_covariance(cfg, "prior", "laplacian_power", 1e-4, 1.0, 2.0, 0.0);
    if (!scenario.obs_noise.is_grid_white())
        throw std::runtime_error("gibbs-velocity: noise.kind must be grid_white");
    const double sigma2 = cfg.get_double("mcmc.sigma2",
                                         scenario.obs_noise.grid_white().sigma2);

    GibbsConfig gibbs;
    gibbs.step_beta = cfg.get_double("gibbs.beta", 0.2);
    gibbs.inner_v_steps = cfg.get_int("gibbs.inner_v_steps", 2);
    gibbs.inner_c_steps = cfg.get_int("gibbs.inner_c_steps", 2);
    gibbs.n_burn_sweeps = cfg.get_long("gibbs.burn_sweeps", 2000);
    gibbs.n_keep_sweeps = cfg.get_long("gibbs.keep_sweeps", 8000);
    gibbs.c_proposal_std = {cfg.get_double("gibbs.c_proposal_std1", 1e-3),
                            cfg.get_double("gibbs.c_proposal_std2", 1e-3)};
    gibbs.seed = static_cast<std::uint64_t>(cfg.get_long("gibbs.seed", 1));
    const std::string prior_kind = cfg.get_string("gibbs.c_prior", "flat_box");
    if (prior_kind == "flat_box") {
        gibbs.c_prior.kind = CPrior::Kind::flat_box;
        gibbs.c_prior.lo = {cfg.get_double("gibbs.c_box_lo1", -2.0),
                            cfg.get_double("gibbs.c_box_lo2", -2.0)};
        gibbs.c_prior.hi = {cfg.get_double("gibbs.c_box_hi1", 2.0),
                            cfg.get_double("gibbs.c_box_hi2", 2.0)};
    } else if (prior_kind == "gaussian") {
        gibbs.c_prior.kind = CPrior::Kind::gaussian;
        gibbs.c_prior.mean = {cfg.get_double("gibbs.c_prior_mean1", 0.0),
                              cfg.get_double("gibbs.c_prior_mean2", 0.0)};
        gibbs.c_prior.sd = {cfg.get_double("gibbs.c_prior_sd1", 1.0),
                            cfg.get_double("gibbs.c_prior_sd2", 1.0)};
    } else {
        throw std::runtime_error("gibbs.c_prior: unknown kind '" + prior_kind + "'");
    }

    const auto observations = generate_observations(scenario);
    Vec2 c_init;
    if (cfg.has("gibbs.c_init1") || cfg.has("gibbs.c_init2")) {
        c_init = {cfg.get_double("gibbs.c_init1", scenario.model_c.x),
                  cfg.get_double("gibbs.c_init2", scenario.model_c.y)};
    } else {
        c_init = velocity_seed(observations, scenario.dt);
    }

    // Seed v0 at the smoother mean under c_init unless a cold start is asked
    // for; the joint posterior is multimodal in c and needs careful seeding.
    const std::string init_kind = cfg.get_string("gibbs.v_init", "smoother");
    std::optional<SpectralField> v_init;
    if (init_kind == "smoother") {
        const AdvectionOperator init_op(VelocityPath::constant(c_init));
        v_init = smoother_closed_form(SpectralField::zero(lattice), prior,
                                      CovarianceSpec(GridWhite{sigma2}), init_op,
                                      observations, scenario.dt)
                     .smoother_mean;
    } else if (init_kind != "prior") {
        throw std::runtime_error("gibbs.v_init: expected 'smoother' or 'prior'");
    }

    const auto summary =
        gibbs_sample_velocity_and_ic(gibbs, lattice, prior, observations, scenario.dt,
                                     sigma2, c_init, v_init ? &*v_init : nullptr);

    CheckResult check;
    const double tol = cfg.get_double("check.c_tol", 0.05);
    if (opt.check && cfg.has("check.c_tol")) {
        const Vec2 truth = scenario.model_c;  // c' = c in the recovery experiment
        check.expect(std::abs(summary.c_mean.x - truth.x) <= tol &&
                         std::abs(summary.c_mean.y - truth.y) <= tol,
                     "posterior mean c = (" + std::to_string(summary.c_mean.x) + "," +
                         std::to_string(summary.c_mean.y) + ") not within " +
                         std::to_string(tol) + " of truth");
    }

    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    std::vector<std::string> outputs;
    std::vector<ChainRow> rows(summary.c_samples.size());
    for (std::size_t i = 0; i < summary.c_samples.size(); ++i)
        rows[i] = {static_cast<long>(i), summary.c_samples[i].x, summary.c_samples[i].y,
                   summary.phi_trace[i], summary.c_accepted_flags[i]};
    const std::string chain_csv = opt.out_dir + "/gibbs_chain.csv";
    write_chain_csv(chain_csv, rows);
    outputs.push_back(chain_csv);
    const std::string v0_csv = opt.out_dir + "/gibbs_v0_mean.csv";
    write_coeff_csv(v0_csv, summary.v0_mean);
    outputs.push_back(v0_csv);
    const std::string v0_pgm = opt.out_dir + "/gibbs_v0_mean.pgm";
    write_field_pgm(v0_pgm, summary.v0_mean);
    outputs.push_back(v0_pgm);

    cfg.fail_on_unknown_keys();
    write_manifest(opt.out_dir + "/manifest.txt", "gibbs-velocity", cfg, opt, outputs);
    std::cout << "gibbs-velocity: c_init=(" << c_init.x << "," << c_init.y << ") c_mean=("
              << summary.c_mean.x << "," << summary.c_mean.y << ") c_sd=(" << summary.c_sd.x
              << "," << summary.c_sd.y << ") accept(v)=" << summary.v_acceptance
              << " accept(c)=" << summary.c_acceptance << "\n";
    for (const auto& f : check.failures) std::cout << "CHECK FAIL: " << f << "\n";
    return check.ok() ? 0 : 1;
}

inline int run_oracle_suite(const Config& cfg, const RunOptions& opt) {
    const double rel_tol = cfg.get_double("oracle.geometric_rel_tol", 1e-8);
    const int n_triples = cfg.get_int("oracle.geometric_triples", 100);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_long("oracle.seed", 7));

    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    auto out = wavefilter::detail::open_out(opt.out_dir + "/oracle_geometric.csv");
    out << "k1,k2,dc1,dc2,dt,n,modulus_sq,closed_form,rel_err,resonant\n";

    CheckResult check;
    Rng rng(seed);
    int produced = 0;
    while (produced < n_triples) {
        const Mode k{1 + static_cast<int>(rng.uniform() * 8),
                     static_cast<int>(rng.uniform() * 9) - 4};
        const Vec2 dc{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        const double dt = 0.05 + 0.2 * rng.uniform();
        const int n = 2 + static_cast<int>(rng.uniform() * 500);
        const double x = dot(k, dc) * dt;
        // Stay clear of the resonant rays; they are exercised separately.
        if (std::abs(x - std::round(x)) < 1e-3) continue;
        ++produced;
        const auto res = geometric_sum_oracle(k, dc, dt, n);
        const double rel = std::abs(res.modulus_sq - res.closed_form_modulus_sq) /
                           std::max(res.closed_form_modulus_sq, 1e-300);
        out << k.k1 << "," << k.k2 << "," << wavefilter::detail::fmt_double(dc.x) << ","
            << wavefilter::detail::fmt_double(dc.y) << ","
            << wavefilter::detail::fmt_double(dt) << "," << n << ","
            << wavefilter::detail::fmt_double(res.modulus_sq) << ","
            << wavefilter::detail::fmt_double(res.closed_form_modulus_sq) << ","
            << wavefilter::detail::fmt_double(rel) << "," << (res.resonant ? 1 : 0) << "\n";
        check.expect(!res.resonant && rel <= rel_tol,
                     "geometric sum triple off by rel " + std::to_string(rel));
    }

    const int reps = cfg.get_int("oracle.brownian_realizations", 1000);
    const auto bm = brownian_moment_oracle({1, 0}, cfg.get_double("oracle.brownian_epsilon", 0.1),
                                           cfg.get_double("oracle.brownian_dt", 0.1),
                                           cfg.get_int("oracle.brownian_n", 100), reps,
                                           mix_seed(seed, 99));
    const double dev = std::abs(bm.mc_estimate - bm.closed_form);
    check.expect(dev <= 3.0 * bm.mc_std_error,
                 "brownian moment off by " + std::to_string(dev) + " > 3 se");
    check.expect(bm.closed_form <= bm.linear_bound, "brownian closed form exceeds linear bound");

    cfg.fail_on_unknown_keys();
    write_manifest(opt.out_dir + "/manifest.txt", "oracle-suite", cfg, opt,
                   {opt.out_dir + "/oracle_geometric.csv"});
    std::cout << "oracle-suite: geometric triples=" << produced
              << " brownian dev=" << dev << " (3se=" << 3.0 * bm.mc_std_error << ")\n";
    for (const auto& f : check.failures) std::cout << "CHECK FAIL: " << f << "\n";
    return check.ok() ? 0 : 1;
}

}  // namespace detail

// Dispatch on experiment kind. Throws on configuration errors (unknown keys,
// invalid parameters); returns nonzero when --check thresholds are breached.
// A seeds override is folded into the config first so the manifest records
// what actually ran.
inline int run(const Config& cfg_in, const RunOptions& opt_in) {
    Config cfg = cfg_in;
    RunOptions opt = opt_in;
    if (opt.seeds_override > 0) {
        cfg.set("run.seeds", std::to_string(opt.seeds_override));
        opt.seeds_override = 0;
    }
    const std::string experiment = cfg.require_string("experiment");
    if (experiment == "smoother-limit" || experiment == "filter-limit" ||
        experiment == "rate-fit")
        return detail::run_curve_experiment(experiment, cfg, opt);
    if (experiment == "mcmc-ic") return detail::run_mcmc_ic(cfg, opt);
    if (experiment == "gibbs-velocity") return detail::run_gibbs_velocity(cfg, opt);
    if (experiment == "oracle-suite") return detail::run_oracle_suite(cfg, opt);
    throw std::runtime_error("unknown experiment kind: " + experiment);
}

}  // namespace wavefilter::experiments
