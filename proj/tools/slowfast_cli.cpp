// Command-line front end: model simulation, equilibria, manifolds, reduced
// systems, basin grids, Monte Carlo volumes, scaling sweeps, and canned
// figure-style presets.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "slowfast/basins.hpp"
#include "slowfast/equilibria.hpp"
#include "slowfast/experiments.hpp"
#include "slowfast/io.hpp"
#include "slowfast/models.hpp"
#include "slowfast/reduction.hpp"
#include "slowfast/scaling.hpp"

namespace sf = slowfast;

namespace {

void emit_table(const sf::CsvTable& t, const std::string& out,
                const std::string& format) {
    if (out.empty()) {
        for (std::size_t i = 0; i < t.header.size(); ++i)
            std::cout << (i ? "," : "") << t.header[i];
        std::cout << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                std::cout << (i ? "," : "") << sf::fmt_double(row[i]);
            std::cout << "\n";
        }
        return;
    }
    if (format == "json") {
        std::ofstream os(out);
        if (!os) throw sf::IoError("cannot open " + out);
        for (const auto& row : t.rows) {
            nlohmann::json rec;
            for (std::size_t i = 0; i < t.header.size(); ++i)
                rec[t.header[i]] = row[i];
            os << rec.dump() << "\n";
        }
        return;
    }
    sf::write_csv(out, t);
}

// "phi=6,mu=-5" or "x=0.5,mu=-1" -> full state vector
std::vector<double> parse_ic(const sf::SlowFastSystem& sys,
                             const std::string& text) {
    std::vector<double> y(sys.dim(), 0.0);
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw sf::UsageError("--ic entries must be key=value");
        const std::string key = sf::detail::trim(item.substr(0, eq));
        const double val = std::stod(item.substr(eq + 1));
        if (key == "mu") {
            y[sys.fast_dim] = val;
        } else if (key == "x" || key == "phi") {
            for (int i = 0; i < sys.fast_dim; ++i) y[i] = val;
        } else if (key.rfind("phi", 0) == 0 || key.rfind("x", 0) == 0) {
            const int idx =
                std::stoi(key.substr(key[0] == 'p' ? 3 : 1)) - 1;
            if (idx < 0 || idx >= sys.fast_dim)
                throw sf::UsageError("--ic index out of range: " + key);
            y[idx] = val;
        } else {
            throw sf::UsageError("unknown --ic key: " + key);
        }
    }
    return y;
}

sf::Box region_box(const sf::Config& cfg, const sf::SlowFastSystem& sys) {
    sf::Box box;
    box.lo.assign(sys.dim(), cfg.fast_lo);
    box.hi.assign(sys.dim(), cfg.fast_hi);
    box.lo[sys.fast_dim] = cfg.mu_lo;
    box.hi[sys.fast_dim] = cfg.mu_hi;
    return box;
}

sf::BasinClassifier make_classifier(const sf::Config& cfg,
                                    const sf::SlowFastSystem& sys) {
    sf::ClassifyOptions opt;
    opt.horizon = cfg.horizon;
    opt.mu_threshold = cfg.mu_threshold;
    opt.rel_tol = cfg.rel_tol;
    opt.abs_tol = cfg.abs_tol;
    if (sys.tag == sf::ModelTag::Pitchfork || sys.tag == sf::ModelTag::Tanh)
        if (opt.horizon == 0.0) opt.horizon = 60.0 / sys.eps;
    return sf::BasinClassifier(sys, sf::default_stable_equilibria(sys), opt);
}

int run(int argc, char** argv) {
    CLI::App app{"slow-fast bistable systems: basins, funnels, scaling"};
    app.require_subcommand(1);
    // let `slowfast equilibria --model pitchfork` resolve --model at the top
    // level instead of demanding flags before the subcommand
    app.fallthrough();

    std::string config_file, ic_text, out_path, preset_name;
    std::string diff_a, diff_b;
    int n_rotators = 0;
    double t0 = 0.0, t1 = 0.0, diff_tol = 0.0, mu_probe = 4.0;
    bool paper_scale = false, predict = false;

    sf::Config cfg;
    if (const char* env = std::getenv("SLOWFAST_OUT")) cfg.out_dir = env;

    app.add_option("--config", config_file, "key=value configuration file");
    auto* o_model = app.add_option("--model", cfg.model,
                                   "pitchfork|tanh|rotator|network");
    auto* o_a = app.add_option("--a", cfg.pitchfork.a, "fast-branch gain");
    auto* o_b = app.add_option("--b", cfg.pitchfork.b, "slow-drive offset");
    auto* o_omega = app.add_option("--omega", cfg.rotator.omega);
    auto* o_eta = app.add_option("--eta", cfg.rotator.eta);
    auto* o_alpha = app.add_option("--alpha", cfg.rotator.alpha);
    auto* o_omegas = app.add_option("--omegas", cfg.network.omegas,
                                    "network natural frequencies")
                         ->delimiter(',');
    auto* o_kappa = app.add_option("--kappa", cfg.network.kappa);
    auto* o_eps = app.add_option("--eps", cfg.rotator.eps, "timescale ratio");
    auto* o_M = app.add_option("--M", cfg.trials, "Monte Carlo trials");
    auto* o_seed = app.add_option("--seed", cfg.seed);
    auto* o_res = app.add_option("--resolution", cfg.resolution);
    auto* o_threads = app.add_option("--threads", cfg.threads,
                                     "worker count (0 = auto)");
    auto* o_mulo = app.add_option("--mu-lo", cfg.mu_lo);
    auto* o_muhi = app.add_option("--mu-hi", cfg.mu_hi);
    auto* o_flo = app.add_option("--fast-lo", cfg.fast_lo);
    auto* o_fhi = app.add_option("--fast-hi", cfg.fast_hi);
    auto* o_thr = app.add_option("--mu-threshold", cfg.mu_threshold);
    auto* o_hor = app.add_option("--horizon", cfg.horizon);
    auto* o_rtol = app.add_option("--rel-tol", cfg.rel_tol);
    auto* o_atol = app.add_option("--abs-tol", cfg.abs_tol);
    auto* o_elist = app.add_option("--eps-list", cfg.eps_list)->delimiter(',');
    auto* o_fmt = app.add_option("--format", cfg.format, "csv|json");
    auto* o_out = app.add_option("--out-dir", cfg.out_dir);
    app.add_option("--out", out_path, "output file (default: stdout)");

    auto* c_sim = app.add_subcommand("simulate", "integrate one trajectory");
    c_sim->add_option("--ic", ic_text, "initial condition, e.g. phi=6,mu=-5")
        ->required();
    c_sim->add_option("--n", n_rotators, "network size (resizes --omegas)");
    c_sim->add_option("--t0", t0);
    c_sim->add_option("--t1", t1, "end time (default 10/eps)");

    auto* c_eq = app.add_subcommand("equilibria",
                                    "find and classify equilibria in a box");
    auto* c_man =
        app.add_subcommand("manifold", "trace the saddle's stable manifold");
    auto* c_red = app.add_subcommand("reduce", "emit (mu, f, U) table");
    auto* c_grid = app.add_subcommand("basin-grid", "classify a basin grid");
    auto* c_mc = app.add_subcommand("mc-volume", "Monte Carlo basin volume");
    auto* c_sweep =
        app.add_subcommand("scaling-sweep", "volume vs eps with log-fit");
    c_sweep->add_flag("--predict", predict,
                      "add the quadrature-predicted exponent");
    c_sweep->add_option("--mu-probe", mu_probe,
                        "probe for the predicted exponent span");
    auto* c_pre = app.add_subcommand("preset", "run a named pipeline");
    c_pre->add_option("name", preset_name, "preset name")->required();
    c_pre->add_flag("--paper-scale", paper_scale,
                    "1024^2 grids and M = 1e6");
    auto* c_diff = app.add_subcommand("diff", "compare two preset run dirs");
    c_diff->add_option("dir_a", diff_a)->required();
    c_diff->add_option("dir_b", diff_b)->required();
    c_diff->add_option("--tol", diff_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    // precedence: flags > file > defaults
    if (!config_file.empty()) {
        sf::Config from_file = sf::parse_config_file(config_file);
        // re-apply any flags on top of the file values
        auto keep = [&](const CLI::Option* o, auto& dst, const auto& src) {
            if (o->count() == 0) dst = src;
        };
        keep(o_model, cfg.model, from_file.model);
        keep(o_a, cfg.pitchfork.a, from_file.pitchfork.a);
        keep(o_b, cfg.pitchfork.b, from_file.pitchfork.b);
        cfg.tanh_model = from_file.tanh_model;
        if (o_a->count()) cfg.tanh_model.a = cfg.pitchfork.a;
        if (o_b->count()) cfg.tanh_model.b = cfg.pitchfork.b;
        keep(o_omega, cfg.rotator.omega, from_file.rotator.omega);
        keep(o_eta, cfg.rotator.eta, from_file.rotator.eta);
        keep(o_alpha, cfg.rotator.alpha, from_file.rotator.alpha);
        keep(o_omegas, cfg.network.omegas, from_file.network.omegas);
        keep(o_kappa, cfg.network.kappa, from_file.network.kappa);
        keep(o_eps, cfg.rotator.eps, from_file.rotator.eps);
        keep(o_M, cfg.trials, from_file.trials);
        keep(o_seed, cfg.seed, from_file.seed);
        keep(o_res, cfg.resolution, from_file.resolution);
        keep(o_threads, cfg.threads, from_file.threads);
        keep(o_mulo, cfg.mu_lo, from_file.mu_lo);
        keep(o_muhi, cfg.mu_hi, from_file.mu_hi);
        keep(o_flo, cfg.fast_lo, from_file.fast_lo);
        keep(o_fhi, cfg.fast_hi, from_file.fast_hi);
        keep(o_thr, cfg.mu_threshold, from_file.mu_threshold);
        keep(o_hor, cfg.horizon, from_file.horizon);
        keep(o_rtol, cfg.rel_tol, from_file.rel_tol);
        keep(o_atol, cfg.abs_tol, from_file.abs_tol);
        keep(o_elist, cfg.eps_list, from_file.eps_list);
        keep(o_fmt, cfg.format, from_file.format);
        keep(o_out, cfg.out_dir, from_file.out_dir);
        if (o_eps->count() == 0) {
            cfg.pitchfork.eps = from_file.pitchfork.eps;
            cfg.tanh_model.eps = from_file.tanh_model.eps;
            cfg.network.eps = from_file.network.eps;
        }
    }
    // --eps / --eta / --alpha apply to every model family
    if (o_eps->count()) {
        cfg.pitchfork.eps = cfg.rotator.eps;
        cfg.tanh_model.eps = cfg.rotator.eps;
        cfg.network.eps = cfg.rotator.eps;
    }
    if (o_eta->count()) cfg.network.eta = cfg.rotator.eta;
    if (o_alpha->count()) cfg.network.alpha = cfg.rotator.alpha;
    if (n_rotators > 0) {
        cfg.network.omegas.resize(n_rotators);
        for (int i = 0; i < n_rotators; ++i)
            cfg.network.omegas[i] =
                -4.0 + (n_rotators > 1 ? static_cast<double>(i) /
                                             (n_rotators - 1)
                                       : 0.0);
    }
    cfg.validate();
    std::cerr << "# resolved configuration\n" << sf::emit_config(cfg);

    if (c_pre->parsed()) {
        sf::RunOptions opt;
        opt.paper_scale = paper_scale;
        opt.threads = cfg.threads;
        opt.format = cfg.format;
        const sf::RunRecord rec =
            sf::run_preset(preset_name, cfg.seed, cfg.out_dir, opt);
        std::cout << "preset=" << rec.preset << " seed=" << rec.seed
                  << " hash=" << rec.content_hash
                  << " wall_s=" << rec.wall_seconds << "\n"
                  << "data=" << rec.data_path.string() << "\n";
        return 0;
    }
    if (c_diff->parsed()) {
        const sf::DiffReport rep = sf::diff_runs(diff_a, diff_b, diff_tol);
        std::cout << "preset=" << rep.preset << " rows=" << rep.rows
                  << " cols=" << rep.cols
                  << " max_abs_diff=" << sf::fmt_double(rep.max_abs_diff)
                  << " exceeding=" << rep.exceeding
                  << " identical=" << (rep.identical ? 1 : 0) << "\n";
        return 0;
    }

    const sf::SlowFastSystem sys = cfg.make_system();

    if (c_sim->parsed()) {
        const std::vector<double> y0 = parse_ic(sys, ic_text);
        const double T = t1 > t0 ? t1 : t0 + 10.0 / sys.eps;
        sf::OdeSpec spec;
        spec.dimension = sys.dim();
        spec.rhs = sys.rhs;
        spec.rel_tol = cfg.rel_tol;
        spec.abs_tol = cfg.abs_tol;
        const sf::Trajectory tr = sf::integrate(spec, y0, t0, T);
        sf::CsvTable t;
        t.header = {"t"};
        for (int i = 0; i < sys.fast_dim; ++i)
            t.header.push_back((sys.angular[i] ? "phi" : "x") +
                               std::to_string(i + 1));
        t.header.push_back("mu");
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            std::vector<double> row{tr.times[k]};
            row.insert(row.end(), tr.states[k].begin(), tr.states[k].end());
            t.rows.push_back(std::move(row));
        }
        emit_table(t, out_path, cfg.format);
        return 0;
    }
    if (c_eq->parsed()) {
        const sf::Box box = region_box(cfg, sys);
        const auto eqs = sf::find_equilibria(sys, box);
        for (const auto& e : eqs) {
            std::cout << sf::to_string(e.cls) << " state=(";
            for (std::size_t i = 0; i < e.state.size(); ++i)
                std::cout << (i ? "," : "") << sf::fmt_double(e.state[i]);
            std::cout << ") eig=(";
            for (std::size_t i = 0; i < e.eigenvalues.size(); ++i)
                std::cout << (i ? "," : "")
                          << sf::fmt_double(e.eigenvalues[i].real()) << "+"
                          << sf::fmt_double(e.eigenvalues[i].imag()) << "i";
            std::cout << ")\n";
        }
        return 0;
    }
    if (c_man->parsed()) {
        const sf::Box box = region_box(cfg, sys);
        const auto eqs = sf::find_equilibria(sys, box);
        const sf::Equilibrium* saddle = nullptr;
        for (const auto& e : eqs)
            if (e.cls == sf::EqClass::Saddle) saddle = &e;
        if (!saddle) throw sf::NotASaddle("no saddle in the search box");
        auto [plus, minus] = sf::trace_stable_manifold(sys, *saddle, box);
        sf::CsvTable t;
        t.header = {"branch"};
        for (int i = 0; i < sys.fast_dim; ++i)
            t.header.push_back((sys.angular[i] ? "phi" : "x") +
                               std::to_string(i + 1));
        t.header.push_back("mu");
        for (const sf::ManifoldCurve* c : {&plus, &minus})
            for (const auto& p : c->points) {
                std::vector<double> row{static_cast<double>(c->side)};
                row.insert(row.end(), p.begin(), p.end());
                t.rows.push_back(std::move(row));
            }
        emit_table(t, out_path, cfg.format);
        return 0;
    }
    if (c_red->parsed()) {
        sf::CsvTable t;
        if (sys.tag == sf::ModelTag::Network) {
            std::vector<sf::AveragedSample> samples(cfg.resolution + 1);
            sf::parallel_for(samples.size(), cfg.threads, [&](std::size_t k) {
                const double mu = cfg.mu_lo +
                                  (cfg.mu_hi - cfg.mu_lo) * k / cfg.resolution;
                samples[k] = sf::numeric_average_network(
                    cfg.network, mu, sf::mix_seed(cfg.seed, k));
            });
            const auto pot = sf::numeric_potential(samples);
            t.header = {"mu", "f", "U"};
            for (std::size_t k = 0; k < samples.size(); ++k)
                t.rows.push_back(
                    {samples[k].mu, samples[k].g_bar, pot[k].second});
        } else {
            sf::ReducedSystem r;
            if (sys.tag == sf::ModelTag::Pitchfork)
                r = sf::reduced_pitchfork(cfg.pitchfork);
            else if (sys.tag == sf::ModelTag::Tanh)
                r = sf::reduced_tanh(cfg.tanh_model);
            else
                r = sf::reduced_rotator(cfg.rotator);
            t.header = {"mu", "f", "U"};
            for (int k = 0; k <= cfg.resolution; ++k) {
                const double mu =
                    cfg.mu_lo + (cfg.mu_hi - cfg.mu_lo) * k / cfg.resolution;
                t.rows.push_back({mu, r.f(mu), r.potential(mu)});
            }
        }
        emit_table(t, out_path, cfg.format);
        return 0;
    }

    const sf::BasinClassifier cl = make_classifier(cfg, sys);

    if (c_grid->parsed()) {
        if (sys.dim() != 2)
            throw sf::UsageError(
                "basin-grid needs an explicit cross-section for dim > 2; use "
                "the fig3b/fig3d presets");
        sf::CrossSection cs;
        cs.fixed = {0.0, 0.0};
        cs.name_i = sys.angular[0] ? "phi" : "x";
        cs.name_j = "mu";
        cs.i_lo = cfg.fast_lo;
        cs.i_hi = cfg.fast_hi;
        cs.j_lo = cfg.mu_lo;
        cs.j_hi = cfg.mu_hi;
        const sf::BasinGrid g =
            sf::basin_grid(cl, cs, cfg.resolution, cfg.resolution, cfg.threads);
        emit_table(sf::detail::grid_table(g), out_path, cfg.format);
        std::cerr << "# undecided cells: " << g.undecided << "\n";
        return 0;
    }
    if (c_mc->parsed()) {
        const sf::Box region = region_box(cfg, sys);
        const sf::McEstimate e = sf::mc_volume(
            cl, region, cfg.trials, cfg.seed, sf::LabelKind::RotatingOrbit,
            cfg.threads);
        std::cout << "V=" << sf::fmt_double(e.volume)
                  << " stderr=" << sf::fmt_double(e.std_error)
                  << " K=" << e.hits << " M=" << e.trials
                  << " undecided=" << e.undecided << "\n";
        return 0;
    }
    if (c_sweep->parsed()) {
        const sf::Box region = region_box(cfg, sys);
        auto make_cl = [&](double eps) {
            sf::Config c2 = cfg;
            c2.pitchfork.eps = c2.tanh_model.eps = c2.rotator.eps =
                c2.network.eps = eps;
            return make_classifier(c2, c2.make_system());
        };
        const auto pts =
            sf::volume_sweep(make_cl, region, cfg.eps_list, cfg.trials,
                             cfg.seed, sf::LabelKind::RotatingOrbit,
                             cfg.threads);
        emit_table(sf::detail::sweep_table(pts), out_path, cfg.format);
        std::vector<sf::ScalingPoint> sp;
        for (const auto& p : pts)
            sp.push_back({p.eps, p.estimate.volume, p.estimate.std_error});
        try {
            const sf::ScalingFit fit = sf::fit_scaling(sp);
            std::cerr << "# fit: log V = " << sf::fmt_double(fit.log_A)
                      << " - " << sf::fmt_double(fit.C)
                      << "/eps  (R^2 = " << sf::fmt_double(fit.r2) << ")\n";
        } catch (const sf::TooFewPoints& e) {
            std::cerr << "# fit skipped: " << e.what() << "\n";
        }
        if (predict && sys.tag == sf::ModelTag::Rotator) {
            const double fold = -cfg.rotator.omega - 1.0 + 1e-6;
            double upper = -cfg.rotator.omega + 1.0 - 1e-6;
            if (c_sweep->count("--mu-probe")) {
                upper = std::min(mu_probe, upper);
            } else {
                // default span: up to the saddle, the funnel apex
                const auto eqs = sf::find_equilibria(
                    sys, {{-sf::kPi, fold - 1.0}, {sf::kPi, upper + 1.0}}, 16);
                for (const auto& e : eqs)
                    if (e.cls == sf::EqClass::Saddle)
                        upper = std::min(upper, e.mu() - 1e-6);
            }
            const auto fc =
                sf::predicted_funnel_constant(cfg.rotator, fold, upper);
            std::cerr << "# C_pred = " << sf::fmt_double(fc.c_pred)
                      << " over mu in [" << sf::fmt_double(fc.mu_lo) << ", "
                      << sf::fmt_double(fc.mu_hi) << "]\n";
        }
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const sf::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const sf::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const sf::SchemaMismatch& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const sf::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
