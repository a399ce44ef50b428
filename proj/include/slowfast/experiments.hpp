#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowfast/basins.hpp"
#include "slowfast/io.hpp"
#include "slowfast/models.hpp"
#include "slowfast/reduction.hpp"
#include "slowfast/scaling.hpp"

namespace slowfast {

struct RunOptions {
    bool paper_scale = false;  // grids 1024^2 and M = 1e6 instead of 256^2 / 1e4
    int threads = 1;
    std::string format = "csv";  // or "json" (newline-delimited records)

    int grid_res() const { return paper_scale ? 1024 : 256; }
    long long trials() const { return paper_scale ? 1000000 : 10000; }
};

struct RunRecord {
    std::string preset;
    std::string timestamp;
    std::uint64_t seed = 0;
    std::uint64_t content_hash = 0;  // FNV-1a over the data file bytes
    double wall_seconds = 0;
    std::filesystem::path data_path;
    std::filesystem::path meta_path;
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c",
        "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4bc"};
    return names;
}

namespace detail {

inline std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

inline void write_table(const std::filesystem::path& dir, const CsvTable& t,
                        const std::string& format) {
    if (format == "csv") {
        write_csv(dir / "data.csv", t);
        return;
    }
    std::ofstream os(dir / "data.json");
    if (!os) throw IoError("cannot open " + (dir / "data.json").string());
    for (const auto& row : t.rows) {
        nlohmann::json rec;
        for (std::size_t i = 0; i < t.header.size(); ++i)
            rec[t.header[i]] = row[i];
        os << rec.dump() << "\n";
    }
}

inline CsvTable read_table(const std::filesystem::path& dir) {
    if (std::filesystem::exists(dir / "data.csv"))
        return read_csv(dir / "data.csv");
    const auto jp = dir / "data.json";
    if (!std::filesystem::exists(jp))
        throw IoError("no data file in " + dir.string());
    std::ifstream is(jp);
    CsvTable t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto rec = nlohmann::json::parse(line);
        if (t.header.empty())
            for (auto it = rec.begin(); it != rec.end(); ++it)
                t.header.push_back(it.key());
        std::vector<double> row;
        for (const auto& k : t.header) row.push_back(rec.at(k).get<double>());
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable grid_table(const BasinGrid& g) {
    CsvTable t;
    t.header = {"i", "j", g.section.name_i, g.section.name_j, "code"};
    t.rows.reserve(g.codes.size());
    for (int j = 0; j < g.res_j; ++j)
        for (int i = 0; i < g.res_i; ++i) {
            const double vi = g.section.i_lo +
                              (g.section.i_hi - g.section.i_lo) * i / g.res_i;
            const double vj = g.section.j_lo +
                              (g.section.j_hi - g.section.j_lo) * j / g.res_j;
            t.rows.push_back({static_cast<double>(i), static_cast<double>(j),
                              vi, vj, static_cast<double>(g.at(i, j))});
        }
    return t;
}

inline CsvTable potential_table(const ReducedSystem& r, double mu_lo,
                                double mu_hi, int samples) {
    CsvTable t;
    t.header = {"mu", "f", "U"};
    for (int k = 0; k <= samples; ++k) {
        const double mu = mu_lo + (mu_hi - mu_lo) * k / samples;
        t.rows.push_back({mu, r.f(mu), r.potential(mu)});
    }
    return t;
}

inline CsvTable sweep_table(const std::vector<SweepPoint>& pts) {
    CsvTable t;
    t.header = {"eps", "V", "stderr", "K", "M", "undecided"};
    for (const auto& p : pts)
        t.rows.push_back({p.eps, p.estimate.volume, p.estimate.std_error,
                          static_cast<double>(p.estimate.hits),
                          static_cast<double>(p.estimate.trials),
                          static_cast<double>(p.estimate.undecided)});
    return t;
}

inline nlohmann::json grid_meta(const BasinGrid& g) {
    nlohmann::json m;
    m["params"] = g.params;
    m["eps"] = g.eps;
    m["resolution"] = {g.res_i, g.res_j};
    m["axes"] = {{"i", {{"name", g.section.name_i},
                        {"lo", g.section.i_lo},
                        {"hi", g.section.i_hi}}},
                 {"j", {{"name", g.section.name_j},
                        {"lo", g.section.j_lo},
                        {"hi", g.section.j_hi}}}};
    m["undecided_cells"] = g.undecided;
    m["code_legend"] = {{"0", "undecided"},
                        {"1+k", "point attractor k"},
                        {"90", "unlisted point attractor"},
                        {"98", "bounded cycle"},
                        {"99", "rotating orbit"}};
    return m;
}

}  // namespace detail

// Every preset writes <out_dir>/<name>/<seed>/data.{csv,json} + meta.json and
// is bit-reproducible for a fixed (name, seed) pair.
inline RunRecord run_preset(const std::string& name, std::uint64_t seed,
                            const std::filesystem::path& out_dir,
                            const RunOptions& opt = {}) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw UnknownPreset("unknown preset: " + name);

    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = out_dir / name / std::to_string(seed);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());

    CsvTable data;
    nlohmann::json meta;
    meta["preset"] = name;
    meta["seed"] = seed;
    meta["scale"] = opt.paper_scale ? "paper" : "desk";
    meta["assumed"] = nlohmann::json::array();
    meta["conventions"] = {{"potential", "U = -int f, U(0) = 0 when covered"},
                           {"rotation_average", "bounded branch of the root"}};

    const int res = opt.grid_res();
    const long long M = opt.trials();

    if (name == "fig1a" || name == "fig1c") {
        const bool pf = name == "fig1a";
        const SlowFastSystem sys =
            pf ? make_pitchfork({}) : make_tanh({});
        ClassifyOptions copt;
        copt.horizon = 60.0 / sys.eps;  // slow relaxation near the wells
        BasinClassifier cl(sys, default_stable_equilibria(sys), copt);
        CrossSection cs;
        cs.fixed = {0.0, 0.0};
        cs.name_i = "x";
        cs.name_j = "mu";
        cs.i_lo = 0.0;
        cs.i_hi = pf ? 3.0 : 4.0;
        cs.j_lo = pf ? -4.0 : -8.0;
        cs.j_hi = 8.0;
        const BasinGrid g = basin_grid(cl, cs, res, res, opt.threads);
        data = detail::grid_table(g);
        meta["grid"] = detail::grid_meta(g);
        meta["horizon"] = copt.horizon;
    } else if (name == "fig1b") {
        data = detail::potential_table(reduced_pitchfork({}), -4.0, 8.0, 600);
        meta["params"] = {{"a", 3.0}, {"b", 2.0}};
    } else if (name == "fig1d") {
        data = detail::potential_table(reduced_tanh({}), -8.0, 8.0, 800);
        meta["params"] = {{"a", 5.0}, {"b", 10.0}};
    } else if (name == "fig2a" || name == "fig2c") {
        RotatorParams p;
        p.eps = (name == "fig2c") ? 0.01 : 0.1;
        const SlowFastSystem sys = make_rotator(p);
        BasinClassifier cl(sys, default_stable_equilibria(sys));
        CrossSection cs;
        cs.fixed = {0.0, 0.0};
        cs.name_i = "phi";
        cs.name_j = "mu";
        cs.i_lo = 0.0;
        cs.i_hi = kTwoPi;
        cs.j_lo = -10.0;
        cs.j_hi = 12.0;
        const BasinGrid g = basin_grid(cl, cs, res, res, opt.threads);
        data = detail::grid_table(g);
        meta["grid"] = detail::grid_meta(g);
    } else if (name == "fig2b") {
        data = detail::potential_table(reduced_rotator({}), -10.0, 12.0, 1100);
        meta["params"] = {{"omega", -4.0}, {"eta", 10.0}, {"alpha", kPi / 2}};
    } else if (name == "fig2d") {
        const std::vector<double> eps_list{0.05,       1.0 / 15.0, 0.08,
                                           0.1,        2.0 / 15.0, 0.2};
        const Box region{{0.0, -10.0}, {kTwoPi, 3.0}};
        auto make_cl = [](double eps) {
            RotatorParams p;
            p.eps = eps;
            const SlowFastSystem sys = make_rotator(p);
            return BasinClassifier(sys, default_stable_equilibria(sys));
        };
        const auto pts = volume_sweep(make_cl, region, eps_list, M, seed,
                                      LabelKind::RotatingOrbit, opt.threads);
        data = detail::sweep_table(pts);
        std::vector<ScalingPoint> sp;
        for (const auto& p : pts)
            sp.push_back({p.eps, p.estimate.volume, p.estimate.std_error});
        try {
            const ScalingFit fit = fit_scaling(sp);
            meta["fit"] = {{"log_A", fit.log_A},
                           {"C", fit.C},
                           {"r2", fit.r2},
                           {"residuals", fit.residuals}};
        } catch (const TooFewPoints&) {
            meta["fit"] = nullptr;
        }
        meta["region"] = {{"mu", {-10.0, 3.0}}, {"phi", {0.0, kTwoPi}}};
        meta["M"] = M;
    } else if (name == "fig3a") {
        NetworkParams p{{-4.0, -4.6}, 1.0, 10.0, kPi / 2, 0.1};
        meta["assumed"].push_back("alpha = pi/2 (not stated for this figure)");
        meta["assumed"].push_back(
            "delta_omega = 0.6, omega2 = omega1 - delta_omega");
        std::vector<AveragedSample> samples(121);
        parallel_for(samples.size(), opt.threads, [&](std::size_t k) {
            const double mu = -1.0 + 0.1 * static_cast<double>(k);
            samples[k] = numeric_average_network(p, mu, mix_seed(seed, k));
        });
        const auto pot = numeric_potential(samples);
        data.header = {"mu", "g_bar", "x_bar", "U"};
        for (std::size_t k = 0; k < samples.size(); ++k)
            data.rows.push_back({samples[k].mu, samples[k].g_bar,
                                 samples[k].x_bar, pot[k].second});
        meta["params"] = {{"omega1", -4.0}, {"omega2", -4.6}, {"kappa", 1.0},
                          {"eta", 10.0},    {"alpha", kPi / 2}};
    } else if (name == "fig3b" || name == "fig3d") {
        NetworkParams p{{-4.0, -4.6}, 1.0, 10.0, kPi / 2, 0.1};
        meta["assumed"].push_back("alpha = pi/2 (not stated for this figure)");
        meta["assumed"].push_back(
            "delta_omega = 0.6, omega2 = omega1 - delta_omega");
        const SlowFastSystem sys = make_network(p);
        BasinClassifier cl(sys, default_stable_equilibria(sys));
        CrossSection cs;
        if (name == "fig3b") {
            cs.axis_i = 1;  // phi2
            cs.axis_j = 2;  // mu
            cs.fixed = {1.2461, 0.0, 0.0};
            cs.name_i = "phi2";
            cs.name_j = "mu";
            cs.i_lo = 0.0;
            cs.i_hi = kTwoPi;
            cs.j_lo = -10.0;
            cs.j_hi = 12.0;
            meta["section"] = {{"phi1", 1.2461}};
        } else {
            cs.axis_i = 0;  // phi1
            cs.axis_j = 1;  // phi2
            cs.fixed = {0.0, 0.0, 2.86};
            cs.name_i = "phi1";
            cs.name_j = "phi2";
            cs.i_lo = 0.0;
            cs.i_hi = kTwoPi;
            cs.j_lo = 0.0;
            cs.j_hi = kTwoPi;
            meta["section"] = {{"mu", 2.86}};
        }
        const BasinGrid g = basin_grid(cl, cs, res, res, opt.threads);
        data = detail::grid_table(g);
        meta["grid"] = detail::grid_meta(g);
    } else if (name == "fig3c") {
        const std::vector<double> dws{0.6, 1.0, 2.2};
        const std::vector<double> eps_list{0.05,       1.0 / 15.0, 0.08,
                                           0.1,        2.0 / 15.0, 0.2};
        data.header = {"delta_omega", "eps", "V", "stderr", "K", "M",
                       "undecided"};
        for (std::size_t di = 0; di < dws.size(); ++di) {
            const double dw = dws[di];
            const Box region{{0.0, 0.0, -10.0}, {kTwoPi, kTwoPi, 0.0}};
            auto make_cl = [dw](double eps) {
                NetworkParams p{{-4.0, -4.0 - dw}, 1.0, 10.0, kPi / 2, eps};
                const SlowFastSystem sys = make_network(p);
                return BasinClassifier(sys, default_stable_equilibria(sys));
            };
            const auto pts =
                volume_sweep(make_cl, region, eps_list, M,
                             mix_seed(seed, 0x3c0 + di),
                             LabelKind::RotatingOrbit, opt.threads);
            for (const auto& p : pts)
                data.rows.push_back({dw, p.eps, p.estimate.volume,
                                     p.estimate.std_error,
                                     static_cast<double>(p.estimate.hits),
                                     static_cast<double>(p.estimate.trials),
                                     static_cast<double>(p.estimate.undecided)});
        }
        meta["assumed"].push_back("alpha = pi/2 (not stated for this figure)");
        meta["convention_delta_omega"] = "omega2 = omega1 - delta_omega";
        meta["region"] = {{"mu", {-10.0, 0.0}}, {"phi", {0.0, kTwoPi}}};
        meta["M"] = M;
    } else if (name == "fig4a") {
        NetworkParams p;
        p.omegas.resize(10);
        for (int i = 0; i < 10; ++i) p.omegas[i] = -4.0 + i / 9.0;
        p.kappa = 1.0;
        p.eta = 10.0;
        p.alpha = kPi / 2;
        const std::vector<double> eps_list{0.05,       1.0 / 15.0, 0.08,
                                           0.1,        2.0 / 15.0, 0.2};
        Box region;
        region.lo.assign(11, 0.0);
        region.hi.assign(11, kTwoPi);
        region.lo[10] = -10.0;
        region.hi[10] = 0.0;
        auto make_cl = [p](double eps) mutable {
            p.eps = eps;
            const SlowFastSystem sys = make_network(p);
            return BasinClassifier(sys, default_stable_equilibria(sys));
        };
        const auto pts = volume_sweep(make_cl, region, eps_list, M, seed,
                                      LabelKind::RotatingOrbit, opt.threads);
        data = detail::sweep_table(pts);
        meta["params"] = {{"N", 10}, {"kappa", 1.0}, {"eta", 10.0},
                          {"alpha", kPi / 2}};
        meta["region"] = {{"mu", {-10.0, 0.0}}, {"phi", {0.0, kTwoPi}}};
        meta["M"] = M;
    } else {  // fig4bc
        NetworkParams p;
        p.omegas.resize(10);
        for (int i = 0; i < 10; ++i) p.omegas[i] = -4.0 + i / 9.0;
        p.kappa = 1.0;
        p.eta = 10.0;
        p.alpha = kPi / 2;
        meta["assumed"].push_back(
            "eps not stated for this figure; {0.05, 0.1} scanned, first "
            "value splitting the two trajectories is reported");
        const std::vector<double> eps_scan{0.05, 0.1};
        double chosen_eps = 0.0;
        std::string label_a, label_b;
        Trajectory tra, trb;
        for (double eps : eps_scan) {
            p.eps = eps;
            const SlowFastSystem sys = make_network(p);
            std::vector<double> ya(11, 6.0), yb(11, 6.0);
            ya[10] = -5.0;
            yb[10] = -5.1;
            const double T = 10.0 / eps;
            // attractor candidates from relaxing the two ICs themselves
            auto eqs = find_attractors_by_relaxation(sys, {ya, yb}, T);
            BasinClassifier cl(sys, eqs);
            const BasinLabel la = cl.classify(ya), lb = cl.classify(yb);
            if (la.kind != lb.kind && la.kind != LabelKind::Undecided &&
                lb.kind != LabelKind::Undecided) {
                chosen_eps = eps;
                label_a = la.kind == LabelKind::RotatingOrbit
                              ? "rotating"
                              : "point-attractor";
                label_b = lb.kind == LabelKind::RotatingOrbit
                              ? "rotating"
                              : "point-attractor";
                OdeSpec spec;
                spec.dimension = 11;
                spec.rhs = sys.rhs;
                spec.store = true;
                tra = integrate(spec, ya, 0.0, T);
                trb = integrate(spec, yb, 0.0, T);
                break;
            }
        }
        if (chosen_eps == 0.0)
            throw NumericError(
                "fig4bc: trajectories did not split for any scanned eps");
        data.header = {"run", "t", "mu"};
        for (int i = 1; i <= 10; ++i)
            data.header.push_back("phi" + std::to_string(i));
        const double T = 10.0 / chosen_eps;
        const int samples = 2000;
        for (int run = 0; run < 2; ++run) {
            const Trajectory& tr = run == 0 ? tra : trb;
            for (int k = 0; k <= samples; ++k) {
                const double t = T * k / samples;
                const auto y = dense_eval(tr, t);
                std::vector<double> row{static_cast<double>(run), t, y[10]};
                for (int i = 0; i < 10; ++i) row.push_back(y[i]);
                data.rows.push_back(std::move(row));
            }
        }
        meta["eps"] = chosen_eps;
        meta["labels"] = {{"mu0=-5", label_a}, {"mu0=-5.1", label_b}};
        meta["params"] = {{"N", 10}, {"kappa", 1.0}, {"eta", 10.0},
                          {"alpha", kPi / 2}};
    }

    detail::write_table(dir, data, opt.format);

    RunRecord rec;
    rec.preset = name;
    rec.seed = seed;
    rec.timestamp = detail::iso_now();
    rec.data_path = dir / ("data." + opt.format);
    rec.meta_path = dir / "meta.json";
    rec.content_hash = file_content_hash(rec.data_path);
    rec.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

    meta["timestamp"] = rec.timestamp;
    meta["content_hash"] = rec.content_hash;
    meta["wall_seconds"] = rec.wall_seconds;
    meta["format"] = opt.format;
    {
        std::ofstream os(rec.meta_path);
        if (!os) throw IoError("cannot open " + rec.meta_path.string());
        os << meta.dump(2) << "\n";
    }
    return rec;
}

struct DiffReport {
    std::string preset;
    std::size_t rows = 0;
    std::size_t cols = 0;
    double max_abs_diff = 0;
    std::size_t exceeding = 0;  // cells beyond tolerance
    bool identical = false;
};

// Cell-wise numeric comparison of two runs of the same preset.
inline DiffReport diff_runs(const std::filesystem::path& dir_a,
                            const std::filesystem::path& dir_b,
                            double tol = 0.0) {
    auto preset_of = [](const std::filesystem::path& d) {
        std::ifstream is(d / "meta.json");
        if (!is) throw IoError("cannot open " + (d / "meta.json").string());
        nlohmann::json m;
        is >> m;
        return m.at("preset").get<std::string>();
    };
    const std::string pa = preset_of(dir_a), pb = preset_of(dir_b);
    if (pa != pb)
        throw SchemaMismatch("diff_runs: presets differ: " + pa + " vs " + pb);
    const CsvTable a = detail::read_table(dir_a);
    const CsvTable b = detail::read_table(dir_b);
    if (a.header != b.header)
        throw SchemaMismatch("diff_runs: column headers differ");
    if (a.rows.size() != b.rows.size())
        throw SchemaMismatch("diff_runs: row counts differ");

    DiffReport rep;
    rep.preset = pa;
    rep.rows = a.rows.size();
    rep.cols = a.header.size();
    for (std::size_t r = 0; r < a.rows.size(); ++r)
        for (std::size_t c = 0; c < a.header.size(); ++c) {
            const double d = std::abs(a.rows[r][c] - b.rows[r][c]);
            rep.max_abs_diff = std::max(rep.max_abs_diff, d);
            if (d > tol) ++rep.exceeding;
        }
    rep.identical = rep.max_abs_diff == 0.0;
    return rep;
}

}  // namespace slowfast
