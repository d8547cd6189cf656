// fracinv: experiments for the time-fractional diffusion inverse problem.
// Exit codes: 0 success, 1 bad input or violated precondition, 2 solver failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracinv/fracinv.hpp"

namespace fs = std::filesystem;
using namespace fracinv;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
    std::string subcommand;
    std::string config_path;
    fs::path out_dir;
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

const std::set<std::string> kProblemKeys = {"alpha", "ell", "T", "nx", "nt", "right_bc", "right_value", "l1_correction"};

std::set<std::string> with_problem_keys(std::set<std::string> extra) {
    extra.insert(kProblemKeys.begin(), kProblemKeys.end());
    return extra;
}

/// Section value, falling back to the global section.
struct Lookup {
    const ConfigSection& local;
    const ConfigSection& global;

    const ConfigSection& pick(const std::string& key) const { return local.has(key) ? local : global; }
    bool has(const std::string& key) const { return local.has(key) || global.has(key); }
    std::string str(const std::string& key, const std::string& fb) const { return pick(key).get(key, fb); }
    std::string require(const std::string& key) const { return pick(key).require(key); }
    double num(const std::string& key, double fb) const { return pick(key).get_double(key, fb); }
    int integer(const std::string& key, int fb) const { return pick(key).get_int(key, fb); }
    bool flag(const std::string& key, bool fb) const { return pick(key).get_bool(key, fb); }
    std::vector<double> list(const std::string& key, std::vector<double> fb) const { return pick(key).get_list(key, fb); }
};

ProblemConfig problem_from(const Lookup& c) {
    ProblemConfig p;
    p.alpha = c.num("alpha", 0.5);
    p.ell = c.num("ell", 1.0);
    p.horizon = c.num("T", 1.0);
    const std::string bc = c.str("right_bc", "neumann");
    ScalarFunction g;
    if (c.has("right_value")) g = Expression::parse(c.str("right_value", "0")).in_t();
    if (bc == "neumann") p.right_bc = BoundaryCondition::neumann(g);
    else if (bc == "dirichlet") p.right_bc = BoundaryCondition::dirichlet(g);
    else throw InvalidArgument("right_bc must be 'neumann' or 'dirichlet', got '" + bc + "'");
    p.validate();
    return p;
}

L1Options l1_from(const Lookup& c) { return L1Options{c.flag("l1_correction", true)}; }

/// Coefficient from `<name>_expr` or, where allowed, a CSV profile `<name>_csv`.
ScalarFunction coefficient(const Lookup& c, const std::string& name, const std::string& fallback_expr = {}) {
    const std::string csv_key = name + "_csv";
    const std::string expr_key = name + "_expr";
    if (c.has(csv_key) && c.has(expr_key))
        throw InvalidArgument("give either " + expr_key + " or " + csv_key + ", not both");
    if (c.has(csv_key)) return csv_profile(c.str(csv_key, ""));
    if (!c.has(expr_key) && !fallback_expr.empty()) return Expression::parse(fallback_expr).in_x();
    return Expression::parse(c.require(expr_key)).in_x();
}

LeftBoundary left_from(const Lookup& c) {
    if (!c.has("left_flux")) return {};
    return LeftBoundary{Expression::parse(c.str("left_flux", "0")).in_t()};
}

int positive(const Lookup& c, const std::string& key, int fb) {
    const int v = c.integer(key, fb);
    if (v < 1) throw InvalidArgument(key + " must be a positive integer");
    return v;
}

std::uint64_t seed_from(const Lookup& c, const RunContext& ctx) {
    if (ctx.seed_override) return *ctx.seed_override;
    const double s = c.num("seed", 0.0);
    if (s < 0.0 || s != std::floor(s)) throw InvalidArgument("seed must be a nonnegative integer");
    return static_cast<std::uint64_t>(s);
}

void finish(OutputSink& sink, const RunContext& ctx, const ConfigFile& cfg, std::uint64_t seed) {
    RunManifest m;
    m.subcommand = ctx.subcommand;
    m.config_path = ctx.config_path;
    m.seed = seed;
    m.version = kVersion;
    m.config_hash = fnv1a_hex(cfg.raw);
    sink.manifest(std::move(m));
}

void no_sections(const ConfigFile& cfg, const std::string& sub) {
    if (!cfg.sections.empty())
        throw InvalidArgument("[" + cfg.sections.front().name() + "]: sections are only used by 'uniqueness', not '" +
                              sub + "'");
}

Table field_table(const FieldSolution& u) {
    Table t{{"t", "x", "u"}, {}};
    for (std::size_t j = 0; j < u.time().size(); ++j)
        for (std::size_t i = 0; i < u.space().size(); ++i) t.rows.push_back({u.time()[j], u.space()[i], u(i, j)});
    return t;
}

Table trace_table(const CauchyTrace& tr) {
    Table t{{"t", "u0", "du0"}, {}};
    for (std::size_t j = 0; j < tr.time.size(); ++j) t.rows.push_back({tr.time[j], tr.u0[j], tr.du0[j]});
    return t;
}

// ------------------------------------------------------------------ forward

int run_forward(const RunContext& ctx) {
    const auto cfg = load_config(ctx.config_path);
    no_sections(cfg, "forward");
    cfg.global.check_keys(with_problem_keys({"p_expr", "p_csv", "a_expr", "left_flux", "solver", "n_modes", "seed"}));
    const Lookup c{cfg.global, cfg.global};
    const auto problem = problem_from(c);
    const int nx = positive(c, "nx", 100);
    const int nt = positive(c, "nt", 400);
    const std::string solver = c.str("solver", "l1");
    if (solver != "l1" && solver != "spectral" && solver != "both")
        throw InvalidArgument("solver must be l1, spectral or both, got '" + solver + "'");
    const auto space = make_uniform_grid(problem.ell, nx);
    const auto time = make_time_grid(problem.horizon, nt);
    const auto p = CoefficientField::sample(space, coefficient(c, "p"), CoefficientLabel::p);
    const auto a = CoefficientField::sample(space, coefficient(c, "a"), CoefficientLabel::a);
    const auto left = left_from(c);
    const auto header = problem_header(problem, nx, nt);
    const auto seed = seed_from(c, ctx);

    OutputSink sink(ctx.out_dir);
    std::optional<FieldSolution> l1_sol, sp_sol;
    if (solver != "spectral") {
        l1_sol = solve_ibvp(problem, p, a, left, space, time, l1_from(c));
        sink.csv("field_l1.csv", header, field_table(*l1_sol));
        sink.csv("trace_l1.csv", header, trace_table(extract_trace(*l1_sol)));
    }
    if (solver != "l1") {
        if (!left.homogeneous() || !problem.right_bc.homogeneous())
            throw InvalidArgument("the spectral solver needs homogeneous boundary data (drop left_flux/right_value)");
        const int modes = c.integer("n_modes", default_mode_count(space));
        const auto eig = eigendecompose(p, space, problem.right_bc.kind, modes);
        sp_sol = spectral_solve(eig, a, problem.alpha, time);
        sink.csv("field_spectral.csv", header, field_table(*sp_sol));
        sink.csv("trace_spectral.csv", header, trace_table(extract_trace(*sp_sol)));
    }
    if (l1_sol && sp_sol) {
        Table gap{{"t", "relative_l2_gap"}, {}};
        double worst = 0.0;
        for (std::size_t j = 0; j < time.size(); ++j) {
            const double ref = l2_norm(sp_sol->slice(j), space.step());
            const double d = l2_distance(l1_sol->slice(j), sp_sol->slice(j), space.step());
            const double rel = ref > 0.0 ? d / ref : d;
            gap.rows.push_back({time[j], rel});
            worst = std::max(worst, rel);
        }
        sink.csv("solver_gap.csv", header, gap);
        std::cout << "max relative L2 gap (l1 vs spectral): " << format_double(worst) << "\n";
    }
    std::cout << "wrote " << sink.written().size() << " files to " << sink.dir().string() << "\n";
    finish(sink, ctx, cfg, seed);
    return 0;
}

// ------------------------------------------------------------------- kernel

int run_kernel(const RunContext& ctx) {
    const auto cfg = load_config(ctx.config_path);
    no_sections(cfg, "kernel");
    cfg.global.check_keys({"ell", "nx", "p_expr", "p_csv", "q_expr", "q_csv", "tol", "max_iter", "seed"});
    const Lookup c{cfg.global, cfg.global};
    const double ell = c.num("ell", 1.0);
    const int nx = positive(c, "nx", 200);
    const auto space = make_uniform_grid(ell, nx);
    const auto p = CoefficientField::sample(space, coefficient(c, "p"), CoefficientLabel::p);
    const auto q = CoefficientField::sample(space, coefficient(c, "q"), CoefficientLabel::q);
    const auto k = solve_kernel(p, q, space, c.num("tol", 1e-12), c.integer("max_iter", 100));
    const CsvHeader header{{"ell", format_double(ell)}, {"N", std::to_string(nx)}};

    OutputSink sink(ctx.out_dir);
    Table tri{{"x", "y", "K"}, {}};
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) tri.rows.push_back({space[i], space[j], k(i, j)});
    sink.csv("kernel.csv", header, tri);

    std::vector<double> r(space.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = q[i] - p[i];
    const auto half = cumulative_trapezoid(r, space.step());
    const auto diag = k.diagonal();
    const auto axis = k.on_axis();
    Table d{{"x", "K_diagonal", "half_integral", "K_axis"}, {}};
    for (std::size_t i = 0; i < space.size(); ++i) d.rows.push_back({space[i], diag[i], 0.5 * half[i], axis[i]});
    sink.csv("diagonal_axis.csv", header, d);

    ExperimentReport rep("kernel");
    rep.echo("ell", ell);
    rep.echo("N", std::to_string(nx));
    rep.add_metric("picard_iterations", k.iterations, Comparison::info);
    rep.add_metric("final_update_norm", k.final_update_norm, Comparison::info);
    rep.add_metric("max_abs_K", k.max_abs_all(), Comparison::info);
    rep.add_metric("pde_residual", kernel_pde_residual(k, p, q), Comparison::info);
    rep.add_metric("reflection_defect", k.reflection_defect, Comparison::info);
    sink.json("summary.json", rep.to_json());
    std::cout << rep.to_text();
    finish(sink, ctx, cfg, seed_from(c, ctx));
    return 0;
}

// ---------------------------------------------------------------- transmute

int run_transmute(const RunContext& ctx) {
    const auto cfg = load_config(ctx.config_path);
    no_sections(cfg, "transmute");
    cfg.global.check_keys(with_problem_keys(
        {"p_expr", "p_csv", "q_expr", "q_csv", "a_expr", "left_flux", "tol", "max_iter", "seed"}));
    const Lookup c{cfg.global, cfg.global};
    const auto problem = problem_from(c);
    const int nx = positive(c, "nx", 200);
    const int nt = positive(c, "nt", 400);
    const auto space = make_uniform_grid(problem.ell, nx);
    const auto time = make_time_grid(problem.horizon, nt);
    const auto p = CoefficientField::sample(space, coefficient(c, "p"), CoefficientLabel::p);
    const auto q = CoefficientField::sample(space, coefficient(c, "q"), CoefficientLabel::q);
    const auto a = CoefficientField::sample(space, coefficient(c, "a"), CoefficientLabel::a);
    const auto left = left_from(c);
    const auto l1 = l1_from(c);

    const auto u = solve_ibvp(problem, p, a, left, space, time, l1);
    const auto k = solve_kernel(p, q, space, c.num("tol", 1e-12), c.integer("max_iter", 100));
    const auto v = apply_transform(u, k);
    const auto tr = extract_trace(u);
    const auto res = residual_field(v, q, tr, k, problem.alpha, {true, l1});
    const double sup = max_abs(res.raw());
    const double ablated = residual_2_3(v, q, tr, k, problem.alpha, {false, l1});

    const auto header = problem_header(problem, nx, nt);
    OutputSink sink(ctx.out_dir);
    Table per_t{{"t", "sup_x_residual"}, {}};
    for (std::size_t j = 0; j < time.size(); ++j) per_t.rows.push_back({time[j], max_abs(res.slice(j))});
    sink.csv("residual.csv", header, per_t);
    sink.csv("trace_u.csv", header, trace_table(tr));
    sink.csv("trace_v.csv", header, trace_table(v.trace()));

    ExperimentReport rep("transmute");
    rep.echo("alpha", problem.alpha);
    rep.echo("N", std::to_string(nx));
    rep.echo("M", std::to_string(nt));
    rep.echo("left_flux", left.homogeneous() ? "0" : c.str("left_flux", "0"));
    rep.add_metric("residual_sup", sup, Comparison::info);
    rep.add_metric("residual_sup_without_boundary_term", ablated, Comparison::info);
    rep.add_metric("picard_iterations", k.iterations, Comparison::info);
    sink.json("summary.json", rep.to_json());
    std::cout << rep.to_text();
    finish(sink, ctx, cfg, seed_from(c, ctx));
    return 0;
}

// --------------------------------------------------------------- uniqueness

std::string slug(const std::string& name) {
    std::string s;
    for (char ch : name) s += std::isalnum(static_cast<unsigned char>(ch)) ? char(std::tolower(ch)) : '_';
    return s;
}

int run_uniqueness(const RunContext& ctx) {
    const auto cfg = load_config(ctx.config_path);
    const auto valid = with_problem_keys({"check", "p_expr", "p_csv", "q_expr", "q_csv", "a_expr", "n_modes",
                                          "distinguish_factor", "slope_tolerance", "picard_tol", "max_iter", "x0",
                                          "eps0", "threshold", "levels", "min_order", "samples", "seed"});
    cfg.global.check_keys(valid);
    std::vector<ConfigSection> scenarios = cfg.sections;
    if (scenarios.empty()) scenarios.emplace_back("scenario");
    for (const auto& s : scenarios) s.check_keys(valid);

    std::vector<std::function<ExperimentReport()>> tasks;
    for (const auto& sec : scenarios) {
        const Lookup c{sec, cfg.global};
        LabSettings s;
        s.problem = problem_from(c);
        s.nx = positive(c, "nx", 200);
        s.nt = positive(c, "nt", 400);
        s.n_modes = c.integer("n_modes", 0);
        s.distinguish_factor = c.num("distinguish_factor", 100.0);
        s.slope_tolerance = c.num("slope_tolerance", 0.3);
        s.picard_tol = c.num("picard_tol", 1e-12);
        s.max_iter = c.integer("max_iter", 100);
        s.l1 = l1_from(c);
        const std::string check = c.str("check", "distinguishability");
        const auto p = coefficient(c, "p");
        const auto q = coefficient(c, "q");
        const std::string name = sec.name();
        if (check == "distinguishability") {
            const auto a = coefficient(c, "a");
            tasks.push_back([=] { return distinguishability(p, q, a, s, name); });
        } else if (check == "kernel_vanishing") {
            c.require("x0");
            const double x0 = c.num("x0", 0.0);
            tasks.push_back([=] { return kernel_vanishing_check(p, q, x0, s, name); });
        } else if (check == "axis_vanishing") {
            c.require("eps0");
            const double eps0 = c.num("eps0", 0.0);
            const double thr = c.num("threshold", 1e-8);
            tasks.push_back([=] { return axis_vanishing_check(p, q, eps0, s, thr, name); });
        } else if (check == "moment_identity") {
            const auto a = coefficient(c, "a");
            const int levels = c.integer("levels", 3);
            const double order = c.num("min_order", 1.7);
            tasks.push_back([=] { return moment_identity(p, q, a, s, levels, order, name); });
        } else if (check == "contraction_probe") {
            const auto a = coefficient(c, "a");
            const int samples = c.integer("samples", 5);
            tasks.push_back([=] { return contraction_probe(p, q, a, s, samples, name); });
        } else {
            throw InvalidArgument("[" + name + "]: unknown check '" + check +
                                  "'; valid checks: distinguishability, kernel_vanishing, axis_vanishing, "
                                  "moment_identity, contraction_probe");
        }
    }

    const auto reports = run_jobs(tasks, ctx.jobs);
    OutputSink sink(ctx.out_dir);
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    std::string text;
    bool ok = true;
    for (std::size_t n = 0; n < reports.size(); ++n) {
        const auto& r = reports[n];
        const Lookup c{scenarios[n], cfg.global};
        const std::string base = slug(r.scenario());
        for (const auto& [tname, table] : r.tables())
            sink.csv(base + "_" + tname + ".csv", problem_header(problem_from(c), positive(c, "nx", 200),
                                                                 positive(c, "nt", 400)), table);
        all.push_back(r.to_json());
        text += r.to_text();
        for (const auto& m : r.metrics()) {
            if (m.name != "gap") continue;
            const bool equal = m.comparison == Comparison::less_equal;
            text += std::string("  ") + (equal ? "gap ≤ floor: " : "gap > factor × floor: ") +
                    (m.passed ? "PASS" : "FAIL") + "\n";
        }
        text += "\n";
        ok = ok && r.passed();
    }
    text += std::string("overall: ") + (ok ? "PASS" : "FAIL") + "\n";
    sink.json("report.json", all);
    sink.text("report.txt", text);
    std::cout << text;
    finish(sink, ctx, cfg, seed_from({cfg.global, cfg.global}, ctx));
    return 0;
}

// -------------------------------------------------------------- reconstruct

int run_reconstruct(const RunContext& ctx) {
    const auto cfg = load_config(ctx.config_path);
    no_sections(cfg, "reconstruct");
    cfg.global.check_keys(with_problem_keys({"p_true_expr", "p_true_csv", "a_expr", "left_flux", "sigma", "seed",
                                             "n_params", "lambdas", "tau", "start", "max_iter", "grad_tol",
                                             "fd_step", "refine", "model_error"}));
    const Lookup c{cfg.global, cfg.global};
    const auto problem = problem_from(c);
    const int nx = positive(c, "nx", 40);
    const int nt = positive(c, "nt", 80);
    const auto p_true = coefficient(c, "p_true");
    const auto a_fn = coefficient(c, "a");
    const auto seed = seed_from(c, ctx);
    const int n_params = c.integer("n_params", 10);
    const double sigma = c.num("sigma", 0.0);

    auto inst = synthesize_data(p_true, a_fn, problem, nx, nt, sigma, seed, n_params, left_from(c),
                                positive(c, "refine", 2), l1_from(c));
    OptimizerConfig opt;
    opt.max_iter = positive(c, "max_iter", 200);
    opt.grad_tol = c.num("grad_tol", 1e-8);
    opt.fd_relative_step = c.num("fd_step", 1e-4);
    opt.jobs = ctx.jobs;
    const std::vector<double> theta0(static_cast<std::size_t>(n_params), c.num("start", 0.0));
    const auto lambdas = c.list("lambdas", {0.0});
    const auto dr =
        reconstruct_discrepancy(inst, theta0, lambdas, c.num("tau", 1.0), opt, c.flag("model_error", true));
    inst.lambda_reg = dr.lambda;

    const auto space = inst.space();
    const auto time = inst.time();
    const auto header = problem_header(problem, nx, nt);
    const double err = relative_l2_error(dr.best.estimate, p_true, problem.ell, space);
    OutputSink sink(ctx.out_dir);

    const CoarseProfile est(problem.ell, dr.best.estimate);
    Table prof{{"x", "p_estimate", "p_true"}, {}};
    for (std::size_t i = 0; i < space.size(); ++i) prof.rows.push_back({space[i], est(space[i]), p_true(space[i])});
    sink.csv("profile.csv", header, prof);

    const auto pred = predicted_trace(dr.best.estimate, inst);
    Table tr{{"t", "observed", "predicted"}, {}};
    for (std::size_t j = 0; j < time.size(); ++j) tr.rows.push_back({time[j], inst.observed[j], pred[j]});
    sink.csv("trace.csv", header, tr);

    Table log{{"iteration", "objective", "grad_norm"}, {}};
    for (std::size_t k = 0; k < dr.best.objective.size(); ++k)
        log.rows.push_back({double(k), dr.best.objective[k], k < dr.best.grad_norm.size() ? dr.best.grad_norm[k] : NAN});
    sink.csv("descent.csv", header, log);

    Table lam{{"lambda", "misfit", "target"}, {}};
    for (std::size_t k = 0; k < dr.lambdas_tried.size(); ++k)
        lam.rows.push_back({dr.lambdas_tried[k], dr.misfits[k], dr.targets[k]});
    sink.csv("discrepancy.csv", header, lam);

    nlohmann::ordered_json instance;
    instance["alpha"] = problem.alpha;
    instance["ell"] = problem.ell;
    instance["T"] = problem.horizon;
    instance["nx"] = nx;
    instance["nt"] = nt;
    instance["right_bc"] = to_string(problem.right_bc.kind);
    instance["sigma"] = sigma;
    instance["seed"] = seed;
    instance["n_params"] = n_params;
    instance["observed"] = "trace.csv";
    sink.json("instance.json", instance);

    ExperimentReport rep("reconstruct");
    rep.echo("sigma", sigma);
    rep.echo("n_params", std::to_string(n_params));
    rep.echo("lambda", dr.lambda);
    rep.add_metric("relative_l2_error", err, Comparison::info);
    rep.add_metric("misfit", dr.best.misfit, Comparison::info);
    rep.add_metric("discrepancy_target", dr.target, Comparison::info);
    rep.add_metric("iterations", dr.best.iterations, Comparison::info);
    rep.add_metric("converged", dr.best.converged ? 1.0 : 0.0, Comparison::info);
    rep.add_metric("degraded", dr.best.degraded ? 1.0 : 0.0, Comparison::info);
    auto result = rep.to_json();
    result["estimate"] = dr.best.estimate;
    sink.json("result.json", result);
    std::cout << rep.to_text();
    finish(sink, ctx, cfg, seed);
    return 0;
}

// -------------------------------------------------------------- convergence

int run_convergence(const RunContext& ctx) {
    const auto cfg = load_config(ctx.config_path);
    no_sections(cfg, "convergence");
    cfg.global.check_keys(with_problem_keys({"study", "levels", "refine_x", "refine_t", "c", "p_expr", "q_expr",
                                             "a_expr", "left_flux", "n_modes", "seed"}));
    const Lookup c{cfg.global, cfg.global};
    const auto problem = problem_from(c);
    const std::string study = c.require("study");
    const int levels = positive(c, "levels", 3);
    const int fx = positive(c, "refine_x", 2);
    const int ft = positive(c, "refine_t", 2);
    const int nx0 = positive(c, "nx", 50);
    const int nt0 = positive(c, "nt", 100);
    const auto l1 = l1_from(c);

    std::function<double(int, int)> error_at;
    if (study == "reduction") {
        // p = c, a = 1, Neumann at both ends: u = E_alpha(-c t^alpha)
        const double cc = c.num("c", 1.0);
        error_at = [&, cc](int nx, int nt) {
            const auto space = make_uniform_grid(problem.ell, nx);
            const auto time = make_time_grid(problem.horizon, nt);
            const auto u = solve_ibvp(problem, CoefficientField::constant(space, cc, CoefficientLabel::p),
                                      CoefficientField::constant(space, 1.0, CoefficientLabel::a), {}, space, time, l1);
            double worst = 0.0;
            for (std::size_t j = 0; j < time.size(); ++j) {
                const double exact = mittag_leffler(problem.alpha, -cc * std::pow(time[j], problem.alpha));
                for (double v : u.slice(j)) worst = std::max(worst, std::abs(v - exact));
            }
            return worst;
        };
    } else if (study == "cross_solver") {
        const auto p_fn = coefficient(c, "p");
        const auto a_fn = coefficient(c, "a");
        error_at = [&, p_fn, a_fn](int nx, int nt) {
            const auto space = make_uniform_grid(problem.ell, nx);
            const auto time = make_time_grid(problem.horizon, nt);
            const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
            const auto a = CoefficientField::sample(space, a_fn, CoefficientLabel::a);
            const auto u = solve_ibvp(problem, p, a, {}, space, time, l1);
            const auto eig = eigendecompose(p, space, problem.right_bc.kind, c.integer("n_modes", default_mode_count(space)));
            const auto w = spectral_solve(eig, a, problem.alpha, time);
            double worst = 0.0;
            for (std::size_t j = 1; j < time.size(); ++j)
                worst = std::max(worst, l2_distance(u.slice(j), w.slice(j), space.step()) /
                                            l2_norm(w.slice(j), space.step()));
            return worst;
        };
    } else if (study == "kernel") {
        const auto p_fn = coefficient(c, "p");
        const auto q_fn = coefficient(c, "q");
        error_at = [&, p_fn, q_fn](int nx, int) {
            const auto space = make_uniform_grid(problem.ell, nx);
            const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
            const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
            return kernel_pde_residual(solve_kernel(p, q, space), p, q);
        };
    } else if (study == "transmutation") {
        const auto p_fn = coefficient(c, "p");
        const auto q_fn = coefficient(c, "q");
        const auto a_fn = coefficient(c, "a");
        const auto left = left_from(c);
        error_at = [&, p_fn, q_fn, a_fn, left](int nx, int nt) {
            const auto space = make_uniform_grid(problem.ell, nx);
            const auto time = make_time_grid(problem.horizon, nt);
            const auto p = CoefficientField::sample(space, p_fn, CoefficientLabel::p);
            const auto q = CoefficientField::sample(space, q_fn, CoefficientLabel::q);
            const auto a = CoefficientField::sample(space, a_fn, CoefficientLabel::a);
            const auto u = solve_ibvp(problem, p, a, left, space, time, l1);
            const auto k = solve_kernel(p, q, space);
            return residual_2_3(apply_transform(u, k), q, extract_trace(u), k, problem.alpha, {true, l1});
        };
    } else {
        throw InvalidArgument("study must be reduction, cross_solver, kernel or transmutation, got '" + study + "'");
    }

    Table t{{"level", "nx", "nt", "error", "ratio"}, {}};
    int nx = nx0, nt = nt0;
    double prev = NAN;
    for (int l = 0; l < levels; ++l) {
        const double e = error_at(nx, nt);
        t.rows.push_back({double(l), double(nx), double(nt), e, std::isnan(prev) ? NAN : prev / e});
        std::cout << "level " << l << "  nx=" << nx << "  nt=" << nt << "  error=" << format_double(e);
        if (!std::isnan(prev)) std::cout << "  ratio=" << format_double(prev / e);
        std::cout << "\n";
        prev = e;
        nx *= fx;
        nt *= ft;
    }
    OutputSink sink(ctx.out_dir);
    CsvHeader header = problem_header(problem, nx0, nt0);
    header.emplace_back("study", study);
    sink.csv("convergence.csv", header, t);
    finish(sink, ctx, cfg, seed_from(c, ctx));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experiments for the time-fractional diffusion inverse coefficient problem"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    double ml_alpha = 0.5, ml_z = 0.0, ml_tol = 1e-10;
    auto* ml = app.add_subcommand("ml", "evaluate the Mittag-Leffler function E_alpha(z)");
    ml->add_option("--alpha", ml_alpha, "order alpha > 0")->required();
    ml->add_option("--z", ml_z, "real argument")->required()->allow_extra_args(false);
    ml->add_option("--tol", ml_tol, "relative tolerance")->capture_default_str();

    RunContext ctx;
    std::uint64_t seed = 0;
    const std::vector<std::pair<std::string, std::string>> experiments = {
        {"forward", "solve the forward problem (L1 and/or spectral)"},
        {"kernel", "solve the Goursat problem for the transformation kernel"},
        {"transmute", "check the transmutation identity on a forward solution"},
        {"uniqueness", "run the uniqueness lab scenarios of a config"},
        {"reconstruct", "recover p from synthetic Cauchy data"},
        {"convergence", "grid refinement study"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : experiments) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config,-c", ctx.config_path, "config file (key = value lines)")->required();
        s->add_option("--out,-o", ctx.out_dir, "output directory (default out/<subcommand>)");
        s->add_option("--jobs,-j", ctx.jobs, "parallel jobs for independent scenarios or gradient components")
            ->check(CLI::PositiveNumber);
        s->add_option("--seed", seed, "override the config seed");
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ml->parsed()) {
            if (!std::isfinite(ml_z)) throw InvalidArgument("z must be finite");
            const auto r = ml_eval(MLRequest{ml_alpha, ml_z, ml_tol});
            std::cout << format_double(r.value) << "\n";
            std::cerr << "branch=" << to_string(r.branch) << " error_estimate=" << format_double(r.error_estimate)
                      << (r.accuracy_warning ? " (tolerance not reached)" : "") << "\n";
            return 0;
        }
        for (auto* s : subs) {
            if (!s->parsed()) continue;
            ctx.subcommand = s->get_name();
            if (ctx.out_dir.empty()) ctx.out_dir = fs::path("out") / ctx.subcommand;
            if (s->count("--seed")) ctx.seed_override = seed;
            if (ctx.subcommand == "forward") return run_forward(ctx);
            if (ctx.subcommand == "kernel") return run_kernel(ctx);
            if (ctx.subcommand == "transmute") return run_transmute(ctx);
            if (ctx.subcommand == "uniqueness") return run_uniqueness(ctx);
            if (ctx.subcommand == "reconstruct") return run_reconstruct(ctx);
            if (ctx.subcommand == "convergence") return run_convergence(ctx);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const PreconditionViolation& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 1;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
