#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "pc2/config.hpp"
#include "pc2/io.hpp"
#include "pc2/solver.hpp"
#include "pc2/uq.hpp"

namespace pc2 {

struct BenchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Built-in problem with an analytic reference. The hand-derived closures
/// (value, PDE residual, per-BC residual) back the build-time validity gate:
/// the expression reference must agree with the closure, and the closure's
/// residuals must vanish.
struct BenchmarkCase {
    std::string id;
    ProblemSpec problem;
    std::function<double(std::span<const double>)> reference_fn;
    std::function<double(std::span<const double>)> pde_residual_fn;
    std::vector<std::function<double(std::span<const double>)>> bc_residual_fns;

    std::vector<int> default_p_values;
    int default_n_bc = 0;
    std::vector<int> default_n_sim_grid;
    std::vector<std::string> default_methods;
    Sampler virtual_sampler = Sampler::mc;
};

namespace detail {

inline Variable make_var(const std::string& name, VariableRole role, double lo, double hi) {
    return Variable{name, VariableTransform(role, lo, hi)};
}

inline OperatorTerm make_term(const std::string& coeff, std::vector<int> orders) {
    return OperatorTerm{Expression::parse(coeff), std::move(orders)};
}

inline BoundaryCondition make_bc(OperatorTerm term, const std::string& rhs,
                                 std::vector<std::optional<double>> location) {
    BoundaryCondition bc;
    bc.op.terms.push_back(std::move(term));
    bc.op.rhs = Expression::parse(rhs);
    bc.location = std::move(location);
    return bc;
}

/// Mean of exp(-D*s) for D uniform on [a,b]; stable for s -> 0.
inline double uniform_exp_mean(double a, double b, double s) {
    const double z = (b - a) * s;
    if (std::abs(z) < 1e-8)
        return std::exp(-a * s) * (1.0 - 0.5 * z + z * z / 6.0);
    return std::exp(-a * s) * (-std::expm1(-z)) / z;
}

}  // namespace detail

/// E[u | x,t] for the uncertain-diffusivity heat problem, D ~ U[0.2, 0.8].
inline double heat_uq_local_mean(double x, double t) {
    return std::sin(M_PI * x) * detail::uniform_exp_mean(0.2, 0.8, M_PI * M_PI * t);
}

/// Var[u | x,t] for the same problem.
inline double heat_uq_local_variance(double x, double t) {
    const double s = M_PI * M_PI * t;
    const double m1 = detail::uniform_exp_mean(0.2, 0.8, s);
    const double m2 = detail::uniform_exp_mean(0.2, 0.8, 2.0 * s);
    const double sx = std::sin(M_PI * x);
    return sx * sx * std::max(0.0, m2 - m1 * m1);
}

/// Checks the case's analytic reference: expression/closure agreement, PDE
/// residual below 1e-8 and BC residuals below 1e-10 at seeded random points.
inline void verify_reference(const BenchmarkCase& c, int n_points, std::uint64_t seed) {
    const int dim = c.problem.dimension();
    const Eigen::MatrixXd pts = sample_mc(n_points, dim, seed);
    std::vector<std::string> names;
    std::vector<double> phys(dim);
    for (const auto& v : c.problem.variables) names.push_back(v.name);

    for (int r = 0; r < n_points; ++r) {
        for (int i = 0; i < dim; ++i)
            phys[i] = c.problem.variables[i].transform.from_standard(pts(r, i));
        const EvalEnv env{names, phys, std::nullopt};
        const double ref_expr = c.problem.reference->eval(env);
        const double ref_closure = c.reference_fn(phys);
        const double scale = 1.0 + std::abs(ref_closure);
        if (std::abs(ref_expr - ref_closure) > 1e-12 * scale)
            throw BenchError(c.id + ": reference expression disagrees with analytic closure");
        if (std::abs(c.pde_residual_fn(phys)) > 1e-8)
            throw BenchError(c.id + ": reference does not satisfy the PDE");
    }
    // boundary residuals, per condition family
    const auto bpts = boundary_validation_points(c.problem, 10 * static_cast<int>(c.problem.bcs.size()),
                                                 derive_seed(seed, 99));
    for (const auto& bp : bpts) {
        for (int i = 0; i < dim; ++i)
            phys[i] = c.problem.variables[i].transform.from_standard(bp.xi(i));
        if (std::abs(c.bc_residual_fns[bp.bc_index](phys)) > 1e-10)
            throw BenchError(c.id + ": reference does not satisfy BC " +
                             std::to_string(bp.bc_index));
    }
}

inline BenchmarkCase builtin_case(const std::string& id) {
    using detail::make_bc;
    using detail::make_term;
    using detail::make_var;
    BenchmarkCase c;
    c.id = id;
    const double pi = M_PI;

    if (id == "poisson1d") {
        c.problem.variables = {make_var("x", VariableRole::deterministic, -1.0, 1.0)};
        c.problem.pde.terms = {make_term("1", {2})};
        c.problem.pde.rhs = Expression::parse("2");
        c.problem.bcs = {make_bc(make_term("1", {0}), "0", {-1.0}),
                         make_bc(make_term("1", {1}), "4", {1.0})};
        c.problem.reference = Expression::parse("(x+1)^2");
        c.reference_fn = [](std::span<const double> p) { return (p[0] + 1) * (p[0] + 1); };
        c.pde_residual_fn = [](std::span<const double>) { return 2.0 - 2.0; };
        c.bc_residual_fns = {[](std::span<const double>) { return 0.0; },  // u(-1) = 0
                             [](std::span<const double>) { return 2.0 * (1.0 + 1.0) - 4.0; }};
        c.default_p_values = {5, 6, 7, 8, 9, 10};
        c.default_n_bc = 2;
        c.default_n_sim_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10};
        c.default_methods = {"kkt", "lar-kkt", "lar"};
    } else if (id == "euler_beam") {
        c.problem.variables = {make_var("x", VariableRole::deterministic, 0.0, 1.0)};
        c.problem.pde.terms = {make_term("1", {4})};
        c.problem.pde.rhs = Expression::parse("-1");
        c.problem.bcs = {make_bc(make_term("1", {0}), "0", {0.0}),
                         make_bc(make_term("1", {1}), "0", {0.0}),
                         make_bc(make_term("1", {2}), "0", {1.0}),
                         make_bc(make_term("1", {3}), "0", {1.0})};
        c.problem.reference = Expression::parse("-x^4/24 + x^3/6 - x^2/4");
        c.reference_fn = [](std::span<const double> p) {
            const double x = p[0];
            return -std::pow(x, 4) / 24.0 + std::pow(x, 3) / 6.0 - x * x / 4.0;
        };
        c.pde_residual_fn = [](std::span<const double>) { return -1.0 - (-1.0); };
        c.bc_residual_fns = {
            [](std::span<const double>) { return 0.0; },
            [](std::span<const double>) { return 0.0; },  // u'(0) = 0 - 0/2 ... exact
            [](std::span<const double>) { return (-1.0 / 2.0 + 1.0 - 1.0 / 2.0) - 0.0; },
            [](std::span<const double>) { return (-1.0 + 1.0) - 0.0; }};
        c.default_p_values = {5, 6, 7, 8, 9, 10};
        c.default_n_bc = 4;
        c.default_n_sim_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10};
        c.default_methods = {"kkt", "lar-kkt", "lar"};
    } else if (id == "logistic") {
        c.problem.variables = {make_var("x", VariableRole::deterministic, -5.0, 5.0)};
        c.problem.pde.terms = {make_term("1", {1}), make_term("u_prev - 1", {0})};
        c.problem.pde.rhs = Expression::parse("0");
        c.problem.bcs = {make_bc(make_term("1", {0}), "0.5", {0.0})};
        c.problem.reference = Expression::parse("1/(1+exp(-x))");
        c.reference_fn = [](std::span<const double> p) { return 1.0 / (1.0 + std::exp(-p[0])); };
        c.pde_residual_fn = [](std::span<const double> p) {
            const double u = 1.0 / (1.0 + std::exp(-p[0]));
            const double du = std::exp(-p[0]) * u * u;
            return du - u * (1.0 - u);
        };
        c.bc_residual_fns = {[](std::span<const double>) { return 0.5 - 0.5; }};
        c.default_p_values = {5, 7, 9, 11, 13, 15, 17};
        c.default_n_bc = 1;
        c.default_n_sim_grid = {5, 10, 15, 20, 30, 40};
        c.default_methods = {"kkt", "lar-kkt", "lar"};
    } else if (id == "wave2d") {
        c.problem.variables = {make_var("x", VariableRole::deterministic, 0.0, 1.0),
                               make_var("t", VariableRole::deterministic, 0.0, 2.0)};
        c.problem.pde.terms = {make_term("1", {0, 2}), make_term("-4", {2, 0})};
        c.problem.pde.rhs = Expression::parse("0");
        c.problem.bcs = {
            make_bc(make_term("1", {0, 0}), "0", {0.0, std::nullopt}),
            make_bc(make_term("1", {0, 0}), "0", {1.0, std::nullopt}),
            make_bc(make_term("1", {0, 0}), "sin(pi*x)", {std::nullopt, 0.0}),
            make_bc(make_term("1", {0, 1}), "0", {std::nullopt, 0.0})};
        c.problem.reference = Expression::parse("sin(pi*x)*cos(2*pi*t)");
        c.reference_fn = [pi](std::span<const double> p) {
            return std::sin(pi * p[0]) * std::cos(2 * pi * p[1]);
        };
        c.pde_residual_fn = [pi](std::span<const double> p) {
            const double utt = -4 * pi * pi * std::sin(pi * p[0]) * std::cos(2 * pi * p[1]);
            const double uxx = -pi * pi * std::sin(pi * p[0]) * std::cos(2 * pi * p[1]);
            return utt - 4 * uxx;
        };
        c.bc_residual_fns = {
            [pi](std::span<const double> p) { return std::sin(0.0) * std::cos(2 * pi * p[1]); },
            [pi](std::span<const double> p) { return std::sin(pi) * std::cos(2 * pi * p[1]); },
            [pi](std::span<const double> p) {
                return std::sin(pi * p[0]) * std::cos(0.0) - std::sin(pi * p[0]);
            },
            [pi](std::span<const double> p) {
                return -2 * pi * std::sin(pi * p[0]) * std::sin(0.0);
            }};
        c.default_p_values = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18};
        c.default_n_bc = 10;
        c.default_n_sim_grid = {5, 10, 15, 20, 30};
        c.default_methods = {"kkt", "lar-kkt", "lar"};
    } else if (id == "heat_det") {
        c.problem.variables = {make_var("x", VariableRole::deterministic, 0.0, 1.0),
                               make_var("t", VariableRole::deterministic, 0.0, 1.0)};
        c.problem.pde.terms = {make_term("1", {0, 1}), make_term("-0.4", {2, 0})};
        c.problem.pde.rhs = Expression::parse("0");
        c.problem.bcs = {
            make_bc(make_term("1", {0, 0}), "0", {0.0, std::nullopt}),
            make_bc(make_term("1", {0, 0}), "0", {1.0, std::nullopt}),
            make_bc(make_term("1", {0, 0}), "sin(pi*x)", {std::nullopt, 0.0})};
        c.problem.reference = Expression::parse("sin(pi*x)*exp(-0.4*pi^2*t)");
        c.reference_fn = [pi](std::span<const double> p) {
            return std::sin(pi * p[0]) * std::exp(-0.4 * pi * pi * p[1]);
        };
        c.pde_residual_fn = [pi](std::span<const double> p) {
            const double u = std::sin(pi * p[0]) * std::exp(-0.4 * pi * pi * p[1]);
            const double ut = -0.4 * pi * pi * u;
            const double uxx = -pi * pi * u;
            return ut - 0.4 * uxx;
        };
        c.bc_residual_fns = {
            [pi](std::span<const double> p) { return std::sin(0.0) * std::exp(-0.4 * pi * pi * p[1]); },
            [pi](std::span<const double> p) { return std::sin(pi) * std::exp(-0.4 * pi * pi * p[1]); },
            [pi](std::span<const double> p) { return std::sin(pi * p[0]) - std::sin(pi * p[0]); }};
        c.default_p_values = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
        c.default_n_bc = 10;
        c.default_n_sim_grid = {5, 10, 15, 20, 25};
        c.default_methods = {"kkt", "lar-kkt", "lar"};
    } else if (id == "heat_uq") {
        c.problem.variables = {make_var("x", VariableRole::deterministic, 0.0, 1.0),
                               make_var("t", VariableRole::deterministic, 0.0, 1.0),
                               make_var("D", VariableRole::random, 0.2, 0.8)};
        c.problem.pde.terms = {make_term("1", {0, 1, 0}), make_term("-D", {2, 0, 0})};
        c.problem.pde.rhs = Expression::parse("0");
        c.problem.bcs = {
            make_bc(make_term("1", {0, 0, 0}), "0", {0.0, std::nullopt, std::nullopt}),
            make_bc(make_term("1", {0, 0, 0}), "0", {1.0, std::nullopt, std::nullopt}),
            make_bc(make_term("1", {0, 0, 0}), "sin(pi*x)", {std::nullopt, 0.0, std::nullopt})};
        c.problem.reference = Expression::parse("sin(pi*x)*exp(-D*pi^2*t)");
        c.reference_fn = [pi](std::span<const double> p) {
            return std::sin(pi * p[0]) * std::exp(-p[2] * pi * pi * p[1]);
        };
        c.pde_residual_fn = [pi](std::span<const double> p) {
            const double u = std::sin(pi * p[0]) * std::exp(-p[2] * pi * pi * p[1]);
            const double ut = -p[2] * pi * pi * u;
            const double uxx = -pi * pi * u;
            return ut - p[2] * uxx;
        };
        c.bc_residual_fns = {
            [pi](std::span<const double> p) {
                return std::sin(0.0) * std::exp(-p[2] * pi * pi * p[1]);
            },
            [pi](std::span<const double> p) {
                return std::sin(pi) * std::exp(-p[2] * pi * pi * p[1]);
            },
            [pi](std::span<const double> p) { return std::sin(pi * p[0]) - std::sin(pi * p[0]); }};
        c.default_p_values = {10};
        c.default_n_bc = 90;
        c.default_n_sim_grid = {0};
        c.default_methods = {"kkt"};
    } else {
        throw BenchError("unknown benchmark case '" + id + "'");
    }

    c.problem.validate();
    verify_reference(c, 32, 20240915);  // build-time gate; tests re-run it at 10^3 points
    return c;
}

inline const std::vector<std::string>& builtin_case_ids() {
    static const std::vector<std::string> ids = {"poisson1d", "euler_beam", "logistic",
                                                 "wave2d",    "heat_det",   "heat_uq"};
    return ids;
}

// --------------------------------------------------------------------------
// Convergence protocol
// --------------------------------------------------------------------------

struct TrialRecord {
    std::string case_id;
    std::string method;
    int p_selected = 0;
    int n_sim = 0;
    int n_bc = 0;
    int n_virtual = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    ErrorBreakdown eb;
    double fit_ms = 0.0;
    bool failed = false;
};

struct ConvergenceOptions {
    std::vector<std::string> methods;  // empty = case defaults
    std::vector<int> n_sim_grid;       // empty = case defaults
    std::vector<int> p_values;         // empty = case defaults
    int n_bc = -1;                     // <0 = case default
    int trials = 20;
    std::uint64_t base_seed = 42;
    int jobs = 1;
    bool timing = false;  // fill fit_ms with wall-clock (breaks byte determinism)
    int validation_interior = 10000;
    int validation_boundary = 100;
};

struct ConvergenceReport {
    std::vector<TrialRecord> rows;  // fixed order: method-major, then n_sim, then trial
};

namespace detail {

inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int nthreads = std::min(jobs, n);
    workers.reserve(nthreads);
    for (int w = 0; w < nthreads; ++w)
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& t : workers) t.join();
}

inline TrainingData trial_training_data(const BenchmarkCase& c, int n_sim, int trial,
                                        std::uint64_t base_seed) {
    const std::uint64_t ed_seed = derive_seed(derive_seed(base_seed, seed_stream::trial, trial),
                                              seed_stream::experimental_design, n_sim);
    TrainingData data;
    data.inputs = sample_lhs(n_sim, c.problem.dimension(), ed_seed);
    data.outputs.resize(n_sim);
    std::vector<double> phys(c.problem.dimension());
    for (int r = 0; r < n_sim; ++r) {
        for (int i = 0; i < c.problem.dimension(); ++i)
            phys[i] = c.problem.variables[i].transform.from_standard(data.inputs(r, i));
        data.outputs(r) = c.reference_fn(phys);
    }
    return data;
}

}  // namespace detail

/// Replicated convergence study over (method, n_sim, trial) with independent
/// per-trial designs and a shared validation set. Individual fit failures are
/// recorded, not fatal. Fully deterministic given the base seed (timing off).
inline ConvergenceReport run_convergence(const BenchmarkCase& c, const ConvergenceOptions& opt) {
    if (opt.trials < 1) throw BenchError("run_convergence: trials must be >= 1");
    const auto methods = opt.methods.empty() ? c.default_methods : opt.methods;
    const auto grid = opt.n_sim_grid.empty() ? c.default_n_sim_grid : opt.n_sim_grid;
    const auto p_values = opt.p_values.empty() ? c.default_p_values : opt.p_values;
    const int n_bc = opt.n_bc >= 0 ? opt.n_bc : c.default_n_bc;

    const ValidationSpec vspec{opt.validation_interior, opt.validation_boundary,
                               derive_seed(opt.base_seed, seed_stream::validation)};

    ConvergenceReport report;
    const int n_rows = static_cast<int>(methods.size() * grid.size()) * opt.trials;
    report.rows.resize(n_rows);

    detail::parallel_for(n_rows, opt.jobs, [&](int idx) {
        const int trials = opt.trials;
        const int per_method = static_cast<int>(grid.size()) * trials;
        const int mi = idx / per_method;
        const int gi = (idx % per_method) / trials;
        const int trial = idx % trials;
        const std::string& method = methods[mi];
        const int n_sim = grid[gi];

        TrialRecord rec;
        rec.case_id = c.id;
        rec.method = method;
        rec.n_sim = n_sim;
        rec.n_bc = n_bc;
        rec.trial = trial;
        rec.seed = derive_seed(opt.base_seed, seed_stream::trial, trial);

        FitOptions fopt;
        fopt.p_values = p_values;
        fopt.n_bc = n_bc;
        fopt.n_sim = n_sim;
        fopt.seed = rec.seed;
        fopt.virtual_sampler = c.virtual_sampler;

        const auto t0 = std::chrono::steady_clock::now();
        try {
            const TrainingData data = detail::trial_training_data(c, n_sim, trial, opt.base_seed);
            FitResult fr;
            if (method == "kkt")
                fr = fit_kkt_adaptive(c.problem, data, fopt);
            else if (method == "lar-kkt")
                fr = fit_lar_kkt(c.problem, data, fopt);
            else if (method == "lar")
                fr = fit_lar_unconstrained(c.problem, data, fopt);
            else
                throw BenchError("unknown method '" + method + "'");
            rec.p_selected = fr.report.p_selected;
            rec.n_virtual = fr.model.meta.n_virtual;
            rec.eb = error_breakdown(fr.model, c.problem, vspec);
        } catch (const std::exception&) {
            rec.failed = true;
            rec.eb = ErrorBreakdown{};
            rec.eb.eps_mean = rec.eb.eps_max = rec.eb.r2_u = rec.eb.r2_l = rec.eb.r2_b =
                rec.eb.r2 = std::numeric_limits<double>::quiet_NaN();
        }
        if (opt.timing) {
            const auto t1 = std::chrono::steady_clock::now();
            rec.fit_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        report.rows[idx] = std::move(rec);
    });
    return report;
}

// --------------------------------------------------------------------------
// CSV emission
// --------------------------------------------------------------------------

inline std::string trial_csv(const ConvergenceReport& report) {
    std::string out =
        "case,method,p_selected,n_sim,n_BC,n_V,trial,seed,r2_u,r2_L,r2_B,r2,eps_mean,eps_max,"
        "fit_ms\n";
    for (const auto& r : report.rows) {
        out += r.case_id + ',' + r.method + ',' + std::to_string(r.p_selected) + ',' +
               std::to_string(r.n_sim) + ',' + std::to_string(r.n_bc) + ',' +
               std::to_string(r.n_virtual) + ',' + std::to_string(r.trial) + ',' +
               std::to_string(r.seed) + ',' + format_double(r.eb.r2_u) + ',' +
               format_double(r.eb.r2_l) + ',' + format_double(r.eb.r2_b) + ',' +
               format_double(r.eb.r2) + ',' + format_double(r.eb.eps_mean) + ',' +
               format_double(r.eb.eps_max) + ',' + format_double(r.fit_ms) + '\n';
    }
    return out;
}

inline std::string aggregate_csv(const ConvergenceReport& report) {
    struct Cell {
        std::vector<const TrialRecord*> rows;
    };
    std::map<std::pair<std::string, int>, Cell> cells;  // (method, n_sim) in first-seen order
    std::vector<std::pair<std::string, int>> order;
    for (const auto& r : report.rows) {
        const auto key = std::make_pair(r.method, r.n_sim);
        if (!cells.count(key)) order.push_back(key);
        cells[key].rows.push_back(&r);
    }

    const char* metrics[] = {"r2_u", "r2_L", "r2_B", "r2", "eps_mean", "eps_max", "fit_ms"};
    std::string out = "case,method,n_sim,n_BC,trials,n_fail";
    for (const char* m : metrics) out += std::string(",mean_") + m + ",sd_" + m;
    out += '\n';

    for (const auto& key : order) {
        const auto& cell = cells[key];
        const TrialRecord* first = cell.rows.front();
        int n_fail = 0;
        std::vector<std::vector<double>> vals(7);
        for (const TrialRecord* r : cell.rows) {
            if (r->failed) {
                ++n_fail;
                continue;
            }
            const double v[] = {r->eb.r2_u,     r->eb.r2_l,    r->eb.r2_b, r->eb.r2,
                                r->eb.eps_mean, r->eb.eps_max, r->fit_ms};
            for (int i = 0; i < 7; ++i) vals[i].push_back(v[i]);
        }
        out += first->case_id + ',' + key.first + ',' + std::to_string(key.second) + ',' +
               std::to_string(first->n_bc) + ',' + std::to_string(cell.rows.size()) + ',' +
               std::to_string(n_fail);
        for (int i = 0; i < 7; ++i) {
            double mean = std::numeric_limits<double>::quiet_NaN();
            double sd = std::numeric_limits<double>::quiet_NaN();
            const auto& v = vals[i];
            if (!v.empty()) {
                mean = 0.0;
                for (double x : v) mean += x;
                mean /= static_cast<double>(v.size());
                sd = 0.0;
                if (v.size() > 1) {
                    for (double x : v) sd += (x - mean) * (x - mean);
                    sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
                }
            }
            out += ',' + format_double(mean) + ',' + format_double(sd);
        }
        out += '\n';
    }
    return out;
}

// --------------------------------------------------------------------------
// Heat-equation UQ from physics alone (empty experimental design)
// --------------------------------------------------------------------------

struct FieldTable {
    std::vector<double> x, t, value;

    std::string to_csv() const {
        std::string out = "x,t,value\n";
        for (std::size_t i = 0; i < value.size(); ++i)
            out += format_double(x[i]) + ',' + format_double(t[i]) + ',' +
                   format_double(value[i]) + '\n';
        return out;
    }
};

struct HeatUqResult {
    Pc2Model model;
    ProblemSpec problem;
    FitReport report;
    // grids over (x,t)
    FieldTable mean, mean_minus_sigma, mean_plus_sigma, variance;
    FieldTable oracle_mean, oracle_variance;
    FieldTable abs_diff_mean, abs_diff_variance;
};

/// Fits the uncertain-diffusivity heat problem from boundary conditions and
/// virtual points alone (n_sim = 0) and tabulates local statistics against
/// the analytic oracle.
inline HeatUqResult run_heat_uq(int n_bc, int p, std::uint64_t seed, int grid_n = 41) {
    const BenchmarkCase c = builtin_case("heat_uq");
    HeatUqResult out;
    out.problem = c.problem;

    FitOptions opt;
    opt.p_values = {p};
    opt.n_bc = n_bc;
    opt.n_sim = 0;
    opt.seed = seed;
    opt.virtual_sampler = c.virtual_sampler;
    FitResult fr = fit_kkt(c.problem, TrainingData{Eigen::MatrixXd(0, 3), Eigen::VectorXd(0)}, p,
                           opt);
    out.model = std::move(fr.model);
    out.report = std::move(fr.report);

    auto push = [](FieldTable& f, double x, double t, double v) {
        f.x.push_back(x);
        f.t.push_back(t);
        f.value.push_back(v);
    };
    for (int i = 0; i < grid_n; ++i) {
        const double x = static_cast<double>(i) / (grid_n - 1);
        for (int j = 0; j < grid_n; ++j) {
            const double t = static_cast<double>(j) / (grid_n - 1);
            const double pt[2] = {x, t};
            const LocalStats st = local_stats(out.model, pt);
            const double sigma = std::sqrt(std::max(0.0, st.variance));
            const double om = heat_uq_local_mean(x, t);
            const double ov = heat_uq_local_variance(x, t);
            push(out.mean, x, t, st.mean);
            push(out.mean_minus_sigma, x, t, st.mean - sigma);
            push(out.mean_plus_sigma, x, t, st.mean + sigma);
            push(out.variance, x, t, st.variance);
            push(out.oracle_mean, x, t, om);
            push(out.oracle_variance, x, t, ov);
            push(out.abs_diff_mean, x, t, std::abs(st.mean - om));
            push(out.abs_diff_variance, x, t, std::abs(st.variance - ov));
        }
    }
    return out;
}

}  // namespace pc2
