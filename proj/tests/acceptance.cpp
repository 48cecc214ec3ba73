// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "pc2/pc2.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace pc2;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    if (!pass) ++g_failures;
    std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

TrainingData reference_design(const BenchmarkCase& c, int n_sim, std::uint64_t seed) {
    TrainingData data;
    data.inputs = sample_lhs(n_sim, c.problem.dimension(), seed);
    data.outputs.resize(n_sim);
    std::vector<double> phys(c.problem.dimension());
    for (int r = 0; r < n_sim; ++r) {
        for (int i = 0; i < c.problem.dimension(); ++i)
            phys[i] = c.problem.variables[i].transform.from_standard(data.inputs(r, i));
        data.outputs(r) = c.reference_fn(phys);
    }
    return data;
}

// ---------------------------------------------------------------- criterion 1
void criterion_poisson_exactness() {
    const auto t0 = Clock::now();
    const BenchmarkCase c = builtin_case("poisson1d");
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        FitOptions opt;
        opt.p_values = {5};
        opt.n_bc = 2;
        opt.seed = derive_seed(42, seed_stream::trial, trial);
        const TrainingData data = reference_design(c, 2, derive_seed(opt.seed, 17));
        const FitResult fr = fit_kkt(c.problem, data, 5, opt);
        const ErrorBreakdown eb = error_breakdown(fr.model, c.problem, {2000, 100, 42});
        worst = std::max(worst, eb.eps_max);
        if (!(eb.eps_max < 1e-8)) ok = false;
    }
    const double secs = seconds_since(t0);
    if (secs >= 1.0) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "poisson1d KKT n_sim=2: worst eps_max %.3e < 1e-8 over 20 trials, %.2fs < 1s",
                  worst, secs);
    report(1, ok, buf);
}

// ---------------------------------------------------------------- criterion 2
void criterion_euler_beam() {
    const BenchmarkCase c = builtin_case("euler_beam");
    FitOptions opt;
    opt.p_values = {5};
    opt.n_bc = 4;
    opt.seed = 42;
    TrainingData empty;
    empty.inputs.resize(0, 1);
    empty.outputs.resize(0);
    const FitResult fr = fit_kkt(c.problem, empty, 5, opt);
    const ErrorBreakdown eb = error_breakdown(fr.model, c.problem, {2000, 100, 42});
    double worst_bc = 0.0;
    for (const auto& bp : boundary_points(c.problem, 4)) {
        const double pt[1] = {bp.xi(0)};
        worst_bc = std::max(
            worst_bc, std::abs(residual(c.problem.bcs[bp.bc_index].op, fr.model, c.problem, pt)));
    }
    const bool ok = eb.eps_max < 1e-8 && worst_bc < 1e-10;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "euler_beam KKT n_sim=0: eps_max %.3e < 1e-8, worst BC residual %.3e < 1e-10",
                  eb.eps_max, worst_bc);
    report(2, ok, buf);
}

// ---------------------------------------------------------------- criterion 3
void criterion_logistic() {
    const auto t0 = Clock::now();
    const BenchmarkCase c = builtin_case("logistic");
    FitOptions opt;
    opt.p_values = {15};
    opt.n_bc = 1;
    opt.seed = 42;
    opt.nonlinear.n_iter = 20;
    opt.nonlinear.tol = 1e-8;
    const TrainingData data = reference_design(c, 20, derive_seed(42, seed_stream::experimental_design));
    const FitResult fr = fit_nonlinear(c.problem, data, 15, opt);
    const bool converged = fr.report.iterations < 20;
    double sup = 0.0;
    for (double x = -4.0; x <= 4.0001; x += 0.01) {
        const double pt[1] = {x};
        sup = std::max(sup, std::abs(fr.model.evaluate(pt) - 1.0 / (1.0 + std::exp(-x))));
    }
    const double secs = seconds_since(t0);
    const bool ok = converged && sup < 1e-2 && secs < 10.0;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "logistic iterative KKT p=15 n_sim=20: converged in %d iters, sup error %.3e "
                  "< 1e-2 on [-4,4], %.2fs < 10s",
                  fr.report.iterations, sup, secs);
    report(3, ok, buf);
}

// ---------------------------------------------------------------- criterion 4
void criterion_wave_gap() {
    const BenchmarkCase c = builtin_case("wave2d");
    const ValidationSpec vspec{4000, 100, derive_seed(42, seed_stream::validation)};
    int hits = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t tseed = derive_seed(42, seed_stream::trial, trial);
        const TrainingData data =
            reference_design(c, 20, derive_seed(tseed, seed_stream::experimental_design));
        FitOptions opt;
        opt.p_values = c.default_p_values;
        opt.n_bc = 10;
        opt.seed = tseed;
        double lkkt_r2l = std::numeric_limits<double>::quiet_NaN();
        double lar_r2l = std::numeric_limits<double>::quiet_NaN();
        try {
            const FitResult lkkt = fit_lar_kkt(c.problem, data, opt);
            lkkt_r2l = error_breakdown(lkkt.model, c.problem, vspec).r2_l;
            const FitResult lar = fit_lar_unconstrained(c.problem, data, opt);
            lar_r2l = error_breakdown(lar.model, c.problem, vspec).r2_l;
        } catch (const std::exception&) {
            continue;
        }
        if (lkkt_r2l < 1e-4 && lar_r2l >= 10.0 * lkkt_r2l) ++hits;
    }
    const bool ok = hits >= 16;  // 80% of 20
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "wave2d n_BC=10 n_sim=20: r2_L<1e-4 with a >=10x unconstrained gap in %d/20 "
                  "trials (need >=16)",
                  hits);
    report(4, ok, buf);
}

// ---------------------------------------------------------------- criterion 5
void criterion_heat_uq() {
    const auto t0 = Clock::now();
    const HeatUqResult r = run_heat_uq(90, 10, 42, 21);

    double mean_sup = 0.0;
    for (double v : r.abs_diff_mean.value) mean_sup = std::max(mean_sup, v);

    double worst_var_rel = 0.0;
    for (std::size_t i = 0; i < r.variance.value.size(); ++i) {
        const double oracle = r.oracle_variance.value[i];
        if (oracle > 1e-6)
            worst_var_rel =
                std::max(worst_var_rel, std::abs(r.variance.value[i] - oracle) / oracle);
    }

    // oracle cross-check against a 1e5-sample LHS estimate, 3 standard errors
    bool mc_ok = true;
    const BenchmarkCase c = builtin_case("heat_uq");
    const int n_mc = 100000;
    const Eigen::MatrixXd d_draw = sample_lhs(n_mc, 1, 31415);
    for (double x : {0.25, 0.5, 0.75}) {
        for (double t : {0.25, 0.5, 0.75}) {
            double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
            for (int k = 0; k < n_mc; ++k) {
                const double d = c.problem.variables[2].transform.from_standard(d_draw(k, 0));
                const double phys[3] = {x, t, d};
                const double u = c.reference_fn(phys);
                s1 += u;
                s2 += u * u;
                s3 += u * u * u;
                s4 += u * u * u * u;
            }
            const double m1 = s1 / n_mc;
            const double m2 = s2 / n_mc;
            const double var = m2 - m1 * m1;
            const double sd = std::sqrt(std::max(0.0, var));
            const double se_mean = sd / std::sqrt(static_cast<double>(n_mc));
            // central 4th moment for the variance standard error
            const double mu4 =
                s4 / n_mc - 4 * m1 * (s3 / n_mc) + 6 * m1 * m1 * m2 - 3 * std::pow(m1, 4);
            const double se_var = std::sqrt(std::max(0.0, mu4 - var * var) /
                                            static_cast<double>(n_mc));
            if (std::abs(heat_uq_local_mean(x, t) - m1) > 3.0 * se_mean) mc_ok = false;
            if (std::abs(heat_uq_local_variance(x, t) - var) > 3.0 * se_var) mc_ok = false;
        }
    }

    const double secs = seconds_since(t0);
    const bool ok = mean_sup < 1e-2 && worst_var_rel <= 0.02 && mc_ok && secs < 30.0;
    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "heat_uq n_BC=90 p=10 n_sim=0: mean sup-err %.3e < 1e-2, variance rel-err "
                  "%.3f%% <= 2%% (var>1e-6), oracle-vs-LHS %s, %.1fs < 30s",
                  mean_sup, 100.0 * worst_var_rel, mc_ok ? "within 3 SE" : "OUTSIDE 3 SE", secs);
    report(5, ok, buf);
}

// ---------------------------------------------------------------- criterion 6
void criterion_constraint_invariants() {
    int solvable = 0;
    bool ok = true;
    std::uint64_t seed = 0;
    while (solvable < 100 && seed < 400) {
        const auto inst = pc2::testing::random_kkt_instance(seed++);
        FitResult fr;
        try {
            fr = solve_kkt(inst.data, inst.constraints, inst.basis, inst.problem.variables);
        } catch (const SolverError&) {
            continue;
        }
        ++solvable;
        const double scale = inst.constraints.c.lpNorm<Eigen::Infinity>() + 1.0;
        if ((inst.constraints.A * fr.model.coefficients - inst.constraints.c)
                .lpNorm<Eigen::Infinity>() >= 1e-8 * scale)
            ok = false;

        const Eigen::MatrixXd kernel =
            Eigen::FullPivLU<Eigen::MatrixXd>(inst.constraints.A).kernel();
        if (kernel.cols() == 0) continue;
        const Eigen::MatrixXd psi = design_matrix(inst.basis, inst.data.inputs);
        const double base = (inst.data.outputs - psi * fr.model.coefficients).squaredNorm();
        Rng rng(seed * 31 + 7);
        for (int k = 0; k < 100; ++k) {
            Eigen::VectorXd g(kernel.cols());
            for (int i = 0; i < g.size(); ++i) g(i) = rng.uniform(-1.0, 1.0);
            Eigen::VectorXd delta = kernel * g;
            if (delta.norm() < 1e-12) continue;
            delta *= 1e-3 / delta.norm();
            const double perturbed =
                (inst.data.outputs - psi * (fr.model.coefficients + delta)).squaredNorm();
            if (perturbed < base - 1e-12 * (1.0 + base)) ok = false;
        }
    }
    if (solvable < 100) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%d random solvable instances: ||A beta - c||_inf < 1e-8 and null-space "
                  "perturbations never improve the misfit",
                  solvable);
    report(6, ok, buf);
}

// ---------------------------------------------------------------- criterion 7
void criterion_basis_suite() {
    bool ok = true;
    const GaussLegendreRule rule = gauss_legendre(40);
    for (int j = 0; j <= 25 && ok; ++j)
        for (int k = j; k <= 25 && ok; ++k) {
            double acc = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                acc += 0.5 * rule.weights[q] * legendre_orthonormal(j, rule.nodes[q]) *
                       legendre_orthonormal(k, rule.nodes[q]);
            if (std::abs(acc - (j == k ? 1.0 : 0.0)) > 1e-10) ok = false;
        }

    // derivative vs a central difference of the exact previous order
    const double h = 1e-5;
    for (int n = 1; n <= 15 && ok; ++n)
        for (int k = 1; k <= std::min(n, 4) && ok; ++k)
            for (double xi = -0.9; xi <= 0.91; xi += 0.1) {
                const double fd = (legendre_derivative(n, k - 1, xi + h) -
                                   legendre_derivative(n, k - 1, xi - h)) /
                                  (2.0 * h);
                const double exact = legendre_derivative(n, k, xi);
                if (std::abs(fd - exact) > 1e-6 * std::max(1.0, std::abs(exact))) ok = false;
            }

    for (int m = 1; m <= 5 && ok; ++m)
        for (int p = 0; p <= 10 && ok; ++p)
            if (static_cast<std::uint64_t>(multi_index_set(m, p).size()) !=
                total_degree_cardinality(m, p))
                ok = false;

    report(7, ok,
           "basis suite: orthonormality to 1e-10 (deg<=25), derivative/FD agreement to 1e-6, "
           "cardinality formula (M<=5, p<=10)");
}

// ---------------------------------------------------------------- criterion 8
void criterion_uq_suite() {
    bool ok = true;

    // variance identity vs tensor quadrature, M <= 3
    for (int m_dim = 1; m_dim <= 3; ++m_dim) {
        Pc2Model m;
        m.basis = multi_index_set(m_dim, 3);
        m.variables.clear();
        const char* names[] = {"a", "b", "c"};
        for (int i = 0; i < m_dim; ++i)
            m.variables.push_back(Variable{names[i], VariableTransform::random_uniform(-1, 1)});
        m.coefficients.resize(m.basis.size());
        Rng rng(500 + m_dim);
        for (int j = 0; j < m.basis.size(); ++j) m.coefficients(j) = rng.uniform(-1.0, 1.0);

        const GaussLegendreRule rule = gauss_legendre(8);
        const int nq = static_cast<int>(rule.nodes.size());
        double integral = 0.0;
        std::vector<int> idx(m_dim, 0);
        for (;;) {
            double w = 1.0;
            std::vector<double> xi(m_dim);
            for (int d = 0; d < m_dim; ++d) {
                xi[d] = rule.nodes[idx[d]];
                w *= 0.5 * rule.weights[idx[d]];
            }
            const double dev = m.evaluate_standard(xi) - m.coefficients(0);
            integral += w * dev * dev;
            int d = 0;
            for (; d < m_dim; ++d) {
                if (++idx[d] < nq) break;
                idx[d] = 0;
            }
            if (d == m_dim) break;
        }
        if (std::abs(integral - global_variance(m)) > 1e-8) ok = false;
    }

    // reduced-expansion evaluation consistency + Sobol closure on a mixed model
    {
        const BenchmarkCase c = builtin_case("heat_uq");
        FitOptions opt;
        opt.p_values = {6};
        opt.n_bc = 30;
        opt.seed = 4;
        TrainingData empty;
        empty.inputs.resize(0, 3);
        empty.outputs.resize(0);
        const FitResult fr = fit_kkt(c.problem, empty, 6, opt);
        Rng rng(606);
        for (int i = 0; i < 50; ++i) {
            const double det_pt[2] = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
            const ReducedPce red = reduce_at(fr.model, det_pt);
            const double xid = rng.uniform(-1.0, 1.0);
            const double via_red = red.evaluate_standard(std::span<const double>{&xid, 1});
            const double full_pt[3] = {
                fr.model.variables[0].transform.to_standard(det_pt[0]),
                fr.model.variables[1].transform.to_standard(det_pt[1]), xid};
            const double via_full = fr.model.evaluate_standard(full_pt);
            if (std::abs(via_red - via_full) > 1e-10 * std::max(1.0, std::abs(via_full)))
                ok = false;
            if (red.variance() > 0.0) {
                const auto groups = sobol_group_variances(red);
                double total = 0.0;
                for (const auto& [support, v] : groups) total += v;
                if (std::abs(total / red.variance() - 1.0) > 1e-12) ok = false;
            }
        }
    }

    report(8, ok,
           "uq suite: coefficient variance vs tensor quadrature to 1e-8 (M<=3), reduced "
           "evaluation consistency to 1e-10, Sobol closure to 1e-12");
}

// ---------------------------------------------------------------- criterion 9
void criterion_additivity() {
    bool ok = true;
    for (const auto& id : builtin_case_ids()) {
        const BenchmarkCase c = builtin_case(id);
        FitOptions opt;
        // degree low enough to be quick yet able to carry the boundary budget
        const int p = id == "heat_uq" ? c.default_p_values.front()
                                      : std::min(6, c.default_p_values.back());
        opt.p_values = {p};
        opt.n_bc = c.default_n_bc;
        opt.seed = 12;
        const int n_sim = id == "heat_uq" ? 0 : 8;
        const TrainingData data = reference_design(c, n_sim, derive_seed(12, 3));
        FitResult fr;
        try {
            fr = fit_constrained(c.problem, data, p, opt);
        } catch (const std::exception&) {
            ok = false;
            continue;
        }
        if (fr.report.r2 != fr.report.r2_u + fr.report.r2_l + fr.report.r2_b) ok = false;
        const ErrorBreakdown eb = error_breakdown(fr.model, c.problem, {1000, 100, 12});
        if (eb.r2 != eb.r2_u + eb.r2_l + eb.r2_b) ok = false;
    }
    report(9, ok, "r2 additivity holds exactly as stored on every benchmark fit");
}

// --------------------------------------------------------------- criterion 10
struct CliRun {
    int exit_code;
};

CliRun run_cli(const std::string& args, const fs::path& cwd) {
    const std::string cmd =
        "cd '" + cwd.string() + "' && '" + PC2_CLI_PATH + "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1};
}

void criterion_cli_determinism() {
    bool ok = true;
    const fs::path dir = fs::temp_directory_path() / "pc2_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cfg = std::string(PC2_CONFIG_DIR) + "/poisson1d.json";

    auto files_equal = [](const fs::path& a, const fs::path& b) {
        return read_file(a) == read_file(b);
    };

    // fit twice
    if (run_cli("fit '" + cfg + "' -o m1.json", dir).exit_code != 0) ok = false;
    if (run_cli("fit '" + cfg + "' -o m2.json", dir).exit_code != 0) ok = false;
    if (ok && !files_equal(dir / "m1.json", dir / "m2.json")) ok = false;

    // eval twice
    if (run_cli("eval m1.json --grid 17 --residual -o e1.csv", dir).exit_code != 0) ok = false;
    if (run_cli("eval m1.json --grid 17 --residual -o e2.csv", dir).exit_code != 0) ok = false;
    if (ok && !files_equal(dir / "e1.csv", dir / "e2.csv")) ok = false;

    // uq twice (random-variable model)
    const std::string heat_cfg = std::string(PC2_CONFIG_DIR) + "/heat_uq.json";
    if (run_cli("fit '" + heat_cfg + "' -o h.json", dir).exit_code != 0) ok = false;
    if (run_cli("uq h.json --grid 11 --prefix u1", dir).exit_code != 0) ok = false;
    if (run_cli("uq h.json --grid 11 --prefix u2", dir).exit_code != 0) ok = false;
    if (ok && !files_equal(dir / "u1_mean.csv", dir / "u2_mean.csv")) ok = false;
    if (ok && !files_equal(dir / "u1_variance.csv", dir / "u2_variance.csv")) ok = false;

    // bench twice
    const std::string bargs = "bench poisson1d --trials 3 --nsim-grid 2 --p-range 3 --outdir";
    if (run_cli(bargs + " b1", dir).exit_code != 0) ok = false;
    if (run_cli(bargs + " b2", dir).exit_code != 0) ok = false;
    if (ok && !files_equal(dir / "b1/poisson1d_trials.csv", dir / "b2/poisson1d_trials.csv"))
        ok = false;
    if (ok &&
        !files_equal(dir / "b1/poisson1d_aggregate.csv", dir / "b2/poisson1d_aggregate.csv"))
        ok = false;

    fs::remove_all(dir);
    report(10, ok, "CLI determinism: fit/eval/uq/bench reruns produce byte-identical outputs");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    criterion_poisson_exactness();
    criterion_euler_beam();
    criterion_logistic();
    criterion_wave_gap();
    criterion_heat_uq();
    criterion_constraint_invariants();
    criterion_basis_suite();
    criterion_uq_suite();
    criterion_additivity();
    criterion_cli_determinism();
    std::printf("================\n%s (%d failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
