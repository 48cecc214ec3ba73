#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pc2/design.hpp"
#include "pc2/lar.hpp"
#include "pc2/model.hpp"
#include "pc2/operators.hpp"
#include "pc2/problem.hpp"

namespace pc2 {

/// Fit failure (singular KKT system, divergence, no solvable candidate).
struct SolverError : std::runtime_error {
    double rcond = 0.0;
    explicit SolverError(const std::string& msg, double rc = 0.0)
        : std::runtime_error(msg), rcond(rc) {}
};

/// Experimental design in standardized coordinates. n may be zero.
struct TrainingData {
    Eigen::MatrixXd inputs;   // n x M
    Eigen::VectorXd outputs;  // n

    int n() const { return static_cast<int>(inputs.rows()); }
};

enum class ConstraintKind { boundary, virtual_point };

/// Equality constraints A beta = c with per-row provenance.
struct ConstraintSet {
    Eigen::MatrixXd A;
    Eigen::VectorXd c;
    std::vector<ConstraintKind> kinds;

    int rows() const { return static_cast<int>(A.rows()); }
};

struct FitReport {
    // internal model-selection score (training / seeded collocation based)
    double r2_u = 0.0;
    double r2_l = 0.0;
    double r2_b = 0.0;
    double r2 = 0.0;

    int p_selected = 0;
    std::vector<int> selected_positions;  // into multi_index_set(M, p_selected)
    int iterations = 0;
    int candidates_evaluated = 0;

    // diagnostics
    double constraint_residual_inf = 0.0;
    double kkt_rcond = 0.0;
    bool rank_deficient = false;
    bool lar_fallback = false;
    int virtual_resamples = 0;
};

struct FitResult {
    Pc2Model model;
    FitReport report;
};

struct NonlinearOptions {
    int n_iter = 20;
    double tol = 1e-10;  // sup-norm change of coefficients; non-finite disables
    Linearization linearization = Linearization::coefficient;
};

struct FitOptions {
    std::vector<int> p_values = {5};  // candidate total degrees, ascending
    int n_bc = 0;                     // boundary-point budget
    int n_sim = 0;                    // informational (data rows are authoritative)
    std::uint64_t seed = 42;
    Sampler virtual_sampler = Sampler::mc;
    int patience = 3;  // prefix-sweep early stopping in the adaptive fits
    NonlinearOptions nonlinear;
    int score_interior = 500;   // collocation points behind the selection score
    int score_boundary = 100;
};

// --------------------------------------------------------------------------
// OLS (Eq.-(8)-style regression, no constraints)
// --------------------------------------------------------------------------

/// Least-squares coefficients over the given basis; minimum-norm solution on
/// rank deficiency (flagged in model.meta).
inline Pc2Model fit_ols(const TrainingData& data, const BasisSet& basis,
                        const std::vector<Variable>& variables) {
    if (data.n() == 0) throw SolverError("fit_ols: empty experimental design");
    const Eigen::MatrixXd psi = design_matrix(basis, data.inputs);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(psi);
    Pc2Model model;
    model.basis = basis;
    model.variables = variables;
    model.coefficients = cod.solve(data.outputs);
    model.meta.method = "ols";
    model.meta.p_selected = basis.max_degree;
    model.meta.n_sim = data.n();
    model.meta.rank_deficient = cod.rank() < basis.size();
    return model;
}

// --------------------------------------------------------------------------
// KKT system
// --------------------------------------------------------------------------

/// Symmetric block system [[Psi^T Psi, A^T], [A, 0]] with right side
/// [Psi^T Y, c]. With no data rows the top-left block is zero.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_kkt(const Eigen::MatrixXd& psi,
                                                                const Eigen::VectorXd& outputs,
                                                                const ConstraintSet& constraints) {
    const int P = static_cast<int>(constraints.A.cols());
    const int nc = constraints.rows();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(P + nc, P + nc);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(P + nc);
    if (psi.rows() > 0) {
        kkt.topLeftCorner(P, P) = psi.transpose() * psi;
        rhs.head(P) = psi.transpose() * outputs;
    }
    kkt.block(P, 0, nc, P) = constraints.A;
    kkt.block(0, P, P, nc) = constraints.A.transpose();
    rhs.tail(nc) = constraints.c;
    return {std::move(kkt), std::move(rhs)};
}

/// Convenience overload building the design matrix from the data.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_kkt(const TrainingData& data,
                                                                const ConstraintSet& constraints,
                                                                const BasisSet& basis) {
    if (constraints.A.cols() != basis.size())
        throw std::invalid_argument("assemble_kkt: constraint matrix does not match basis size");
    Eigen::MatrixXd psi(0, basis.size());
    if (data.n() > 0) psi = design_matrix(basis, data.inputs);
    return assemble_kkt(psi, data.outputs, constraints);
}

namespace detail {

inline bool constraints_satisfied(const ConstraintSet& constraints, const Eigen::VectorXd& beta,
                                  double* residual_out = nullptr) {
    if (constraints.rows() == 0) {
        if (residual_out) *residual_out = 0.0;
        return true;
    }
    const double cr = (constraints.A * beta - constraints.c).lpNorm<Eigen::Infinity>();
    if (residual_out) *residual_out = cr;
    return cr < 1e-8 * (constraints.c.lpNorm<Eigen::Infinity>() + 1.0);
}

struct NullspaceSolution {
    Eigen::VectorXd beta;
    bool rank_deficient = false;
    double cond_proxy = 0.0;  // smallest/largest pivot of the constraint factorization
};

/// Null-space method for min ||Psi beta - Y||^2 s.t. A beta = c with a
/// possibly rank-deficient A: a rank-revealing complete orthogonal
/// decomposition splits beta into a minimum-norm particular solution plus a
/// null-space correction fitted to the data. Dependent constraint rows are
/// legitimate (the operator's polynomial image can be smaller than the
/// virtual-point count); errors are reserved for infeasible constraints and
/// for fits the data cannot pin down.
inline NullspaceSolution solve_constrained_nullspace(const Eigen::MatrixXd& psi,
                                                     const Eigen::VectorXd& outputs,
                                                     const ConstraintSet& constraints, int P) {
    NullspaceSolution out;
    const int nc = constraints.rows();

    if (nc == 0) {
        if (psi.rows() == 0) throw SolverError("nothing to fit: no data and no constraints");
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(psi);
        if (static_cast<int>(cod.rank()) < P)
            throw SolverError("fit is not unique: the design matrix pins only " +
                              std::to_string(cod.rank()) + " of " + std::to_string(P) +
                              " coefficients; add data or constraints, or lower p");
        out.beta = cod.solve(outputs);
        return out;
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(constraints.A);
    const int rank = static_cast<int>(cod.rank());
    out.rank_deficient = rank < std::min(nc, P);
    {
        const auto& t = cod.matrixQTZ();
        double tmax = 0.0, tmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < rank; ++i) {
            tmax = std::max(tmax, std::abs(t(i, i)));
            tmin = std::min(tmin, std::abs(t(i, i)));
        }
        out.cond_proxy = tmax > 0 ? tmin / tmax : 0.0;
    }

    const Eigen::VectorXd beta_p = cod.solve(constraints.c);
    const double feas = (constraints.A * beta_p - constraints.c).lpNorm<Eigen::Infinity>();
    if (!(feas < 1e-8 * (constraints.c.lpNorm<Eigen::Infinity>() + 1.0)))
        throw SolverError("constraints are infeasible (dependent rows with conflicting targets, "
                          "residual " +
                          std::to_string(feas) + "); resample virtual points or lower p");
    if (rank == P) {
        out.beta = beta_p;
        return out;
    }

    // orthonormal basis of ker(A) from A P = Q [T 0; 0 0] Z: the trailing
    // columns of P Z^T span the null space
    const Eigen::MatrixXd z_full = cod.matrixZ().transpose() * Eigen::MatrixXd::Identity(P, P);
    const Eigen::MatrixXd z_null = (cod.colsPermutation() * z_full).rightCols(P - rank);

    if (psi.rows() == 0)
        throw SolverError("constraints leave " + std::to_string(P - rank) +
                          " undetermined directions and there is no data to pin them; add data, "
                          "boundary conditions or virtual points");
    const Eigen::MatrixXd w = psi * z_null;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> wcod(w);
    if (static_cast<int>(wcod.rank()) < P - rank)
        throw SolverError("fit is not unique: " + std::to_string(P - rank) +
                          " null-space directions but the data pin only " +
                          std::to_string(wcod.rank()) + "; add data or constraints, or lower p");
    out.beta = beta_p + z_null * wcod.solve(outputs - psi * beta_p);
    return out;
}

}  // namespace detail

/// Constrained least squares from the KKT conditions, solved by the pivoted
/// rank-revealing null-space method (Lagrange multipliers never materialize;
/// the multiplier block of the KKT system is what the null-space projection
/// eliminates). Throws SolverError when the constraints are infeasible or the
/// minimizer is not unique; the constraint residual ends up in the report.
inline FitResult solve_kkt(const TrainingData& data, const ConstraintSet& constraints,
                           const BasisSet& basis, const std::vector<Variable>& variables) {
    if (constraints.A.cols() != basis.size())
        throw std::invalid_argument("solve_kkt: constraint matrix does not match basis size");
    if (data.n() > 0 && data.inputs.cols() != static_cast<Eigen::Index>(variables.size()))
        throw std::invalid_argument("solve_kkt: data dimension does not match variables");

    const int P = basis.size();
    Eigen::MatrixXd psi(0, P);
    if (data.n() > 0) psi = design_matrix(basis, data.inputs);

    detail::NullspaceSolution sol =
        detail::solve_constrained_nullspace(psi, data.outputs, constraints, P);

    FitResult out;
    out.model.basis = basis;
    out.model.variables = variables;
    out.model.coefficients = std::move(sol.beta);
    out.model.meta.method = "kkt";
    out.model.meta.p_selected = basis.max_degree;
    out.model.meta.n_sim = data.n();
    out.model.meta.rank_deficient = sol.rank_deficient;
    out.report.p_selected = basis.max_degree;
    out.report.rank_deficient = sol.rank_deficient;
    out.report.kkt_rcond = sol.cond_proxy;

    double cr = 0.0;
    if (!detail::constraints_satisfied(constraints, out.model.coefficients, &cr))
        throw SolverError("KKT solution violates the constraints (residual " + std::to_string(cr) +
                              "); the system is severely ill-conditioned, resample virtual "
                              "points or lower p",
                          sol.cond_proxy);
    out.report.constraint_residual_inf = cr;
    return out;
}

// --------------------------------------------------------------------------
// Constraint assembly from a problem
// --------------------------------------------------------------------------

/// Boundary rows followed by virtual (PDE) rows, all built with
/// constraint_row for the given basis.
inline ConstraintSet build_constraints(const ProblemSpec& problem, const BasisSet& basis,
                                       const std::vector<BoundaryPoint>& bpts,
                                       const Eigen::MatrixXd& virtual_points,
                                       const Pc2Model* u_prev = nullptr,
                                       Linearization linearization = Linearization::coefficient) {
    const int P = basis.size();
    const int n_bc = static_cast<int>(bpts.size());
    const int n_v = static_cast<int>(virtual_points.rows());
    ConstraintSet cs;
    cs.A.resize(n_bc + n_v, P);
    cs.c.resize(n_bc + n_v);
    cs.kinds.reserve(n_bc + n_v);

    std::vector<double> xi(problem.dimension());
    for (int b = 0; b < n_bc; ++b) {
        const auto& bp = bpts[b];
        for (int i = 0; i < problem.dimension(); ++i) xi[i] = bp.xi(i);
        const auto& op = problem.bcs[bp.bc_index].op;
        auto [row, c] = constraint_row(op, basis, problem, xi,
                                       op.references_u_prev() ? u_prev : nullptr);
        cs.A.row(b) = row;
        cs.c(b) = c;
        cs.kinds.push_back(ConstraintKind::boundary);
    }
    for (int v = 0; v < n_v; ++v) {
        for (int i = 0; i < problem.dimension(); ++i) xi[i] = virtual_points(v, i);
        std::pair<Eigen::RowVectorXd, double> rc;
        if (problem.pde.references_u_prev() && linearization == Linearization::rhs) {
            if (!u_prev) throw std::invalid_argument("build_constraints: u_prev required");
            rc = constraint_row_rhs_lagged(problem.pde, basis, problem, xi, *u_prev);
        } else {
            rc = constraint_row(problem.pde, basis, problem, xi,
                                problem.pde.references_u_prev() ? u_prev : nullptr);
        }
        cs.A.row(n_bc + v) = rc.first;
        cs.c(n_bc + v) = rc.second;
        cs.kinds.push_back(ConstraintKind::virtual_point);
    }
    return cs;
}

// --------------------------------------------------------------------------
// Internal model-selection score (the R^2 of the adaptive loops)
// --------------------------------------------------------------------------

/// Collocation points behind the selection score; drawn once per fit so every
/// candidate is scored against the same sets.
struct ScoreContext {
    Eigen::MatrixXd interior;                 // PDE residual points
    std::vector<BoundaryPoint> boundary;      // BC residual points

    static ScoreContext make(const ProblemSpec& problem, const FitOptions& options) {
        ScoreContext ctx;
        ctx.interior = sample_mc(options.score_interior, problem.dimension(),
                                 derive_seed(options.seed, seed_stream::validation));
        ctx.boundary = boundary_validation_points(
            problem, options.score_boundary,
            derive_seed(options.seed, seed_stream::boundary_validation));
        return ctx;
    }
};

struct ScoreComponents {
    double r2_u = 0.0;
    double r2_l = 0.0;
    double r2_b = 0.0;
    double total() const { return r2_u + r2_l + r2_b; }
};

/// r2_u: training mean squared error, normalized by the sample variance of
/// the outputs when that variance is meaningful. r2_l / r2_b: mean squared
/// PDE / BC residuals over the score collocation sets.
inline ScoreComponents internal_score(const Pc2Model& model, const ProblemSpec& problem,
                                      const TrainingData& data, const ScoreContext& ctx) {
    ScoreComponents s;
    if (data.n() > 0) {
        const Eigen::MatrixXd psi = design_matrix(model.basis, data.inputs);
        const Eigen::VectorXd r = data.outputs - psi * model.coefficients;
        const double mse = r.squaredNorm() / data.n();
        double var = 0.0;
        if (data.n() > 1) {
            const double mean = data.outputs.mean();
            var = (data.outputs.array() - mean).square().sum() / (data.n() - 1);
        }
        s.r2_u = var > 1e-12 ? mse / var : mse;
    }
    s.r2_l = mean_squared_residual(problem.pde, model, problem, ctx.interior);
    if (!ctx.boundary.empty()) {
        double acc = 0.0;
        std::vector<double> xi(problem.dimension());
        for (const auto& bp : ctx.boundary) {
            for (int i = 0; i < problem.dimension(); ++i) xi[i] = bp.xi(i);
            const double r = residual(problem.bcs[bp.bc_index].op, model, problem, xi);
            acc += r * r;
        }
        s.r2_b = acc / static_cast<double>(ctx.boundary.size());
    }
    return s;
}

inline void apply_score(FitReport& report, const ScoreComponents& s) {
    report.r2_u = s.r2_u;
    report.r2_l = s.r2_l;
    report.r2_b = s.r2_b;
    report.r2 = s.r2_u + s.r2_l + s.r2_b;
}

// --------------------------------------------------------------------------
// Fixed-p fits
// --------------------------------------------------------------------------

/// KKT fit at fixed degree: boundary rows plus n_V = P - n_BC virtual rows.
/// One automatic virtual-point resample on a singular draw, then hard error.
inline FitResult fit_kkt(const ProblemSpec& problem, const TrainingData& data, int p,
                         const FitOptions& options) {
    if (problem.is_nonlinear())
        throw SolverError("fit_kkt: operator references u_prev; use the iterative fit");
    const BasisSet basis = multi_index_set(problem.dimension(), p);
    const auto bpts = boundary_points(problem, options.n_bc);
    const int n_v = virtual_point_count(basis.size(), static_cast<int>(bpts.size()));

    FitResult out;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::uint64_t vseed =
            attempt == 0 ? derive_seed(options.seed, seed_stream::virtual_points, p)
                         : derive_seed(options.seed, seed_stream::resample, p);
        const Eigen::MatrixXd vpts = sample(options.virtual_sampler, n_v, problem.dimension(), vseed);
        const ConstraintSet cs = build_constraints(problem, basis, bpts, vpts);
        try {
            out = solve_kkt(data, cs, basis, problem.variables);
            out.report.virtual_resamples = attempt;
            break;
        } catch (const SolverError&) {
            if (attempt == 1) throw;
        }
    }
    out.model.meta.method = "kkt";
    out.model.meta.seed = options.seed;
    out.model.meta.n_bc = static_cast<int>(bpts.size());
    out.model.meta.n_virtual = n_v;
    out.model.meta.virtual_resamples = out.report.virtual_resamples;
    const ScoreContext ctx = ScoreContext::make(problem, options);
    apply_score(out.report, internal_score(out.model, problem, data, ctx));
    out.report.selected_positions.resize(basis.size());
    std::iota(out.report.selected_positions.begin(), out.report.selected_positions.end(), 0);
    return out;
}

namespace detail {

/// Algorithm-3 style iteration on a fixed basis with externally supplied,
/// fixed virtual points. The initial iterate comes from the boundary
/// conditions alone; when that BC-only KKT system is singular (typical with
/// n_sim < P) the start falls back to a weighted minimum-norm least squares.
inline FitResult fit_nonlinear_fixed_points(const ProblemSpec& problem, const TrainingData& data,
                                            const BasisSet& basis,
                                            const std::vector<BoundaryPoint>& bpts,
                                            const Eigen::MatrixXd& vpts,
                                            const FitOptions& options) {
    const ConstraintSet bc_only =
        build_constraints(problem, basis, bpts, Eigen::MatrixXd(0, problem.dimension()));
    Pc2Model current;
    bool init_fallback = false;
    try {
        current = solve_kkt(data, bc_only, basis, problem.variables).model;
    } catch (const SolverError&) {
        init_fallback = true;
        const double w = 1e4;
        Eigen::MatrixXd stacked(data.n() + bc_only.rows(), basis.size());
        Eigen::VectorXd target(data.n() + bc_only.rows());
        if (data.n() > 0) {
            stacked.topRows(data.n()) = design_matrix(basis, data.inputs);
            target.head(data.n()) = data.outputs;
        }
        stacked.bottomRows(bc_only.rows()) = w * bc_only.A;
        target.tail(bc_only.rows()) = w * bc_only.c;
        current.basis = basis;
        current.variables = problem.variables;
        current.coefficients =
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(stacked).solve(target);
    }

    FitResult out;
    int executed = 0;
    std::vector<double> norm_history{current.coefficients.lpNorm<Eigen::Infinity>()};
    for (int it = 1; it <= options.nonlinear.n_iter; ++it) {
        const ConstraintSet cs = build_constraints(problem, basis, bpts, vpts, &current,
                                                   options.nonlinear.linearization);
        FitResult step = solve_kkt(data, cs, basis, problem.variables);
        executed = it;
        const double delta =
            (step.model.coefficients - current.coefficients).lpNorm<Eigen::Infinity>();
        current = step.model;
        out.report = step.report;
        const double norm = current.coefficients.lpNorm<Eigen::Infinity>();
        norm_history.push_back(norm);
        if (norm_history.size() >= 4) {
            const double base = norm_history[norm_history.size() - 4];
            if (norm > 1e3 * std::max(base, 1e-30))
                throw SolverError("nonlinear iteration diverging (coefficient norm grew from " +
                                  std::to_string(base) + " to " + std::to_string(norm) +
                                  " over 3 iterations)");
        }
        if (std::isfinite(options.nonlinear.tol) && delta < options.nonlinear.tol) break;
    }
    out.model = current;
    out.model.meta.iterations = executed;
    out.model.meta.rank_deficient = init_fallback;
    out.report.iterations = executed;
    return out;
}

}  // namespace detail

/// Iterative KKT fit for weakly nonlinear operators: start from a BC-only
/// fit, then rebuild the virtual rows around the current iterate until the
/// coefficients settle. Virtual points are drawn once by LHS and kept fixed
/// across iterations; a singular first draw is resampled once.
inline FitResult fit_nonlinear(const ProblemSpec& problem, const TrainingData& data, int p,
                               const FitOptions& options) {
    if (options.nonlinear.n_iter < 1)
        throw std::invalid_argument("fit_nonlinear: n_iter must be at least 1");
    const BasisSet basis = multi_index_set(problem.dimension(), p);
    const auto bpts = boundary_points(problem, options.n_bc);
    const int n_v = virtual_point_count(basis.size(), static_cast<int>(bpts.size()));

    FitResult out;
    int resamples = 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::uint64_t vseed =
            attempt == 0 ? derive_seed(options.seed, seed_stream::virtual_points, p)
                         : derive_seed(options.seed, seed_stream::resample, p);
        const Eigen::MatrixXd vpts = sample_lhs(n_v, problem.dimension(), vseed);
        try {
            out = detail::fit_nonlinear_fixed_points(problem, data, basis, bpts, vpts, options);
            resamples = attempt;
            break;
        } catch (const SolverError&) {
            if (attempt == 1) throw;
        }
    }

    out.model.meta.method = "kkt";
    out.model.meta.seed = options.seed;
    out.model.meta.n_sim = data.n();
    out.model.meta.p_selected = p;
    out.model.meta.n_bc = static_cast<int>(bpts.size());
    out.model.meta.n_virtual = n_v;
    out.model.meta.virtual_resamples = resamples;
    out.report.virtual_resamples = resamples;
    out.report.p_selected = p;
    const ScoreContext ctx = ScoreContext::make(problem, options);
    apply_score(out.report, internal_score(out.model, problem, data, ctx));
    out.report.selected_positions.resize(basis.size());
    std::iota(out.report.selected_positions.begin(), out.report.selected_positions.end(), 0);
    return out;
}

/// Fixed-p dispatch on operator linearity.
inline FitResult fit_constrained(const ProblemSpec& problem, const TrainingData& data, int p,
                                 const FitOptions& options) {
    return problem.is_nonlinear() ? fit_nonlinear(problem, data, p, options)
                                  : fit_kkt(problem, data, p, options);
}

// --------------------------------------------------------------------------
// Adaptive fits
// --------------------------------------------------------------------------

namespace detail {

inline std::vector<int> sorted_p_values(const FitOptions& options) {
    if (options.p_values.empty())
        throw std::invalid_argument("fit: empty p range");
    std::vector<int> ps = options.p_values;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return ps;
}

struct BestCandidate {
    double score = std::numeric_limits<double>::infinity();
    FitResult fit;
    bool found = false;

    /// Strict improvement only: ascending (p, prefix) iteration order makes
    /// ties resolve to the smaller p, then the smaller prefix.
    void consider(double s, FitResult&& candidate) {
        if (!found || s < score) {
            score = s;
            fit = std::move(candidate);
            found = true;
        }
    }
};

}  // namespace detail

/// Degree-adaptive full-basis KKT: fit every p in the range, keep the lowest
/// selection score.
inline FitResult fit_kkt_adaptive(const ProblemSpec& problem, const TrainingData& data,
                                  const FitOptions& options) {
    const auto ps = detail::sorted_p_values(options);
    detail::BestCandidate best;
    std::string failures;
    for (int p : ps) {
        try {
            FitResult fr = fit_constrained(problem, data, p, options);
            const double s = fr.report.r2;
            fr.report.p_selected = p;
            best.consider(s, std::move(fr));
        } catch (const std::exception& e) {
            failures += "  p=" + std::to_string(p) + ": " + e.what() + "\n";
        }
    }
    if (!best.found)
        throw SolverError("fit_kkt_adaptive: no degree in the range produced a solvable system:\n" +
                          failures);
    return std::move(best.fit);
}

/// LAR-guided sparse KKT with p-adaptivity: per degree, rank the basis by LAR
/// on the experimental design, then grow the basis along that order, rebuild
/// the constraints for each sub-basis, solve the KKT system and keep the
/// candidate with the lowest score. The full basis is always evaluated as the
/// final candidate of each degree; the prefix sweep stops early after
/// `patience` consecutive non-improvements.
inline FitResult fit_lar_kkt(const ProblemSpec& problem, const TrainingData& data,
                             const FitOptions& options) {
    const auto ps = detail::sorted_p_values(options);
    const int dim = problem.dimension();
    const auto bpts = boundary_points(problem, options.n_bc);
    const int n_bc = static_cast<int>(bpts.size());
    const bool nonlinear = problem.is_nonlinear();
    const ScoreContext ctx = ScoreContext::make(problem, options);

    detail::BestCandidate best;
    std::string failures;
    int evaluated = 0;

    for (int p : ps) {
        const BasisSet basis_p = multi_index_set(dim, p);
        const int P = basis_p.size();
        if (P <= n_bc) {
            failures += "  p=" + std::to_string(p) + ": basis smaller than boundary set\n";
            continue;
        }
        const LarRanking ranking = lar_rank(data.inputs, data.outputs, basis_p);
        const Sampler pool_sampler = nonlinear ? Sampler::lhs : options.virtual_sampler;
        const Eigen::MatrixXd pool =
            sample(pool_sampler, P - n_bc, dim,
                   derive_seed(options.seed, seed_stream::virtual_points, p));

        double best_this_p = std::numeric_limits<double>::infinity();
        int stall = 0;
        for (int i = n_bc + 1; i <= P; ++i) {
            if (stall >= options.patience && i != P) continue;  // skip ahead to the full basis
            std::vector<int> positions(ranking.order.begin(), ranking.order.begin() + i);
            std::sort(positions.begin(), positions.end());
            const BasisSet sub = basis_p.subset(positions);
            const int n_v = std::max(1, i - n_bc);
            const Eigen::MatrixXd vpts = pool.topRows(n_v);

            try {
                FitResult fr;
                if (nonlinear) {
                    fr = detail::fit_nonlinear_fixed_points(problem, data, sub, bpts, vpts, options);
                } else {
                    const ConstraintSet cs = build_constraints(problem, sub, bpts, vpts);
                    fr = solve_kkt(data, cs, sub, problem.variables);
                }
                ++evaluated;
                const ScoreComponents s = internal_score(fr.model, problem, data, ctx);
                apply_score(fr.report, s);
                fr.report.p_selected = p;
                fr.report.selected_positions = positions;
                fr.report.lar_fallback = ranking.fallback;
                fr.model.meta.method = "lar-kkt";
                fr.model.meta.seed = options.seed;
                fr.model.meta.n_bc = n_bc;
                fr.model.meta.n_virtual = n_v;
                fr.model.meta.lar_fallback = ranking.fallback;
                const double total = s.total();
                if (total < best_this_p) {
                    best_this_p = total;
                    stall = 0;
                } else {
                    ++stall;
                }
                best.consider(total, std::move(fr));
            } catch (const std::exception& e) {
                ++stall;
                failures += "  p=" + std::to_string(p) + " prefix=" + std::to_string(i) + ": " +
                            e.what() + "\n";
            }
        }
    }
    if (!best.found)
        throw SolverError("fit_lar_kkt: no candidate produced a solvable system:\n" + failures);
    best.fit.report.candidates_evaluated = evaluated;
    return std::move(best.fit);
}

/// Unconstrained sparse baseline: LAR ranking plus prefix OLS fits. The
/// method is physics-blind, so model selection uses a held-out split of the
/// (augmented) data rather than the constraint-aware score; the winning
/// structure is refit on all rows. Value-type (Dirichlet) boundary points
/// join the experimental design; higher-order conditions cannot be
/// represented as data and are ignored here.
inline FitResult fit_lar_unconstrained(const ProblemSpec& problem, const TrainingData& data,
                                       const FitOptions& options) {
    const auto ps = detail::sorted_p_values(options);
    const int dim = problem.dimension();
    const ScoreContext ctx = ScoreContext::make(problem, options);

    // augment the design with Dirichlet-style boundary values
    TrainingData aug = data;
    {
        std::vector<BoundaryPoint> bpts;
        try {
            bpts = boundary_points(problem, options.n_bc);
        } catch (const DesignError&) {
            bpts.clear();
        }
        std::vector<Eigen::VectorXd> extra_x;
        std::vector<double> extra_y;
        std::vector<std::string> names;
        std::vector<double> values;
        for (const auto& bp : bpts) {
            const auto& op = problem.bcs[bp.bc_index].op;
            if (op.terms.size() != 1 || op.references_u_prev()) continue;
            const auto& term = op.terms[0];
            if (std::any_of(term.orders.begin(), term.orders.end(), [](int o) { return o != 0; }))
                continue;
            names.clear();
            values.clear();
            for (int i = 0; i < dim; ++i) {
                names.push_back(problem.variables[i].name);
                values.push_back(problem.variables[i].transform.from_standard(bp.xi(i)));
            }
            const EvalEnv env{names, values, std::nullopt};
            const double coeff = term.coeff.eval(env);
            if (std::abs(coeff) < 1e-14) continue;
            extra_x.push_back(bp.xi);
            extra_y.push_back((op.rhs.empty() ? 0.0 : op.rhs.eval(env)) / coeff);
        }
        if (!extra_x.empty()) {
            const int n0 = aug.n();
            aug.inputs.conservativeResize(n0 + static_cast<int>(extra_x.size()), dim);
            aug.outputs.conservativeResize(n0 + static_cast<int>(extra_y.size()));
            for (std::size_t k = 0; k < extra_x.size(); ++k) {
                aug.inputs.row(n0 + static_cast<int>(k)) = extra_x[k].transpose();
                aug.outputs(n0 + static_cast<int>(k)) = extra_y[k];
            }
        }
    }
    if (aug.n() == 0)
        throw SolverError("fit_lar_unconstrained: no training data (and no Dirichlet points)");

    // held-out split (about a quarter, at least one row when possible)
    std::vector<int> perm(aug.n());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(options.seed, seed_stream::validation, 1));
    rng.shuffle(perm);
    const int n_hold = aug.n() >= 4 ? aug.n() / 4 : 0;
    TrainingData train, hold;
    if (n_hold == 0) {
        train = aug;
        hold.inputs.resize(0, dim);
        hold.outputs.resize(0);
    } else {
        train.inputs.resize(aug.n() - n_hold, dim);
        train.outputs.resize(aug.n() - n_hold);
        hold.inputs.resize(n_hold, dim);
        hold.outputs.resize(n_hold);
        for (int i = 0; i < aug.n(); ++i) {
            if (i < n_hold) {
                hold.inputs.row(i) = aug.inputs.row(perm[i]);
                hold.outputs(i) = aug.outputs(perm[i]);
            } else {
                train.inputs.row(i - n_hold) = aug.inputs.row(perm[i]);
                train.outputs(i - n_hold) = aug.outputs(perm[i]);
            }
        }
    }

    auto selection_error = [&](const Pc2Model& model) {
        const TrainingData& v = n_hold > 0 ? hold : train;
        const Eigen::MatrixXd psi = design_matrix(model.basis, v.inputs);
        return (v.outputs - psi * model.coefficients).squaredNorm() / v.n();
    };

    struct Winner {
        double score = std::numeric_limits<double>::infinity();
        int p = 0;
        std::vector<int> positions;
        bool fallback = false;
        bool found = false;
    } winner;
    int evaluated = 0;
    for (int p : ps) {
        const BasisSet basis_p = multi_index_set(dim, p);
        const int P = basis_p.size();
        const LarRanking ranking = lar_rank(train.inputs, train.outputs, basis_p);
        double best_this_p = std::numeric_limits<double>::infinity();
        int stall = 0;
        for (int i = 1; i <= P; ++i) {
            if (stall >= options.patience) break;
            std::vector<int> positions(ranking.order.begin(), ranking.order.begin() + i);
            std::sort(positions.begin(), positions.end());
            const BasisSet sub = basis_p.subset(positions);
            const Pc2Model candidate = fit_ols(train, sub, problem.variables);
            ++evaluated;
            const double err = selection_error(candidate);
            if (err < best_this_p) {
                best_this_p = err;
                stall = 0;
            } else {
                ++stall;
            }
            if (!winner.found || err < winner.score) {
                winner = {err, p, positions, ranking.fallback, true};
            }
        }
    }
    if (!winner.found) throw SolverError("fit_lar_unconstrained: no candidate fit succeeded");

    // refit the winning structure on all rows
    const BasisSet sub = multi_index_set(dim, winner.p).subset(winner.positions);
    FitResult out;
    out.model = fit_ols(aug, sub, problem.variables);
    out.model.meta.method = "lar";
    out.model.meta.seed = options.seed;
    out.model.meta.p_selected = winner.p;
    out.model.meta.lar_fallback = winner.fallback;
    apply_score(out.report, internal_score(out.model, problem, aug, ctx));
    out.report.p_selected = winner.p;
    out.report.selected_positions = winner.positions;
    out.report.lar_fallback = winner.fallback;
    out.report.candidates_evaluated = evaluated;
    return out;
}

}  // namespace pc2
