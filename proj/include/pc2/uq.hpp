#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pc2/design.hpp"
#include "pc2/legendre.hpp"
#include "pc2/model.hpp"
#include "pc2/operators.hpp"
#include "pc2/solver.hpp"

namespace pc2 {

struct UqError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expansion over the random variables alone, obtained by fixing every
/// deterministic coordinate. Terms sharing a random multi-index are merged;
/// the all-zero random index is kept apart as the constant part.
struct ReducedPce {
    std::vector<MultiIndex> indices;   // random-variable multi-indices, none all-zero
    Eigen::VectorXd coefficients;      // matching merged coefficients
    double constant = 0.0;             // deterministic part (local mean)
    std::vector<int> random_dims;      // positions of the random variables in the model

    double mean() const { return constant; }
    double variance() const { return coefficients.squaredNorm(); }

    double evaluate_standard(std::span<const double> xi_random) const {
        double acc = constant;
        if (indices.empty()) return acc;
        // per-dimension value tables up to the largest degree used
        std::vector<std::vector<double>> values(random_dims.size());
        int max_deg = 0;
        for (const auto& mi : indices)
            for (int d : mi.degrees) max_deg = std::max(max_deg, d);
        for (std::size_t d = 0; d < random_dims.size(); ++d)
            legendre_derivative_table(max_deg, 0, xi_random[d], values[d]);
        for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
            double v = coefficients(j);
            for (std::size_t d = 0; d < random_dims.size(); ++d)
                v *= values[d][indices[j].degrees[d]];
            acc += v;
        }
        return acc;
    }
};

namespace detail {

inline std::vector<int> model_random_dims(const Pc2Model& model) {
    std::vector<int> out;
    for (int i = 0; i < model.dimension(); ++i)
        if (model.variables[i].role() == VariableRole::random) out.push_back(i);
    return out;
}

}  // namespace detail

/// Mean of a purely random expansion: the intercept coefficient.
inline double global_mean(const Pc2Model& model) {
    if (detail::model_random_dims(model).size() != static_cast<std::size_t>(model.dimension()))
        throw UqError("global_mean: model mixes deterministic and random variables; "
                      "use local_stats at a fixed deterministic point");
    return model.coefficients(0);
}

/// Variance of a purely random expansion: sum of squared non-intercept
/// coefficients (orthonormal basis).
inline double global_variance(const Pc2Model& model) {
    if (detail::model_random_dims(model).size() != static_cast<std::size_t>(model.dimension()))
        throw UqError("global_variance: model mixes deterministic and random variables; "
                      "use local_stats at a fixed deterministic point");
    return model.coefficients.tail(model.coefficients.size() - 1).squaredNorm();
}

/// Condition the expansion on a deterministic point (physical coordinates of
/// the deterministic variables, in model order). Each term splits into its
/// deterministic factor, evaluated at the point, and its random-only basis
/// function; coefficients of duplicate random multi-indices are summed.
inline ReducedPce reduce_at(const Pc2Model& model, std::span<const double> det_point) {
    const auto random_dims = detail::model_random_dims(model);
    std::vector<int> det_dims;
    for (int i = 0; i < model.dimension(); ++i)
        if (model.variables[i].role() == VariableRole::deterministic) det_dims.push_back(i);
    if (det_point.size() != det_dims.size())
        throw UqError("reduce_at: point must fix every deterministic variable");

    // per deterministic dimension: table of psi_n at the standardized coordinate
    std::vector<std::vector<double>> det_values(det_dims.size());
    for (std::size_t d = 0; d < det_dims.size(); ++d) {
        const auto& t = model.variables[det_dims[d]].transform;
        legendre_derivative_table(model.basis.max_degree, 0, t.to_standard(det_point[d]),
                                  det_values[d]);
    }

    std::map<std::vector<int>, double> groups;
    for (int j = 0; j < model.basis.size(); ++j) {
        const auto& alpha = model.basis.indices[j].degrees;
        double factor = model.coefficients(j);
        for (std::size_t d = 0; d < det_dims.size(); ++d) factor *= det_values[d][alpha[det_dims[d]]];
        std::vector<int> key(random_dims.size());
        for (std::size_t d = 0; d < random_dims.size(); ++d) key[d] = alpha[random_dims[d]];
        groups[key] += factor;
    }

    ReducedPce out;
    out.random_dims = random_dims;
    std::vector<double> coeffs;
    for (const auto& [key, value] : groups) {
        const bool zero = std::all_of(key.begin(), key.end(), [](int d) { return d == 0; });
        if (zero) {
            out.constant = value;
        } else {
            out.indices.emplace_back(key);
            coeffs.push_back(value);
        }
    }
    out.coefficients = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
    return out;
}

struct LocalStats {
    double mean = 0.0;
    double variance = 0.0;
};

/// Local mean/variance over the random variables at a fixed deterministic
/// point (physical coordinates).
inline LocalStats local_stats(const Pc2Model& model, std::span<const double> det_point) {
    const ReducedPce red = reduce_at(model, det_point);
    return {red.mean(), red.variance()};
}

/// First-order Sobol index of the random variable at position `which` within
/// the reduced expansion's random dimensions.
inline double sobol_first_order(const ReducedPce& reduced, int which) {
    const double var = reduced.variance();
    if (!(var > 0.0)) throw UqError("sobol_first_order: expansion has zero variance");
    double acc = 0.0;
    for (Eigen::Index j = 0; j < reduced.coefficients.size(); ++j) {
        const auto& deg = reduced.indices[j].degrees;
        bool only_this = deg[which] != 0;
        for (std::size_t d = 0; d < deg.size(); ++d)
            if (static_cast<int>(d) != which && deg[d] != 0) only_this = false;
        if (only_this) acc += reduced.coefficients(j) * reduced.coefficients(j);
    }
    return acc / var;
}

/// First-order Sobol index of variable i for a purely random expansion.
inline double sobol_first_order(const Pc2Model& model, int variable) {
    if (detail::model_random_dims(model).size() != static_cast<std::size_t>(model.dimension()))
        throw UqError("sobol_first_order: model mixes deterministic and random variables; "
                      "reduce at a deterministic point first");
    ReducedPce red;
    red.random_dims = detail::model_random_dims(model);
    std::vector<double> coeffs;
    for (int j = 0; j < model.basis.size(); ++j) {
        if (model.basis.indices[j].is_zero()) continue;
        red.indices.push_back(model.basis.indices[j]);
        coeffs.push_back(model.coefficients(j));
    }
    red.coefficients = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
    return sobol_first_order(red, variable);
}

/// Variance contribution of every interaction group (keyed by the set of
/// random variables with nonzero degree). Dividing by the variance gives the
/// full Sobol decomposition; the shares sum to one.
inline std::map<std::vector<bool>, double> sobol_group_variances(const ReducedPce& reduced) {
    std::map<std::vector<bool>, double> groups;
    for (Eigen::Index j = 0; j < reduced.coefficients.size(); ++j) {
        std::vector<bool> support(reduced.indices[j].degrees.size());
        for (std::size_t d = 0; d < support.size(); ++d)
            support[d] = reduced.indices[j].degrees[d] != 0;
        groups[support] += reduced.coefficients(j) * reduced.coefficients(j);
    }
    return groups;
}

// --------------------------------------------------------------------------
// Validation-set error metrics
// --------------------------------------------------------------------------

struct ValidationSpec {
    int n_interior = 10000;
    int n_boundary = 100;
    std::uint64_t seed = 42;
};

/// Squared-error metrics of a fitted model over seeded validation sets.
/// eps_* measure the gap to the reference solution; r2_u is the same mean
/// squared error normalized by the validation-output variance, and r2_l/r2_b
/// are the mean squared PDE/BC residuals.
struct ErrorBreakdown {
    double eps_mean = 0.0;
    double eps_max = 0.0;
    double r2_u = 0.0;
    double r2_l = 0.0;
    double r2_b = 0.0;
    double r2 = 0.0;
    bool reference_available = false;
    int n_interior = 0;
    int n_boundary = 0;
};

inline ErrorBreakdown error_breakdown(const Pc2Model& model, const ProblemSpec& problem,
                                      const ValidationSpec& spec = {}) {
    if (spec.n_interior <= 0 || spec.n_boundary <= 0)
        throw UqError("error_breakdown: validation sizes must be positive");
    ErrorBreakdown out;
    out.n_interior = spec.n_interior;
    out.n_boundary = spec.n_boundary;

    const int dim = problem.dimension();
    const Eigen::MatrixXd pts =
        sample_mc(spec.n_interior, dim, derive_seed(spec.seed, seed_stream::validation));

    std::vector<double> xi(dim);
    std::vector<std::string> names;
    std::vector<double> values;
    if (problem.reference) {
        out.reference_available = true;
        double sum_sq = 0.0, max_sq = 0.0, sum_ref = 0.0, sum_ref_sq = 0.0;
        for (int r = 0; r < spec.n_interior; ++r) {
            for (int c = 0; c < dim; ++c) xi[c] = pts(r, c);
            names.clear();
            values.clear();
            for (int i = 0; i < dim; ++i) {
                names.push_back(problem.variables[i].name);
                values.push_back(problem.variables[i].transform.from_standard(xi[i]));
            }
            const EvalEnv env{names, values, std::nullopt};
            const double u_ref = problem.reference->eval(env);
            const double u_hat = model.evaluate_standard(xi);
            const double sq = (u_ref - u_hat) * (u_ref - u_hat);
            sum_sq += sq;
            max_sq = std::max(max_sq, sq);
            sum_ref += u_ref;
            sum_ref_sq += u_ref * u_ref;
        }
        out.eps_mean = sum_sq / spec.n_interior;
        out.eps_max = max_sq;
        const double mean_ref = sum_ref / spec.n_interior;
        const double var_ref =
            std::max(0.0, sum_ref_sq / spec.n_interior - mean_ref * mean_ref) *
            (spec.n_interior / std::max(1.0, spec.n_interior - 1.0));
        out.r2_u = var_ref > 1e-12 ? out.eps_mean / var_ref : out.eps_mean;
    }

    out.r2_l = mean_squared_residual(problem.pde, model, problem, pts);

    const auto bpts = boundary_validation_points(
        problem, spec.n_boundary, derive_seed(spec.seed, seed_stream::boundary_validation));
    if (!bpts.empty()) {
        double acc = 0.0;
        for (const auto& bp : bpts) {
            for (int i = 0; i < dim; ++i) xi[i] = bp.xi(i);
            const double r = residual(problem.bcs[bp.bc_index].op, model, problem, xi);
            acc += r * r;
        }
        out.r2_b = acc / static_cast<double>(bpts.size());
    }
    out.r2 = out.r2_u + out.r2_l + out.r2_b;
    return out;
}

}  // namespace pc2
