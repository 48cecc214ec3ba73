#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pc2/basis_eval.hpp"
#include "pc2/model.hpp"
#include "pc2/problem.hpp"

namespace pc2 {

/// How weakly nonlinear operators are linearized around the previous iterate.
enum class Linearization {
    coefficient,  // u_prev bound inside coefficient expressions, rhs = f
    rhs,          // u_prev-dependent terms moved to the right side, evaluated at the iterate
};

namespace detail {

inline EvalEnv physical_env(const ProblemSpec& problem, std::span<const double> xi,
                            std::vector<std::string>& names, std::vector<double>& values) {
    names.clear();
    values.clear();
    for (int i = 0; i < problem.dimension(); ++i) {
        names.push_back(problem.variables[i].name);
        values.push_back(problem.variables[i].transform.from_standard(xi[i]));
    }
    return EvalEnv{names, values, std::nullopt};
}

}  // namespace detail

/// One constraint row at a standardized point: a_j = L(Psi_j(xi)) and the
/// target c = rhs. Coefficients and rhs are evaluated in physical coordinates;
/// basis derivatives carry the chain-rule scaling, so the row is in physical
/// units throughout. u_prev (when the operator references it) is the surrogate
/// from the previous iterate, evaluated at the same point.
inline std::pair<Eigen::RowVectorXd, double> constraint_row(const LinearOperator& op,
                                                            const BasisSet& basis,
                                                            const ProblemSpec& problem,
                                                            std::span<const double> xi,
                                                            const Pc2Model* u_prev = nullptr) {
    const auto tf = problem.transforms();
    std::vector<std::string> names;
    std::vector<double> values;
    EvalEnv env = detail::physical_env(problem, xi, names, values);
    if (op.references_u_prev()) {
        if (!u_prev)
            throw std::invalid_argument(
                "constraint_row: operator references u_prev but no surrogate is bound");
        env.u_prev = u_prev->evaluate_standard(xi);
    }

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(basis.size());
    BasisRowEvaluator ev(basis);
    Eigen::RowVectorXd term_row(basis.size());
    for (const auto& term : op.terms) {
        const double coeff = term.coeff.eval(env);
        ev.eval(xi, term.orders, tf, {term_row.data(), static_cast<std::size_t>(term_row.size())});
        row.noalias() += coeff * term_row;
    }
    const double c = op.rhs.empty() ? 0.0 : op.rhs.eval(env);
    return {std::move(row), c};
}

/// Row variant for rhs-lagged linearization: only u_prev-free terms contribute
/// to the row; u_prev-dependent terms are applied to the previous iterate and
/// subtracted from the target.
inline std::pair<Eigen::RowVectorXd, double> constraint_row_rhs_lagged(
    const LinearOperator& op, const BasisSet& basis, const ProblemSpec& problem,
    std::span<const double> xi, const Pc2Model& u_prev) {
    const auto tf = problem.transforms();
    std::vector<std::string> names;
    std::vector<double> values;
    EvalEnv env = detail::physical_env(problem, xi, names, values);
    env.u_prev = u_prev.evaluate_standard(xi);

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(basis.size());
    BasisRowEvaluator ev(basis);
    Eigen::RowVectorXd term_row(basis.size());
    double lagged = 0.0;
    for (const auto& term : op.terms) {
        const double coeff = term.coeff.eval(env);
        if (term.coeff.references_u_prev()) {
            lagged += coeff * u_prev.evaluate_derivative_standard(xi, term.orders);
        } else {
            ev.eval(xi, term.orders, tf,
                    {term_row.data(), static_cast<std::size_t>(term_row.size())});
            row.noalias() += coeff * term_row;
        }
    }
    const double c = (op.rhs.empty() ? 0.0 : op.rhs.eval(env)) - lagged;
    return {std::move(row), c};
}

/// Pointwise residual L(u)(xi) - rhs(xi) at a standardized point. For
/// operators referencing u_prev the model itself is bound, giving the true
/// nonlinear residual.
inline double residual(const LinearOperator& op, const Pc2Model& model, const ProblemSpec& problem,
                       std::span<const double> xi) {
    const auto [row, c] = constraint_row(op, model.basis, problem, xi,
                                         op.references_u_prev() ? &model : nullptr);
    return row.dot(model.coefficients) - c;
}

/// Mean squared residual of an operator over a set of standardized points.
inline double mean_squared_residual(const LinearOperator& op, const Pc2Model& model,
                                    const ProblemSpec& problem, const Eigen::MatrixXd& points) {
    if (points.rows() == 0) return 0.0;
    double acc = 0.0;
    std::vector<double> xi(points.cols());
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) xi[c] = points(r, c);
        const double res = residual(op, model, problem, xi);
        acc += res * res;
    }
    return acc / static_cast<double>(points.rows());
}

}  // namespace pc2
