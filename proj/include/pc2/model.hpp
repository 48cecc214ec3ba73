#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pc2/basis_eval.hpp"
#include "pc2/multi_index.hpp"
#include "pc2/problem.hpp"

namespace pc2 {

/// Fitted expansion: basis, coefficients, and the variable transforms needed
/// to evaluate it at physical points. The evaluable surrogate.
struct Pc2Model {
    BasisSet basis;
    std::vector<Variable> variables;
    Eigen::VectorXd coefficients;

    struct Meta {
        std::string method;
        int p_selected = 0;
        std::uint64_t seed = 0;
        int n_sim = 0;
        int n_bc = 0;
        int n_virtual = 0;
        int iterations = 0;
        bool rank_deficient = false;
        bool lar_fallback = false;
        int virtual_resamples = 0;
    } meta;

    int dimension() const { return static_cast<int>(variables.size()); }

    std::vector<VariableTransform> transforms() const {
        std::vector<VariableTransform> out;
        out.reserve(variables.size());
        for (const auto& v : variables) out.push_back(v.transform);
        return out;
    }

    std::vector<double> to_standard(std::span<const double> x) const {
        std::vector<double> xi(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xi[i] = variables[i].transform.to_standard(x[i]);
        return xi;
    }

    double evaluate_standard(std::span<const double> xi) const {
        return eval_basis_row(basis, xi).dot(coefficients);
    }

    double evaluate(std::span<const double> x) const {
        const auto xi = to_standard(x);
        return evaluate_standard(xi);
    }

    /// Mixed partial derivative in physical units at a physical point.
    double evaluate_derivative(std::span<const double> x, std::span<const int> orders) const {
        const auto xi = to_standard(x);
        const auto tf = transforms();
        return eval_basis_row(basis, xi, orders, tf).dot(coefficients);
    }

    double evaluate_derivative_standard(std::span<const double> xi,
                                        std::span<const int> orders) const {
        const auto tf = transforms();
        return eval_basis_row(basis, xi, orders, tf).dot(coefficients);
    }

    /// True when the point leaves the fitted box (polynomials still evaluate,
    /// but the result is an extrapolation).
    bool is_extrapolating(std::span<const double> x, double tol = 0.0) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto& t = variables[i].transform;
            const double slack = tol * (t.upper - t.lower);
            if (x[i] < t.lower - slack || x[i] > t.upper + slack) return true;
        }
        return false;
    }
};

}  // namespace pc2
