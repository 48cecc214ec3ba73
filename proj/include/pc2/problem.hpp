#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pc2/expression.hpp"
#include "pc2/transform.hpp"

namespace pc2 {

struct Variable {
    std::string name;
    VariableTransform transform;

    VariableRole role() const { return transform.role; }
};

/// One summand of a linear differential operator:
/// coeff(x, [u_prev]) * mixed partial with the given per-variable orders.
/// Orders on random variables are always zero.
struct OperatorTerm {
    Expression coeff;
    std::vector<int> orders;  // one entry per problem variable
};

/// L(u) = sum_k coeff_k * d^{orders_k} u, with pointwise constraint L(u) = rhs.
struct LinearOperator {
    std::vector<OperatorTerm> terms;
    Expression rhs;

    bool references_u_prev() const {
        for (const auto& t : terms)
            if (t.coeff.references_u_prev()) return true;
        return rhs.references_u_prev();
    }
};

/// Boundary/initial condition: an operator enforced on the face (or point)
/// obtained by fixing some deterministic variables. Unfixed variables range
/// over their whole interval.
struct BoundaryCondition {
    LinearOperator op;
    std::vector<std::optional<double>> location;  // physical value per variable; nullopt = free

    int fixed_count() const {
        int n = 0;
        for (const auto& l : location) n += l.has_value();
        return n;
    }
};

struct ProblemSpec {
    std::vector<Variable> variables;
    LinearOperator pde;
    std::vector<BoundaryCondition> bcs;
    std::optional<Expression> reference;

    int dimension() const { return static_cast<int>(variables.size()); }

    std::vector<VariableTransform> transforms() const {
        std::vector<VariableTransform> out;
        out.reserve(variables.size());
        for (const auto& v : variables) out.push_back(v.transform);
        return out;
    }

    std::vector<std::string> variable_names() const {
        std::vector<std::string> out;
        out.reserve(variables.size());
        for (const auto& v : variables) out.push_back(v.name);
        return out;
    }

    std::vector<int> deterministic_indices() const {
        std::vector<int> out;
        for (int i = 0; i < dimension(); ++i)
            if (variables[i].role() == VariableRole::deterministic) out.push_back(i);
        return out;
    }

    std::vector<int> random_indices() const {
        std::vector<int> out;
        for (int i = 0; i < dimension(); ++i)
            if (variables[i].role() == VariableRole::random) out.push_back(i);
        return out;
    }

    bool is_nonlinear() const {
        if (pde.references_u_prev()) return true;
        for (const auto& bc : bcs)
            if (bc.op.references_u_prev()) return true;
        return false;
    }

    int find_variable(const std::string& name) const {
        for (int i = 0; i < dimension(); ++i)
            if (variables[i].name == name) return i;
        return -1;
    }

    /// Structural checks shared by config loading and programmatic setup.
    void validate() const {
        if (variables.empty()) throw std::invalid_argument("problem has no variables");
        for (int i = 0; i < dimension(); ++i)
            for (int j = i + 1; j < dimension(); ++j)
                if (variables[i].name == variables[j].name)
                    throw std::invalid_argument("duplicate variable '" + variables[i].name + "'");
        validate_operator(pde, "pde");
        if (pde.terms.empty()) throw std::invalid_argument("pde has no terms");
        for (std::size_t b = 0; b < bcs.size(); ++b) {
            const auto& bc = bcs[b];
            validate_operator(bc.op, "bc[" + std::to_string(b) + "]");
            if (static_cast<int>(bc.location.size()) != dimension())
                throw std::invalid_argument("bc location dimension mismatch");
            if (bc.fixed_count() == 0)
                throw std::invalid_argument("bc must fix at least one deterministic variable");
            for (int i = 0; i < dimension(); ++i) {
                if (!bc.location[i]) continue;
                if (variables[i].role() != VariableRole::deterministic)
                    throw std::invalid_argument("bc location may only fix deterministic variables");
                if (!variables[i].transform.contains(*bc.location[i]))
                    throw std::invalid_argument("bc location outside the domain of '" +
                                                variables[i].name + "'");
            }
        }
        if (reference) validate_expression(*reference, "reference.solution");
    }

private:
    void validate_operator(const LinearOperator& op, const std::string& where) const {
        for (const auto& term : op.terms) {
            if (static_cast<int>(term.orders.size()) != dimension())
                throw std::invalid_argument(where + ": derivative-order dimension mismatch");
            for (int i = 0; i < dimension(); ++i) {
                if (term.orders[i] < 0)
                    throw std::invalid_argument(where + ": negative derivative order");
                if (term.orders[i] > 0 && variables[i].role() != VariableRole::deterministic)
                    throw std::invalid_argument(where + ": derivative order on random variable '" +
                                                variables[i].name + "'");
            }
            validate_expression(term.coeff, where + ".coeff");
        }
        if (!op.rhs.empty()) validate_expression(op.rhs, where + ".rhs");
    }

    void validate_expression(const Expression& e, const std::string& where) const {
        for (const auto& name : e.variables())
            if (find_variable(name) < 0)
                throw std::invalid_argument(where + ": undeclared identifier '" + name + "'");
    }
};

}  // namespace pc2
