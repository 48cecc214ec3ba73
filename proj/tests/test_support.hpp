// Shared helpers for the unit and acceptance suites.
#pragma once

#include <cmath>
#include <functional>

#include "pc2/pc2.hpp"

namespace pc2::testing {

/// (x+1)^2 on [-1,1] expressed in the orthonormal basis.
inline Pc2Model exact_poisson_model() {
    Pc2Model m;
    m.basis = multi_index_set(1, 2);
    m.variables = {Variable{"x", VariableTransform::deterministic(-1.0, 1.0)}};
    m.coefficients.resize(3);
    m.coefficients << 4.0 / 3.0, 2.0 / std::sqrt(3.0), 2.0 / (3.0 * std::sqrt(5.0));
    return m;
}

/// Dense-quadrature L2 projection of f onto a univariate basis.
inline Pc2Model project_1d(const std::function<double(double)>& f, int p, double lo, double hi,
                           int quad_nodes = 64) {
    Pc2Model m;
    m.basis = multi_index_set(1, p);
    m.variables = {Variable{"x", VariableTransform::deterministic(lo, hi)}};
    m.coefficients = Eigen::VectorXd::Zero(p + 1);
    const GaussLegendreRule rule = gauss_legendre(quad_nodes);
    for (int n = 0; n <= p; ++n) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double xi = rule.nodes[q];
            acc += 0.5 * rule.weights[q] * f(m.variables[0].transform.from_standard(xi)) *
                   legendre_orthonormal(n, xi);
        }
        m.coefficients(n) = acc;
    }
    return m;
}

/// Randomly generated constrained least-squares instance with a nontrivial
/// constraint null space, for the invariant suites.
struct RandomKktInstance {
    ProblemSpec problem;
    TrainingData data;
    BasisSet basis;
    ConstraintSet constraints;
};

inline RandomKktInstance random_kkt_instance(std::uint64_t seed) {
    Rng rng(seed);
    RandomKktInstance inst;
    const int dim = 1 + static_cast<int>(rng.uniform_int(2));
    const int p = 2 + static_cast<int>(rng.uniform_int(dim == 1 ? 5 : 3));
    inst.basis = multi_index_set(dim, p);
    const int P = inst.basis.size();

    ProblemSpec& prob = inst.problem;
    const char* names[] = {"x", "t"};
    for (int i = 0; i < dim; ++i)
        prob.variables.push_back(
            Variable{names[i], VariableTransform::deterministic(-1.0, 1.0)});

    // random linear operator: one or two derivative terms with simple coefficients
    const int n_terms = 1 + static_cast<int>(rng.uniform_int(2));
    const char* coeff_pool[] = {"1", "2", "-1", "0.5 + x^2", "1 + 0.2*x"};
    for (int k = 0; k < n_terms; ++k) {
        std::vector<int> orders(dim, 0);
        orders[rng.uniform_int(dim)] = 1 + static_cast<int>(rng.uniform_int(2));
        prob.pde.terms.push_back(
            {Expression::parse(coeff_pool[rng.uniform_int(5)]), std::move(orders)});
    }
    prob.pde.rhs = Expression::parse(std::to_string(rng.uniform(-2.0, 2.0)));

    // one or two value conditions on faces/endpoints
    const int n_bcs = 1 + static_cast<int>(rng.uniform_int(2));
    for (int b = 0; b < n_bcs; ++b) {
        BoundaryCondition bc;
        bc.op.terms.push_back({Expression::parse("1"), std::vector<int>(dim, 0)});
        bc.op.rhs = Expression::parse(std::to_string(rng.uniform(-1.0, 1.0)));
        bc.location.assign(dim, std::nullopt);
        bc.location[b % dim] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        prob.bcs.push_back(std::move(bc));
    }
    prob.validate();

    // data: enough rows that the objective is strictly convex
    const int n_sim = P + 2 + static_cast<int>(rng.uniform_int(5));
    inst.data.inputs = sample_lhs(n_sim, dim, rng.next_u64());
    inst.data.outputs.resize(n_sim);
    for (int r = 0; r < n_sim; ++r) {
        double y = 0.0;
        for (int i = 0; i < dim; ++i) y += std::sin(1.7 * inst.data.inputs(r, i));
        inst.data.outputs(r) = y + 0.1 * rng.uniform(-1.0, 1.0);
    }

    // constraints: boundary rows plus a strict subset of virtual rows so the
    // constraint null space is nontrivial
    const int n_bc_pts = n_bcs;
    const auto bpts = boundary_points(prob, n_bc_pts);
    const int max_v = P - n_bc_pts - 1;
    const int n_v = std::max(1, static_cast<int>(rng.uniform_int(std::max(1, max_v))));
    const Eigen::MatrixXd vpts = sample_mc(n_v, dim, rng.next_u64());
    inst.constraints = build_constraints(prob, inst.basis, bpts, vpts);
    return inst;
}

}  // namespace pc2::testing
