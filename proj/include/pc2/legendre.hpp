#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pc2 {

/// Orthonormal Legendre polynomial psi_n(x) = sqrt(2n+1) P_n(x), evaluated by
/// the stable three-term recurrence. Orthonormal w.r.t. the uniform density
/// 1/2 on [-1,1].
inline double legendre_orthonormal(int degree, double x) {
    if (degree < 0) throw std::invalid_argument("legendre_orthonormal: negative degree");
    double pm1 = 1.0;
    if (degree == 0) return 1.0;
    double p = x;
    for (int n = 1; n < degree; ++n) {
        const double pp = ((2 * n + 1) * x * p - n * pm1) / (n + 1);
        pm1 = p;
        p = pp;
    }
    return std::sqrt(2.0 * degree + 1.0) * p;
}

namespace detail {

/// Fills values[n] = d^order/dx^order P_n(x) for n = 0..max_degree (classical,
/// not orthonormalized). Uses the derivative of the three-term recurrence
///   (n+1) P^(k)_{n+1} = (2n+1) (x P^(k)_n + k P^(k-1)_n) - n P^(k)_{n-1},
/// which is exact for every order.
inline void legendre_classical_derivative_table(int max_degree, int order, double x,
                                                std::vector<double>& values) {
    values.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
    std::vector<double> prev;  // order k-1 table
    std::vector<double> cur(static_cast<std::size_t>(max_degree) + 1, 0.0);
    // order 0
    cur[0] = 1.0;
    if (max_degree >= 1) cur[1] = x;
    for (int n = 1; n < max_degree; ++n)
        cur[n + 1] = ((2 * n + 1) * x * cur[n] - n * cur[n - 1]) / (n + 1);
    for (int k = 1; k <= order; ++k) {
        prev = cur;
        cur.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
        // P^(k)_n = 0 for n < k; start the recurrence from n = k-1 upward.
        if (max_degree >= 1) cur[1] = (k == 1) ? 1.0 : 0.0;
        for (int n = 1; n < max_degree; ++n)
            cur[n + 1] = ((2 * n + 1) * (x * cur[n] + k * prev[n]) - n * cur[n - 1]) / (n + 1);
    }
    values = cur;
}

}  // namespace detail

/// order-th derivative of the orthonormal Legendre polynomial at x.
/// Exact recurrence evaluation; zero whenever order > degree.
inline double legendre_derivative(int degree, int order, double x) {
    if (degree < 0) throw std::invalid_argument("legendre_derivative: negative degree");
    if (order < 0) throw std::invalid_argument("legendre_derivative: negative order");
    if (order == 0) return legendre_orthonormal(degree, x);
    if (order > degree) return 0.0;
    std::vector<double> table;
    detail::legendre_classical_derivative_table(degree, order, x, table);
    return std::sqrt(2.0 * degree + 1.0) * table[degree];
}

/// values[n] = psi_n^(order)(x) for n = 0..max_degree.
inline void legendre_derivative_table(int max_degree, int order, double x,
                                      std::vector<double>& values) {
    detail::legendre_classical_derivative_table(max_degree, order, x, values);
    for (int n = 0; n <= max_degree; ++n) values[n] *= std::sqrt(2.0 * n + 1.0);
}

/// Gauss-Legendre quadrature rule on [-1,1]; weights sum to 2.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes by Newton iteration on P_n with the Chebyshev initial guess.
inline GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // P_n and P'_n by recurrence
            double pm1 = 1.0, p = x;
            for (int k = 1; k < n; ++k) {
                const double pp = ((2 * k + 1) * x * p - k * pm1) / (k + 1);
                pm1 = p;
                p = pp;
            }
            dp = n * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace pc2
