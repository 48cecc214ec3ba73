#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pc2/basis_eval.hpp"
#include "pc2/multi_index.hpp"

namespace pc2 {

/// Basis matrix Psi_ij = Psi_j(xi_i) over standardized points.
inline Eigen::MatrixXd design_matrix(const BasisSet& basis, const Eigen::MatrixXd& inputs) {
    Eigen::MatrixXd psi(inputs.rows(), basis.size());
    BasisRowEvaluator ev(basis);
    std::vector<double> xi(inputs.cols());
    std::vector<int> orders(inputs.cols(), 0);
    Eigen::RowVectorXd row(basis.size());
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        for (Eigen::Index c = 0; c < inputs.cols(); ++c) xi[c] = inputs(r, c);
        ev.eval(xi, orders, {}, {row.data(), static_cast<std::size_t>(row.size())});
        psi.row(r) = row;
    }
    return psi;
}

struct LarRanking {
    std::vector<int> order;  // positions into the basis, intercept first
    bool fallback = false;   // no data: degree-graded order returned instead
    int activated = 0;       // entries truly selected by LAR (not appended)
};

/// Least-angle-regression entry order of the basis columns, over centered and
/// normalized regressors. The intercept is always ranked first. Columns LAR
/// never activates (rank limit reached, zero variance over the design) are
/// appended in graded order; with no data at all the whole ranking falls back
/// to graded order.
inline LarRanking lar_rank(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                           const BasisSet& basis) {
    const int P = basis.size();
    LarRanking rank;
    rank.order.reserve(P);
    rank.order.push_back(0);

    const Eigen::Index n = inputs.rows();
    if (n == 0) {
        rank.fallback = true;
        for (int j = 1; j < P; ++j) rank.order.push_back(j);
        return rank;
    }

    Eigen::MatrixXd X = design_matrix(basis, inputs);
    Eigen::VectorXd y = outputs.array() - outputs.mean();

    // center and normalize the non-intercept columns; drop degenerate ones
    std::vector<int> usable;
    for (int j = 1; j < P; ++j) {
        X.col(j).array() -= X.col(j).mean();
        const double norm = X.col(j).norm();
        if (norm > 1e-12 * std::sqrt(static_cast<double>(n))) {
            X.col(j) /= norm;
            usable.push_back(j);
        }
    }

    std::vector<bool> active(P, false);
    active[0] = true;
    std::vector<int> active_cols;
    Eigen::VectorXd r = y;
    const double c_floor = 1e-12 * (y.norm() + 1.0);
    const int max_steps = static_cast<int>(std::min<Eigen::Index>(
        static_cast<Eigen::Index>(usable.size()), std::max<Eigen::Index>(n - 1, 0)));

    for (int step = 0; step < max_steps; ++step) {
        // most correlated inactive column
        double cmax = 0.0;
        int jbest = -1;
        for (int j : usable) {
            if (active[j]) continue;
            const double cj = std::abs(X.col(j).dot(r));
            if (cj > cmax) {
                cmax = cj;
                jbest = j;
            }
        }
        if (jbest < 0 || cmax < c_floor) break;
        active[jbest] = true;
        active_cols.push_back(jbest);
        rank.order.push_back(jbest);

        const int k = static_cast<int>(active_cols.size());
        Eigen::VectorXd s(k);
        Eigen::MatrixXd Xa(n, k);
        for (int i = 0; i < k; ++i) {
            Xa.col(i) = X.col(active_cols[i]);
            const double ci = X.col(active_cols[i]).dot(r);
            s(i) = ci >= 0.0 ? 1.0 : -1.0;
        }
        const Eigen::MatrixXd G = Xa.transpose() * Xa;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        if (ldlt.info() != Eigen::Success) break;
        const Eigen::VectorXd w_raw = ldlt.solve(s);
        const double denom = s.dot(w_raw);
        if (!(denom > 0.0) || !std::isfinite(denom)) break;
        const double aa = 1.0 / std::sqrt(denom);
        const Eigen::VectorXd u = Xa * (aa * w_raw);  // equiangular direction

        // step length to the next entry point (Efron et al. 2004, Eq. 2.13)
        double gamma = cmax / aa;
        if (k < static_cast<int>(usable.size())) {
            for (int j : usable) {
                if (active[j]) continue;
                const double cj = X.col(j).dot(r);
                const double ajj = X.col(j).dot(u);
                const double g1 = (cmax - cj) / (aa - ajj);
                const double g2 = (cmax + cj) / (aa + ajj);
                if (g1 > 1e-14 && g1 < gamma) gamma = g1;
                if (g2 > 1e-14 && g2 < gamma) gamma = g2;
            }
        }
        if (!std::isfinite(gamma)) break;
        r -= gamma * u;
    }

    rank.activated = static_cast<int>(rank.order.size()) - 1;
    for (int j = 1; j < P; ++j)
        if (!active[j]) rank.order.push_back(j);
    return rank;
}

}  // namespace pc2
