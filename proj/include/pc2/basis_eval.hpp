#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pc2/legendre.hpp"
#include "pc2/multi_index.hpp"
#include "pc2/transform.hpp"

namespace pc2 {

/// Evaluates rows of the multivariate basis matrix, optionally as mixed
/// partial derivatives. Holds per-dimension value tables so repeated calls
/// (matrix assembly, validation sweeps) do not reallocate.
class BasisRowEvaluator {
public:
    explicit BasisRowEvaluator(const BasisSet& basis) : basis_(&basis), tables_(basis.dimension) {}

    /// Row entry j = prod_i psi^(k_i)_{alpha_ji}(xi_i), times prod_i scale_i^{k_i}
    /// when transforms are given (mixed partials in physical units).
    void eval(std::span<const double> xi, std::span<const int> orders,
              std::span<const VariableTransform> transforms, std::span<double> out) {
        const int dim = basis_->dimension;
        if (static_cast<int>(xi.size()) != dim)
            throw std::invalid_argument("eval_basis_row: point dimension mismatch");
        if (static_cast<int>(orders.size()) != dim)
            throw std::invalid_argument("eval_basis_row: derivative-order dimension mismatch");
        if (!transforms.empty() && static_cast<int>(transforms.size()) != dim)
            throw std::invalid_argument("eval_basis_row: transform dimension mismatch");
        if (static_cast<int>(out.size()) != basis_->size())
            throw std::invalid_argument("eval_basis_row: output length mismatch");

        double chain = 1.0;
        for (int d = 0; d < dim; ++d) {
            legendre_derivative_table(basis_->max_degree, orders[d], xi[d], tables_[d]);
            if (!transforms.empty())
                for (int k = 0; k < orders[d]; ++k) chain *= transforms[d].scale();
        }
        for (int j = 0; j < basis_->size(); ++j) {
            double v = chain;
            const auto& alpha = basis_->indices[j].degrees;
            for (int d = 0; d < dim; ++d) v *= tables_[d][alpha[d]];
            out[j] = v;
        }
    }

    const BasisSet& basis() const { return *basis_; }

private:
    const BasisSet* basis_;
    std::vector<std::vector<double>> tables_;
};

/// One-shot row in physical units (transforms supply the chain-rule scaling).
inline Eigen::RowVectorXd eval_basis_row(const BasisSet& basis, std::span<const double> xi,
                                         std::span<const int> orders,
                                         std::span<const VariableTransform> transforms = {}) {
    Eigen::RowVectorXd row(basis.size());
    BasisRowEvaluator ev(basis);
    ev.eval(xi, orders, transforms, {row.data(), static_cast<std::size_t>(row.size())});
    return row;
}

/// Plain basis values (all derivative orders zero).
inline Eigen::RowVectorXd eval_basis_row(const BasisSet& basis, std::span<const double> xi) {
    std::vector<int> orders(basis.dimension, 0);
    return eval_basis_row(basis, xi, orders);
}

}  // namespace pc2
