#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "pc2/basis_eval.hpp"
#include "pc2/design.hpp"
#include "pc2/legendre.hpp"
#include "pc2/multi_index.hpp"
#include "pc2/transform.hpp"

using namespace pc2;

namespace {

// independent oracle: count |alpha| <= p by brute-force enumeration over a
// degree box
int count_indices_brute_force(int dim, int p) {
    std::vector<int> alpha(dim, 0);
    int count = 0;
    for (;;) {
        int total = 0;
        for (int d : alpha) total += d;
        if (total <= p) ++count;
        int i = 0;
        for (; i < dim; ++i) {
            if (++alpha[i] <= p) break;
            alpha[i] = 0;
        }
        if (i == dim) break;
    }
    return count;
}

}  // namespace

TEST_CASE("multi_index_set cardinality and ordering") {
    SECTION("examples") {
        CHECK(multi_index_set(2, 3).size() == 10);
        const BasisSet trivial = multi_index_set(1, 0);
        REQUIRE(trivial.size() == 1);
        CHECK(trivial.indices[0].is_zero());
        CHECK(multi_index_set(3, 2).size() == count_indices_brute_force(3, 2));
        CHECK(count_indices_brute_force(3, 2) == 10);
    }

    SECTION("cardinality formula for M <= 5, p <= 10") {
        for (int m = 1; m <= 5; ++m)
            for (int p = 0; p <= 10; ++p) {
                const BasisSet basis = multi_index_set(m, p);
                CHECK(static_cast<std::uint64_t>(basis.size()) == total_degree_cardinality(m, p));
                CHECK(basis.size() == count_indices_brute_force(m, p));
            }
    }

    SECTION("zero index first, unique, graded-lex sorted") {
        const BasisSet basis = multi_index_set(3, 4);
        REQUIRE(basis.indices[0].is_zero());
        std::set<std::vector<int>> seen;
        for (const auto& mi : basis.indices) seen.insert(mi.degrees);
        CHECK(seen.size() == static_cast<std::size_t>(basis.size()));
        for (int j = 1; j < basis.size(); ++j)
            CHECK(graded_lex_less(basis.indices[j - 1], basis.indices[j]));
    }
}

TEST_CASE("orthonormal Legendre values") {
    CHECK(legendre_orthonormal(0, 0.3) == 1.0);
    CHECK_THAT(legendre_orthonormal(1, 0.5),
               Catch::Matchers::WithinAbs(std::sqrt(3.0) * 0.5, 1e-15));
    CHECK_THAT(legendre_orthonormal(2, 1.0), Catch::Matchers::WithinAbs(std::sqrt(5.0), 1e-14));
}

TEST_CASE("orthonormality under the uniform measure") {
    // Gauss-Legendre with 40 nodes integrates deg <= 79 exactly
    const GaussLegendreRule rule = gauss_legendre(40);
    for (int j = 0; j <= 25; ++j) {
        for (int k = j; k <= 25; ++k) {
            double acc = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                acc += 0.5 * rule.weights[q] * legendre_orthonormal(j, rule.nodes[q]) *
                       legendre_orthonormal(k, rule.nodes[q]);
            const double expected = j == k ? 1.0 : 0.0;
            REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(expected, 1e-10));
        }
    }
}

TEST_CASE("legendre_derivative examples") {
    CHECK_THAT(legendre_derivative(1, 1, 0.7), Catch::Matchers::WithinAbs(std::sqrt(3.0), 1e-14));
    CHECK(legendre_derivative(2, 3, 0.1) == 0.0);
    CHECK_THAT(legendre_derivative(2, 1, 0.4),
               Catch::Matchers::WithinAbs(std::sqrt(5.0) * 3.0 * 0.4, 1e-14));
    // order 0 reduces to the plain value
    CHECK(legendre_derivative(7, 0, 0.23) == legendre_orthonormal(7, 0.23));
}

TEST_CASE("derivatives agree with finite differences of the previous order") {
    // single central difference of the exact (k-1)-th derivative; chaining
    // k -> 1 connects every order back to the plain evaluation
    const double h = 1e-5;
    for (int n = 1; n <= 15; ++n) {
        for (int k = 1; k <= std::min(n, 4); ++k) {
            for (double xi = -0.9; xi <= 0.91; xi += 0.15) {
                const double fd = (legendre_derivative(n, k - 1, xi + h) -
                                   legendre_derivative(n, k - 1, xi - h)) /
                                  (2.0 * h);
                const double exact = legendre_derivative(n, k, xi);
                const double tol = 1e-6 * std::max(1.0, std::abs(exact));
                REQUIRE_THAT(fd, Catch::Matchers::WithinAbs(exact, tol));
            }
        }
    }
}

TEST_CASE("gauss_legendre nodes integrate polynomials exactly") {
    const GaussLegendreRule rule = gauss_legendre(8);
    double acc = 0.0;  // integral of x^6 over [-1,1] = 2/7
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
        acc += rule.weights[q] * std::pow(rule.nodes[q], 6);
    CHECK_THAT(acc, Catch::Matchers::WithinAbs(2.0 / 7.0, 1e-14));
}

TEST_CASE("eval_basis_row") {
    SECTION("M=2 p=1 at the origin") {
        const BasisSet basis = multi_index_set(2, 1);
        const double xi[2] = {0.0, 0.0};
        const Eigen::RowVectorXd row = eval_basis_row(basis, xi);
        REQUIRE(row.size() == 3);
        CHECK(row(0) == 1.0);
        CHECK_THAT(row(1), Catch::Matchers::WithinAbs(0.0, 1e-15));
        CHECK_THAT(row(2), Catch::Matchers::WithinAbs(0.0, 1e-15));
    }

    SECTION("intercept column is 1") {
        const BasisSet basis = multi_index_set(3, 4);
        const double xi[3] = {0.0, 0.0, 0.0};
        CHECK(eval_basis_row(basis, xi)(0) == 1.0);
    }

    SECTION("second derivative with chain-rule scaling") {
        // domain [0,1] so the scale factor is 2; psi_2'' = 3*sqrt(5)
        const BasisSet basis = multi_index_set(1, 2);
        const std::vector<VariableTransform> tf = {VariableTransform::deterministic(0.0, 1.0)};
        const double xi[1] = {0.3};
        const int orders[1] = {2};
        const Eigen::RowVectorXd row = eval_basis_row(basis, xi, orders, tf);
        CHECK_THAT(row(2), Catch::Matchers::WithinAbs(12.0 * std::sqrt(5.0), 1e-12));
        CHECK(row(0) == 0.0);
        CHECK(row(1) == 0.0);
    }

    SECTION("zero orders reproduce the plain row") {
        const BasisSet basis = multi_index_set(2, 3);
        const std::vector<VariableTransform> tf = {VariableTransform::deterministic(0.0, 1.0),
                                                   VariableTransform::deterministic(-2.0, 5.0)};
        const double xi[2] = {0.4, -0.7};
        const int orders[2] = {0, 0};
        const Eigen::RowVectorXd a = eval_basis_row(basis, xi, orders, tf);
        const Eigen::RowVectorXd b = eval_basis_row(basis, xi);
        CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("variable transform") {
    CHECK(VariableTransform::deterministic(0.0, 1.0).to_standard(0.0) == -1.0);
    CHECK(VariableTransform::deterministic(-5.0, 5.0).to_standard(0.0) == 0.0);
    CHECK_THAT(VariableTransform::deterministic(0.2, 0.8).to_standard(0.5),
               Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(VariableTransform::deterministic(1.0, 1.0), std::invalid_argument);

    SECTION("endpoints map exactly both ways") {
        const VariableTransform t = VariableTransform::random_uniform(0.2, 0.8);
        CHECK(t.to_standard(0.2) == -1.0);
        CHECK(t.to_standard(0.8) == 1.0);
        CHECK(t.from_standard(-1.0) == 0.2);
        CHECK(t.from_standard(1.0) == 0.8);
    }

    SECTION("round-trip within 1e-14") {
        Rng rng(777);
        const VariableTransform cases[] = {VariableTransform::deterministic(-1.0, 1.0),
                                           VariableTransform::deterministic(0.2, 0.8),
                                           VariableTransform::deterministic(-3.5, 12.25),
                                           VariableTransform::random_uniform(1e-3, 2e-3)};
        for (const auto& t : cases) {
            for (int i = 0; i < 200; ++i) {
                const double x = rng.uniform(t.lower, t.upper);
                const double back = t.from_standard(t.to_standard(x));
                REQUIRE_THAT(back, Catch::Matchers::WithinAbs(
                                       x, 1e-14 * std::max(1.0, std::abs(x))));
            }
        }
    }

    SECTION("scale factor") {
        CHECK(VariableTransform::deterministic(0.0, 1.0).scale() == 2.0);
        CHECK(VariableTransform::deterministic(-1.0, 1.0).scale() == 1.0);
    }
}
