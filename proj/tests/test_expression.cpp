#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pc2/design.hpp"
#include "pc2/expression.hpp"

using namespace pc2;

namespace {

double eval1(const Expression& e, const std::string& name, double value,
             std::optional<double> u_prev = std::nullopt) {
    const std::vector<std::string> names{name};
    const std::vector<double> values{value};
    return e.eval(EvalEnv{names, values, u_prev});
}

}  // namespace

TEST_CASE("expression basics") {
    CHECK_THAT(eval1(Expression::parse("sin(pi*x)"), "x", 0.5),
               Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK(eval1(Expression::parse("2"), "x", 0.0) == 2.0);
    CHECK_THAT(eval1(Expression::parse("1/(1+exp(-x))"), "x", 0.0),
               Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("precedence and associativity") {
    const std::vector<std::string> names{"x"};
    const std::vector<double> values{2.0};
    const EvalEnv env{names, values, std::nullopt};
    CHECK(Expression::parse("2+3*4").eval(env) == 14.0);
    CHECK(Expression::parse("2*3^2").eval(env) == 18.0);      // ^ binds tighter than *
    CHECK(Expression::parse("-x^2").eval(env) == -4.0);       // ^ binds tighter than unary -
    CHECK(Expression::parse("x^-1").eval(env) == 0.5);        // unary allowed in the exponent
    CHECK(Expression::parse("2^3^2").eval(env) == 512.0);     // right-associative
    CHECK(Expression::parse("8/4/2").eval(env) == 1.0);       // left-associative
    CHECK(Expression::parse("1-2-3").eval(env) == -4.0);
    CHECK(Expression::parse("2^2^-1").eval(env) == std::sqrt(2.0));
}

TEST_CASE("u_prev binding contract") {
    const Expression e = Expression::parse("u_prev*1 - 1");
    CHECK(eval1(e, "x", 0.0, 3.0) == 2.0);
    CHECK_THROWS_AS(eval1(e, "x", 0.0), ExpressionEvalError);
    CHECK(e.references_u_prev());
    CHECK_FALSE(Expression::parse("x + 1").references_u_prev());
}

TEST_CASE("errors carry positions and names") {
    CHECK_THROWS_AS(Expression::parse(""), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse("sin(x"), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse("1 + * 2"), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse("foo(3)"), ExpressionParseError);

    try {
        Expression::parse("1 + @");
        FAIL("expected a parse error");
    } catch (const ExpressionParseError& e) {
        CHECK(e.offset == 4);
    }

    try {
        eval1(Expression::parse("x + nope"), "x", 1.0);
        FAIL("expected an eval error");
    } catch (const ExpressionEvalError& e) {
        CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }
}

TEST_CASE("referenced variables are reported") {
    const auto vars = Expression::parse("sin(a*b) + c^2 - a").variables();
    CHECK(vars == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("print-parse round trip evaluates identically") {
    const std::vector<std::string> sources = {
        "sin(pi*x)*cos(2*pi*t)",
        "-x^4/24 + x^3/6 - x^2/4",
        "1/(1+exp(-x))",
        "(x+1)^2",
        "u_prev - 1",
        "tanh(x/2) * abs(t - 0.5) + sqrt(x^2 + 1)",
        "log(exp(x)) - e^1",
        "2^-x + (-x)^2",
        "-(x + t)*-3 - -2",
        "x/t/2 - x/(t/2)",
    };
    const std::vector<std::string> names{"x", "t"};
    Rng rng(101);
    for (const auto& src : sources) {
        const Expression a = Expression::parse(src);
        const Expression b = Expression::parse(a.print());
        for (int i = 0; i < 100; ++i) {
            const std::vector<double> values{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
            const EvalEnv env{names, values, 0.7};
            const double va = a.eval(env);
            const double vb = b.eval(env);
            REQUIRE_THAT(vb, Catch::Matchers::WithinAbs(va, 1e-14 * std::max(1.0, std::abs(va))));
        }
    }
}
