#include <gtest/gtest.h>

#include <cmath>

#include "wobs/expression.hpp"

using namespace wobs;

TEST(Expression, Precedence) {
    EXPECT_DOUBLE_EQ(Expression::parse("1+2*3").value(0, {0, 0}), 7.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2^3^2").value(0, {0, 0}), 512.0);
    EXPECT_DOUBLE_EQ(Expression::parse("-2^2").value(0, {0, 0}), -4.0);
    EXPECT_DOUBLE_EQ(Expression::parse("3 - -1").value(0, {0, 0}), 4.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2e-3").value(0, {0, 0}), 0.002);
}

TEST(Expression, Constants) {
    EXPECT_NEAR(Expression::parse("sin(pi/2)").value(0, {0, 0}), 1.0, 1e-15);
    EXPECT_NEAR(Expression::parse("log(e)").value(0, {0, 0}), 1.0, 1e-15);
    EXPECT_TRUE(Expression::parse("sqrt(2)*pi").is_constant());
    EXPECT_FALSE(Expression::parse("x + 0").is_constant());
    EXPECT_DOUBLE_EQ(Expression::constant(2.5).value(3, {1, 1}), 2.5);
}

TEST(Expression, Derivatives) {
    const Jet j = Expression::parse("exp(t)*x").eval(1.0, {0.5, 2.0});
    EXPECT_NEAR(j.v, 0.5 * std::exp(1.0), 1e-15);
    EXPECT_NEAR(j[0], 0.5 * std::exp(1.0), 1e-15);
    EXPECT_NEAR(j[2], std::exp(1.0), 1e-15);
    EXPECT_EQ(j[3], 0.0);

    const Jet k = Expression::parse("x1*x2 + y").eval(0.0, {0.5, 2.0});
    EXPECT_DOUBLE_EQ(k.v, 3.0);
    EXPECT_DOUBLE_EQ(k[2], 2.0);
    EXPECT_DOUBLE_EQ(k[3], 1.5);

    const Jet s = Expression::parse("sin(x)^2 + tanh(y)").eval(0.0, {0.3, -0.4});
    EXPECT_NEAR(s[2], 2 * std::sin(0.3) * std::cos(0.3), 1e-15);
    EXPECT_NEAR(s[3], 1 - std::tanh(-0.4) * std::tanh(-0.4), 1e-15);
}

TEST(Expression, SyntaxErrorsCarryPosition) {
    auto message = [](const char* text) {
        try {
            Expression::parse(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("sin(x").find("position 5"), std::string::npos);
    EXPECT_NE(message("2+").find("position 2"), std::string::npos);
    EXPECT_NE(message("foo(x)").find("unknown function 'foo'"), std::string::npos);
    EXPECT_NE(message("x y").find("position 2"), std::string::npos);
}
