/// @file test_tape.cpp
/// @brief Reverse-mode tape gradients against centered finite differences.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "geoflow/tape.h"

using geoflow::ad::Tape;
using geoflow::ad::Value;

namespace {

// Central-difference gradient of f at x, step h.
std::vector<double> fd_grad(const std::function<double(const std::vector<double>&)>& f,
                            std::vector<double> x, double h = 1e-6) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double keep = x[i];
        x[i] = keep + h;
        double fp = f(x);
        x[i] = keep - h;
        double fm = f(x);
        x[i] = keep;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("composite expression matches finite differences") {
    auto eval = [](const std::vector<double>& x) {
        return std::tanh(x[0] * x[1]) + std::sin(x[0]) / (2.0 + std::cos(x[1])) +
               std::exp(-x[0] * x[0]) * std::log(1.5 + x[1]) + std::sqrt(2.0 + x[0]) -
               std::pow(1.0 + x[1] * x[1], 1.7);
    };
    std::vector<double> x = {0.37, -0.82};

    Tape tape;
    Value a = tape.leaf(x[0]);
    Value b = tape.leaf(x[1]);
    Value y = tanh(a * b) + sin(a) / (2.0 + cos(b)) + exp(-(a * a)) * log(1.5 + b) +
              sqrt(2.0 + a) - pow(1.0 + b * b, 1.7);
    CHECK(y.val() == doctest::Approx(eval(x)).epsilon(1e-12));

    tape.backward_from(y);
    auto g = fd_grad(eval, x);
    CHECK(tape.grad(a) == doctest::Approx(g[0]).epsilon(1e-6));
    CHECK(tape.grad(b) == doctest::Approx(g[1]).epsilon(1e-6));
}

TEST_CASE("abs and clamp_min subgradients") {
    Tape tape;
    Value a = tape.leaf(-2.0);
    Value y = abs(a);
    tape.backward_from(y);
    CHECK(y.val() == 2.0);
    CHECK(tape.grad(a) == -1.0);

    Tape t2;
    Value b = t2.leaf(0.05);
    Value c = clamp_min(b, 0.1);
    CHECK(c.val() == 0.1);
    t2.backward_from(c);
    CHECK(t2.grad(b) == 0.0);

    Tape t3;
    Value d = t3.leaf(0.5);
    Value e = clamp_min(d, 0.1);
    CHECK(e.val() == 0.5);
    t3.backward_from(e);
    CHECK(t3.grad(d) == 1.0);
}

TEST_CASE("multi-seed backward accumulates linear combinations") {
    Tape tape;
    Value a = tape.leaf(1.3);
    Value p = a * a;       // dp/da = 2.6
    Value q = sin(a);      // dq/da = cos(1.3)
    tape.backward({{p, 2.0}, {q, -3.0}});
    CHECK(tape.grad(a) == doctest::Approx(2.0 * 2.6 - 3.0 * std::cos(1.3)).epsilon(1e-12));
}

TEST_CASE("fused operation scatters adjoints through its closure") {
    // Fused op computing (a*b, a+b) with a hand-written adjoint.
    Tape tape;
    Value a = tape.leaf(0.7);
    Value b = tape.leaf(-1.2);
    int base = static_cast<int>(tape.size());
    Value o1 = tape.leaf(a.val() * b.val());
    Value o2 = tape.leaf(a.val() + b.val());
    double av = a.val(), bv = b.val();
    int ai = a.idx, bi = b.idx;
    tape.push_custom(o2.idx, [base, av, bv, ai, bi](Tape& tp) {
        double g1 = tp.nodes[static_cast<size_t>(base)].grad;
        double g2 = tp.nodes[static_cast<size_t>(base + 1)].grad;
        tp.nodes[static_cast<size_t>(ai)].grad += g1 * bv + g2;
        tp.nodes[static_cast<size_t>(bi)].grad += g1 * av + g2;
    });
    Value loss = 2.0 * o1 + 3.0 * o2;
    tape.backward_from(loss);
    CHECK(tape.grad(a) == doctest::Approx(2.0 * bv + 3.0).epsilon(1e-12));
    CHECK(tape.grad(b) == doctest::Approx(2.0 * av + 3.0).epsilon(1e-12));
}

TEST_CASE("division and reciprocal forms agree with analytics") {
    Tape tape;
    Value a = tape.leaf(2.5);
    Value b = tape.leaf(-0.8);
    Value y = a / b + 3.0 / a - b / 4.0;
    tape.backward_from(y);
    CHECK(tape.grad(a) == doctest::Approx(1.0 / -0.8 - 3.0 / (2.5 * 2.5)).epsilon(1e-12));
    CHECK(tape.grad(b) == doctest::Approx(-2.5 / (0.8 * 0.8) - 0.25).epsilon(1e-12));
}
