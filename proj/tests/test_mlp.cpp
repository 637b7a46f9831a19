/// @file test_mlp.cpp
/// @brief MLP planning, forward paths, and fused-node gradients vs finite differences.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "geoflow/mlp.h"

using geoflow::JetBasis;
using geoflow::MlpPlan;
using geoflow::MlpSpec;
using geoflow::Rng;
using geoflow::ad::Tape;
using geoflow::ad::Value;

namespace {

std::vector<double> make_params(const MlpPlan& plan, unsigned seed) {
    std::vector<double> p(static_cast<size_t>(plan.offset + plan.count), 0.0);
    geoflow::init_glorot(plan, p.data(), Rng(seed));
    return p;
}

}  // namespace

TEST_CASE("plan lays parameters out contiguously") {
    MlpPlan plan = geoflow::plan_mlp({3, 2, {5, 4}}, 10);
    REQUIRE(plan.layers.size() == 3);
    CHECK(plan.layers[0].w_off == 10);
    CHECK(plan.layers[0].b_off == 10 + 15);
    CHECK(plan.count == (3 * 5 + 5) + (5 * 4 + 4) + (4 * 2 + 2));
    CHECK(plan.layers[2].b_off + plan.layers[2].out == plan.offset + plan.count);
}

TEST_CASE("batch forward equals per-sample forward") {
    MlpPlan plan = geoflow::plan_mlp({4, 3, {6}}, 0);
    auto params = make_params(plan, 5);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 7);
    Eigen::MatrixXd Y = geoflow::mlp_forward_batch(plan, params.data(), X);
    for (int c = 0; c < 7; ++c) {
        Eigen::VectorXd y = geoflow::mlp_forward(plan, params.data(), X.col(c));
        CHECK((Y.col(c) - y).lpNorm<Eigen::Infinity>() < 1e-14);
    }
}

TEST_CASE("batched node: parameter and input gradients match finite differences") {
    MlpPlan plan = geoflow::plan_mlp({3, 2, {4}}, 0);
    auto params = make_params(plan, 17);
    const int B = 3;
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, B);
    std::vector<double> w(static_cast<size_t>(2 * B));
    Rng rng(23);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);

    auto loss_for = [&](const double* p, const Eigen::MatrixXd& Xin) {
        Eigen::MatrixXd Y = geoflow::mlp_forward_batch(plan, p, Xin);
        double acc = 0.0;
        for (int c = 0; c < B; ++c)
            for (int r = 0; r < 2; ++r) acc += w[static_cast<size_t>(c * 2 + r)] * Y(r, c);
        return acc;
    };

    Tape tape;
    std::vector<Value> xin;
    for (int c = 0; c < B; ++c)
        for (int r = 0; r < 3; ++r) xin.push_back(tape.leaf(X(r, c)));
    std::vector<double> sink(params.size(), 0.0);
    auto out = geoflow::mlp_batch_node(plan, params.data(), sink.data(), X, &xin, tape);
    REQUIRE(out.size() == static_cast<size_t>(2 * B));
    Value loss = tape.leaf(0.0);
    for (size_t k = 0; k < out.size(); ++k) loss = loss + w[k] * out[k];
    tape.backward_from(loss);

    for (size_t i = 0; i < params.size(); i += 7) {
        auto pp = params, pm = params;
        pp[i] += 1e-6;
        pm[i] -= 1e-6;
        double ref = (loss_for(pp.data(), X) - loss_for(pm.data(), X)) / 2e-6;
        CHECK(sink[i] == doctest::Approx(ref).epsilon(1e-5));
    }
    for (int c = 0; c < B; ++c)
        for (int r = 0; r < 3; ++r) {
            Eigen::MatrixXd Xp = X, Xm = X;
            Xp(r, c) += 1e-6;
            Xm(r, c) -= 1e-6;
            double ref = (loss_for(params.data(), Xp) - loss_for(params.data(), Xm)) / 2e-6;
            CHECK(tape.grad(xin[static_cast<size_t>(c * 3 + r)]) ==
                  doctest::Approx(ref).epsilon(1e-5));
        }
}

TEST_CASE("jet node derivatives match finite differences of the plain forward") {
    // Network (u1,u2,t) -> R^2, jets to second order in u and first in t.
    MlpPlan plan = geoflow::plan_mlp({3, 2, {5, 4}}, 0);
    auto params = make_params(plan, 31);
    JetBasis basis(2, 2, 1);
    const int m = basis.size();

    std::vector<double> pt = {0.31, -0.44, 0.57};
    Tape tape;
    std::vector<Value> u = {tape.leaf(pt[0]), tape.leaf(pt[1])};
    auto out = geoflow::mlp_jet_node(plan, params.data(), nullptr, u, pt[2], basis, tape);
    REQUIRE(out.size() == static_cast<size_t>(2 * m));

    auto f = [&](const std::vector<double>& x, int comp) {
        Eigen::VectorXd v(3);
        v << x[0], x[1], x[2];
        return geoflow::mlp_forward(plan, params.data(), v)(comp);
    };
    // Nested centered differences per multi-index.
    std::function<double(std::vector<double>, std::vector<int>, int, double)> fd =
        [&](std::vector<double> x, std::vector<int> alpha, int comp, double h) -> double {
        for (size_t v = 0; v < alpha.size(); ++v) {
            if (alpha[v] == 0) continue;
            alpha[v] -= 1;
            auto xp = x, xm = x;
            xp[v] += h;
            xm[v] -= h;
            return (fd(xp, alpha, comp, h) - fd(xm, alpha, comp, h)) / (2.0 * h);
        }
        return f(x, comp);
    };

    for (int comp = 0; comp < 2; ++comp) {
        for (int i = 0; i < m; ++i) {
            double h = basis.order(i) <= 1 ? 1e-6 : (basis.order(i) == 2 ? 1e-4 : 8e-4);
            double ref = fd(pt, basis.exponents(i), comp, h);
            double got = out[static_cast<size_t>(comp * m + i)].val();
            double tol = basis.order(i) <= 1 ? 1e-7 : (basis.order(i) == 2 ? 1e-5 : 1e-4);
            CHECK(got == doctest::Approx(ref).epsilon(tol));
        }
    }
}

TEST_CASE("jet node adjoints: parameter and chart-input gradients match finite differences") {
    MlpPlan plan = geoflow::plan_mlp({3, 2, {4}}, 0);
    auto params = make_params(plan, 47);
    JetBasis basis(2, 2, 1);
    const int m = basis.size();
    std::vector<double> w(static_cast<size_t>(2 * m));
    Rng rng(53);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    std::vector<double> pt = {0.2, -0.3, 0.41};

    auto loss_for = [&](const double* p, const std::vector<double>& x) {
        Tape tmp;
        std::vector<Value> uu = {tmp.leaf(x[0]), tmp.leaf(x[1])};
        auto o = geoflow::mlp_jet_node(plan, p, nullptr, uu, x[2], basis, tmp);
        double acc = 0.0;
        for (size_t k = 0; k < o.size(); ++k) acc += w[k] * o[k].val();
        return acc;
    };

    Tape tape;
    std::vector<Value> u = {tape.leaf(pt[0]), tape.leaf(pt[1])};
    std::vector<double> sink(params.size(), 0.0);
    auto out = geoflow::mlp_jet_node(plan, params.data(), sink.data(), u, pt[2], basis, tape);
    Value loss = tape.leaf(0.0);
    for (size_t k = 0; k < out.size(); ++k) loss = loss + w[k] * out[k];
    tape.backward_from(loss);

    for (size_t i = 0; i < params.size(); i += 5) {
        auto pp = params, pm = params;
        pp[i] += 1e-6;
        pm[i] -= 1e-6;
        double ref = (loss_for(pp.data(), pt) - loss_for(pm.data(), pt)) / 2e-6;
        CHECK(sink[i] == doctest::Approx(ref).epsilon(2e-5));
    }
    for (int j = 0; j < 2; ++j) {
        auto xp = pt, xm = pt;
        xp[static_cast<size_t>(j)] += 1e-6;
        xm[static_cast<size_t>(j)] -= 1e-6;
        double ref = (loss_for(params.data(), xp) - loss_for(params.data(), xm)) / 2e-6;
        CHECK(tape.grad(u[static_cast<size_t>(j)]) == doctest::Approx(ref).epsilon(2e-5));
    }
}

TEST_CASE("order-zero jet equals the plain forward") {
    MlpPlan plan = geoflow::plan_mlp({3, 4, {6, 5}}, 0);
    auto params = make_params(plan, 61);
    JetBasis basis(2, 0, 0);
    REQUIRE(basis.size() == 1);
    Tape tape;
    std::vector<Value> u = {tape.leaf(0.9), tape.leaf(-0.7)};
    auto out = geoflow::mlp_jet_node(plan, params.data(), nullptr, u, 0.33, basis, tape);
    Eigen::VectorXd x(3);
    x << 0.9, -0.7, 0.33;
    Eigen::VectorXd ref = geoflow::mlp_forward(plan, params.data(), x);
    for (int i = 0; i < 4; ++i)
        CHECK(out[static_cast<size_t>(i)].val() == doctest::Approx(ref(i)).epsilon(1e-14));
}
