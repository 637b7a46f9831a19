/// @file test_jet.cpp
/// @brief Jet basis structure and tanh jet recurrence against finite differences.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "geoflow/jet.h"
#include "geoflow/rng.h"

using geoflow::JetBasis;
using geoflow::Rng;

namespace {

// Multi-dimensional centered finite difference of f for multi-index alpha.
double fd_partial(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<double> x, std::vector<int> alpha, double h) {
    for (size_t v = 0; v < alpha.size(); ++v) {
        if (alpha[v] == 0) continue;
        alpha[v] -= 1;
        auto fp = [&](std::vector<double> y, int dir) {
            y[v] += dir * h;
            return fd_partial(f, y, alpha, h);
        };
        return (fp(x, +1) - fp(x, -1)) / (2.0 * h);
    }
    return f(x);
}

}  // namespace

TEST_CASE("basis sizes match the product-set counts") {
    CHECK(JetBasis(3, 1, 0).size() == 4);    // {1, u1, u2, u3}
    CHECK(JetBasis(3, 1, 1).size() == 8);    // x {1, t}
    CHECK(JetBasis(3, 2, 0).size() == 10);   // C(5,2)
    CHECK(JetBasis(3, 2, 1).size() == 20);
    CHECK(JetBasis(2, 2, 1).size() == 12);   // C(4,2)=6 x 2
    CHECK(JetBasis(1, 0, 0).size() == 1);
}

TEST_CASE("basis lookup round-trips and units resolve") {
    JetBasis basis(3, 2, 1);
    for (int i = 0; i < basis.size(); ++i) {
        CHECK(basis.index(basis.exponents(i)) == i);
    }
    for (int v = 0; v < basis.n_vars(); ++v) {
        int e = basis.unit(v);
        REQUIRE(e >= 0);
        CHECK(basis.order(e) == 1);
        CHECK(basis.exponents(e)[static_cast<size_t>(v)] == 1);
    }
    // add_unit walks out of the box eventually.
    std::vector<int> top = {2, 0, 0, 1};
    int idx = basis.index(top);
    REQUIRE(idx >= 0);
    CHECK(basis.add_unit(idx, 0) == -1);
    CHECK(basis.add_unit(idx, 3) == -1);
}

TEST_CASE("tanh jet reproduces mixed partial derivatives of a composition") {
    // z(u1,u2,t): a fixed polynomial; y = tanh(z). The jet's alpha!*c_alpha
    // must equal centered finite differences of the closed-form composition.
    JetBasis basis(2, 2, 1);
    const int m = basis.size();
    std::vector<double> coeff(static_cast<size_t>(m));
    Rng rng(314);
    for (auto& c : coeff) c = rng.uniform(-0.6, 0.6);

    auto z_of = [&](const std::vector<double>& x) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const auto& a = basis.exponents(i);
            double term = coeff[static_cast<size_t>(i)];
            for (size_t v = 0; v < a.size(); ++v)
                for (int k = 0; k < a[v]; ++k) term *= x[v];
            acc += term;
        }
        return acc;
    };
    auto y_of = [&](const std::vector<double>& x) { return std::tanh(z_of(x)); };

    // Jet of z at the expansion point x0: shift the polynomial so that the
    // coefficients are exactly its Taylor coefficients at 0, and expand at 0.
    std::vector<double> x0 = {0.0, 0.0, 0.0};
    std::vector<double> z(coeff), y(static_cast<size_t>(m)), s(static_cast<size_t>(m));
    geoflow::tanh_jet(basis, z.data(), y.data(), s.data());

    for (int i = 0; i < m; ++i) {
        double deriv = basis.factorial(i) * y[static_cast<size_t>(i)];
        double h = basis.order(i) <= 1 ? 1e-6 : (basis.order(i) == 2 ? 1e-4 : 8e-4);
        double ref = fd_partial(y_of, x0, basis.exponents(i), h);
        double tol = basis.order(i) <= 2 ? 1e-6 : 1e-4;
        CHECK(deriv == doctest::Approx(ref).epsilon(tol));
    }
}

TEST_CASE("tanh jet adjoint matches finite differences in coefficient space") {
    JetBasis basis(2, 2, 1);
    const int m = basis.size();
    Rng rng(2718);
    std::vector<double> z(static_cast<size_t>(m)), w(static_cast<size_t>(m));
    for (auto& v : z) v = rng.uniform(-0.8, 0.8);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);

    auto loss_of = [&](const std::vector<double>& zz) {
        std::vector<double> y(static_cast<size_t>(m)), s(static_cast<size_t>(m));
        geoflow::tanh_jet(basis, zz.data(), y.data(), s.data());
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += w[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
        return acc;
    };

    std::vector<double> y(static_cast<size_t>(m)), s(static_cast<size_t>(m));
    geoflow::tanh_jet(basis, z.data(), y.data(), s.data());
    std::vector<double> zbar(static_cast<size_t>(m), 0.0), ys(static_cast<size_t>(m)),
        ss(static_cast<size_t>(m));
    geoflow::tanh_jet_adjoint(basis, z.data(), y.data(), s.data(), w.data(), zbar.data(),
                              ys.data(), ss.data());

    for (int i = 0; i < m; ++i) {
        std::vector<double> zp = z, zm = z;
        zp[static_cast<size_t>(i)] += 1e-6;
        zm[static_cast<size_t>(i)] -= 1e-6;
        double ref = (loss_of(zp) - loss_of(zm)) / 2e-6;
        CHECK(zbar[static_cast<size_t>(i)] == doctest::Approx(ref).epsilon(1e-6));
    }
}
