/// @file test_burgers.cpp
/// @brief Solver oracles (heat linearization, mean conservation), dataset
///        determinism, serialization round-trips, and perturbation recipes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "geoflow/burgers.h"
#include "geoflow/common.h"

using namespace geoflow;

namespace {

// Trapezoid quadrature of one periodic row: equals the mean over the unique
// nodes because the last node mirrors the first.
double spatial_integral(const Trajectory& tr, int t, const SpaceTimeMesh& mesh) {
    auto r = tr.row(t, mesh.n_x);
    double acc = 0.5 * (r(0) + r(mesh.n_x - 1));
    for (int j = 1; j < mesh.n_x - 1; ++j) acc += r(j);
    return acc * mesh.dx();
}

}  // namespace

TEST_CASE("initial condition closed forms") {
    SpaceTimeMesh mesh;
    auto zero = initial_condition({0.0, 0.0, 0.0}, mesh);
    for (double v : zero) CHECK(v == 0.0);

    auto c1 = initial_condition({1.0, 0.0, 0.0}, mesh);
    CHECK(c1[0] == doctest::Approx(1.0).epsilon(1e-15));

    // x = 0.25 makes cos(2 pi x) = 0, killing every odd power.
    auto mix = initial_condition({0.5, -0.3, 0.2}, mesh);
    int j25 = (mesh.n_x - 1) / 4;
    CHECK(std::fabs(mix[static_cast<size_t>(j25)]) < 1e-15);
}

TEST_CASE("zero initial condition stays exactly zero") {
    SpaceTimeMesh mesh;
    mesh.n_t = 21;
    std::vector<double> ic(static_cast<size_t>(mesh.n_x), 0.0);
    Trajectory tr = solve_burgers(ic, mesh, 0.01);
    for (double v : tr.values) CHECK(v == 0.0);
}

TEST_CASE("small amplitude solution matches the heat-equation linearization") {
    // d_t u = nu d_xx u - u d_x u with u = eps cos(2 pi x): the advection term
    // is O(eps^2), so u(t) ~ eps exp(-4 pi^2 nu t) cos(2 pi x) within 1%.
    SpaceTimeMesh mesh;
    const double eps = 1e-3, nu = 0.1;
    std::vector<double> ic(static_cast<size_t>(mesh.n_x));
    for (int j = 0; j < mesh.n_x; ++j) ic[static_cast<size_t>(j)] = eps * std::cos(2.0 * kPi * mesh.x(j));
    Trajectory tr = solve_burgers(ic, mesh, nu);
    for (int t : {50, 100, 200}) {
        double decay = eps * std::exp(-4.0 * kPi * kPi * nu * mesh.t(t));
        for (int j = 0; j < mesh.n_x; j += 17) {
            double ref = decay * std::cos(2.0 * kPi * mesh.x(j));
            double got = tr.values[static_cast<size_t>(t) * 201 + static_cast<size_t>(j)];
            CHECK(std::fabs(got - ref) < 0.01 * decay);
        }
    }
}

TEST_CASE("spatial integral is conserved along every trajectory") {
    SpaceTimeMesh mesh;
    Rng rng(404);
    for (int rep = 0; rep < 3; ++rep) {
        auto [ic, alpha] = sample_initial_condition(rng, mesh);
        Trajectory tr = solve_burgers(ic, mesh, 0.01);
        double first = spatial_integral(tr, 0, mesh);
        for (int t = 1; t < mesh.n_t; t += 10)
            CHECK(std::fabs(spatial_integral(tr, t, mesh) - first) < 1e-8);
    }
}

TEST_CASE("solver agrees with itself under time refinement") {
    // Halving the mesh step (forcing more substeps through a finer recording
    // grid) must not move the endpoint: the integrator is converged at the
    // default resolution.
    SpaceTimeMesh coarse;
    coarse.n_t = 51;
    coarse.t_max = 0.25;
    SpaceTimeMesh fine = coarse;
    fine.n_t = 201;
    auto ic = initial_condition({0.9, -0.6, 0.4}, coarse);
    Trajectory a = solve_burgers(ic, coarse, 0.01);
    Trajectory b = solve_burgers(ic, fine, 0.01);
    auto last_a = a.row(coarse.n_t - 1, coarse.n_x);
    auto last_b = b.row(fine.n_t - 1, fine.n_x);
    CHECK((last_a - last_b).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("trajectory values stay finite and the blowup guard trips on bad input") {
    SpaceTimeMesh mesh;
    mesh.n_t = 11;
    std::vector<double> ic(static_cast<size_t>(mesh.n_x), 0.0);
    ic[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(solve_burgers(ic, mesh, 0.01), NumericError);
}

TEST_CASE("dataset build is deterministic and validates n_traj") {
    SpaceTimeMesh mesh;
    mesh.n_t = 21;
    TrajectoryDataset a = build_dataset(3, mesh, 0.01, 7, true);
    TrajectoryDataset b = build_dataset(3, mesh, 0.01, 7, false);
    REQUIRE(a.trajectories.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(a.trajectories[i].values == b.trajectories[i].values);
        CHECK(a.trajectories[i].ic_coefficients == b.trajectories[i].ic_coefficients);
    }
    CHECK(a.trajectories[0].values != a.trajectories[1].values);
    CHECK_THROWS_AS(build_dataset(0, mesh, 0.01, 7), ConfigError);
}

TEST_CASE("save/load round-trip is bit exact; corrupted metadata is rejected") {
    SpaceTimeMesh mesh;
    mesh.n_t = 11;
    TrajectoryDataset ds = build_dataset(2, mesh, 0.02, 99);
    std::string base = (std::filesystem::temp_directory_path() / "gf_ds_test").string();
    save_dataset(ds, base);
    TrajectoryDataset back = load_dataset(base);
    CHECK(back.mesh.n_x == ds.mesh.n_x);
    CHECK(back.mesh.t_max == ds.mesh.t_max);
    CHECK(back.viscosity == ds.viscosity);
    CHECK(back.seed == ds.seed);
    REQUIRE(back.trajectories.size() == ds.trajectories.size());
    for (size_t i = 0; i < ds.trajectories.size(); ++i) {
        CHECK(back.trajectories[i].values == ds.trajectories[i].values);
        CHECK(back.trajectories[i].ic_coefficients == ds.trajectories[i].ic_coefficients);
    }

    // Truncate the binary: the loader must flag the shape mismatch.
    {
        std::ofstream trunc(base + ".f64bin", std::ios::binary);
        trunc << "short";
    }
    CHECK_THROWS_AS(load_dataset(base), ConfigError);
    std::filesystem::remove(base + ".f64bin");
    CHECK_THROWS_AS(load_dataset(base), ConfigError);
    std::filesystem::remove(base + ".meta.json");
}

TEST_CASE("scenario mask sizes and parameters match the fixed table") {
    const int expect_mask[9] = {201, 201, 201, 31, 11, 201, 101, 201, 11};
    const double expect_sigma[9] = {1.0, 1.5, 2.5, 2.0, 3.0, 0.25, 1.5, 0.0, 3.0};
    for (int id = 1; id <= 9; ++id) {
        OODScenario s = make_scenario(id, 201);
        CHECK(static_cast<int>(s.location_mask.size()) == expect_mask[id - 1]);
        CHECK(s.noise_sigma == expect_sigma[id - 1]);
        CHECK(s.scale == (id == 7 ? 1.4 : 1.0));
        CHECK((s.replacement == "linear") == (id == 8));
        // Masks are the leading block of indices.
        for (size_t j = 0; j < s.location_mask.size(); ++j)
            CHECK(s.location_mask[j] == static_cast<int>(j));
    }
    CHECK_THROWS_AS(make_scenario(0, 201), ConfigError);
    CHECK_THROWS_AS(make_scenario(10, 201), ConfigError);
}

TEST_CASE("scenario application: identity, masked noise, linear replacement") {
    SpaceTimeMesh mesh;
    auto ic = initial_condition({0.3, 0.1, -0.2}, mesh);

    // sigma = 0, scale 1: unchanged.
    OODScenario ident;
    ident.id = 6;
    ident.noise_sigma = 0.0;
    ident.location_mask = make_scenario(6, mesh.n_x).location_mask;
    Rng r0(1);
    CHECK(apply_ood_scenario(ic, ident, mesh, r0) == ic);

    // Scenario 4 touches exactly the first 31 entries.
    Rng r1(2);
    auto s4 = make_scenario(4, mesh.n_x);
    auto out4 = apply_ood_scenario(ic, s4, mesh, r1);
    int changed = 0;
    for (int j = 0; j < mesh.n_x; ++j) changed += (out4[static_cast<size_t>(j)] != ic[static_cast<size_t>(j)]);
    CHECK(changed == 31);

    // Scenario 8: out[j] = ic[0] + 2 pi j dx / n_x, independent of the rest of ic.
    Rng r2(3);
    std::vector<double> ic8(static_cast<size_t>(mesh.n_x), -1.0);
    ic8[0] = 0.3;
    auto out8 = apply_ood_scenario(ic8, make_scenario(8, mesh.n_x), mesh, r2);
    for (int j = 0; j < mesh.n_x; ++j)
        CHECK(out8[static_cast<size_t>(j)] ==
              doctest::Approx(0.3 + 2.0 * kPi * j * mesh.dx() / mesh.n_x).epsilon(1e-15));

    // Determinism: same seed, same draw.
    Rng ra(5), rb(5);
    CHECK(apply_ood_scenario(ic, s4, mesh, ra) == apply_ood_scenario(ic, s4, mesh, rb));
}
