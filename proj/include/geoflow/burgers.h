/// @file burgers.h
/// @brief Viscous Burgers trajectory generation, perturbation scenarios, and
///        dataset serialization.
///
/// Solutions of d_t u = nu d_xx u - u d_x u with periodic boundary conditions
/// on an equispaced space-time mesh. The solver is pseudo-spectral (FFT in x,
/// 2/3-rule dealiasing, integrating-factor RK4 in t with CFL substepping);
/// the last spatial node mirrors the first, so n_x nodes carry n_x - 1 unique
/// values of a periodic function.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geoflow/rng.h"

namespace geoflow {

struct SpaceTimeMesh {
    int n_x = 201;
    int n_t = 201;
    double x_min = 0.0;
    double x_max = 1.0;
    double t_max = 1.0;

    double dx() const { return (x_max - x_min) / (n_x - 1); }
    double dt() const { return t_max / (n_t - 1); }
    double x(int j) const { return x_min + j * dx(); }
    double t(int j) const { return j * dt(); }
};

struct Trajectory {
    // (n_t, n_x) row-major: values[t * n_x + x].
    std::vector<double> values;
    std::array<double, 3> ic_coefficients{0.0, 0.0, 0.0};

    Eigen::Map<const Eigen::VectorXd> row(int t, int n_x) const {
        return {values.data() + static_cast<size_t>(t) * static_cast<size_t>(n_x),
                static_cast<Eigen::Index>(n_x)};
    }
};

struct TrajectoryDataset {
    SpaceTimeMesh mesh;
    std::vector<Trajectory> trajectories;
    double viscosity = 0.01;
    std::uint64_t seed = 0;
};

/// One perturbation recipe for out-of-distribution evaluation.
struct OODScenario {
    int id = 0;
    double noise_sigma = 0.0;
    std::vector<int> location_mask;  // ascending spatial node indices
    double scale = 1.0;
    std::string replacement;  // "linear" or empty
};

/// phi(x,0) = sum_{i=1..3} alpha_i cos^{2i-1}(2 pi x) on the mesh nodes.
std::vector<double> initial_condition(const std::array<double, 3>& alpha,
                                      const SpaceTimeMesh& mesh);

/// Draws alpha_i ~ U[-1,1] and evaluates the initial condition.
std::pair<std::vector<double>, std::array<double, 3>> sample_initial_condition(
    Rng& rng, const SpaceTimeMesh& mesh);

/// Integrates the periodic viscous Burgers equation from `ic`, recording the
/// state at every mesh time. Throws NumericError naming the first bad time
/// index if the state stops being finite.
Trajectory solve_burgers(const std::vector<double>& ic, const SpaceTimeMesh& mesh,
                         double viscosity);

/// n_traj independent trajectories, deterministic in `seed` regardless of the
/// parallel flag or thread count.
TrajectoryDataset build_dataset(int n_traj, const SpaceTimeMesh& mesh, double viscosity,
                                std::uint64_t seed, bool parallel = true);

/// The nine fixed perturbation recipes (id in 1..9). Masks are contiguous
/// leading blocks; mask sizes are {201,201,201,31,11,201,101,201,11}.
OODScenario make_scenario(int id, int n_x);

/// scale * ic plus N(0, sigma^2) noise at masked locations; a "linear"
/// replacement discards ic except for its first value y0 and returns
/// y0 + 2 pi j dx / n_x.
std::vector<double> apply_ood_scenario(const std::vector<double>& ic, const OODScenario& scenario,
                                       const SpaceTimeMesh& mesh, Rng& rng);

/// Writes <base>.f64bin (little-endian float64, row-major (traj, t, x)) and
/// <base>.meta.json (mesh, viscosity, seed, shapes, IC coefficients).
void save_dataset(const TrajectoryDataset& dataset, const std::string& base_path);
TrajectoryDataset load_dataset(const std::string& base_path);

}  // namespace geoflow
