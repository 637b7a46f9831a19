/// @file burgers.cpp
#include "geoflow/burgers.h"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "geoflow/common.h"
#include "geoflow/parallel.h"

namespace geoflow {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

/// Spectral state for one solve: N unique physical nodes, N/2+1 modes.
class SpectralWorkspace {
  public:
    explicit SpectralWorkspace(int n, double length) : n_(n), nm_(n / 2 + 1) {
        u_ = fftw_alloc_real(static_cast<size_t>(n_));
        w_ = fftw_alloc_real(static_cast<size_t>(n_));
        uh_ = fftw_alloc_complex(static_cast<size_t>(nm_));
        wh_ = fftw_alloc_complex(static_cast<size_t>(nm_));
        {
            std::lock_guard<std::mutex> lock(fftw_mutex());
            fwd_u_ = fftw_plan_dft_r2c_1d(n_, u_, uh_, FFTW_ESTIMATE);
            fwd_w_ = fftw_plan_dft_r2c_1d(n_, w_, wh_, FFTW_ESTIMATE);
            inv_u_ = fftw_plan_dft_c2r_1d(n_, uh_, u_, FFTW_ESTIMATE);
        }
        k_.resize(static_cast<size_t>(nm_));
        for (int m = 0; m < nm_; ++m) k_[static_cast<size_t>(m)] = 2.0 * kPi * m / length;
        k_cut_ = n_ / 3;  // 2/3-rule: keep modes m <= k_cut_
    }
    ~SpectralWorkspace() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd_u_);
        fftw_destroy_plan(fwd_w_);
        fftw_destroy_plan(inv_u_);
        fftw_free(u_);
        fftw_free(w_);
        fftw_free(uh_);
        fftw_free(wh_);
    }
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    int n() const { return n_; }
    int n_modes() const { return nm_; }

    /// uhat <- FFT(u_phys), dealiased.
    void to_spectral(const double* u_phys, std::complex<double>* uhat) {
        for (int j = 0; j < n_; ++j) u_[j] = u_phys[j];
        fftw_execute(fwd_u_);
        for (int m = 0; m < nm_; ++m) {
            uhat[m] = std::complex<double>(uh_[m][0], uh_[m][1]);
            if (m > k_cut_) uhat[m] = 0.0;
        }
    }

    /// u_phys <- IFFT(uhat) with 1/N normalization.
    void to_physical(const std::complex<double>* uhat, double* u_phys) {
        for (int m = 0; m < nm_; ++m) {
            uh_[m][0] = uhat[m].real();
            uh_[m][1] = uhat[m].imag();
        }
        fftw_execute(inv_u_);
        const double scale = 1.0 / n_;
        for (int j = 0; j < n_; ++j) u_phys[j] = u_[j] * scale;
    }

    /// out <- -i k FFT(u^2 / 2) where u = IFFT(uhat); flux form keeps the
    /// zeroth mode (the spatial mean) exactly constant.
    void nonlinear(const std::complex<double>* uhat, std::complex<double>* out) {
        to_physical(uhat, w_buf());
        for (int j = 0; j < n_; ++j) w_[j] = 0.5 * w_[j] * w_[j];
        fftw_execute(fwd_w_);
        const std::complex<double> neg_i(0.0, -1.0);
        for (int m = 0; m < nm_; ++m) {
            std::complex<double> wm(wh_[m][0], wh_[m][1]);
            out[m] = (m > k_cut_) ? std::complex<double>(0.0, 0.0) : neg_i * k_[static_cast<size_t>(m)] * wm;
        }
    }

    double max_abs(const std::complex<double>* uhat) {
        to_physical(uhat, w_buf());
        double m = 0.0;
        for (int j = 0; j < n_; ++j) m = std::max(m, std::fabs(w_[j]));
        return m;
    }

    const std::vector<double>& k() const { return k_; }

  private:
    double* w_buf() { return w_; }

    int n_, nm_, k_cut_;
    double* u_;
    double* w_;
    fftw_complex* uh_;
    fftw_complex* wh_;
    fftw_plan fwd_u_, fwd_w_, inv_u_;
    std::vector<double> k_;
};

using CVec = std::vector<std::complex<double>>;

/// One integrating-factor RK4 step: exact viscous propagation between the
/// explicitly advanced nonlinear stages.
void ifrk4_step(SpectralWorkspace& ws, CVec& uhat, double dt, CVec& k1, CVec& k2, CVec& k3,
                CVec& k4, CVec& stage, const CVec& e_full, const CVec& e_half) {
    const int nm = ws.n_modes();
    ws.nonlinear(uhat.data(), k1.data());
    for (int m = 0; m < nm; ++m) stage[static_cast<size_t>(m)] =
        e_half[static_cast<size_t>(m)] * (uhat[static_cast<size_t>(m)] + 0.5 * dt * k1[static_cast<size_t>(m)]);
    ws.nonlinear(stage.data(), k2.data());
    for (int m = 0; m < nm; ++m) stage[static_cast<size_t>(m)] =
        e_half[static_cast<size_t>(m)] * uhat[static_cast<size_t>(m)] + 0.5 * dt * k2[static_cast<size_t>(m)];
    ws.nonlinear(stage.data(), k3.data());
    for (int m = 0; m < nm; ++m) stage[static_cast<size_t>(m)] =
        e_full[static_cast<size_t>(m)] * uhat[static_cast<size_t>(m)] +
        dt * e_half[static_cast<size_t>(m)] * k3[static_cast<size_t>(m)];
    ws.nonlinear(stage.data(), k4.data());
    for (int m = 0; m < nm; ++m) {
        uhat[static_cast<size_t>(m)] =
            e_full[static_cast<size_t>(m)] * uhat[static_cast<size_t>(m)] +
            dt / 6.0 *
                (e_full[static_cast<size_t>(m)] * k1[static_cast<size_t>(m)] +
                 2.0 * e_half[static_cast<size_t>(m)] *
                     (k2[static_cast<size_t>(m)] + k3[static_cast<size_t>(m)]) +
                 k4[static_cast<size_t>(m)]);
    }
}

void fill_exp(const std::vector<double>& k, double nu, double dt, CVec& e_full, CVec& e_half) {
    for (size_t m = 0; m < k.size(); ++m) {
        e_full[m] = std::exp(-nu * k[m] * k[m] * dt);
        e_half[m] = std::exp(-nu * k[m] * k[m] * (0.5 * dt));
    }
}

}  // namespace

std::vector<double> initial_condition(const std::array<double, 3>& alpha,
                                      const SpaceTimeMesh& mesh) {
    std::vector<double> ic(static_cast<size_t>(mesh.n_x));
    for (int j = 0; j < mesh.n_x; ++j) {
        double c = std::cos(2.0 * kPi * mesh.x(j));
        double acc = 0.0;
        double cp = c;  // c^(2i-1)
        for (int i = 0; i < 3; ++i) {
            acc += alpha[static_cast<size_t>(i)] * cp;
            cp *= c * c;
        }
        ic[static_cast<size_t>(j)] = acc;
    }
    return ic;
}

std::pair<std::vector<double>, std::array<double, 3>> sample_initial_condition(
    Rng& rng, const SpaceTimeMesh& mesh) {
    std::array<double, 3> alpha;
    for (auto& a : alpha) a = rng.uniform(-1.0, 1.0);
    return {initial_condition(alpha, mesh), alpha};
}

Trajectory solve_burgers(const std::vector<double>& ic, const SpaceTimeMesh& mesh,
                         double viscosity) {
    if (static_cast<int>(ic.size()) != mesh.n_x)
        throw ConfigError("solve_burgers: ic length does not match mesh n_x");
    if (mesh.n_x < 5 || mesh.n_t < 2) throw ConfigError("solve_burgers: mesh too small");
    if (!(viscosity > 0.0)) throw ConfigError("solve_burgers: viscosity must be positive");

    const int n = mesh.n_x - 1;  // unique periodic nodes
    SpectralWorkspace ws(n, mesh.x_max - mesh.x_min);
    const int nm = ws.n_modes();

    Trajectory traj;
    traj.values.assign(static_cast<size_t>(mesh.n_t) * static_cast<size_t>(mesh.n_x), 0.0);
    for (int j = 0; j < mesh.n_x; ++j) traj.values[static_cast<size_t>(j)] = ic[static_cast<size_t>(j)];

    CVec uhat(static_cast<size_t>(nm));
    ws.to_spectral(ic.data(), uhat.data());

    CVec k1(uhat.size()), k2(uhat.size()), k3(uhat.size()), k4(uhat.size()), stage(uhat.size());
    CVec e_full(uhat.size()), e_half(uhat.size());
    std::vector<double> phys(static_cast<size_t>(n));

    const double dt_mesh = mesh.dt();
    const double dx = mesh.dx();
    double last_dt = -1.0;

    for (int ti = 1; ti < mesh.n_t; ++ti) {
        // Advective CFL on the interval's starting state; viscosity is exact.
        double umax = ws.max_abs(uhat.data());
        int substeps = 1;
        if (umax > 0.0) {
            double dt_cfl = 0.5 * dx / umax;
            substeps = std::max(1, static_cast<int>(std::ceil(dt_mesh / dt_cfl)));
        }
        double dt = dt_mesh / substeps;
        if (dt != last_dt) {
            fill_exp(ws.k(), viscosity, dt, e_full, e_half);
            last_dt = dt;
        }
        for (int s = 0; s < substeps; ++s)
            ifrk4_step(ws, uhat, dt, k1, k2, k3, k4, stage, e_full, e_half);

        ws.to_physical(uhat.data(), phys.data());
        bool ok = true;
        for (int j = 0; j < n; ++j) ok = ok && std::isfinite(phys[static_cast<size_t>(j)]);
        if (!ok)
            throw NumericError("solve_burgers: non-finite state at time index " +
                               std::to_string(ti));
        double* row = traj.values.data() + static_cast<size_t>(ti) * static_cast<size_t>(mesh.n_x);
        for (int j = 0; j < n; ++j) row[j] = phys[static_cast<size_t>(j)];
        row[n] = phys[0];  // periodic mirror node
    }
    return traj;
}

TrajectoryDataset build_dataset(int n_traj, const SpaceTimeMesh& mesh, double viscosity,
                                std::uint64_t seed, bool parallel) {
    if (n_traj < 1) throw ConfigError("build_dataset: n_traj must be >= 1");
    TrajectoryDataset ds;
    ds.mesh = mesh;
    ds.viscosity = viscosity;
    ds.seed = seed;
    ds.trajectories.resize(static_cast<size_t>(n_traj));
    Rng root(seed);
    run_chunks(parallel, kChunks, [&](int chunk) {
        auto [lo, hi] = chunk_range(n_traj, chunk, kChunks);
        for (int i = lo; i < hi; ++i) {
            Rng rng = root.fork("traj/" + std::to_string(i));
            auto [ic, alpha] = sample_initial_condition(rng, mesh);
            ds.trajectories[static_cast<size_t>(i)] = solve_burgers(ic, mesh, viscosity);
            ds.trajectories[static_cast<size_t>(i)].ic_coefficients = alpha;
        }
    });
    return ds;
}

OODScenario make_scenario(int id, int n_x) {
    auto first = [&](int count) {
        std::vector<int> m(static_cast<size_t>(count));
        for (int j = 0; j < count; ++j) m[static_cast<size_t>(j)] = j;
        return m;
    };
    OODScenario s;
    s.id = id;
    switch (id) {
        case 1: s.noise_sigma = 1.0;  s.location_mask = first(n_x); break;
        case 2: s.noise_sigma = 1.5;  s.location_mask = first(n_x); break;
        case 3: s.noise_sigma = 2.5;  s.location_mask = first(n_x); break;
        case 4: s.noise_sigma = 2.0;  s.location_mask = first(31);  break;
        case 5: s.noise_sigma = 3.0;  s.location_mask = first(11);  break;
        case 6: s.noise_sigma = 0.25; s.location_mask = first(n_x); break;
        case 7: s.noise_sigma = 1.5;  s.location_mask = first(101); s.scale = 1.4; break;
        case 8: s.location_mask = first(n_x); s.replacement = "linear"; break;
        case 9: s.noise_sigma = 3.0;  s.location_mask = first(11);  break;
        default: throw ConfigError("make_scenario: id must be in 1..9");
    }
    return s;
}

std::vector<double> apply_ood_scenario(const std::vector<double>& ic, const OODScenario& scenario,
                                       const SpaceTimeMesh& mesh, Rng& rng) {
    if (scenario.id < 1 || scenario.id > 9)
        throw ConfigError("apply_ood_scenario: id must be in 1..9");
    std::vector<double> out(ic.size());
    if (scenario.replacement == "linear") {
        // Straight line through the original first value.
        const double y0 = ic.empty() ? 0.0 : ic[0];
        for (size_t j = 0; j < out.size(); ++j)
            out[j] = y0 + 2.0 * kPi * static_cast<double>(j) * mesh.dx() / mesh.n_x;
        return out;
    }
    for (size_t j = 0; j < out.size(); ++j) out[j] = scenario.scale * ic[j];
    for (int j : scenario.location_mask)
        out[static_cast<size_t>(j)] += scenario.noise_sigma * rng.normal();
    return out;
}

void save_dataset(const TrajectoryDataset& dataset, const std::string& base_path) {
    const auto& mesh = dataset.mesh;
    const size_t row = static_cast<size_t>(mesh.n_t) * static_cast<size_t>(mesh.n_x);
    std::ofstream bin(base_path + ".f64bin", std::ios::binary);
    if (!bin) throw ConfigError("save_dataset: cannot open " + base_path + ".f64bin");
    for (const auto& tr : dataset.trajectories) {
        if (tr.values.size() != row)
            throw ConfigError("save_dataset: trajectory shape does not match mesh");
        bin.write(reinterpret_cast<const char*>(tr.values.data()),
                  static_cast<std::streamsize>(row * sizeof(double)));
    }
    if (!bin) throw ConfigError("save_dataset: write failed for " + base_path + ".f64bin");
    bin.close();

    nlohmann::json meta;
    meta["n_x"] = mesh.n_x;
    meta["n_t"] = mesh.n_t;
    meta["x_min"] = mesh.x_min;
    meta["x_max"] = mesh.x_max;
    meta["t_max"] = mesh.t_max;
    meta["viscosity"] = dataset.viscosity;
    meta["seed"] = dataset.seed;
    meta["n_traj"] = dataset.trajectories.size();
    auto& coeff = meta["ic_coefficients"] = nlohmann::json::array();
    for (const auto& tr : dataset.trajectories)
        coeff.push_back({tr.ic_coefficients[0], tr.ic_coefficients[1], tr.ic_coefficients[2]});
    std::ofstream js(base_path + ".meta.json");
    if (!js) throw ConfigError("save_dataset: cannot open " + base_path + ".meta.json");
    js << meta.dump(2) << "\n";
}

TrajectoryDataset load_dataset(const std::string& base_path) {
    std::ifstream js(base_path + ".meta.json");
    if (!js) throw ConfigError("load_dataset: missing " + base_path + ".meta.json");
    nlohmann::json meta;
    try {
        js >> meta;
    } catch (const std::exception& e) {
        throw ConfigError("load_dataset: bad metadata in " + base_path + ".meta.json: " +
                          e.what());
    }
    TrajectoryDataset ds;
    try {
        ds.mesh.n_x = meta.at("n_x").get<int>();
        ds.mesh.n_t = meta.at("n_t").get<int>();
        ds.mesh.x_min = meta.at("x_min").get<double>();
        ds.mesh.x_max = meta.at("x_max").get<double>();
        ds.mesh.t_max = meta.at("t_max").get<double>();
        ds.viscosity = meta.at("viscosity").get<double>();
        ds.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const std::exception& e) {
        throw ConfigError("load_dataset: metadata key missing or mistyped: " +
                          std::string(e.what()));
    }
    const size_t n_traj = meta.at("n_traj").get<size_t>();
    const size_t row = static_cast<size_t>(ds.mesh.n_t) * static_cast<size_t>(ds.mesh.n_x);

    std::ifstream bin(base_path + ".f64bin", std::ios::binary);
    if (!bin) throw ConfigError("load_dataset: missing " + base_path + ".f64bin");
    bin.seekg(0, std::ios::end);
    const auto bytes = static_cast<size_t>(bin.tellg());
    bin.seekg(0);
    if (bytes != n_traj * row * sizeof(double))
        throw ConfigError("load_dataset: shape mismatch: expected " +
                          std::to_string(n_traj * row * sizeof(double)) + " bytes, found " +
                          std::to_string(bytes));
    ds.trajectories.resize(n_traj);
    const auto& coeff = meta.at("ic_coefficients");
    if (coeff.size() != n_traj)
        throw ConfigError("load_dataset: ic_coefficients count mismatch");
    for (size_t i = 0; i < n_traj; ++i) {
        auto& tr = ds.trajectories[i];
        tr.values.resize(row);
        bin.read(reinterpret_cast<char*>(tr.values.data()),
                 static_cast<std::streamsize>(row * sizeof(double)));
        for (int c = 0; c < 3; ++c)
            tr.ic_coefficients[static_cast<size_t>(c)] = coeff[i][static_cast<size_t>(c)].get<double>();
    }
    if (!bin) throw ConfigError("load_dataset: truncated " + base_path + ".f64bin");
    return ds;
}

}  // namespace geoflow
