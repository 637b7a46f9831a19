/// @file geometry.cpp
#include "geoflow/geometry.h"

#include <cmath>
#include <functional>

namespace geoflow {

namespace {

SmallMat<double> small(const Eigen::MatrixXd& m) { return from_eigen(m); }

std::vector<SmallMat<double>> small_all(const std::vector<Eigen::MatrixXd>& ms) {
    std::vector<SmallMat<double>> out;
    out.reserve(ms.size());
    for (const auto& m : ms) out.push_back(from_eigen(m));
    return out;
}

Eigen::MatrixXd big(const SmallMat<double>& m) { return to_eigen(m); }

/// Metric first derivatives by centered differences of pointwise
/// evaluations only (the oracle's independent machinery).
std::vector<Eigen::MatrixXd> metric_du_fd(const MetricField& field, const Eigen::VectorXd& u,
                                          double t) {
    const int d = field.dim();
    std::vector<Eigen::MatrixXd> dg(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd up = u, um = u;
        up(k) += kFdStep;
        um(k) -= kFdStep;
        dg[static_cast<size_t>(k)] = (field.metric(up, t) - field.metric(um, t)) / (2.0 * kFdStep);
    }
    return dg;
}

/// Christoffel symbols from pointwise metric evaluations only.
std::vector<Eigen::MatrixXd> christoffel_fd(const MetricField& field, const Eigen::VectorXd& u,
                                            double t) {
    Eigen::MatrixXd g = field.metric(u, t);
    ensure_invertible(g, "christoffel (finite-difference oracle)");
    SmallMat<double> gs = small(g);
    SmallMat<double> gi = inverse(gs, det(gs));
    auto gamma = christoffel_point(gi, small_all(metric_du_fd(field, u, t)));
    std::vector<Eigen::MatrixXd> out;
    out.reserve(gamma.size());
    for (const auto& m : gamma) out.push_back(big(m));
    return out;
}

struct PQ {
    double p, q, vol;
};

/// The circulation 1-form components P = (sqrt det g / g11) Gamma^2_11 and
/// Q = (sqrt det g / g11) Gamma^2_12, from the field's own derivatives.
PQ curl_form(const MetricField& field, const Eigen::VectorXd& u, double t) {
    Eigen::MatrixXd g = field.metric(u, t);
    if (g(0, 0) <= kEpsInv)
        throw NumericError("curl form: degenerate chart, g11 <= " + std::to_string(kEpsInv));
    ensure_invertible(g, "curl form");
    SmallMat<double> gs = small(g);
    double dt_ = det(gs);
    SmallMat<double> gi = inverse(gs, dt_);
    auto gamma = christoffel_point(gi, small_all(field.metric_du(u, t)));
    double vol = std::sqrt(std::max(dt_, 0.0));
    double scale = vol / g(0, 0);
    return {scale * gamma[1](0, 0), scale * gamma[1](0, 1), vol};
}

}  // namespace

void ensure_invertible(const Eigen::MatrixXd& g, const std::string& context) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    double min_eig = es.eigenvalues().minCoeff();
    if (!(min_eig > kEpsInv))
        throw NumericError("singular metric in " + context +
                           ": min eigenvalue = " + std::to_string(min_eig));
}

std::vector<Eigen::MatrixXd> MetricField::metric_du(const Eigen::VectorXd& u, double t) const {
    return metric_du_fd(*this, u, t);
}

Eigen::MatrixXd MetricField::metric_dt(const Eigen::VectorXd& u, double t) const {
    return (metric(u, t + kFdStep) - metric(u, t - kFdStep)) / (2.0 * kFdStep);
}

ImmersionJet ImmersionField::jet(const Eigen::VectorXd& u, double t) const {
    ImmersionJet out;
    out.d = d_;
    out.D = D_;
    out.value = map(u, t);
    out.jac.resize(D_, d_);
    for (int i = 0; i < d_; ++i) {
        Eigen::VectorXd up = u, um = u;
        up(i) += kFdStep;
        um(i) -= kFdStep;
        out.jac.col(i) = (map(up, t) - map(um, t)) / (2.0 * kFdStep);
    }
    out.hess.assign(static_cast<size_t>(d_ * d_), Eigen::VectorXd());
    for (int i = 0; i < d_; ++i) {
        for (int j = i; j < d_; ++j) {
            Eigen::VectorXd h;
            if (i == j) {
                Eigen::VectorXd up = u, um = u;
                up(i) += kFdStep;
                um(i) -= kFdStep;
                h = (map(up, t) - 2.0 * out.value + map(um, t)) / (kFdStep * kFdStep);
            } else {
                Eigen::VectorXd upp = u, upm = u, ump = u, umm = u;
                upp(i) += kFdStep; upp(j) += kFdStep;
                upm(i) += kFdStep; upm(j) -= kFdStep;
                ump(i) -= kFdStep; ump(j) += kFdStep;
                umm(i) -= kFdStep; umm(j) -= kFdStep;
                h = (map(upp, t) - map(upm, t) - map(ump, t) + map(umm, t)) /
                    (4.0 * kFdStep * kFdStep);
            }
            out.hess[static_cast<size_t>(i * d_ + j)] = h;
            out.hess[static_cast<size_t>(j * d_ + i)] = h;
        }
    }
    return out;
}

Eigen::MatrixXd induced_metric(const ImmersionJet& jet) { return jet.jac.transpose() * jet.jac; }

std::vector<Eigen::MatrixXd> christoffel_second_kind(const MetricField& field,
                                                     const Eigen::VectorXd& u, double t) {
    Eigen::MatrixXd g = field.metric(u, t);
    ensure_invertible(g, "christoffel_second_kind");
    SmallMat<double> gs = small(g);
    SmallMat<double> gi = inverse(gs, det(gs));
    auto gamma = christoffel_point(gi, small_all(field.metric_du(u, t)));
    std::vector<Eigen::MatrixXd> out;
    out.reserve(gamma.size());
    for (const auto& m : gamma) out.push_back(big(m));
    return out;
}

CurvatureReport riemann_oracle(const MetricField& field, const Eigen::VectorXd& u, double t) {
    const int d = field.dim();
    Eigen::MatrixXd g = field.metric(u, t);
    ensure_invertible(g, "riemann_oracle");
    Eigen::MatrixXd g_inv = g.inverse();

    auto gamma0 = christoffel_fd(field, u, t);

    // dGamma[m][k](i,j) = d_m Gamma^k_ij, by centered differences of the
    // finite-difference Christoffel evaluation.
    std::vector<std::vector<Eigen::MatrixXd>> dgamma(static_cast<size_t>(d));
    for (int m = 0; m < d; ++m) {
        Eigen::VectorXd up = u, um = u;
        up(m) += kFdStep;
        um(m) -= kFdStep;
        auto gp = christoffel_fd(field, up, t);
        auto gm = christoffel_fd(field, um, t);
        auto& row = dgamma[static_cast<size_t>(m)];
        row.resize(static_cast<size_t>(d));
        for (int k = 0; k < d; ++k)
            row[static_cast<size_t>(k)] =
                (gp[static_cast<size_t>(k)] - gm[static_cast<size_t>(k)]) / (2.0 * kFdStep);
    }

    // R^r_smn = d_m Gamma^r_ns - d_n Gamma^r_ms + Gamma^r_ml Gamma^l_ns
    //           - Gamma^r_nl Gamma^l_ms
    auto upper = [&](int r, int s, int m, int n) {
        double acc = dgamma[static_cast<size_t>(m)][static_cast<size_t>(r)](n, s) -
                     dgamma[static_cast<size_t>(n)][static_cast<size_t>(r)](m, s);
        for (int l = 0; l < d; ++l)
            acc += gamma0[static_cast<size_t>(r)](m, l) * gamma0[static_cast<size_t>(l)](n, s) -
                   gamma0[static_cast<size_t>(r)](n, l) * gamma0[static_cast<size_t>(l)](m, s);
        return acc;
    };

    CurvatureReport rep;
    rep.d = d;
    rep.christoffel = gamma0;
    rep.riemann.assign(static_cast<size_t>(d * d * d * d), 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double acc = 0.0;
                    for (int r = 0; r < d; ++r) acc += g(i, r) * upper(r, j, k, l);
                    rep.riemann[static_cast<size_t>(((i * d + j) * d + k) * d + l)] = acc;
                }
    rep.ricci.resize(d, d);
    for (int s = 0; s < d; ++s)
        for (int n = 0; n < d; ++n) {
            double acc = 0.0;
            for (int m = 0; m < d; ++m) acc += upper(m, s, m, n);
            rep.ricci(s, n) = acc;
        }
    rep.scalar = (g_inv * rep.ricci).trace();
    if (d == 2) rep.gaussian = 0.5 * rep.scalar;
    return rep;
}

double gaussian_curvature_direct(const MetricField& field, const Eigen::VectorXd& u, double t) {
    if (field.dim() != 2) throw ConfigError("gaussian_curvature_direct: needs d = 2");
    PQ center = curl_form(field, u, t);
    Eigen::VectorXd u1p = u, u1m = u, u2p = u, u2m = u;
    u1p(0) += kFdStep;
    u1m(0) -= kFdStep;
    u2p(1) += kFdStep;
    u2m(1) -= kFdStep;
    double d2_p = (curl_form(field, u2p, t).p - curl_form(field, u2m, t).p) / (2.0 * kFdStep);
    double d1_q = (curl_form(field, u1p, t).q - curl_form(field, u1m, t).q) / (2.0 * kFdStep);
    return (d2_p - d1_q) / center.vol;
}

CirculationEstimate circulation_curvature_estimate(const MetricField& field,
                                                   const Eigen::VectorXd& u0, double r, double t,
                                                   int segments,
                                                   const Eigen::VectorXd& bounds_lo,
                                                   const Eigen::VectorXd& bounds_hi) {
    if (field.dim() != 2) throw ConfigError("circulation_curvature_estimate: needs d = 2");
    if (segments < 8) throw ConfigError("circulation_curvature_estimate: segments must be >= 8");
    for (int i = 0; i < 2; ++i)
        if (u0(i) - r < bounds_lo(i) || u0(i) + r > bounds_hi(i))
            throw ConfigError("circulation_curvature_estimate: ball exits chart bounds");
    double acc = 0.0;
    Eigen::VectorXd p(2);
    for (int i = 0; i < segments; ++i) {
        double w = 2.0 * kPi * i / segments;
        p(0) = u0(0) + r * std::cos(w);
        p(1) = u0(1) + r * std::sin(w);
        PQ pq = curl_form(field, p, t);
        acc += pq.p * (-std::sin(w)) + pq.q * std::cos(w);
    }
    CirculationEstimate est;
    est.normalized = acc / segments;
    est.raw = 2.0 * kPi * r * est.normalized;
    return est;
}

double circulation_disc_oracle(const MetricField& field, const Eigen::VectorXd& u0, double r,
                               double t, int n_radial, int n_angular) {
    if (field.dim() != 2) throw ConfigError("circulation_disc_oracle: needs d = 2");
    if (n_radial % 2 != 0) ++n_radial;  // composite Simpson needs an even count
    auto curl_at = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd u1p = p, u1m = p, u2p = p, u2m = p;
        u1p(0) += kFdStep;
        u1m(0) -= kFdStep;
        u2p(1) += kFdStep;
        u2m(1) -= kFdStep;
        double d1_q = (curl_form(field, u1p, t).q - curl_form(field, u1m, t).q) / (2.0 * kFdStep);
        double d2_p = (curl_form(field, u2p, t).p - curl_form(field, u2m, t).p) / (2.0 * kFdStep);
        return d1_q - d2_p;
    };
    // Polar: integral = int_0^{2pi} int_0^r curl(u0 + rho w) rho drho dw.
    // Trapezoid in the periodic angle, composite Simpson in the radius.
    double total = 0.0;
    Eigen::VectorXd p(2);
    for (int a = 0; a < n_angular; ++a) {
        double w = 2.0 * kPi * a / n_angular;
        double cw = std::cos(w), sw = std::sin(w);
        double radial = 0.0;
        for (int s = 0; s <= n_radial; ++s) {
            double rho = r * s / n_radial;
            p(0) = u0(0) + rho * cw;
            p(1) = u0(1) + rho * sw;
            double f = (s == 0) ? 0.0 : curl_at(p) * rho;
            double wgt = (s == 0 || s == n_radial) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
            radial += wgt * f;
        }
        radial *= (r / n_radial) / 3.0;
        total += radial;
    }
    return total * (2.0 * kPi / n_angular);
}

double volume_element(const MetricField& field, const Eigen::VectorXd& u, double t) {
    return volume_element_point(small(field.metric(u, t)));
}

double volume_element_rate(const MetricField& field, const Eigen::VectorXd& u, double t) {
    Eigen::MatrixXd g = field.metric(u, t);
    ensure_invertible(g, "volume_element_rate");
    SmallMat<double> gs = small(g);
    double d_ = det(gs);
    return volume_element_rate_point(inverse(gs, d_), small(field.metric_dt(u, t)),
                                     std::sqrt(std::max(d_, 0.0)));
}

namespace {

void scalar_derivatives(const std::function<double(const Eigen::VectorXd&, double)>& f,
                        const Eigen::VectorXd& u, double t, std::vector<double>& grad,
                        SmallMat<double>& hess) {
    const int d = static_cast<int>(u.size());
    grad.assign(static_cast<size_t>(d), 0.0);
    hess = SmallMat<double>(d, d);
    double f0 = f(u, t);
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd up = u, um = u;
        up(i) += kFdStep;
        um(i) -= kFdStep;
        double fp = f(up, t), fm = f(um, t);
        grad[static_cast<size_t>(i)] = (fp - fm) / (2.0 * kFdStep);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (kFdStep * kFdStep);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Eigen::VectorXd upp = u, upm = u, ump = u, umm = u;
            upp(i) += kFdStep; upp(j) += kFdStep;
            upm(i) += kFdStep; upm(j) -= kFdStep;
            ump(i) -= kFdStep; ump(j) += kFdStep;
            umm(i) -= kFdStep; umm(j) -= kFdStep;
            double v = (f(upp, t) - f(upm, t) - f(ump, t) + f(umm, t)) /
                       (4.0 * kFdStep * kFdStep);
            hess(i, j) = v;
            hess(j, i) = v;
        }
}

}  // namespace

double laplace_beltrami(const MetricField& field,
                        const std::function<double(const Eigen::VectorXd&, double)>& f,
                        const Eigen::VectorXd& u, double t) {
    Eigen::MatrixXd g = field.metric(u, t);
    ensure_invertible(g, "laplace_beltrami");
    SmallMat<double> gs = small(g);
    SmallMat<double> gi = inverse(gs, det(gs));
    std::vector<double> grad;
    SmallMat<double> hess;
    scalar_derivatives(f, u, t, grad, hess);
    return laplace_beltrami_point(gi, small_all(field.metric_du(u, t)), grad, hess);
}

double laplace_beltrami_divergence_fd(const MetricField& field,
                                      const std::function<double(const Eigen::VectorXd&, double)>& f,
                                      const Eigen::VectorXd& u, double t) {
    const int d = field.dim();
    // F_i(p) = sqrt(det g) g^{ij} d_j f, every factor from pointwise values.
    auto flux = [&](const Eigen::VectorXd& p, int i) {
        Eigen::MatrixXd g = field.metric(p, t);
        ensure_invertible(g, "laplace_beltrami_divergence_fd");
        Eigen::MatrixXd gi = g.inverse();
        double vol = std::sqrt(std::max(g.determinant(), 0.0));
        double acc = 0.0;
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd pp = p, pm = p;
            pp(j) += kFdStep;
            pm(j) -= kFdStep;
            acc += gi(i, j) * (f(pp, t) - f(pm, t)) / (2.0 * kFdStep);
        }
        return vol * acc;
    };
    double div = 0.0;
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd up = u, um = u;
        up(i) += kFdStep;
        um(i) -= kFdStep;
        div += (flux(up, i) - flux(um, i)) / (2.0 * kFdStep);
    }
    Eigen::MatrixXd g0 = field.metric(u, t);
    return div / std::sqrt(std::max(g0.determinant(), 0.0));
}

Eigen::MatrixXd second_fundamental_form_proxy(const ImmersionJet& jet, const Eigen::MatrixXd& g) {
    ensure_invertible(g, "second_fundamental_form_proxy");
    SmallMat<double> gs = small(g);
    SmallMat<double> gi = inverse(gs, det(gs));
    SmallMat<double> jac(jet.D, jet.d);
    for (int a = 0; a < jet.D; ++a)
        for (int i = 0; i < jet.d; ++i) jac(a, i) = jet.jac(a, i);
    std::vector<std::vector<double>> hess(static_cast<size_t>(jet.d * jet.d));
    for (size_t ij = 0; ij < hess.size(); ++ij) {
        hess[ij].resize(static_cast<size_t>(jet.D));
        for (int a = 0; a < jet.D; ++a) hess[ij][static_cast<size_t>(a)] = jet.hess[ij](a);
    }
    return big(second_fundamental_form_point(gi, jac, hess));
}

double mean_curvature_proxy(const ImmersionJet& jet, const MetricField& field,
                            const Eigen::VectorXd& u, double t) {
    Eigen::MatrixXd g = field.metric(u, t);
    ensure_invertible(g, "mean_curvature_proxy");
    SmallMat<double> gs = small(g);
    SmallMat<double> gi = inverse(gs, det(gs));
    SmallMat<double> jac(jet.D, jet.d);
    for (int a = 0; a < jet.D; ++a)
        for (int i = 0; i < jet.d; ++i) jac(a, i) = jet.jac(a, i);
    std::vector<std::vector<double>> hess(static_cast<size_t>(jet.d * jet.d));
    for (size_t ij = 0; ij < hess.size(); ++ij) {
        hess[ij].resize(static_cast<size_t>(jet.D));
        for (int a = 0; a < jet.D; ++a) hess[ij][static_cast<size_t>(a)] = jet.hess[ij](a);
    }
    return mean_curvature_point(gi, small_all(field.metric_du(u, t)), jac, hess);
}

Eigen::MatrixXd traceless_extrinsic_tensor(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& g,
                                           double H) {
    const int d = static_cast<int>(g.rows());
    return pi - (H / d) * g;
}

HFlowPartsD h_flow_tensor(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h_hat, double r_bar) {
    ensure_invertible(g, "h_flow_tensor");
    SmallMat<double> gs = small(g);
    auto parts = h_flow_point(gs, inverse(gs, det(gs)), small(h_hat), r_bar);
    return {big(parts.total), big(parts.scalar_part), big(parts.ricci_part),
            big(parts.gamma_part)};
}

double conformal_scalar_curvature(const MetricField& g0,
                                  const std::function<double(const Eigen::VectorXd&, double)>& psi,
                                  const Eigen::VectorXd& u, double t) {
    const int d = g0.dim();
    if (d < 3) throw ConfigError("conformal_scalar_curvature: needs d >= 3");
    double r_base = riemann_oracle(g0, u, t).scalar;
    double lap = laplace_beltrami(g0, psi, u, t);
    double p = std::max(psi(u, t), kPsiMin);
    return conformal_scalar_point(r_base, p, lap, d);
}

// ------------------------------------------------------------- spheres

double sphere_radius_ricci(double r0, int d, double t) {
    return sphere_radius(r0, d, t, 2.0, false);
}

double sphere_radius(double r0, int d, double t, double c, bool expand) {
    if (d < 2) throw ConfigError("sphere_radius: needs d >= 2");
    double arg = expand ? r0 * r0 + c * (d - 1) * t : r0 * r0 - c * (d - 1) * t;
    if (!expand && arg <= 0.0) {
        double t_ext = r0 * r0 / (c * (d - 1));
        throw ConfigError("sphere_radius: past extinction time " + std::to_string(t_ext) +
                          " (requested t = " + std::to_string(t) + ")");
    }
    return std::sqrt(arg);
}

Eigen::VectorXd sphere_projection(const Eigen::VectorXd& u, double r0, int d, double t,
                                  bool expand, double c) {
    double nrm = u.norm();
    if (nrm <= 1e-8)
        throw NumericError("sphere_projection: input norm " + std::to_string(nrm) +
                           " too close to zero");
    return sphere_radius(r0, d, t, c, expand) / nrm * u;
}

Eigen::MatrixXd sphere_metric(int d, double r, const Eigen::VectorXd& angles) {
    if (angles.size() < d - 1)
        throw ConfigError("sphere_metric: needs at least d-1 angle coordinates");
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    double prod = 1.0;
    g(0, 0) = r * r;
    for (int j = 1; j < d; ++j) {
        double s = std::sin(angles(j - 1));
        if (std::fabs(s) < kEpsChart)
            throw NumericError("sphere_metric: chart degenerate near pole (|sin u_" +
                               std::to_string(j) + "| < eps_chart)");
        prod *= s * s;
        g(j, j) = r * r * prod;
    }
    return g;
}

std::vector<Eigen::MatrixXd> sphere_metric_du(int d, double r, const Eigen::VectorXd& angles) {
    Eigen::MatrixXd g = sphere_metric(d, r, angles);
    std::vector<Eigen::MatrixXd> dg(static_cast<size_t>(d), Eigen::MatrixXd::Zero(d, d));
    // g_jj = r^2 prod_{m<j} sin^2 a_m; d/d a_m g_jj = 2 cot(a_m) g_jj for m < j.
    for (int m = 0; m < d - 1; ++m) {
        double cot = std::cos(angles(m)) / std::sin(angles(m));
        for (int j = m + 1; j < d; ++j) dg[static_cast<size_t>(m)](j, j) = 2.0 * cot * g(j, j);
    }
    return dg;
}

}  // namespace geoflow
