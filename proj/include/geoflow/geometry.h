/// @file geometry.h
/// @brief Differential geometry on the latent chart: metrics, Christoffel
///        symbols, curvature oracles and proxies, circulation integrals,
///        extrinsic curvature of immersions, conformal formulas, and round
///        sphere closed forms.
///
/// Two layers share the formulas:
///   - Templated point functions over SmallMat<T> accept either plain doubles
///     or reverse-mode tape values; these are what the loss pipeline calls
///     with network-jet inputs.
///   - Double-precision field operations (MetricField + oracles) evaluate the
///     same quantities from a metric functor. The curvature oracle uses only
///     pointwise metric evaluations and centered finite differences, so it
///     shares no derivative machinery with the proxies it cross-checks.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoflow/common.h"
#include "geoflow/tape.h"

namespace geoflow {

// =====================================================================
// Small dense matrices over an arbitrary scalar (double or ad::Value).
// =====================================================================

template <typename T>
class SmallMat {
  public:
    SmallMat() = default;
    SmallMat(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<size_t>(rows * cols)) {}

    int rows() const { return r_; }
    int cols() const { return c_; }
    T& operator()(int i, int j) { return a_[static_cast<size_t>(i * c_ + j)]; }
    const T& operator()(int i, int j) const { return a_[static_cast<size_t>(i * c_ + j)]; }

  private:
    int r_ = 0, c_ = 0;
    std::vector<T> a_;
};

inline SmallMat<double> from_eigen(const Eigen::MatrixXd& m) {
    SmallMat<double> out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

template <typename T>
Eigen::MatrixXd to_eigen(const SmallMat<T>& m) {
    using ad::value_of;
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = value_of(m(i, j));
    return out;
}

/// Throws when the symmetric matrix has an eigenvalue at or below the
/// inversion floor; callers invert only after this passes.
void ensure_invertible(const Eigen::MatrixXd& g, const std::string& context);

// =====================================================================
// Templated point functions (closed-form for d <= 3).
// =====================================================================

template <typename T>
T det(const SmallMat<T>& m) {
    const int d = m.rows();
    if (d != m.cols()) throw ConfigError("det: matrix not square");
    if (d == 1) return m(0, 0);
    if (d == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (d == 3)
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    throw ConfigError("det: closed form implemented for d <= 3");
}

/// Cofactor inverse given a precomputed determinant. The caller is expected
/// to have run ensure_invertible on the double projection.
template <typename T>
SmallMat<T> inverse(const SmallMat<T>& m, const T& determinant) {
    const int d = m.rows();
    SmallMat<T> inv(d, d);
    if (d == 1) {
        inv(0, 0) = 1.0 / determinant;
        return inv;
    }
    if (d == 2) {
        inv(0, 0) = m(1, 1) / determinant;
        inv(1, 1) = m(0, 0) / determinant;
        inv(0, 1) = -1.0 * m(0, 1) / determinant;
        inv(1, 0) = -1.0 * m(1, 0) / determinant;
        return inv;
    }
    if (d == 3) {
        // inv(i,j) = cofactor(j,i) / det
        inv(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / determinant;
        inv(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / determinant;
        inv(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / determinant;
        inv(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / determinant;
        inv(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / determinant;
        inv(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / determinant;
        inv(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / determinant;
        inv(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / determinant;
        inv(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / determinant;
        return inv;
    }
    throw ConfigError("inverse: closed form implemented for d <= 3");
}

/// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
/// dg[k] holds d_k g as a d x d matrix; result[k](i,j) = Gamma^k_ij.
template <typename T>
std::vector<SmallMat<T>> christoffel_point(const SmallMat<T>& g_inv,
                                           const std::vector<SmallMat<T>>& dg) {
    const int d = g_inv.rows();
    std::vector<SmallMat<T>> gamma(static_cast<size_t>(d), SmallMat<T>(d, d));
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                T acc = g_inv(k, 0) * (dg[static_cast<size_t>(i)](j, 0) +
                                       dg[static_cast<size_t>(j)](i, 0) -
                                       dg[0](i, j));
                for (int l = 1; l < d; ++l)
                    acc = acc + g_inv(k, l) * (dg[static_cast<size_t>(i)](j, l) +
                                               dg[static_cast<size_t>(j)](i, l) -
                                               dg[static_cast<size_t>(l)](i, j));
                gamma[static_cast<size_t>(k)](i, j) = 0.5 * acc;
            }
    return gamma;
}

/// sqrt(max(det g, 0)).
template <typename T>
T volume_element_point(const SmallMat<T>& g) {
    using ad::clamp_min;
    using std::sqrt;
    using ad::sqrt;
    return sqrt(clamp_min(det(g), 0.0));
}

/// Jacobi identity: d_t sqrt(det g) = 1/2 sqrt(det g) tr(g^{-1} d_t g).
template <typename T>
T volume_element_rate_point(const SmallMat<T>& g_inv, const SmallMat<T>& dg_dt, const T& vol) {
    const int d = g_inv.rows();
    T tr = g_inv(0, 0) * dg_dt(0, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == 0 && j == 0) continue;
            tr = tr + g_inv(i, j) * dg_dt(j, i);
        }
    return 0.5 * vol * tr;
}

/// Laplace-Beltrami in expanded (non-divergence) form:
///   lap f = g^{ij} d2f_ij + sum_i [ 1/2 tr(g^{-1} d_i g) g^{ij}
///                                   - (g^{-1} d_i g g^{-1})^{ij} ] df_j.
/// Equivalent to (1/sqrt det g) d_i(sqrt det g g^{ij} d_j f); the divergence
/// form evaluated by nested finite differences serves as its test oracle.
template <typename T>
T laplace_beltrami_point(const SmallMat<T>& g_inv, const std::vector<SmallMat<T>>& dg,
                         const std::vector<T>& grad, const SmallMat<T>& hess) {
    const int d = g_inv.rows();
    T acc = g_inv(0, 0) * hess(0, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == 0 && j == 0) continue;
            acc = acc + g_inv(i, j) * hess(i, j);
        }
    for (int i = 0; i < d; ++i) {
        const SmallMat<T>& dgi = dg[static_cast<size_t>(i)];
        // tr(g^{-1} d_i g)
        T tr = g_inv(0, 0) * dgi(0, 0);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                if (a == 0 && b == 0) continue;
                tr = tr + g_inv(a, b) * dgi(b, a);
            }
        for (int j = 0; j < d; ++j) {
            // (g^{-1} d_i g g^{-1})^{ij}
            T m = g_inv(i, 0) * dgi(0, 0) * g_inv(0, j);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    if (a == 0 && b == 0) continue;
                    m = m + g_inv(i, a) * dgi(a, b) * g_inv(b, j);
                }
            acc = acc + (0.5 * tr * g_inv(i, j) - m) * grad[static_cast<size_t>(j)];
        }
    }
    return acc;
}

/// Entrywise norm of the normal projection of the immersion's second
/// derivatives: Pi_ij = || d2E_ij - sum_kl g^{kl} <d2E_ij, d_k E> d_l E ||_2.
/// jac is D x d (column i = d_i E); hess[i*d+j] holds the D components of
/// d2E/du_i du_j. The squared norm is floored at 1e-30 before the square
/// root so affine immersions stay differentiable.
template <typename T>
SmallMat<T> second_fundamental_form_point(const SmallMat<T>& g_inv, const SmallMat<T>& jac,
                                          const std::vector<std::vector<T>>& hess) {
    using ad::clamp_min;
    using std::sqrt;
    using ad::sqrt;
    const int d = g_inv.rows();
    const int D = jac.rows();
    SmallMat<T> pi(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const std::vector<T>& h = hess[static_cast<size_t>(i * d + j)];
            // <h, d_k E> for each k
            std::vector<T> dot;
            dot.reserve(static_cast<size_t>(d));
            for (int k = 0; k < d; ++k) {
                T acc = h[0] * jac(0, k);
                for (int a = 1; a < D; ++a) acc = acc + h[static_cast<size_t>(a)] * jac(a, k);
                dot.push_back(acc);
            }
            // coefficient of d_l E in the tangential projection
            std::vector<T> coef;
            coef.reserve(static_cast<size_t>(d));
            for (int l = 0; l < d; ++l) {
                T acc = g_inv(0, l) * dot[0];
                for (int k = 1; k < d; ++k) acc = acc + g_inv(k, l) * dot[static_cast<size_t>(k)];
                coef.push_back(acc);
            }
            T ss = [&] {
                T first = h[0];
                for (int l = 0; l < d; ++l) first = first - coef[static_cast<size_t>(l)] * jac(0, l);
                T acc = first * first;
                for (int a = 1; a < D; ++a) {
                    T na = h[static_cast<size_t>(a)];
                    for (int l = 0; l < d; ++l)
                        na = na - coef[static_cast<size_t>(l)] * jac(a, l);
                    acc = acc + na * na;
                }
                return acc;
            }();
            pi(i, j) = sqrt(clamp_min(ss, 1e-30));
        }
    return pi;
}

/// || lap_g E ||_2 over the D components (the mean-curvature magnitude
/// proxy; proportionality constant taken as 1).
template <typename T>
T mean_curvature_point(const SmallMat<T>& g_inv, const std::vector<SmallMat<T>>& dg,
                       const SmallMat<T>& jac, const std::vector<std::vector<T>>& hess) {
    using ad::clamp_min;
    using std::sqrt;
    using ad::sqrt;
    const int d = g_inv.rows();
    const int D = jac.rows();
    T ss = [&] {
        std::optional<T> acc;
        for (int a = 0; a < D; ++a) {
            std::vector<T> grad;
            grad.reserve(static_cast<size_t>(d));
            for (int i = 0; i < d; ++i) grad.push_back(jac(a, i));
            SmallMat<T> ha(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    ha(i, j) = hess[static_cast<size_t>(i * d + j)][static_cast<size_t>(a)];
            T lap = laplace_beltrami_point(g_inv, dg, grad, ha);
            acc = acc ? (*acc + lap * lap) : (lap * lap);
        }
        return *acc;
    }();
    return sqrt(clamp_min(ss, 1e-30));
}

/// Hhat = Pi - (H/d) g.
template <typename T>
SmallMat<T> traceless_extrinsic_point(const SmallMat<T>& pi, const SmallMat<T>& g, const T& H) {
    const int d = g.rows();
    SmallMat<T> out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = pi(i, j) - (1.0 / d) * H * g(i, j);
    return out;
}

template <typename T>
struct HFlowParts {
    SmallMat<T> total;        // H_ij driving d_t g_ij
    SmallMat<T> scalar_part;  // ambient scalar-curvature term
    SmallMat<T> ricci_part;   // traceless-extrinsic contraction
    SmallMat<T> gamma_part;   // nonnegative diagonal addition
};

/// Contraction H_ij = g^{kl} H_ikjl of the Weyl-replacement four-tensor:
///   H_ij = -(Rbar/(d-2)) g_ij + (1/(d-2)) tr_g(Hhat) g_ij + Hhat_ij
///          + delta_ij |Hhat_ii|   (no sum on the last term).
/// Umbilic immersions (Hhat = 0) keep only the scalar part; the diagonal
/// addition carries an absolute value so its entries are nonnegative.
template <typename T>
HFlowParts<T> h_flow_point(const SmallMat<T>& g, const SmallMat<T>& g_inv,
                           const SmallMat<T>& h_hat, double r_bar) {
    using std::abs;
    using ad::abs;
    const int d = g.rows();
    if (d < 3) throw ConfigError("h_flow_point: needs d >= 3 (formula divides by d-2)");
    T tr = g_inv(0, 0) * h_hat(0, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == 0 && j == 0) continue;
            tr = tr + g_inv(i, j) * h_hat(j, i);
        }
    HFlowParts<T> parts{SmallMat<T>(d, d), SmallMat<T>(d, d), SmallMat<T>(d, d),
                        SmallMat<T>(d, d)};
    const double sc = -r_bar / (d - 2);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            parts.scalar_part(i, j) = sc * g(i, j);
            parts.ricci_part(i, j) = (1.0 / (d - 2)) * tr * g(i, j) + h_hat(i, j);
            parts.gamma_part(i, j) = (i == j) ? abs(h_hat(i, i)) : 0.0 * h_hat(i, j);
            parts.total(i, j) =
                parts.scalar_part(i, j) + parts.ricci_part(i, j) + parts.gamma_part(i, j);
        }
    return parts;
}

/// Scalar curvature of the conformal metric psi^{4/(d-2)} g0 from base-metric
/// quantities: R~ = psi^{-(d+2)/(d-2)} (R(g0) psi - 4 (d-1)/(d-2) lap_g0 psi).
/// Constant psi = c gives R(g0) c^{-4/(d-2)}; psi = 1 returns R(g0).
template <typename T>
T conformal_scalar_point(double r_base, const T& psi, const T& lap_psi, int d) {
    using std::pow;
    using ad::pow;
    if (d < 3) throw ConfigError("conformal_scalar_point: needs d >= 3");
    const double a = 4.0 * (d - 1) / (d - 2);
    const double expo = -(d + 2.0) / (d - 2.0);
    return pow(psi, expo) * (r_base * psi - a * lap_psi);
}

// =====================================================================
// Double-precision metric fields and oracles.
// =====================================================================

/// A time-dependent metric over the chart. Derivatives default to centered
/// finite differences (step 1e-4) of the pointwise evaluation; analytic
/// fields override them.
class MetricField {
  public:
    explicit MetricField(int d) : d_(d) {}
    virtual ~MetricField() = default;
    int dim() const { return d_; }

    virtual Eigen::MatrixXd metric(const Eigen::VectorXd& u, double t) const = 0;
    virtual std::vector<Eigen::MatrixXd> metric_du(const Eigen::VectorXd& u, double t) const;
    virtual Eigen::MatrixXd metric_dt(const Eigen::VectorXd& u, double t) const;

  private:
    int d_;
};

/// Immersion data at one point: value, Jacobian (D x d), and second
/// derivatives hess[i*d+j] (length-D vectors). Second derivatives are exact.
struct ImmersionJet {
    Eigen::VectorXd value;
    Eigen::MatrixXd jac;
    std::vector<Eigen::VectorXd> hess;
    int d = 0, D = 0;
};

/// A time-dependent immersion of the chart into R^D, differentiated by
/// centered finite differences unless overridden.
class ImmersionField {
  public:
    ImmersionField(int d, int D) : d_(d), D_(D) {}
    virtual ~ImmersionField() = default;
    int dim() const { return d_; }
    int ambient_dim() const { return D_; }

    virtual Eigen::VectorXd map(const Eigen::VectorXd& u, double t) const = 0;
    virtual ImmersionJet jet(const Eigen::VectorXd& u, double t) const;

  private:
    int d_, D_;
};

struct CurvatureReport {
    int d = 0;
    std::vector<Eigen::MatrixXd> christoffel;  // [k](i,j) = Gamma^k_ij
    std::vector<double> riemann;               // R_{ijkl} lowered, flat index
    Eigen::MatrixXd ricci;
    double scalar = 0.0;
    std::optional<double> gaussian;  // scalar/2 when d == 2

    double riem(int i, int j, int k, int l) const {
        return riemann[static_cast<size_t>(((i * d + j) * d + k) * d + l)];
    }
};

/// J^T J of the immersion jet.
Eigen::MatrixXd induced_metric(const ImmersionJet& jet);

/// Gamma^k_ij from the field's metric and first derivatives.
std::vector<Eigen::MatrixXd> christoffel_second_kind(const MetricField& field,
                                                     const Eigen::VectorXd& u, double t);

/// Ground-truth curvature from pointwise metric evaluations only (nested
/// centered differences); independent of every proxy above it.
CurvatureReport riemann_oracle(const MetricField& field, const Eigen::VectorXd& u, double t);

/// d = 2 only: K = (1/sqrt det g)(d_2 P - d_1 Q) with P = (sqrt det g/g11)
/// Gamma^2_11 and Q = (sqrt det g/g11) Gamma^2_12, differentiating P and Q
/// directly by centered differences.
double gaussian_curvature_direct(const MetricField& field, const Eigen::VectorXd& u, double t);

struct CirculationEstimate {
    double normalized = 0.0;  // (1/L) sum of the circulation integrand
    double raw = 0.0;         // line integral around the circle = 2 pi r * normalized
};

/// Average of (sqrt det g/g11)(Gamma^2_11 (-sin w) + Gamma^2_12 cos w) over L
/// equispaced angles on the circle of chart radius r about u0 (d = 2 only).
CirculationEstimate circulation_curvature_estimate(const MetricField& field,
                                                   const Eigen::VectorXd& u0, double r, double t,
                                                   int segments,
                                                   const Eigen::VectorXd& bounds_lo,
                                                   const Eigen::VectorXd& bounds_hi);

/// Dense polar quadrature of the curl form d_1 Q - d_2 P over the disc
/// B_r(u0); by Green's theorem this equals the raw circulation.
double circulation_disc_oracle(const MetricField& field, const Eigen::VectorXd& u0, double r,
                               double t, int n_radial = 24, int n_angular = 128);

double volume_element(const MetricField& field, const Eigen::VectorXd& u, double t);
double volume_element_rate(const MetricField& field, const Eigen::VectorXd& u, double t);

/// Expanded-form Laplace-Beltrami of a scalar functor (derivatives of f by
/// centered differences, metric derivatives from the field).
double laplace_beltrami(const MetricField& field,
                        const std::function<double(const Eigen::VectorXd&, double)>& f,
                        const Eigen::VectorXd& u, double t);

/// Independent oracle: divergence form (1/sqrt det g) d_i(sqrt det g g^{ij}
/// d_j f) evaluated by nested centered differences of pointwise quantities.
double laplace_beltrami_divergence_fd(const MetricField& field,
                                      const std::function<double(const Eigen::VectorXd&, double)>& f,
                                      const Eigen::VectorXd& u, double t);

Eigen::MatrixXd second_fundamental_form_proxy(const ImmersionJet& jet,
                                              const Eigen::MatrixXd& g);
double mean_curvature_proxy(const ImmersionJet& jet, const MetricField& field,
                            const Eigen::VectorXd& u, double t);
Eigen::MatrixXd traceless_extrinsic_tensor(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& g,
                                           double H);

struct HFlowPartsD {
    Eigen::MatrixXd total, scalar_part, ricci_part, gamma_part;
};
HFlowPartsD h_flow_tensor(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h_hat, double r_bar);

/// Scalar curvature of psi^{4/(d-2)} g0; R(g0) evaluated by the curvature
/// oracle, lap psi by the expanded form.
double conformal_scalar_curvature(const MetricField& g0,
                                  const std::function<double(const Eigen::VectorXd&, double)>& psi,
                                  const Eigen::VectorXd& u, double t);

// ------------------------------------------------------------- spheres

/// Shrinking round sphere under Ricci flow: r(t) = sqrt(R0^2 - 2(d-1)t).
/// Throws past extinction, reporting the extinction time.
double sphere_radius_ricci(double r0, int d, double t);

/// General form r(t) = sqrt(R0^2 -/+ C (d-1) t) (shrink/expand).
double sphere_radius(double r0, int d, double t, double c, bool expand);

/// r(t) * u / ||u||: projects any point onto the sphere of the current
/// radius. Near-zero inputs are rejected.
Eigen::VectorXd sphere_projection(const Eigen::VectorXd& u, double r0, int d, double t,
                                  bool expand, double c = 2.0);

/// Round-sphere metric r^2 diag(1, sin^2 u1, sin^2 u1 sin^2 u2, ...) in
/// angle coordinates u (first d-1 angles used). Throws near the poles.
Eigen::MatrixXd sphere_metric(int d, double r, const Eigen::VectorXd& angles);
/// Analytic angle derivatives d_k g of the round-sphere metric.
std::vector<Eigen::MatrixXd> sphere_metric_du(int d, double r, const Eigen::VectorXd& angles);

}  // namespace geoflow
