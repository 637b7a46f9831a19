/// @file analytic_metrics.h
/// @brief Closed-form metric fields and immersions used by tests, the verify
///        suite, and as initial metrics for the latent flow.
///
/// Analytic fields override the finite-difference derivative defaults so the
/// oracles (which difference pointwise values only) check against a second,
/// independent evaluation path.
#pragma once

#include <functional>
#include <memory>

#include "geoflow/geometry.h"
#include "geoflow/rng.h"

namespace geoflow {

class ConstantMetricField : public MetricField {
  public:
    explicit ConstantMetricField(Eigen::MatrixXd g)
        : MetricField(static_cast<int>(g.rows())), g_(std::move(g)) {}
    Eigen::MatrixXd metric(const Eigen::VectorXd&, double) const override { return g_; }
    std::vector<Eigen::MatrixXd> metric_du(const Eigen::VectorXd&, double) const override {
        return std::vector<Eigen::MatrixXd>(static_cast<size_t>(dim()),
                                            Eigen::MatrixXd::Zero(dim(), dim()));
    }
    Eigen::MatrixXd metric_dt(const Eigen::VectorXd&, double) const override {
        return Eigen::MatrixXd::Zero(dim(), dim());
    }

  private:
    Eigen::MatrixXd g_;
};

inline ConstantMetricField flat_metric_field(int d) {
    return ConstantMetricField(Eigen::MatrixXd::Identity(d, d));
}

/// Static round sphere of radius r in angle coordinates.
class SphereMetricField : public MetricField {
  public:
    SphereMetricField(int d, double r) : MetricField(d), r_(r) {}
    Eigen::MatrixXd metric(const Eigen::VectorXd& u, double) const override {
        return sphere_metric(dim(), r_, u);
    }
    std::vector<Eigen::MatrixXd> metric_du(const Eigen::VectorXd& u, double) const override {
        return sphere_metric_du(dim(), r_, u);
    }
    Eigen::MatrixXd metric_dt(const Eigen::VectorXd&, double) const override {
        return Eigen::MatrixXd::Zero(dim(), dim());
    }

  private:
    double r_;
};

/// Round sphere shrinking under Ricci flow: r(t)^2 = R0^2 - 2(d-1)t, so
/// d_t g = -2(d-1) g / r(t)^2 exactly.
class ShrinkingSphereField : public MetricField {
  public:
    ShrinkingSphereField(int d, double r0) : MetricField(d), r0_(r0) {}
    Eigen::MatrixXd metric(const Eigen::VectorXd& u, double t) const override {
        return sphere_metric(dim(), sphere_radius_ricci(r0_, dim(), t), u);
    }
    std::vector<Eigen::MatrixXd> metric_du(const Eigen::VectorXd& u, double t) const override {
        return sphere_metric_du(dim(), sphere_radius_ricci(r0_, dim(), t), u);
    }
    Eigen::MatrixXd metric_dt(const Eigen::VectorXd& u, double t) const override {
        double r = sphere_radius_ricci(r0_, dim(), t);
        return (-2.0 * (dim() - 1) / (r * r)) * metric(u, t);
    }

  private:
    double r0_;
};

/// g = e^{2 lambda(u)} I on a 2-d chart with a fixed trigonometric lambda;
/// its Gaussian curvature is -e^{-2 lambda} (Euclidean) lap lambda.
class ConformalFlatField2D : public MetricField {
  public:
    ConformalFlatField2D(double a, double b, double c) : MetricField(2), a_(a), b_(b), c_(c) {}

    double lambda(const Eigen::VectorXd& u) const {
        return a_ * std::sin(u(0)) * std::cos(u(1)) + b_ * std::cos(2.0 * u(0)) +
               c_ * std::sin(u(0) + u(1));
    }
    double lambda_laplacian(const Eigen::VectorXd& u) const {
        return -2.0 * a_ * std::sin(u(0)) * std::cos(u(1)) - 4.0 * b_ * std::cos(2.0 * u(0)) -
               2.0 * c_ * std::sin(u(0) + u(1));
    }

    Eigen::MatrixXd metric(const Eigen::VectorXd& u, double) const override {
        return std::exp(2.0 * lambda(u)) * Eigen::MatrixXd::Identity(2, 2);
    }
    std::vector<Eigen::MatrixXd> metric_du(const Eigen::VectorXd& u, double t) const override {
        Eigen::VectorXd grad(2);
        grad(0) = a_ * std::cos(u(0)) * std::cos(u(1)) - 2.0 * b_ * std::sin(2.0 * u(0)) +
                  c_ * std::cos(u(0) + u(1));
        grad(1) = -a_ * std::sin(u(0)) * std::sin(u(1)) + c_ * std::cos(u(0) + u(1));
        Eigen::MatrixXd g = metric(u, t);
        return {2.0 * grad(0) * g, 2.0 * grad(1) * g};
    }
    Eigen::MatrixXd metric_dt(const Eigen::VectorXd&, double) const override {
        return Eigen::MatrixXd::Zero(2, 2);
    }

  private:
    double a_, b_, c_;
};

/// Randomized smooth positive-definite metric with analytic derivatives:
/// g = A^T A + 1/2 I, A(u,t) = A0(u) + t A1(u), A0/A1 first-harmonic
/// trigonometric polynomials with coefficients drawn from the seed.
class RandomSmoothMetricField : public MetricField {
  public:
    RandomSmoothMetricField(int d, std::uint64_t seed, double amplitude = 0.25);
    Eigen::MatrixXd metric(const Eigen::VectorXd& u, double t) const override;
    std::vector<Eigen::MatrixXd> metric_du(const Eigen::VectorXd& u, double t) const override;
    Eigen::MatrixXd metric_dt(const Eigen::VectorXd& u, double t) const override;

  private:
    Eigen::MatrixXd factor(const Eigen::VectorXd& u, double t) const;
    Eigen::MatrixXd factor_du(const Eigen::VectorXd& u, double t, int k) const;
    Eigen::MatrixXd factor_dt(const Eigen::VectorXd& u) const;

    Eigen::MatrixXd base_;
    std::vector<Eigen::MatrixXd> sin_coef_, cos_coef_;  // per chart variable
    Eigen::MatrixXd t_coef_, t_sin_coef_;
};

/// psi(u,t)^{4/(d-2)} * g0(u,t): the conformally changed metric, exposed as
/// a plain pointwise field so the curvature oracle can differentiate it.
class ConformalMetricField : public MetricField {
  public:
    ConformalMetricField(const MetricField& base,
                         std::function<double(const Eigen::VectorXd&, double)> psi)
        : MetricField(base.dim()), base_(base), psi_(std::move(psi)) {}
    Eigen::MatrixXd metric(const Eigen::VectorXd& u, double t) const override {
        double p = std::max(psi_(u, t), kPsiMin);
        return std::pow(p, 4.0 / (dim() - 2)) * base_.metric(u, t);
    }

  private:
    const MetricField& base_;
    std::function<double(const Eigen::VectorXd&, double)> psi_;
};

/// Metric defined by an arbitrary pointwise functor (derivatives by the
/// default centered differences).
class FunctionMetricField : public MetricField {
  public:
    FunctionMetricField(int d,
                        std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)> fn)
        : MetricField(d), fn_(std::move(fn)) {}
    Eigen::MatrixXd metric(const Eigen::VectorXd& u, double t) const override {
        return fn_(u, t);
    }

  private:
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)> fn_;
};

// ------------------------------------------------------------ immersions

/// Standard nested-sine embedding of the d-sphere of radius r into R^{d+1},
/// evaluated at angle coordinates.
class SphereImmersionField : public ImmersionField {
  public:
    SphereImmersionField(int d, double r) : ImmersionField(d, d + 1), r_(r) {}
    Eigen::VectorXd map(const Eigen::VectorXd& u, double) const override {
        Eigen::VectorXd x(ambient_dim());
        double prod = r_;
        for (int k = 0; k < dim(); ++k) {
            x(k) = prod * std::cos(u(k));
            prod *= std::sin(u(k));
        }
        x(dim()) = prod;
        return x;
    }

  private:
    double r_;
};

/// E(u) = A u + b: zero second derivatives.
class AffineImmersionField : public ImmersionField {
  public:
    AffineImmersionField(Eigen::MatrixXd a, Eigen::VectorXd b)
        : ImmersionField(static_cast<int>(a.cols()), static_cast<int>(a.rows())),
          a_(std::move(a)),
          b_(std::move(b)) {}
    Eigen::VectorXd map(const Eigen::VectorXd& u, double) const override { return a_ * u + b_; }

  private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
};

/// u -> (u, 0, ..., 0): the identity chart padded into R^D.
class IdentityPadImmersionField : public ImmersionField {
  public:
    IdentityPadImmersionField(int d, int D) : ImmersionField(d, D) {}
    Eigen::VectorXd map(const Eigen::VectorXd& u, double) const override {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(ambient_dim());
        x.head(dim()) = u;
        return x;
    }
};

/// Immersion defined by an arbitrary pointwise functor.
class FunctionImmersionField : public ImmersionField {
  public:
    FunctionImmersionField(int d, int D,
                           std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> fn)
        : ImmersionField(d, D), fn_(std::move(fn)) {}
    Eigen::VectorXd map(const Eigen::VectorXd& u, double t) const override { return fn_(u, t); }

  private:
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> fn_;
};

}  // namespace geoflow
