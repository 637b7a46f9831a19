/// @file jet.h
/// @brief Truncated multivariate Taylor (jet) arithmetic for network derivatives.
///
/// A jet stores Taylor coefficients c_alpha = (d^alpha f)/alpha! at a point,
/// over a basis of multi-indices {alpha : |alpha_u| <= q_u, alpha_t <= q_t}
/// for n_u chart variables plus one time variable. Propagating jets through
/// a network's layers yields exact mixed partial derivatives at the point;
/// the recurrences below are the forward rules for affine maps and tanh and
/// the hand-derived adjoints used for parameter gradients.
#pragma once

#include <utility>
#include <vector>

namespace geoflow {

class JetBasis {
  public:
    /// n_u chart variables with joint total order <= q_u; one trailing time
    /// variable with order <= q_t. Basis entries sorted by total order.
    JetBasis(int n_u, int q_u, int q_t);

    int n_u() const { return n_u_; }
    int n_vars() const { return n_u_ + 1; }
    int size() const { return m_; }

    const std::vector<int>& exponents(int idx) const { return alpha_[static_cast<size_t>(idx)]; }
    double factorial(int idx) const { return fact_[static_cast<size_t>(idx)]; }
    int order(int idx) const { return order_[static_cast<size_t>(idx)]; }

    /// Basis index of a multi-index, -1 if outside the truncation box.
    int index(const std::vector<int>& a) const;
    /// Basis index of exponents(idx) + e_var, -1 if outside.
    int add_unit(int idx, int var) const { return add_unit_[static_cast<size_t>(idx * n_vars() + var)]; }
    /// Index of the first-order entry e_var.
    int unit(int var) const { return unit_[static_cast<size_t>(var)]; }

    /// All (i,j) with exponents(i) + exponents(j) = exponents(delta).
    const std::vector<std::pair<int, int>>& conv_pairs(int delta) const {
        return conv_[static_cast<size_t>(delta)];
    }
    /// Basis indices grouped by total order, ascending.
    const std::vector<std::vector<int>>& by_order() const { return by_order_; }

    /// tanh recurrence terms for entry alpha (order >= 1), pivot divisor
    /// alpha_i: y[alpha] = (1/alpha_i) * sum coef * s[s_idx] * z[z_idx].
    struct RecTerm {
        double coef;
        int s_idx;
        int z_idx;
    };
    const std::vector<RecTerm>& rec_terms(int idx) const { return rec_[static_cast<size_t>(idx)]; }
    double pivot_mult(int idx) const { return pivot_mult_[static_cast<size_t>(idx)]; }

  private:
    int n_u_, q_u_, q_t_, m_;
    std::vector<std::vector<int>> alpha_;
    std::vector<double> fact_;
    std::vector<int> order_;
    std::vector<int> add_unit_;
    std::vector<int> unit_;
    std::vector<int> box_;  // mixed-radix lookup table
    std::vector<std::vector<std::pair<int, int>>> conv_;
    std::vector<std::vector<int>> by_order_;
    std::vector<std::vector<RecTerm>> rec_;
    std::vector<double> pivot_mult_;
};

/// y = tanh(z) on jets; also emits s = 1 - y*y (needed by the adjoint and by
/// higher orders of the recurrence itself). Buffers hold basis.size() values.
void tanh_jet(const JetBasis& basis, const double* z, double* y, double* s);

/// Reverse-mode companion: given upstream ybar, accumulates into zbar.
/// ybar_scratch/sbar_scratch are caller-provided workspaces (basis.size()).
void tanh_jet_adjoint(const JetBasis& basis, const double* z, const double* y, const double* s,
                      const double* ybar, double* zbar, double* ybar_scratch,
                      double* sbar_scratch);

}  // namespace geoflow
