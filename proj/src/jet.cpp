/// @file jet.cpp
#include "geoflow/jet.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace geoflow {

JetBasis::JetBasis(int n_u, int q_u, int q_t) : n_u_(n_u), q_u_(q_u), q_t_(q_t) {
    if (n_u < 1 || q_u < 0 || q_t < 0) throw std::invalid_argument("JetBasis: bad shape");
    const int nv = n_vars();
    // Enumerate the truncation box in mixed radix, keep |alpha_u| <= q_u.
    std::vector<int> radix(static_cast<size_t>(nv), q_u + 1);
    radix[static_cast<size_t>(nv - 1)] = q_t + 1;
    int box_size = 1;
    for (int r : radix) box_size *= r;
    box_.assign(static_cast<size_t>(box_size), -1);

    std::vector<int> a(static_cast<size_t>(nv), 0);
    for (int code = 0; code < box_size; ++code) {
        int rem = code;
        int sum_u = 0;
        for (int v = 0; v < nv; ++v) {
            a[static_cast<size_t>(v)] = rem % radix[static_cast<size_t>(v)];
            rem /= radix[static_cast<size_t>(v)];
            if (v < n_u_) sum_u += a[static_cast<size_t>(v)];
        }
        if (sum_u > q_u_) continue;
        alpha_.push_back(a);
    }
    // Sort by total order, then lexicographic for a stable layout.
    std::sort(alpha_.begin(), alpha_.end(), [](const auto& x, const auto& y) {
        int sx = std::accumulate(x.begin(), x.end(), 0);
        int sy = std::accumulate(y.begin(), y.end(), 0);
        if (sx != sy) return sx < sy;
        return x < y;
    });
    m_ = static_cast<int>(alpha_.size());

    auto box_code = [&](const std::vector<int>& e) {
        int code = 0, mult = 1;
        for (int v = 0; v < nv; ++v) {
            if (e[static_cast<size_t>(v)] >= radix[static_cast<size_t>(v)]) return -1;
            code += e[static_cast<size_t>(v)] * mult;
            mult *= radix[static_cast<size_t>(v)];
        }
        return code;
    };
    for (int i = 0; i < m_; ++i) box_[static_cast<size_t>(box_code(alpha_[static_cast<size_t>(i)]))] = i;

    fact_.resize(static_cast<size_t>(m_));
    order_.resize(static_cast<size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        double f = 1.0;
        int total = 0;
        for (int v = 0; v < nv; ++v) {
            int e = alpha_[static_cast<size_t>(i)][static_cast<size_t>(v)];
            total += e;
            for (int k = 2; k <= e; ++k) f *= k;
        }
        fact_[static_cast<size_t>(i)] = f;
        order_[static_cast<size_t>(i)] = total;
    }

    add_unit_.assign(static_cast<size_t>(m_ * nv), -1);
    for (int i = 0; i < m_; ++i) {
        for (int v = 0; v < nv; ++v) {
            std::vector<int> e = alpha_[static_cast<size_t>(i)];
            e[static_cast<size_t>(v)] += 1;
            add_unit_[static_cast<size_t>(i * nv + v)] = index(e);
        }
    }
    unit_.resize(static_cast<size_t>(nv));
    for (int v = 0; v < nv; ++v) {
        std::vector<int> e(static_cast<size_t>(nv), 0);
        e[static_cast<size_t>(v)] = 1;
        unit_[static_cast<size_t>(v)] = index(e);
    }

    int max_order = 0;
    for (int o : order_) max_order = std::max(max_order, o);
    by_order_.resize(static_cast<size_t>(max_order + 1));
    for (int i = 0; i < m_; ++i) by_order_[static_cast<size_t>(order_[static_cast<size_t>(i)])].push_back(i);

    // Convolution pairs: the basis is a downward-closed product set, so every
    // componentwise split of delta stays inside it.
    conv_.resize(static_cast<size_t>(m_));
    for (int dlt = 0; dlt < m_; ++dlt) {
        for (int i = 0; i < m_; ++i) {
            bool le = true;
            std::vector<int> rest(static_cast<size_t>(nv));
            for (int v = 0; v < nv; ++v) {
                int r = alpha_[static_cast<size_t>(dlt)][static_cast<size_t>(v)] -
                        alpha_[static_cast<size_t>(i)][static_cast<size_t>(v)];
                if (r < 0) {
                    le = false;
                    break;
                }
                rest[static_cast<size_t>(v)] = r;
            }
            if (!le) continue;
            conv_[static_cast<size_t>(dlt)].emplace_back(i, index(rest));
        }
    }

    // tanh recurrence, pivot = first variable with positive exponent:
    //   alpha_i * y[alpha] = sum_{nu <= alpha - e_i} (nu_i + 1) s[alpha - e_i - nu] z[nu + e_i]
    rec_.resize(static_cast<size_t>(m_));
    pivot_mult_.resize(static_cast<size_t>(m_), 1.0);
    for (int i = 0; i < m_; ++i) {
        if (order_[static_cast<size_t>(i)] == 0) continue;
        const auto& al = alpha_[static_cast<size_t>(i)];
        int piv = 0;
        while (al[static_cast<size_t>(piv)] == 0) ++piv;
        pivot_mult_[static_cast<size_t>(i)] = al[static_cast<size_t>(piv)];
        std::vector<int> am = al;
        am[static_cast<size_t>(piv)] -= 1;
        int am_idx = index(am);
        for (const auto& [nu, rest] : conv_[static_cast<size_t>(am_idx)]) {
            // nu + rest = alpha - e_piv; term couples s[rest] with z[nu + e_piv].
            int z_idx = add_unit(nu, piv);
            double coef = alpha_[static_cast<size_t>(nu)][static_cast<size_t>(piv)] + 1;
            rec_[static_cast<size_t>(i)].push_back({coef, rest, z_idx});
        }
    }
}

int JetBasis::index(const std::vector<int>& a) const {
    int code = 0, mult = 1;
    int sum_u = 0;
    const int nv = n_vars();
    for (int v = 0; v < nv; ++v) {
        int cap = (v < n_u_) ? q_u_ : q_t_;
        if (a[static_cast<size_t>(v)] < 0 || a[static_cast<size_t>(v)] > cap) return -1;
        if (v < n_u_) sum_u += a[static_cast<size_t>(v)];
        code += a[static_cast<size_t>(v)] * mult;
        mult *= cap + 1;
    }
    if (sum_u > q_u_) return -1;
    return box_[static_cast<size_t>(code)];
}

void tanh_jet(const JetBasis& basis, const double* z, double* y, double* s) {
    const int m = basis.size();
    y[0] = std::tanh(z[0]);
    s[0] = 1.0 - y[0] * y[0];
    for (size_t ord = 1; ord < basis.by_order().size(); ++ord) {
        for (int i : basis.by_order()[ord]) {
            double acc = 0.0;
            for (const auto& t : basis.rec_terms(i)) acc += t.coef * s[t.s_idx] * z[t.z_idx];
            y[i] = acc / basis.pivot_mult(i);
        }
        for (int i : basis.by_order()[ord]) {
            double acc = 0.0;
            for (const auto& [a, b] : basis.conv_pairs(i)) acc += y[a] * y[b];
            s[i] = -acc;
        }
    }
    (void)m;
}

void tanh_jet_adjoint(const JetBasis& basis, const double* z, const double* y, const double* s,
                      const double* ybar, double* zbar, double* ybar_scratch,
                      double* sbar_scratch) {
    const int m = basis.size();
    for (int i = 0; i < m; ++i) {
        ybar_scratch[i] = ybar[i];
        sbar_scratch[i] = 0.0;
    }
    const auto& levels = basis.by_order();
    for (int ord = static_cast<int>(levels.size()) - 1; ord >= 1; --ord) {
        // s at this order feeds y at higher orders only; its adjoint is final.
        for (int i : levels[static_cast<size_t>(ord)]) {
            double sb = sbar_scratch[i];
            if (sb == 0.0) continue;
            for (const auto& [a, b] : basis.conv_pairs(i)) {
                ybar_scratch[a] -= sb * y[b];
                ybar_scratch[b] -= sb * y[a];
            }
        }
        for (int i : levels[static_cast<size_t>(ord)]) {
            double yb = ybar_scratch[i] / basis.pivot_mult(i);
            if (yb == 0.0) continue;
            for (const auto& t : basis.rec_terms(i)) {
                sbar_scratch[t.s_idx] += yb * t.coef * z[t.z_idx];
                zbar[t.z_idx] += yb * t.coef * s[t.s_idx];
            }
        }
    }
    ybar_scratch[0] -= 2.0 * y[0] * sbar_scratch[0];
    zbar[0] += ybar_scratch[0] * s[0];
}

}  // namespace geoflow
