/// @file mlp.cpp
#include "geoflow/mlp.h"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace geoflow {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapW = Eigen::Map<const RowMat>;
using MapWMut = Eigen::Map<RowMat>;
using MapV = Eigen::Map<const VectorXd>;
using MapVMut = Eigen::Map<VectorXd>;

MlpPlan plan_mlp(const MlpSpec& spec, int offset) {
    if (spec.in <= 0 || spec.out <= 0) throw std::invalid_argument("plan_mlp: bad spec");
    MlpPlan plan;
    plan.spec = spec;
    plan.offset = offset;
    int prev = spec.in;
    int cursor = offset;
    auto add_layer = [&](int out) {
        MlpPlan::Layer l{prev, out, cursor, cursor + prev * out};
        cursor += prev * out + out;
        plan.layers.push_back(l);
        prev = out;
    };
    for (int h : spec.hidden) add_layer(h);
    add_layer(spec.out);
    plan.count = cursor - offset;
    return plan;
}

void init_glorot(const MlpPlan& plan, double* params, Rng rng) {
    for (const auto& l : plan.layers) {
        double limit = std::sqrt(6.0 / (l.in + l.out));
        for (int k = 0; k < l.in * l.out; ++k)
            params[l.w_off + k] = rng.uniform(-limit, limit);
        for (int k = 0; k < l.out; ++k) params[l.b_off + k] = 0.0;
    }
}

VectorXd mlp_forward(const MlpPlan& plan, const double* params, const VectorXd& x) {
    VectorXd a = x;
    for (size_t li = 0; li < plan.layers.size(); ++li) {
        const auto& l = plan.layers[li];
        MapW W(params + l.w_off, l.out, l.in);
        MapV b(params + l.b_off, l.out);
        VectorXd z = W * a + b;
        a = (li + 1 < plan.layers.size()) ? z.array().tanh().matrix() : z;
    }
    return a;
}

MatrixXd mlp_forward_batch(const MlpPlan& plan, const double* params, const MatrixXd& X) {
    MatrixXd a = X;
    for (size_t li = 0; li < plan.layers.size(); ++li) {
        const auto& l = plan.layers[li];
        MapW W(params + l.w_off, l.out, l.in);
        MapV b(params + l.b_off, l.out);
        MatrixXd z = (W * a).colwise() + b;
        a = (li + 1 < plan.layers.size()) ? z.array().tanh().matrix() : z;
    }
    return a;
}

// ------------------------------------------------------------ batched node

namespace {
struct BatchCtx {
    MlpPlan plan;
    const double* params;
    double* grad_sink;
    std::vector<MatrixXd> acts;  // acts[0] = input, post-activation after that
    std::vector<int> input_idx;  // tape nodes to scatter into, may be empty
    int out_base = 0;
};
}  // namespace

std::vector<ad::Value> mlp_batch_node(const MlpPlan& plan, const double* params,
                                      double* grad_sink, const MatrixXd& X,
                                      const std::vector<ad::Value>* input_nodes, ad::Tape& tape) {
    const int B = static_cast<int>(X.cols());
    if (X.rows() != plan.spec.in) throw std::invalid_argument("mlp_batch_node: input width");

    auto ctx = std::make_shared<BatchCtx>();
    ctx->plan = plan;
    ctx->params = params;
    ctx->grad_sink = grad_sink;
    ctx->acts.reserve(plan.layers.size() + 1);
    ctx->acts.push_back(X);
    if (input_nodes) {
        if (static_cast<int>(input_nodes->size()) != plan.spec.in * B)
            throw std::invalid_argument("mlp_batch_node: input node count");
        ctx->input_idx.resize(input_nodes->size());
        for (size_t k = 0; k < input_nodes->size(); ++k)
            ctx->input_idx[k] = (*input_nodes)[k].idx;
    }

    for (size_t li = 0; li < plan.layers.size(); ++li) {
        const auto& l = plan.layers[li];
        MapW W(params + l.w_off, l.out, l.in);
        MapV b(params + l.b_off, l.out);
        MatrixXd z = (W * ctx->acts.back()).colwise() + b;
        ctx->acts.push_back((li + 1 < plan.layers.size()) ? z.array().tanh().matrix() : z);
    }

    const MatrixXd& out = ctx->acts.back();
    std::vector<ad::Value> result;
    result.reserve(static_cast<size_t>(plan.spec.out * B));
    ctx->out_base = static_cast<int>(tape.size());
    for (int c = 0; c < B; ++c)
        for (int r = 0; r < plan.spec.out; ++r) result.push_back(tape.leaf(out(r, c)));

    int trigger = static_cast<int>(tape.size()) - 1;
    tape.push_custom(trigger, [ctx, B](ad::Tape& tp) {
        const auto& plan = ctx->plan;
        const int out_dim = plan.spec.out;
        MatrixXd gbar(out_dim, B);
        for (int c = 0; c < B; ++c)
            for (int r = 0; r < out_dim; ++r)
                gbar(r, c) = tp.nodes[static_cast<size_t>(ctx->out_base + c * out_dim + r)].grad;

        for (int li = static_cast<int>(plan.layers.size()) - 1; li >= 0; --li) {
            const auto& l = plan.layers[static_cast<size_t>(li)];
            const MatrixXd& a_prev = ctx->acts[static_cast<size_t>(li)];
            if (ctx->grad_sink) {
                MapWMut Wg(ctx->grad_sink + l.w_off, l.out, l.in);
                MapVMut bg(ctx->grad_sink + l.b_off, l.out);
                Wg += gbar * a_prev.transpose();
                bg += gbar.rowwise().sum();
            }
            if (li == 0 && ctx->input_idx.empty()) break;
            MapW W(ctx->params + l.w_off, l.out, l.in);
            MatrixXd abar = W.transpose() * gbar;
            if (li == 0) {
                for (int c = 0; c < B; ++c)
                    for (int r = 0; r < l.in; ++r)
                        tp.nodes[static_cast<size_t>(ctx->input_idx[static_cast<size_t>(c * l.in + r)])]
                            .grad += abar(r, c);
                break;
            }
            const MatrixXd& a_here = ctx->acts[static_cast<size_t>(li)];
            gbar = (abar.array() * (1.0 - a_here.array().square())).matrix();
        }
    });
    return result;
}

// ---------------------------------------------------------------- jet node

namespace {
struct JetCtx {
    MlpPlan plan;
    const double* params;
    double* grad_sink;
    const JetBasis* basis;
    // Flat (neurons x m) row-major buffers per layer.
    std::vector<std::vector<double>> acts;  // acts[0] = input jets
    std::vector<std::vector<double>> zs;    // hidden pre-activations
    std::vector<std::vector<double>> ss;    // hidden s = 1 - y^2
    std::vector<int> u_idx;
    int out_base = 0;
};
}  // namespace

std::vector<ad::Value> mlp_jet_node(const MlpPlan& plan, const double* params, double* grad_sink,
                                    const std::vector<ad::Value>& u, double t,
                                    const JetBasis& basis, ad::Tape& tape) {
    const int m = basis.size();
    const int n_u = static_cast<int>(u.size());
    if (plan.spec.in != n_u + 1) throw std::invalid_argument("mlp_jet_node: input width");
    if (basis.n_u() != n_u) throw std::invalid_argument("mlp_jet_node: basis width");

    auto ctx = std::make_shared<JetCtx>();
    ctx->plan = plan;
    ctx->params = params;
    ctx->grad_sink = grad_sink;
    ctx->basis = &basis;
    ctx->u_idx.resize(u.size());
    for (size_t k = 0; k < u.size(); ++k) ctx->u_idx[k] = u[k].idx;

    std::vector<double> a0(static_cast<size_t>(plan.spec.in * m), 0.0);
    for (int j = 0; j < n_u; ++j) {
        a0[static_cast<size_t>(j * m)] = u[static_cast<size_t>(j)].val();
        int e = basis.unit(j);
        if (e >= 0) a0[static_cast<size_t>(j * m + e)] = 1.0;
    }
    a0[static_cast<size_t>(n_u * m)] = t;
    {
        int e = basis.unit(n_u);
        if (e >= 0) a0[static_cast<size_t>(n_u * m + e)] = 1.0;
    }
    ctx->acts.push_back(std::move(a0));

    const int n_layers = static_cast<int>(plan.layers.size());
    for (int li = 0; li < n_layers; ++li) {
        const auto& l = plan.layers[static_cast<size_t>(li)];
        const std::vector<double>& prev = ctx->acts.back();
        std::vector<double> z(static_cast<size_t>(l.out * m), 0.0);
        for (int i = 0; i < l.out; ++i) {
            double* zi = z.data() + i * m;
            for (int j = 0; j < l.in; ++j) {
                double w = params[l.w_off + i * l.in + j];
                const double* aj = prev.data() + j * m;
                for (int a = 0; a < m; ++a) zi[a] += w * aj[a];
            }
            zi[0] += params[l.b_off + i];
        }
        if (li + 1 < n_layers) {
            std::vector<double> y(static_cast<size_t>(l.out * m));
            std::vector<double> s(static_cast<size_t>(l.out * m));
            for (int i = 0; i < l.out; ++i)
                tanh_jet(basis, z.data() + i * m, y.data() + i * m, s.data() + i * m);
            ctx->zs.push_back(std::move(z));
            ctx->ss.push_back(std::move(s));
            ctx->acts.push_back(std::move(y));
        } else {
            ctx->acts.push_back(std::move(z));
        }
    }

    const std::vector<double>& out = ctx->acts.back();
    std::vector<ad::Value> result;
    result.reserve(static_cast<size_t>(plan.spec.out * m));
    ctx->out_base = static_cast<int>(tape.size());
    for (int i = 0; i < plan.spec.out; ++i)
        for (int a = 0; a < m; ++a)
            result.push_back(tape.leaf(basis.factorial(a) * out[static_cast<size_t>(i * m + a)]));

    int trigger = static_cast<int>(tape.size()) - 1;
    tape.push_custom(trigger, [ctx](ad::Tape& tp) {
        const auto& plan = ctx->plan;
        const JetBasis& basis = *ctx->basis;
        const int m = basis.size();
        const int n_layers = static_cast<int>(plan.layers.size());

        std::vector<double> gbar(static_cast<size_t>(plan.spec.out * m));
        for (int i = 0; i < plan.spec.out; ++i)
            for (int a = 0; a < m; ++a)
                gbar[static_cast<size_t>(i * m + a)] =
                    basis.factorial(a) *
                    tp.nodes[static_cast<size_t>(ctx->out_base + i * m + a)].grad;

        std::vector<double> ybar_scratch(static_cast<size_t>(m));
        std::vector<double> sbar_scratch(static_cast<size_t>(m));
        for (int li = n_layers - 1; li >= 0; --li) {
            const auto& l = plan.layers[static_cast<size_t>(li)];
            const std::vector<double>& a_prev = ctx->acts[static_cast<size_t>(li)];
            if (ctx->grad_sink) {
                for (int i = 0; i < l.out; ++i) {
                    const double* gi = gbar.data() + i * m;
                    for (int j = 0; j < l.in; ++j) {
                        const double* aj = a_prev.data() + j * m;
                        double acc = 0.0;
                        for (int a = 0; a < m; ++a) acc += gi[a] * aj[a];
                        ctx->grad_sink[l.w_off + i * l.in + j] += acc;
                    }
                    ctx->grad_sink[l.b_off + i] += gi[0];
                }
            }
            std::vector<double> abar(static_cast<size_t>(l.in * m), 0.0);
            for (int i = 0; i < l.out; ++i) {
                const double* gi = gbar.data() + i * m;
                for (int j = 0; j < l.in; ++j) {
                    double w = ctx->params[l.w_off + i * l.in + j];
                    double* aj = abar.data() + j * m;
                    for (int a = 0; a < m; ++a) aj[a] += w * gi[a];
                }
            }
            if (li == 0) {
                for (size_t j = 0; j < ctx->u_idx.size(); ++j)
                    tp.nodes[static_cast<size_t>(ctx->u_idx[j])].grad +=
                        abar[j * static_cast<size_t>(m)];
                break;
            }
            // abar is the adjoint of this hidden layer's tanh outputs.
            const std::vector<double>& z = ctx->zs[static_cast<size_t>(li - 1)];
            const std::vector<double>& y = ctx->acts[static_cast<size_t>(li)];
            const std::vector<double>& s = ctx->ss[static_cast<size_t>(li - 1)];
            const int width = plan.layers[static_cast<size_t>(li - 1)].out;
            std::vector<double> zbar(static_cast<size_t>(width * m), 0.0);
            for (int i = 0; i < width; ++i)
                tanh_jet_adjoint(basis, z.data() + i * m, y.data() + i * m, s.data() + i * m,
                                 abar.data() + i * m, zbar.data() + i * m, ybar_scratch.data(),
                                 sbar_scratch.data());
            gbar = std::move(zbar);
        }
    });
    return result;
}

}  // namespace geoflow
