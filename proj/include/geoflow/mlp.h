/// @file mlp.h
/// @brief Plain tanh multilayer perceptrons over a flat parameter vector,
///        with tape-fused batched and derivative-jet evaluations.
///
/// Hidden layers are tanh, the final layer is affine. Parameters for every
/// network in a model live in one flat vector; a plan records each layer's
/// offsets so evaluations, gradient sinks, and checkpoints all address the
/// same storage.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "geoflow/jet.h"
#include "geoflow/rng.h"
#include "geoflow/tape.h"

namespace geoflow {

struct MlpSpec {
    int in = 0;
    int out = 0;
    std::vector<int> hidden;
};

struct MlpPlan {
    MlpSpec spec;
    int offset = 0;  // first parameter index in the flat vector
    int count = 0;
    struct Layer {
        int in, out;
        int w_off, b_off;  // absolute offsets; W is row-major (out x in)
    };
    std::vector<Layer> layers;
};

MlpPlan plan_mlp(const MlpSpec& spec, int offset);

/// Glorot-uniform weights, zero biases, drawn in layer/row-major order.
void init_glorot(const MlpPlan& plan, double* params, Rng rng);

/// Forward without a tape (evaluation/serving path).
Eigen::VectorXd mlp_forward(const MlpPlan& plan, const double* params, const Eigen::VectorXd& x);
Eigen::MatrixXd mlp_forward_batch(const MlpPlan& plan, const double* params,
                                  const Eigen::MatrixXd& X);

/// Batched tape evaluation: X columns are samples; the returned Values are
/// laid out [col * out + row]. When input_nodes is non-null (size in*B, same
/// layout), input adjoints scatter into those nodes during backward. When
/// grad_sink is non-null, parameter gradients accumulate at the plan's
/// offsets.
std::vector<ad::Value> mlp_batch_node(const MlpPlan& plan, const double* params,
                                      double* grad_sink, const Eigen::MatrixXd& X,
                                      const std::vector<ad::Value>* input_nodes, ad::Tape& tape);

/// Derivative-jet tape evaluation at one point. u supplies the chart inputs
/// (tape values), t the constant trailing input; the network input width must
/// equal u.size() + 1. Returns derivatives d^alpha f_i as [i * m + a], with m
/// the basis size; adjoints flow to u and to grad_sink.
std::vector<ad::Value> mlp_jet_node(const MlpPlan& plan, const double* params, double* grad_sink,
                                    const std::vector<ad::Value>& u, double t,
                                    const JetBasis& basis, ad::Tape& tape);

}  // namespace geoflow
