#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

#include <famle/common.hpp>

namespace famle {

// A d-dimensional situation embedding fed to the model as an extra input.
// d = 0 is allowed and turns the conditioned model into a plain (s, a)
// dynamics model, which is what the single-prior baselines train.
using EmbeddingVector = Eigen::VectorXd;

// One learnable embedding per meta-training situation, index order stable
// across save/load.
struct EmbeddingTable {
    std::vector<EmbeddingVector> rows;

    int size() const { return static_cast<int>(rows.size()); }
    int dim() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

// One (s, a, s') observation.
struct Transition {
    Eigen::VectorXd state;
    Eigen::VectorXd action;
    Eigen::VectorXd next_state;
};

// Ordered transitions for one situation. Doubles as the sliding observation
// window contents during online adaptation.
struct TransitionDataset {
    std::vector<Transition> transitions;
    std::optional<int> situation_index;

    int size() const { return static_cast<int>(transitions.size()); }
    bool empty() const { return transitions.empty(); }
};

struct ModelArch {
    int state_dim = 0;
    int action_dim = 0;
    int embed_dim = 0;
    std::vector<int> hidden; // sizes of the tanh hidden layers

    int input_dim() const { return state_dim + action_dim + embed_dim; }
    int output_dim() const { return state_dim; }
};

// Per-dimension standardization of the (state, action) input block, computed
// from the meta-training corpus and carried with the parameters. Empty
// vectors mean identity (no normalization). Embedding inputs are never
// normalized.
struct InputNorm {
    Eigen::VectorXd mean; // length state_dim + action_dim, or empty
    Eigen::VectorXd std;  // same length, entries >= kStdFloor

    static constexpr double kStdFloor = 1e-8;
    bool identity() const { return mean.size() == 0; }
};

struct Layer {
    Eigen::MatrixXd W; // out x in
    Eigen::VectorXd b; // out
};

// Feed-forward dynamics model: tanh hidden layers, linear output. Maps the
// normalized (state, action) block concatenated with the raw embedding to
// the predicted mean of the next-state delta s' - s.
struct ModelParams {
    ModelArch arch;
    std::vector<Layer> layers;
    InputNorm norm;
};

// Same shapes as ModelParams::layers plus the gradient with respect to the
// embedding input.
struct Gradients {
    std::vector<Layer> layers;
    Eigen::VectorXd embedding;
};

// k, alpha, beta of the inner SGD update rule. batch_size = 0 means always
// full batch; otherwise datasets larger than batch_size are subsampled
// uniformly per step.
struct InnerUpdateConfig {
    int k = 5;
    double alpha = 0.01;
    double beta = 0.01;
    int batch_size = 256;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ModelParams init_params(const ModelArch& arch, std::uint64_t seed);

// Zero-mean Gaussian entries with std 0.1.
EmbeddingTable init_table(int n, int d, std::uint64_t seed);

// Standardization statistics of the (state, action) input block over every
// transition in the given datasets.
InputNorm compute_input_norm(const std::vector<TransitionDataset>& datasets);

// Predicted mean of s' - s. The predicted next state is state + result.
Eigen::VectorXd forward(const ModelParams& params,
                        const Eigen::Ref<const Eigen::VectorXd>& state,
                        const Eigen::Ref<const Eigen::VectorXd>& action,
                        const EmbeddingVector& embedding);

// Gaussian negative log-likelihood with fixed unit variance, constants
// dropped: mean over the batch of 0.5 * |(s' - s) - forward(s, a, h)|^2.
double nll_loss(const ModelParams& params, const EmbeddingVector& embedding,
                const TransitionDataset& batch);

// Exact backpropagation gradients of nll_loss with respect to every layer
// and the embedding input.
Gradients grad(const ModelParams& params, const EmbeddingVector& embedding,
               const TransitionDataset& batch);

// The update rule U: k SGD steps, each using one mini-batch to update theta
// (rate alpha) and the embedding (rate beta) simultaneously. Inputs are not
// mutated. batch_seed feeds the mini-batch sampler; it is unused when the
// dataset fits in one batch. Throws DivergedError when a step produces a
// non-finite loss.
std::pair<ModelParams, EmbeddingVector> inner_update(const ModelParams& params,
                                                     const EmbeddingVector& embedding,
                                                     const TransitionDataset& data,
                                                     const InnerUpdateConfig& cfg,
                                                     std::uint64_t batch_seed = 0);

} // namespace famle
