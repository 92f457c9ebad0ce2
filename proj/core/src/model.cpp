#include <famle/model.hpp>

#include <cmath>
#include <random>
#include <utility>

namespace famle {

namespace {

void check_inputs(const ModelParams& params, const Eigen::Ref<const Eigen::VectorXd>& state,
                  const Eigen::Ref<const Eigen::VectorXd>& action,
                  const EmbeddingVector& embedding)
{
    const auto& a = params.arch;
    if (state.size() != a.state_dim || action.size() != a.action_dim ||
        embedding.size() != a.embed_dim) {
        throw ConfigError("model input dimensions do not match architecture");
    }
    if (!all_finite(state) || !all_finite(action) || !all_finite(embedding)) {
        throw InputError("non-finite model input");
    }
}

void check_batch(const ModelParams& params, const EmbeddingVector& embedding,
                 const TransitionDataset& batch)
{
    if (batch.empty()) throw UsageError("gradient step on an empty batch");
    for (const auto& t : batch.transitions) {
        check_inputs(params, t.state, t.action, embedding);
        if (t.next_state.size() != params.arch.state_dim || !all_finite(t.next_state)) {
            throw InputError("bad next_state in batch");
        }
    }
}

// Input matrix (input_dim x B): normalized state/action block stacked with
// the raw embedding, one column per transition.
Eigen::MatrixXd assemble_inputs(const ModelParams& params, const EmbeddingVector& embedding,
                                const TransitionDataset& batch)
{
    const auto& a = params.arch;
    const int n = batch.size();
    const int sa = a.state_dim + a.action_dim;
    Eigen::MatrixXd X(a.input_dim(), n);
    for (int i = 0; i < n; ++i) {
        const auto& t = batch.transitions[i];
        X.block(0, i, a.state_dim, 1) = t.state;
        X.block(a.state_dim, i, a.action_dim, 1) = t.action;
        X.block(sa, i, a.embed_dim, 1) = embedding;
    }
    if (!params.norm.identity()) {
        X.topRows(sa) =
            (X.topRows(sa).colwise() - params.norm.mean).array().colwise() /
            params.norm.std.array();
    }
    return X;
}

Eigen::MatrixXd assemble_targets(const ModelParams& params, const TransitionDataset& batch)
{
    Eigen::MatrixXd Y(params.arch.state_dim, batch.size());
    for (int i = 0; i < batch.size(); ++i) {
        const auto& t = batch.transitions[i];
        Y.col(i) = t.next_state - t.state;
    }
    return Y;
}

// Forward pass caching every activation; acts[0] is the input matrix,
// acts[l+1] the output of layer l (tanh for hidden layers, raw for the last).
std::vector<Eigen::MatrixXd> forward_cached(const ModelParams& params,
                                            const Eigen::MatrixXd& X)
{
    const int L = static_cast<int>(params.layers.size());
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(L + 1);
    acts.push_back(X);
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd Z =
            (params.layers[l].W * acts.back()).colwise() + params.layers[l].b;
        if (l + 1 < L) Z = Z.array().tanh();
        acts.push_back(std::move(Z));
    }
    return acts;
}

struct Evaluation {
    double loss;
    Gradients grads;
};

// Loss and exact gradients in one backward pass.
Evaluation eval_grad(const ModelParams& params, const EmbeddingVector& embedding,
                     const TransitionDataset& batch)
{
    check_batch(params, embedding, batch);
    const int n = batch.size();
    const int L = static_cast<int>(params.layers.size());

    const Eigen::MatrixXd X = assemble_inputs(params, embedding, batch);
    const Eigen::MatrixXd Y = assemble_targets(params, batch);
    const auto acts = forward_cached(params, X);

    const Eigen::MatrixXd resid = acts.back() - Y;
    Evaluation ev;
    ev.loss = 0.5 * resid.squaredNorm() / n;

    ev.grads.layers.resize(L);
    Eigen::MatrixXd D = resid / n; // dLoss/dZ of the output layer
    for (int l = L - 1; l >= 0; --l) {
        ev.grads.layers[l].W = D * acts[l].transpose();
        ev.grads.layers[l].b = D.rowwise().sum();
        if (l > 0) {
            // through the tanh of the previous hidden layer
            D = (params.layers[l].W.transpose() * D).cwiseProduct(
                Eigen::MatrixXd(1.0 - acts[l].array().square()));
        } else {
            // the embedding is shared across the batch, so its gradient sums
            // over columns; state/action inputs need no gradient
            ev.grads.embedding = (params.layers[0].W.transpose() * D)
                                     .bottomRows(params.arch.embed_dim)
                                     .rowwise()
                                     .sum();
        }
    }
    return ev;
}

bool params_finite(const ModelParams& p)
{
    for (const auto& l : p.layers) {
        if (!l.W.allFinite() || !l.b.allFinite()) return false;
    }
    return true;
}

} // namespace

ModelParams init_params(const ModelArch& arch, std::uint64_t seed)
{
    if (arch.state_dim < 1 || arch.action_dim < 0 || arch.embed_dim < 0) {
        throw ConfigError("invalid model architecture");
    }
    std::mt19937_64 rng(mix_seed(seed, 0));
    ModelParams p;
    p.arch = arch;
    int in = arch.input_dim();
    std::vector<int> outs = arch.hidden;
    outs.push_back(arch.output_dim());
    for (int out : outs) {
        Layer l;
        l.W.resize(out, in);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> u(-scale, scale);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) l.W(r, c) = u(rng);
        }
        l.b = Eigen::VectorXd::Zero(out);
        p.layers.push_back(std::move(l));
        in = out;
    }
    return p;
}

EmbeddingTable init_table(int n, int d, std::uint64_t seed)
{
    if (n < 1 || d < 0) throw ConfigError("embedding table needs n >= 1, d >= 0");
    std::mt19937_64 rng(mix_seed(seed, 1));
    std::normal_distribution<double> g(0.0, 0.1);
    EmbeddingTable table;
    for (int i = 0; i < n; ++i) {
        table.rows.push_back(
            Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return g(rng); }));
    }
    return table;
}

InputNorm compute_input_norm(const std::vector<TransitionDataset>& datasets)
{
    InputNorm norm;
    long count = 0;
    for (const auto& ds : datasets) count += ds.size();
    if (count == 0) throw UsageError("normalization statistics need data");

    const auto& first = datasets.front().transitions.front();
    const int sa = static_cast<int>(first.state.size() + first.action.size());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(sa);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(sa);
    for (const auto& ds : datasets) {
        for (const auto& t : ds.transitions) {
            Eigen::VectorXd x(sa);
            x << t.state, t.action;
            sum += x;
            sumsq += x.cwiseProduct(x);
        }
    }
    norm.mean = sum / static_cast<double>(count);
    Eigen::VectorXd var = sumsq / static_cast<double>(count) - norm.mean.cwiseProduct(norm.mean);
    norm.std = var.cwiseMax(0.0).cwiseSqrt().cwiseMax(InputNorm::kStdFloor);
    return norm;
}

Eigen::VectorXd forward(const ModelParams& params,
                        const Eigen::Ref<const Eigen::VectorXd>& state,
                        const Eigen::Ref<const Eigen::VectorXd>& action,
                        const EmbeddingVector& embedding)
{
    check_inputs(params, state, action, embedding);
    TransitionDataset one;
    Transition t;
    t.state = state;
    t.action = action;
    t.next_state = Eigen::VectorXd::Zero(params.arch.state_dim);
    one.transitions.push_back(std::move(t));
    const Eigen::MatrixXd X = assemble_inputs(params, embedding, one);
    const auto acts = forward_cached(params, X);
    return acts.back().col(0);
}

double nll_loss(const ModelParams& params, const EmbeddingVector& embedding,
                const TransitionDataset& batch)
{
    check_batch(params, embedding, batch);
    const Eigen::MatrixXd X = assemble_inputs(params, embedding, batch);
    const Eigen::MatrixXd Y = assemble_targets(params, batch);
    const auto acts = forward_cached(params, X);
    return 0.5 * (acts.back() - Y).squaredNorm() / batch.size();
}

Gradients grad(const ModelParams& params, const EmbeddingVector& embedding,
               const TransitionDataset& batch)
{
    return eval_grad(params, embedding, batch).grads;
}

std::pair<ModelParams, EmbeddingVector> inner_update(const ModelParams& params,
                                                     const EmbeddingVector& embedding,
                                                     const TransitionDataset& data,
                                                     const InnerUpdateConfig& cfg,
                                                     std::uint64_t batch_seed)
{
    if (cfg.k < 0 || cfg.alpha < 0.0 || cfg.beta < 0.0 || cfg.batch_size < 0) {
        throw ConfigError("invalid inner update config");
    }
    if (data.empty()) throw UsageError("inner update on an empty dataset");

    ModelParams theta = params;
    EmbeddingVector h = embedding;
    const int n = data.size();
    const bool subsample = cfg.batch_size > 0 && n > cfg.batch_size;
    std::mt19937_64 rng = rng_stream(batch_seed, 0x626174);

    for (int step = 0; step < cfg.k; ++step) {
        const TransitionDataset* batch = &data;
        TransitionDataset sub;
        if (subsample) {
            std::uniform_int_distribution<int> pick(0, n - 1);
            sub.transitions.reserve(cfg.batch_size);
            for (int i = 0; i < cfg.batch_size; ++i) {
                sub.transitions.push_back(data.transitions[pick(rng)]);
            }
            batch = &sub;
        }

        const Evaluation ev = eval_grad(theta, h, *batch);
        if (!std::isfinite(ev.loss)) {
            throw DivergedError(step, "non-finite loss in inner update");
        }
        for (size_t l = 0; l < theta.layers.size(); ++l) {
            theta.layers[l].W -= cfg.alpha * ev.grads.layers[l].W;
            theta.layers[l].b -= cfg.alpha * ev.grads.layers[l].b;
        }
        h -= cfg.beta * ev.grads.embedding;
        if (!params_finite(theta) || !all_finite(h)) {
            throw DivergedError(step, "non-finite parameters after inner update step");
        }
    }
    return {std::move(theta), std::move(h)};
}

} // namespace famle
