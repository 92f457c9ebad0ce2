#pragma once

#include <Eigen/Core>

#include <cstring>
#include <random>
#include <vector>

#include <famle/model.hpp>

namespace testutil {

inline bool bit_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

inline bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

inline bool bit_equal(const famle::ModelParams& a, const famle::ModelParams& b)
{
    if (a.layers.size() != b.layers.size()) return false;
    for (size_t i = 0; i < a.layers.size(); ++i) {
        if (!bit_equal(a.layers[i].W, b.layers[i].W)) return false;
        if (!bit_equal(a.layers[i].b, b.layers[i].b)) return false;
    }
    if (!bit_equal(a.norm.mean, b.norm.mean)) return false;
    if (!bit_equal(a.norm.std, b.norm.std)) return false;
    return true;
}

// Random dataset with given dimensions; values in [-1, 1].
inline famle::TransitionDataset random_dataset(int n, int state_dim, int action_dim,
                                               std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    famle::TransitionDataset ds;
    for (int i = 0; i < n; ++i) {
        famle::Transition t;
        t.state = Eigen::VectorXd::NullaryExpr(state_dim, [&](Eigen::Index) { return u(rng); });
        t.action = Eigen::VectorXd::NullaryExpr(action_dim, [&](Eigen::Index) { return u(rng); });
        t.next_state =
            Eigen::VectorXd::NullaryExpr(state_dim, [&](Eigen::Index) { return u(rng); });
        ds.transitions.push_back(std::move(t));
    }
    return ds;
}

inline famle::EmbeddingVector random_embedding(int d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return u(rng); });
}

} // namespace testutil
