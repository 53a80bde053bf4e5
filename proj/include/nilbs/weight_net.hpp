#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nilbs/transform.hpp"

namespace nilbs {

// Hidden activations are leaky rectifiers with this negative-side slope;
// the output layer is linear.
inline constexpr double kLeakySlope = 0.1;

struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w; // out x in, row-major
    std::vector<double> b; // out
};

// Parameters of the bone-weight field: an MLP mapping the 3B per-bone query
// encoding to B+1 softmax channels (B real bones plus a background channel).
struct WeightNetParams {
    std::vector<int> layer_sizes; // input, hidden..., output
    std::vector<DenseLayer> layers;
    std::uint64_t seed = 0;

    // fan-balanced uniform weights, zero biases, deterministic per seed
    static WeightNetParams init(const std::vector<int>& sizes, std::uint64_t seed);

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t param_count() const;
    // flat parameter order: per layer, all of w then all of b
    double get_param(std::size_t i) const;
    void set_param(std::size_t i, double v);
    void validate() const; // throws ConfigError
};

// Gradient (or optimizer moment) storage shaped like the parameters.
struct NetGrads {
    std::vector<DenseLayer> layers;

    static NetGrads zeros_like(const WeightNetParams& params);
    void zero();
    double get_param(std::size_t i) const;
};

// Per-bone encoding of a query point: the first three components of
// frame_b^{-1} (x, y, 0, 1), concatenated over the B real bones.
std::vector<double> encode_query(std::span<const Transform> frames, Vec2 p);

// Same with the frame inverses already computed (hot path).
std::vector<double> encode_query_pre(std::span<const Transform> inverse_frames, Vec2 p);

std::vector<Transform> invert_all(std::span<const Transform> frames);

// Cached activations of one forward pass; acts[0] is the input, acts.back()
// the logits. Enough to run an exact backward pass.
struct ForwardTape {
    std::vector<std::vector<double>> acts;
};

// throws NonFiniteActivation if any activation is NaN or infinite
std::vector<double> mlp_forward(const WeightNetParams& params, std::span<const double> input,
                                ForwardTape* tape = nullptr);

// max-subtracted, outputs positive and summing to one
std::vector<double> softmax(std::span<const double> logits);

// pullback of upstream through the softmax jacobian
std::vector<double> softmax_backward(std::span<const double> softmax_out,
                                     std::span<const double> upstream);

// softmax(mlp(encode(p))): the pose-conditioned bone weights at p
std::vector<double> weights_at(const WeightNetParams& params,
                               std::span<const Transform> frames, Vec2 p);

// Accumulates exact reverse-mode parameter gradients into grads and returns
// the gradient with respect to the input encoding.
std::vector<double> mlp_backward(const WeightNetParams& params, const ForwardTape& tape,
                                 std::span<const double> upstream, NetGrads& grads);

} // namespace nilbs
