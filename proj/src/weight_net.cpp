#include "nilbs/weight_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nilbs/errors.hpp"
#include "nilbs/rng.hpp"

namespace nilbs {

WeightNetParams WeightNetParams::init(const std::vector<int>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) {
        throw ConfigError("network needs at least an input and an output layer");
    }
    WeightNetParams params;
    params.layer_sizes = sizes;
    params.seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        layer.in = sizes[l];
        layer.out = sizes[l + 1];
        if (layer.in <= 0 || layer.out <= 0) {
            throw ConfigError("layer sizes must be positive");
        }
        const double bound = std::sqrt(6.0 / (layer.in + layer.out));
        layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
        for (double& w : layer.w) {
            w = rng.uniform(-bound, bound);
        }
        layer.b.assign(static_cast<std::size_t>(layer.out), 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

std::size_t WeightNetParams::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.w.size() + layer.b.size();
    }
    return n;
}

namespace {

// maps a flat index into (layer, weight-or-bias, offset)
template <typename Layers>
auto* locate_param(Layers& layers, std::size_t i) {
    for (auto& layer : layers) {
        if (i < layer.w.size()) {
            return &layer.w[i];
        }
        i -= layer.w.size();
        if (i < layer.b.size()) {
            return &layer.b[i];
        }
        i -= layer.b.size();
    }
    throw ConfigError("flat parameter index out of range");
}

} // namespace

double WeightNetParams::get_param(std::size_t i) const { return *locate_param(layers, i); }

void WeightNetParams::set_param(std::size_t i, double v) { *locate_param(layers, i) = v; }

void WeightNetParams::validate() const {
    if (layer_sizes.size() < 2 || layers.size() + 1 != layer_sizes.size()) {
        throw ConfigError("layer list does not match layer_sizes");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const DenseLayer& layer = layers[l];
        if (layer.in != layer_sizes[l] || layer.out != layer_sizes[l + 1]) {
            throw ConfigError("layer " + std::to_string(l) + " dimensions do not chain");
        }
        if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
            layer.b.size() != static_cast<std::size_t>(layer.out)) {
            throw ConfigError("layer " + std::to_string(l) + " storage size mismatch");
        }
        for (double v : layer.w) {
            if (!std::isfinite(v)) {
                throw ConfigError("non-finite weight in layer " + std::to_string(l));
            }
        }
        for (double v : layer.b) {
            if (!std::isfinite(v)) {
                throw ConfigError("non-finite bias in layer " + std::to_string(l));
            }
        }
    }
}

NetGrads NetGrads::zeros_like(const WeightNetParams& params) {
    NetGrads g;
    g.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        DenseLayer zero;
        zero.in = layer.in;
        zero.out = layer.out;
        zero.w.assign(layer.w.size(), 0.0);
        zero.b.assign(layer.b.size(), 0.0);
        g.layers.push_back(std::move(zero));
    }
    return g;
}

void NetGrads::zero() {
    for (auto& layer : layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

double NetGrads::get_param(std::size_t i) const { return *locate_param(layers, i); }

std::vector<Transform> invert_all(std::span<const Transform> frames) {
    std::vector<Transform> inv(frames.size());
    for (std::size_t b = 0; b < frames.size(); ++b) {
        inv[b] = invert(frames[b]);
    }
    return inv;
}

std::vector<double> encode_query_pre(std::span<const Transform> inverse_frames, Vec2 p) {
    std::vector<double> features(inverse_frames.size() * 3);
    const Vec4 h = embed(p);
    for (std::size_t b = 0; b < inverse_frames.size(); ++b) {
        const Vec4 local = inverse_frames[b].apply(h);
        features[b * 3 + 0] = local.x;
        features[b * 3 + 1] = local.y;
        features[b * 3 + 2] = local.z;
    }
    return features;
}

std::vector<double> encode_query(std::span<const Transform> frames, Vec2 p) {
    return encode_query_pre(invert_all(frames), p);
}

std::vector<double> mlp_forward(const WeightNetParams& params, std::span<const double> input,
                                ForwardTape* tape) {
    if (static_cast<int>(input.size()) != params.input_dim()) {
        throw ConfigError("encoding length " + std::to_string(input.size()) +
                          " does not match network input " +
                          std::to_string(params.input_dim()));
    }
    std::vector<double> act(input.begin(), input.end());
    if (tape) {
        tape->acts.clear();
        tape->acts.push_back(act);
    }
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const DenseLayer& layer = params.layers[l];
        std::vector<double> next(static_cast<std::size_t>(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            const double* row = &layer.w[static_cast<std::size_t>(o) * layer.in];
            double z = layer.b[static_cast<std::size_t>(o)];
            for (int i = 0; i < layer.in; ++i) {
                z += row[i] * act[static_cast<std::size_t>(i)];
            }
            if (l != last && z < 0.0) {
                z *= kLeakySlope;
            }
            if (!std::isfinite(z)) {
                throw NonFiniteActivation("non-finite activation in layer " +
                                          std::to_string(l));
            }
            next[static_cast<std::size_t>(o)] = z;
        }
        act = std::move(next);
        if (tape) {
            tape->acts.push_back(act);
        }
    }
    return act;
}

std::vector<double> softmax(std::span<const double> logits) {
    double top = logits[0];
    for (double v : logits) {
        top = std::max(top, v);
    }
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

std::vector<double> softmax_backward(std::span<const double> softmax_out,
                                     std::span<const double> upstream) {
    double inner = 0.0;
    for (std::size_t i = 0; i < softmax_out.size(); ++i) {
        inner += upstream[i] * softmax_out[i];
    }
    std::vector<double> grad(softmax_out.size());
    for (std::size_t i = 0; i < softmax_out.size(); ++i) {
        grad[i] = softmax_out[i] * (upstream[i] - inner);
    }
    return grad;
}

std::vector<double> weights_at(const WeightNetParams& params,
                               std::span<const Transform> frames, Vec2 p) {
    return softmax(mlp_forward(params, encode_query(frames, p)));
}

std::vector<double> mlp_backward(const WeightNetParams& params, const ForwardTape& tape,
                                 std::span<const double> upstream, NetGrads& grads) {
    if (tape.acts.size() != params.layers.size() + 1) {
        throw ConfigError("tape does not match network depth");
    }
    std::vector<double> delta(upstream.begin(), upstream.end());
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const DenseLayer& layer = params.layers[li];
        const std::vector<double>& in_act = tape.acts[li];
        const std::vector<double>& out_act = tape.acts[li + 1];
        if (li != last) {
            // leaky rectifier mask; the sign of the post-activation matches
            // the sign of the pre-activation
            for (int o = 0; o < layer.out; ++o) {
                if (out_act[static_cast<std::size_t>(o)] < 0.0) {
                    delta[static_cast<std::size_t>(o)] *= kLeakySlope;
                }
            }
        }
        DenseLayer& g = grads.layers[li];
        std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const double* row = &layer.w[static_cast<std::size_t>(o) * layer.in];
            double* grow = &g.w[static_cast<std::size_t>(o) * layer.in];
            g.b[static_cast<std::size_t>(o)] += d;
            for (int i = 0; i < layer.in; ++i) {
                grow[i] += d * in_act[static_cast<std::size_t>(i)];
                prev[static_cast<std::size_t>(i)] += d * row[i];
            }
        }
        delta = std::move(prev);
    }
    return delta;
}

} // namespace nilbs
