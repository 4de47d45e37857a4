#pragma once

// Minimal feedforward-network toolkit: forward pass, exact reverse-mode
// gradients, SGD/Adam updates and target-network blending. The networks in
// this project are tiny (two hidden layers of 2 and 4 units), so everything
// is plain loops over flat arrays.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emplab/rng.hpp"

namespace emplab {

enum class Activation { relu, tanh, sigmoid, identity };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation: " + s);
}

inline double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::identity: return z;
    }
    return z;
}

// Derivative expressed through the activation value y = f(z).
inline double activation_grad(Activation a, double y) {
    switch (a) {
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: return 1.0 - y * y;
        case Activation::sigmoid: return y * (1.0 - y);
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major [out][in]
    std::vector<double> b;
    Activation act = Activation::identity;
};

struct FeedforwardNetwork {
    std::vector<Layer> layers;

    int input_size() const { return layers.empty() ? 0 : layers.front().in; }
    int output_size() const { return layers.empty() ? 0 : layers.back().out; }

    bool same_architecture(const FeedforwardNetwork& other) const {
        if (layers.size() != other.layers.size()) return false;
        for (std::size_t l = 0; l < layers.size(); ++l)
            if (layers[l].in != other.layers[l].in || layers[l].out != other.layers[l].out ||
                layers[l].act != other.layers[l].act)
                return false;
        return true;
    }

    bool finite() const {
        for (const auto& l : layers) {
            for (double v : l.w)
                if (!std::isfinite(v)) return false;
            for (double v : l.b)
                if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

// Fully connected net over the given layer widths. Weights start uniform in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases at zero.
inline FeedforwardNetwork make_mlp(const std::vector<int>& dims, Activation hidden,
                                   Activation output, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output widths");
    FeedforwardNetwork net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        if (layer.in < 1 || layer.out < 1) throw std::invalid_argument("make_mlp: layer widths must be >= 1");
        layer.act = (l + 2 == dims.size()) ? output : hidden;
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
        layer.b.assign(layer.out, 0.0);
        for (double& v : layer.w) v = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

inline std::vector<double> forward(const FeedforwardNetwork& net, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != net.input_size())
        throw std::invalid_argument("forward: input width mismatch");
    std::vector<double> x = input;
    std::vector<double> y;
    for (const auto& layer : net.layers) {
        y.assign(layer.out, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            double z = layer.b[o];
            const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) z += wrow[i] * x[i];
            y[o] = apply_activation(layer.act, z);
        }
        x.swap(y);
    }
    return x;
}

// Gradients of dot(output, upstream) w.r.t. every parameter, plus the
// gradient w.r.t. the input (needed to chain the critic into the actor).
struct NetGradients {
    std::vector<std::vector<double>> dw;
    std::vector<std::vector<double>> db;
    std::vector<double> dinput;

    void init_like(const FeedforwardNetwork& net) {
        dw.resize(net.layers.size());
        db.resize(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            dw[l].assign(net.layers[l].w.size(), 0.0);
            db[l].assign(net.layers[l].b.size(), 0.0);
        }
        dinput.assign(net.input_size(), 0.0);
    }

    void accumulate(const NetGradients& other) {
        for (std::size_t l = 0; l < dw.size(); ++l) {
            for (std::size_t k = 0; k < dw[l].size(); ++k) dw[l][k] += other.dw[l][k];
            for (std::size_t k = 0; k < db[l].size(); ++k) db[l][k] += other.db[l][k];
        }
        for (std::size_t k = 0; k < dinput.size(); ++k) dinput[k] += other.dinput[k];
    }

    void scale(double s) {
        for (auto& layer : dw)
            for (double& v : layer) v *= s;
        for (auto& layer : db)
            for (double& v : layer) v *= s;
        for (double& v : dinput) v *= s;
    }
};

inline NetGradients backward(const FeedforwardNetwork& net, const std::vector<double>& input,
                             const std::vector<double>& upstream) {
    if (static_cast<int>(input.size()) != net.input_size())
        throw std::invalid_argument("backward: input width mismatch");
    if (static_cast<int>(upstream.size()) != net.output_size())
        throw std::invalid_argument("backward: upstream gradient width mismatch");

    const std::size_t n_layers = net.layers.size();
    std::vector<std::vector<double>> acts(n_layers + 1);
    acts[0] = input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& layer = net.layers[l];
        acts[l + 1].assign(layer.out, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            double z = layer.b[o];
            const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) z += wrow[i] * acts[l][i];
            acts[l + 1][o] = apply_activation(layer.act, z);
        }
    }

    NetGradients g;
    g.init_like(net);
    std::vector<double> delta = upstream;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = net.layers[l];
        std::vector<double> prev_delta(layer.in, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[o] * activation_grad(layer.act, acts[l + 1][o]);
            g.db[l][o] = d;
            double* dwrow = g.dw[l].data() + static_cast<std::size_t>(o) * layer.in;
            const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) {
                dwrow[i] = d * acts[l][i];
                prev_delta[i] += d * wrow[i];
            }
        }
        delta.swap(prev_delta);
    }
    g.dinput = std::move(delta);
    return g;
}

struct Optimizer {
    enum class Kind { sgd, adam };

    Kind kind = Kind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    // Adam moments, lazily shaped to the first net they are applied to.
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
    long long t = 0;
};

namespace detail {

inline void adam_step(std::vector<double>& param, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v, const Optimizer& opt,
                      double bc1, double bc2) {
    for (std::size_t k = 0; k < param.size(); ++k) {
        m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * grad[k];
        v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * grad[k] * grad[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        param[k] -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.eps);
    }
}

}  // namespace detail

// One optimizer step. NaN/Inf in a gradient is treated as a training
// divergence and rejected before any parameter is touched.
inline void apply_update(FeedforwardNetwork& net, const NetGradients& grads, Optimizer& opt) {
    if (grads.dw.size() != net.layers.size())
        throw std::invalid_argument("apply_update: gradient shape mismatch");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (grads.dw[l].size() != net.layers[l].w.size() || grads.db[l].size() != net.layers[l].b.size())
            throw std::invalid_argument("apply_update: gradient shape mismatch");
        for (double v : grads.dw[l])
            if (!std::isfinite(v)) throw std::runtime_error("apply_update: non-finite gradient");
        for (double v : grads.db[l])
            if (!std::isfinite(v)) throw std::runtime_error("apply_update: non-finite gradient");
    }

    if (opt.kind == Optimizer::Kind::sgd) {
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            auto& layer = net.layers[l];
            for (std::size_t k = 0; k < layer.w.size(); ++k) layer.w[k] -= opt.learning_rate * grads.dw[l][k];
            for (std::size_t k = 0; k < layer.b.size(); ++k) layer.b[k] -= opt.learning_rate * grads.db[l][k];
        }
        return;
    }

    if (opt.m_w.empty()) {
        opt.m_w.resize(net.layers.size());
        opt.v_w.resize(net.layers.size());
        opt.m_b.resize(net.layers.size());
        opt.v_b.resize(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            opt.m_w[l].assign(net.layers[l].w.size(), 0.0);
            opt.v_w[l].assign(net.layers[l].w.size(), 0.0);
            opt.m_b[l].assign(net.layers[l].b.size(), 0.0);
            opt.v_b[l].assign(net.layers[l].b.size(), 0.0);
        }
    }
    opt.t += 1;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        detail::adam_step(net.layers[l].w, grads.dw[l], opt.m_w[l], opt.v_w[l], opt, bc1, bc2);
        detail::adam_step(net.layers[l].b, grads.db[l], opt.m_b[l], opt.v_b[l], opt, bc1, bc2);
    }
}

// theta_target <- tau * theta_source + (1 - tau) * theta_target. tau = 1
// reproduces a hard copy.
inline void soft_update(FeedforwardNetwork& target, const FeedforwardNetwork& source, double tau) {
    if (!target.same_architecture(source))
        throw std::invalid_argument("soft_update: architecture mismatch");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau outside [0,1]");
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        auto& t = target.layers[l];
        const auto& s = source.layers[l];
        for (std::size_t k = 0; k < t.w.size(); ++k) t.w[k] = tau * s.w[k] + (1.0 - tau) * t.w[k];
        for (std::size_t k = 0; k < t.b.size(); ++k) t.b[k] = tau * s.b[k] + (1.0 - tau) * t.b[k];
    }
}

// --- checkpoint text format -------------------------------------------------
//
//   net 1
//   layers <L>
//   layer <in> <out> <activation>
//   w <in*out values>
//   b <out values>
//
// Doubles are written with 17 significant digits, which round-trips IEEE
// doubles bit-exactly.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void save_network(std::ostream& os, const FeedforwardNetwork& net) {
    os << "net 1\n";
    os << "layers " << net.layers.size() << "\n";
    for (const auto& layer : net.layers) {
        os << "layer " << layer.in << " " << layer.out << " " << to_string(layer.act) << "\n";
        os << "w";
        for (double v : layer.w) os << " " << format_double(v);
        os << "\nb";
        for (double v : layer.b) os << " " << format_double(v);
        os << "\n";
    }
}

inline FeedforwardNetwork load_network(std::istream& is) {
    auto expect = [&](const std::string& tag) {
        std::string tok;
        if (!(is >> tok) || tok != tag)
            throw std::runtime_error("load_network: malformed checkpoint, expected '" + tag + "'");
    };
    expect("net");
    int version = 0;
    is >> version;
    if (version != 1) throw std::runtime_error("load_network: unsupported version");
    expect("layers");
    std::size_t n_layers = 0;
    is >> n_layers;
    FeedforwardNetwork net;
    for (std::size_t l = 0; l < n_layers; ++l) {
        expect("layer");
        Layer layer;
        std::string act;
        is >> layer.in >> layer.out >> act;
        layer.act = activation_from_string(act);
        if (layer.in < 1 || layer.out < 1) throw std::runtime_error("load_network: bad layer dims");
        layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
        layer.b.resize(layer.out);
        expect("w");
        for (double& v : layer.w) is >> v;
        expect("b");
        for (double& v : layer.b) is >> v;
        if (!is) throw std::runtime_error("load_network: truncated checkpoint");
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace emplab
