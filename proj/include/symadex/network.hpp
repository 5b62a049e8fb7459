#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "symadex/common.hpp"

namespace symadex {

enum class Activation { ReLU, Identity };

template <typename Scalar>
struct BasicLayer {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weights;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
    Activation activation = Activation::ReLU;

    Eigen::Index size() const { return weights.rows(); }
    Eigen::Index fan_in() const { return weights.cols(); }
};

/// Dense feedforward network: affine layers, ReLU on every hidden layer and an
/// identity output layer producing class scores. Immutable once constructed.
template <typename Scalar>
class BasicNetwork {
public:
    using Layer = BasicLayer<Scalar>;
    using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicNetwork() = default;

    explicit BasicNetwork(std::vector<Layer> layers) : layers_(std::move(layers)) {
        if (layers_.empty()) throw DimensionError("network needs at least one layer");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const Layer& layer = layers_[i];
            if (layer.bias.size() != layer.weights.rows())
                throw DimensionError("layer " + std::to_string(i + 1) + ": bias length does not match rows");
            if (i > 0 && layer.fan_in() != layers_[i - 1].size())
                throw DimensionError("layer " + std::to_string(i + 1) + ": fan-in does not match previous layer");
            if (!layer.weights.allFinite() || !layer.bias.allFinite())
                throw DimensionError("layer " + std::to_string(i + 1) + ": non-finite parameter");
            const bool last = i + 1 == layers_.size();
            if (last && layer.activation != Activation::Identity)
                throw DimensionError("final layer must use the identity activation");
            if (!last && layer.activation != Activation::ReLU)
                throw DimensionError("layer " + std::to_string(i + 1) + ": hidden layers must use ReLU");
        }
    }

    Eigen::Index input_dim() const { return layers_.front().fan_in(); }
    Eigen::Index output_dim() const { return layers_.back().size(); }
    std::size_t num_layers() const { return layers_.size(); }
    const std::vector<Layer>& layers() const { return layers_; }
    const Layer& layer(std::size_t i) const { return layers_[i]; }

    std::size_t num_hidden_neurons() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i + 1 < layers_.size(); ++i) n += static_cast<std::size_t>(layers_[i].size());
        return n;
    }

    std::uint64_t parameter_count() const {
        std::uint64_t n = 0;
        for (const Layer& l : layers_) n += static_cast<std::uint64_t>(l.weights.size() + l.bias.size());
        return n;
    }

private:
    std::vector<Layer> layers_;
};

using Layer = BasicLayer<double>;
using Network = BasicNetwork<double>;

/// Per-layer pre-activation (`pre`) and post-activation (`post`) values.
/// For the output layer post == pre.
template <typename Scalar>
struct BasicTrace {
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> pre;
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> post;

    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& logits() const { return pre.back(); }
};

using Trace = BasicTrace<double>;

template <typename Scalar, typename Derived>
BasicTrace<Scalar> forward(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != net.input_dim())
        throw DimensionError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                             std::to_string(net.input_dim()));
    BasicTrace<Scalar> trace;
    trace.pre.reserve(net.num_layers());
    trace.post.reserve(net.num_layers());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> current = x.template cast<Scalar>();
    for (const auto& layer : net.layers()) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = layer.weights * current + layer.bias;
        trace.pre.push_back(z);
        if (layer.activation == Activation::ReLU) z = z.cwiseMax(Scalar(0));
        trace.post.push_back(z);
        current = std::move(z);
    }
    effort::add(net.parameter_count());
    return trace;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate(const BasicNetwork<Scalar>& net,
                                                  const Eigen::MatrixBase<Derived>& x) {
    return forward(net, x).logits();
}

/// Lowest index among the maximal entries.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

/// Highest competing score, ties resolved to the lowest index.
template <typename Derived>
Eigen::Index strongest_rival(const Eigen::MatrixBase<Derived>& logits, Eigen::Index target) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        if (i == target) continue;
        if (best < 0 || logits(i) > logits(best)) best = i;
    }
    return best;
}

/// [f(x)]_target - max_{y != target} [f(x)]_y
template <typename Derived>
typename Derived::Scalar logit_margin(const Eigen::MatrixBase<Derived>& logits, Eigen::Index target) {
    return logits(target) - logits(strongest_rival(logits, target));
}

/// True when `target` strictly beats every other class.
template <typename Derived>
bool classifies_as(const Eigen::MatrixBase<Derived>& logits, Eigen::Index target) {
    return logit_margin(logits, target) > 0;
}

template <typename Scalar, typename Derived>
Scalar margin(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x, Eigen::Index target) {
    return logit_margin(evaluate(net, x), target);
}

/// Gradient of the logit margin w.r.t. the input. The ReLU derivative at
/// exactly zero is taken as zero.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> margin_gradient(const BasicNetwork<Scalar>& net,
                                                         const Eigen::MatrixBase<Derived>& x,
                                                         Eigen::Index target) {
    const BasicTrace<Scalar> trace = forward(net, x);
    const Eigen::Index rival = strongest_rival(trace.logits(), target);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(net.output_dim());
    grad(target) += Scalar(1);
    grad(rival) -= Scalar(1);
    for (std::size_t i = net.num_layers(); i-- > 0;) {
        const auto& layer = net.layer(i);
        if (layer.activation == Activation::ReLU)
            grad = grad.cwiseProduct((trace.pre[i].array() > Scalar(0)).template cast<Scalar>().matrix());
        grad = layer.weights.transpose() * grad;
    }
    return grad;
}

/// Reads the `relu-ffn v1` text format.
Network load_network(const std::filesystem::path& path);
Network parse_network(const std::string& text);

/// Writes the canonical `relu-ffn v1` form with 17 significant digits.
std::string format_network(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

}  // namespace symadex
