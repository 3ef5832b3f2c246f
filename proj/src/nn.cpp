#include "rrmlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "rrmlab/binary_io.hpp"
#include "rrmlab/errors.hpp"

namespace rrm::nn {

namespace {

constexpr char kMagic[4] = {'R', 'R', 'M', 'N'};
constexpr std::uint32_t kVersion = 1;

void check_dims(std::span<const int> dims) {
    require(dims.size() >= 2, "Mlp: need at least input and output dimensions");
    for (int d : dims) require(d > 0, "Mlp: layer dimensions must be positive");
}

}  // namespace

Mlp::Mlp(std::span<const int> dims) {
    check_dims(dims);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        layers_.push_back({Matrix::Zero(dims[l + 1], dims[l]), Vector::Zero(dims[l + 1])});
    }
}

Mlp::Mlp(std::span<const int> dims, Rng& rng) : Mlp(dims) {
    for (DenseLayer& layer : layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
        }
    }
}

int Mlp::in_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Mlp::out_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::vector<int> Mlp::dims() const {
    std::vector<int> d;
    if (layers_.empty()) return d;
    d.push_back(in_dim());
    for (const DenseLayer& l : layers_) d.push_back(static_cast<int>(l.weight.rows()));
    return d;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

Matrix Mlp::forward(const Matrix& input, MlpCache* cache) const {
    require(!layers_.empty(), "Mlp::forward: empty network");
    require(input.rows() == in_dim(), "Mlp::forward: input has " + std::to_string(input.rows()) +
                                          " rows, network expects " + std::to_string(in_dim()));
    if (cache) {
        cache->inputs.clear();
        cache->preactivations.clear();
    }
    Matrix x = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Matrix z = layers_[l].weight * x;
        z.colwise() += layers_[l].bias;
        const bool hidden = l + 1 < layers_.size();
        if (cache) {
            cache->inputs.push_back(std::move(x));
            if (hidden) cache->preactivations.push_back(z);
        }
        x = hidden ? Matrix(z.cwiseMax(0.0)) : std::move(z);
    }
    return x;
}

Vector Mlp::forward_one(const Vector& input) const {
    return forward(Matrix(input)).col(0);
}

MlpGrads Mlp::backward(const MlpCache& cache, const Matrix& output_grad, Matrix* input_grad) const {
    require(cache.inputs.size() == layers_.size(), "Mlp::backward: cache does not match network");
    require(output_grad.rows() == out_dim() && output_grad.cols() == cache.inputs.front().cols(),
            "Mlp::backward: output gradient shape mismatch");
    MlpGrads grads(layers_.size());
    Matrix delta = output_grad;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l + 1 < layers_.size()) {
            delta = delta.cwiseProduct((cache.preactivations[l].array() > 0.0).cast<double>().matrix());
        }
        grads[l].weight.noalias() = delta * cache.inputs[l].transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l > 0 || input_grad) {
            Matrix prev = layers_[l].weight.transpose() * delta;
            if (l == 0) {
                *input_grad = std::move(prev);
            } else {
                delta = std::move(prev);
            }
        }
    }
    return grads;
}

MlpGrads zero_grads(const Mlp& net) {
    MlpGrads g;
    for (const DenseLayer& l : net.layers()) {
        g.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
    return g;
}

void accumulate(MlpGrads& into, const MlpGrads& g, double scale) {
    require(into.size() == g.size(), "accumulate: gradient shape mismatch");
    for (std::size_t l = 0; l < g.size(); ++l) {
        into[l].weight += scale * g[l].weight;
        into[l].bias += scale * g[l].bias;
    }
}

void soft_update(Mlp& target, const Mlp& source, double rho) {
    require(target.dims() == source.dims(), "soft_update: network shapes differ");
    for (std::size_t l = 0; l < source.layers().size(); ++l) {
        DenseLayer& t = target.layers()[l];
        const DenseLayer& s = source.layers()[l];
        t.weight = (1.0 - rho) * t.weight + rho * s.weight;
        t.bias = (1.0 - rho) * t.bias + rho * s.bias;
    }
}

Adam::Adam(const Mlp& net, AdamConfig cfg) : cfg_(cfg), m_(zero_grads(net)), v_(zero_grads(net)) {}

void Adam::step(Mlp& net, const MlpGrads& grads) {
    require(grads.size() == m_.size() && grads.size() == net.layers().size(), "Adam::step: shape mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        param.array() -= cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
    };
    for (std::size_t l = 0; l < grads.size(); ++l) {
        update(net.layers()[l].weight, m_[l].weight, v_[l].weight, grads[l].weight);
        update(net.layers()[l].bias, m_[l].bias, v_[l].bias, grads[l].bias);
    }
}

void ScalarAdam::step(double& param, double grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad * grad;
    const double mhat = m_ / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    const double vhat = v_ / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
    param -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
}

double logsumexp(std::span<const double> x) {
    require(!x.empty(), "logsumexp: empty input");
    const double m = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

Vector softmax(const Vector& x) {
    const double m = x.maxCoeff();
    Vector e = (x.array() - m).exp().matrix();
    return e / e.sum();
}

Matrix softmax_columns(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) out.col(c) = softmax(logits.col(c));
    return out;
}

Vector logsumexp_columns(const Matrix& logits) {
    Vector out(logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double m = logits.col(c).maxCoeff();
        out(c) = m + std::log((logits.col(c).array() - m).exp().sum());
    }
    return out;
}

int argmax(const Vector& x) {
    require(x.size() > 0, "argmax: empty vector");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.size(); ++i) {
        if (x(i) > x(best)) best = i;
    }
    return static_cast<int>(best);
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    io::put_u32(os, kVersion);
    io::put_u32(os, static_cast<std::uint32_t>(ckpt.meta.size()));
    os.write(ckpt.meta.data(), static_cast<std::streamsize>(ckpt.meta.size()));
    io::put_u32(os, static_cast<std::uint32_t>(ckpt.nets.size()));
    for (const Mlp& net : ckpt.nets) {
        io::put_u32(os, static_cast<std::uint32_t>(net.layers().size()));
        for (int d : net.dims()) io::put_u32(os, static_cast<std::uint32_t>(d));
        for (const DenseLayer& l : net.layers()) {
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c) io::put_f64(os, l.weight(r, c));
            }
            for (Eigen::Index r = 0; r < l.bias.size(); ++r) io::put_f64(os, l.bias(r));
        }
    }
    if (!os) throw FormatError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open checkpoint: " + path);
    char magic[4];
    if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
        throw FormatError("not a network checkpoint (bad magic): " + path);
    }
    const std::uint32_t version = io::get_u32(is, "checkpoint version");
    if (version != kVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " in " + path);
    }
    Checkpoint ckpt;
    ckpt.meta.resize(io::get_u32(is, "checkpoint meta length"));
    if (!is.read(ckpt.meta.data(), static_cast<std::streamsize>(ckpt.meta.size()))) {
        throw FormatError("truncated checkpoint meta: " + path);
    }
    const std::uint32_t n_nets = io::get_u32(is, "network count");
    for (std::uint32_t n = 0; n < n_nets; ++n) {
        const std::uint32_t n_layers = io::get_u32(is, "layer count");
        if (n_layers == 0 || n_layers > 64) throw FormatError("implausible layer count in " + path);
        std::vector<int> dims;
        for (std::uint32_t l = 0; l <= n_layers; ++l) {
            const std::uint32_t d = io::get_u32(is, "layer dimension");
            if (d == 0 || d > (1u << 20)) throw FormatError("implausible layer dimension in " + path);
            dims.push_back(static_cast<int>(d));
        }
        Mlp net(dims);
        for (DenseLayer& l : net.layers()) {
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = io::get_f64(is, "weights");
            }
            for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = io::get_f64(is, "biases");
        }
        ckpt.nets.push_back(std::move(net));
    }
    return ckpt;
}

}  // namespace rrm::nn
