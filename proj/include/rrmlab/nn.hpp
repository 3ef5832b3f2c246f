#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrmlab/rng.hpp"

namespace rrm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

// Activations kept by a forward pass. Batches are column-major: one sample per column.
struct MlpCache {
    std::vector<Matrix> inputs;       // input seen by each layer
    std::vector<Matrix> preactivations;
};

using MlpGrads = std::vector<DenseLayer>;

/// Fully connected net: rectifier on hidden layers, identity on the output layer.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::span<const int> dims);     // zero weights
    Mlp(std::span<const int> dims, Rng& rng);    // uniform +-sqrt(6/(fan_in+fan_out)), zero bias

    int in_dim() const;
    int out_dim() const;
    std::vector<int> dims() const;
    std::size_t parameter_count() const;

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    Matrix forward(const Matrix& input, MlpCache* cache = nullptr) const;
    Vector forward_one(const Vector& input) const;

    /// Reverse-mode gradients of sum(output .* output_grad). Writes the input gradient
    /// when `input_grad` is non-null.
    MlpGrads backward(const MlpCache& cache, const Matrix& output_grad, Matrix* input_grad = nullptr) const;

private:
    std::vector<DenseLayer> layers_;
};

MlpGrads zero_grads(const Mlp& net);
void accumulate(MlpGrads& into, const MlpGrads& g, double scale = 1.0);

/// target <- (1 - rho) target + rho source
void soft_update(Mlp& target, const Mlp& source, double rho);

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, AdamConfig cfg);

    void step(Mlp& net, const MlpGrads& grads);
    std::int64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    AdamConfig cfg_;
    std::vector<DenseLayer> m_;
    std::vector<DenseLayer> v_;
    std::int64_t t_ = 0;
};

/// Scalar-parameter Adam, for the SAC temperature.
class ScalarAdam {
public:
    explicit ScalarAdam(AdamConfig cfg = {}) : cfg_(cfg) {}
    void step(double& param, double grad);
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    AdamConfig cfg_;
    double m_ = 0.0;
    double v_ = 0.0;
    std::int64_t t_ = 0;
};

double logsumexp(std::span<const double> x);
Vector softmax(const Vector& x);
/// Column-wise over a (classes x batch) matrix.
Matrix softmax_columns(const Matrix& logits);
Vector logsumexp_columns(const Matrix& logits);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(const Vector& x);

// Checkpoint: "RRMN", u32 version, u32 meta length + JSON meta text, u32 net count, then per net
// u32 layer count, u32 dims[layers + 1], and every layer's row-major weights followed by its bias
// as little-endian float64.
struct Checkpoint {
    std::string meta;  // JSON object text
    std::vector<Mlp> nets;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rrm::nn
