#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "binplay/rng.hpp"
#include "binplay/tensor.hpp"

namespace binplay::nn {

enum class Activation : std::uint8_t {
    identity = 0,
    leaky_relu = 1,  // slope 0.01 on the negative side
    logistic = 2,
};

struct Layer {
    Tensor2 weights;           // out x in
    std::vector<double> bias;  // out
    Activation act = Activation::identity;
};

struct ModelParams {
    std::vector<Layer> layers;

    std::size_t input_size() const;
    std::size_t output_size() const;
    std::size_t param_count() const;
    void validate_chain() const;  // layer output feeds the next layer's input
};

// Glorot-uniform MLP: widths = {in, h1, ..., out}, acts per affine layer.
ModelParams make_mlp(const std::vector<std::size_t>& widths,
                     const std::vector<Activation>& acts, rng::Engine& rng);

// Mirrors the shapes of a ModelParams.
struct Gradients {
    std::vector<Tensor2> dw;
    std::vector<std::vector<double>> db;

    static Gradients zeros_like(const ModelParams& params);
    void add_scaled(const Gradients& other, double scale);
};

struct ForwardCache {
    Tensor2 input;
    std::vector<Tensor2> pre;   // affine outputs
    std::vector<Tensor2> post;  // activations
};

Tensor2 forward(const ModelParams& params, const Tensor2& x);
Tensor2 forward(const ModelParams& params, const Tensor2& x, ForwardCache& cache);

// d_out is the loss gradient w.r.t. the network output (post-activation).
// Fills parameter gradients and returns the gradient w.r.t. the input.
Tensor2 backward(const ModelParams& params, const ForwardCache& cache,
                 const Tensor2& d_out, Gradients& grads);

// ---------------------------------------------------------------- losses

struct Loss {
    double value = 0.0;
    Tensor2 grad;  // w.r.t. the first argument
};

struct LossVec {
    double value = 0.0;
    std::vector<double> grad;
};

// Mean over all elements of (pred - target)^2.
Loss mse_loss(const Tensor2& pred, const Tensor2& target);

// Squared Euclidean distance of one latent to one code.
LossVec latent_reg_loss(const std::vector<double>& z, const std::vector<double>& code);

std::vector<double> softmax(const std::vector<double>& logits);

// -log softmax(logits)[label].
LossVec softmax_ce_loss(const std::vector<double>& logits, int label);

// Cross-entropy H(teacher, softmax(student)); teacher must be a distribution.
LossVec distill_loss(const std::vector<double>& student_logits,
                     const std::vector<double>& teacher_probs);

// Batched means over rows; grads are already scaled by 1/rows.
Loss softmax_ce_batch(const Tensor2& logits, const std::vector<int>& labels);
Loss distill_batch(const Tensor2& student_logits, const Tensor2& teacher_probs);

// ---------------------------------------------------------------- adam

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Tensor2> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::int64_t step = 0;

    static AdamState zeros_like(const ModelParams& params);
};

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamConfig& cfg);

// ------------------------------------------------------- gradient check

// loss_fn evaluates the loss for the given params; when grads is non-null
// it must also fill the analytic gradients. Compares the analytic values
// against central finite differences on `samples` randomly chosen
// parameters and returns the max relative error
// |a - n| / max(|a| + |n|, 1e-2).
double grad_check(const ModelParams& params,
                  const std::function<double(const ModelParams&, Gradients*)>& loss_fn,
                  double h, std::size_t samples, rng::Engine& rng);

// --------------------------------------------------------- checkpoints

// Binary network format: "BPLY", version byte (1), u32le layer count,
// then per layer u32le rows, u32le cols, activation byte, rows*cols
// weight doubles (row-major) and rows bias doubles, all little-endian.
void save_params(const ModelParams& params, std::ostream& out);
ModelParams load_params(std::istream& in);
void save_params_file(const ModelParams& params, const std::string& path);
ModelParams load_params_file(const std::string& path);

// Byte size of the serialized form; depends only on the shape signature.
std::size_t serialized_size(const ModelParams& params);

}  // namespace binplay::nn
