#include "binplay/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "binplay/kernels.hpp"

namespace binplay::nn {

namespace {

constexpr double kLeakySlope = 0.01;

double activate(double z, Activation act) {
    switch (act) {
        case Activation::identity: return z;
        case Activation::leaky_relu: return z > 0.0 ? z : kLeakySlope * z;
        case Activation::logistic: return 1.0 / (1.0 + std::exp(-z));
    }
    fail("invalid-spec", "unknown activation tag");
}

double activate_grad(double pre, double post, Activation act) {
    switch (act) {
        case Activation::identity: return 1.0;
        case Activation::leaky_relu: return pre > 0.0 ? 1.0 : kLeakySlope;
        case Activation::logistic: return post * (1.0 - post);
    }
    fail("invalid-spec", "unknown activation tag");
}

}  // namespace

std::size_t ModelParams::input_size() const {
    return layers.empty() ? 0 : layers.front().weights.cols;
}

std::size_t ModelParams::output_size() const {
    return layers.empty() ? 0 : layers.back().weights.rows;
}

std::size_t ModelParams::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

void ModelParams::validate_chain() const {
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (layers[k].bias.size() != layers[k].weights.rows)
            fail("shape-mismatch", "layer " + std::to_string(k) + " bias length");
        if (k > 0 && layers[k].weights.cols != layers[k - 1].weights.rows)
            fail("shape-mismatch", "layer " + std::to_string(k) + " input width " +
                                       std::to_string(layers[k].weights.cols) +
                                       " does not chain from " +
                                       std::to_string(layers[k - 1].weights.rows));
    }
}

ModelParams make_mlp(const std::vector<std::size_t>& widths,
                     const std::vector<Activation>& acts, rng::Engine& rng) {
    if (widths.size() < 2 || acts.size() != widths.size() - 1)
        fail("invalid-spec", "make_mlp needs one activation per affine layer");
    ModelParams params;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        Layer layer;
        layer.weights = Tensor2(widths[k + 1], widths[k]);
        layer.bias.assign(widths[k + 1], 0.0);
        layer.act = acts[k];
        const double r = std::sqrt(6.0 / static_cast<double>(widths[k] + widths[k + 1]));
        for (double& w : layer.weights.data) w = rng.uniform(-r, r);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Gradients Gradients::zeros_like(const ModelParams& params) {
    Gradients g;
    for (const auto& l : params.layers) {
        g.dw.emplace_back(l.weights.rows, l.weights.cols);
        g.db.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
    for (std::size_t k = 0; k < dw.size(); ++k) {
        for (std::size_t i = 0; i < dw[k].size(); ++i)
            dw[k].data[i] += scale * other.dw[k].data[i];
        for (std::size_t i = 0; i < db[k].size(); ++i)
            db[k][i] += scale * other.db[k][i];
    }
}

Tensor2 forward(const ModelParams& params, const Tensor2& x) {
    ForwardCache cache;
    return forward(params, x, cache);
}

Tensor2 forward(const ModelParams& params, const Tensor2& x, ForwardCache& cache) {
    if (params.layers.empty()) fail("invalid-spec", "forward on empty network");
    if (x.cols != params.input_size())
        fail("shape-mismatch", "input width " + std::to_string(x.cols) + " vs network " +
                                   std::to_string(params.input_size()));
    cache.input = x;
    cache.pre.clear();
    cache.post.clear();
    const Tensor2* cur = &x;
    for (const auto& layer : params.layers) {
        Tensor2 pre = kernels::matmul_nt(*cur, layer.weights);
        for (std::size_t r = 0; r < pre.rows; ++r) {
            double* row = pre.row(r);
            for (std::size_t c = 0; c < pre.cols; ++c) row[c] += layer.bias[c];
        }
        Tensor2 post(pre.rows, pre.cols);
        for (std::size_t i = 0; i < pre.size(); ++i)
            post.data[i] = activate(pre.data[i], layer.act);
        cache.pre.push_back(std::move(pre));
        cache.post.push_back(std::move(post));
        cur = &cache.post.back();
    }
    return cache.post.back();
}

Tensor2 backward(const ModelParams& params, const ForwardCache& cache,
                 const Tensor2& d_out, Gradients& grads) {
    const std::size_t depth = params.layers.size();
    if (cache.post.size() != depth)
        fail("shape-mismatch", "cache depth does not match network");
    require_shape(d_out, cache.post.back(), "backward output grad");

    Tensor2 d_post = d_out;
    for (std::size_t k = depth; k-- > 0;) {
        const auto& layer = params.layers[k];
        const Tensor2& pre = cache.pre[k];
        const Tensor2& post = cache.post[k];
        Tensor2 d_pre(d_post.rows, d_post.cols);
        for (std::size_t i = 0; i < d_pre.size(); ++i)
            d_pre.data[i] =
                d_post.data[i] * activate_grad(pre.data[i], post.data[i], layer.act);

        const Tensor2& layer_in = (k == 0) ? cache.input : cache.post[k - 1];
        grads.dw[k] = kernels::matmul_tn(d_pre, layer_in);
        grads.db[k] = kernels::col_sums(d_pre);
        d_post = kernels::matmul_nn(d_pre, layer.weights);
    }
    return d_post;
}

Loss mse_loss(const Tensor2& pred, const Tensor2& target) {
    require_shape(pred, target, "mse_loss");
    Loss loss;
    loss.grad = Tensor2(pred.rows, pred.cols);
    const double inv_count = 1.0 / static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.data[i] - target.data[i];
        acc += diff * diff;
        loss.grad.data[i] = 2.0 * diff * inv_count;
    }
    loss.value = acc * inv_count;
    return loss;
}

LossVec latent_reg_loss(const std::vector<double>& z, const std::vector<double>& code) {
    if (z.size() != code.size())
        fail("shape-mismatch", "latent length " + std::to_string(z.size()) +
                                   " vs code length " + std::to_string(code.size()));
    LossVec loss;
    loss.grad.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double diff = z[i] - code[i];
        loss.value += diff * diff;
        loss.grad[i] = 2.0 * diff;
    }
    return loss;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> probs(logits.size());
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - peak);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

LossVec softmax_ce_loss(const std::vector<double>& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        fail("label-out-of-range",
             "label " + std::to_string(label) + " for " + std::to_string(logits.size()) +
                 " classes");
    LossVec loss;
    loss.grad = softmax(logits);
    loss.value = -std::log(std::max(loss.grad[static_cast<std::size_t>(label)], 1e-300));
    loss.grad[static_cast<std::size_t>(label)] -= 1.0;
    return loss;
}

LossVec distill_loss(const std::vector<double>& student_logits,
                     const std::vector<double>& teacher_probs) {
    if (student_logits.size() != teacher_probs.size())
        fail("shape-mismatch", "distill_loss class counts differ");
    double total = 0.0;
    for (double p : teacher_probs) {
        if (p < 0.0) fail("invalid-teacher-distribution", "negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail("invalid-teacher-distribution",
             "probabilities sum to " + std::to_string(total));
    LossVec loss;
    loss.grad = softmax(student_logits);
    for (std::size_t i = 0; i < teacher_probs.size(); ++i)
        loss.value -= teacher_probs[i] * std::log(std::max(loss.grad[i], 1e-300));
    for (std::size_t i = 0; i < teacher_probs.size(); ++i)
        loss.grad[i] -= teacher_probs[i];
    return loss;
}

namespace {

Loss batch_rows(const Tensor2& logits,
                const std::function<LossVec(const std::vector<double>&, std::size_t)>& per_row) {
    Loss loss;
    loss.grad = Tensor2(logits.rows, logits.cols);
    const double inv_rows = 1.0 / static_cast<double>(logits.rows);
    std::vector<double> row(logits.cols);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        std::copy(logits.row(r), logits.row(r) + logits.cols, row.begin());
        LossVec one = per_row(row, r);
        loss.value += one.value * inv_rows;
        for (std::size_t c = 0; c < logits.cols; ++c)
            loss.grad.at(r, c) = one.grad[c] * inv_rows;
    }
    return loss;
}

}  // namespace

Loss softmax_ce_batch(const Tensor2& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows)
        fail("shape-mismatch", "label count vs logit rows");
    return batch_rows(logits, [&](const std::vector<double>& row, std::size_t r) {
        return softmax_ce_loss(row, labels[r]);
    });
}

Loss distill_batch(const Tensor2& student_logits, const Tensor2& teacher_probs) {
    require_shape(student_logits, teacher_probs, "distill_batch");
    return batch_rows(student_logits, [&](const std::vector<double>& row, std::size_t r) {
        std::vector<double> teacher(teacher_probs.row(r),
                                    teacher_probs.row(r) + teacher_probs.cols);
        return distill_loss(row, teacher);
    });
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState s;
    for (const auto& l : params.layers) {
        s.m_w.emplace_back(l.weights.rows, l.weights.cols);
        s.v_w.emplace_back(l.weights.rows, l.weights.cols);
        s.m_b.emplace_back(l.bias.size(), 0.0);
        s.v_b.emplace_back(l.bias.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 const AdamConfig& cfg, double bias1, double bias2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamConfig& cfg) {
    if (grads.dw.size() != params.layers.size())
        fail("shape-mismatch", "gradient layer count");
    state.step += 1;
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto& layer = params.layers[k];
        require_shape(layer.weights, grads.dw[k], "adam_step weights");
        adam_update(layer.weights.data.data(), grads.dw[k].data.data(),
                    state.m_w[k].data.data(), state.v_w[k].data.data(),
                    layer.weights.size(), cfg, bias1, bias2);
        adam_update(layer.bias.data(), grads.db[k].data(), state.m_b[k].data(),
                    state.v_b[k].data(), layer.bias.size(), cfg, bias1, bias2);
    }
}

double grad_check(const ModelParams& params,
                  const std::function<double(const ModelParams&, Gradients*)>& loss_fn,
                  double h, std::size_t samples, rng::Engine& rng) {
    Gradients analytic = Gradients::zeros_like(params);
    loss_fn(params, &analytic);

    // Flat view: (layer, weight-or-bias, offset).
    struct Slot {
        std::size_t layer;
        bool bias;
        std::size_t offset;
    };
    std::vector<Slot> slots;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        for (std::size_t i = 0; i < params.layers[k].weights.size(); ++i)
            slots.push_back({k, false, i});
        for (std::size_t i = 0; i < params.layers[k].bias.size(); ++i)
            slots.push_back({k, true, i});
    }

    double max_rel = 0.0;
    ModelParams probe = params;
    const std::size_t count = std::min(samples, slots.size());
    for (std::size_t s = 0; s < count; ++s) {
        const Slot& slot = slots[rng.below(slots.size())];
        double* value = slot.bias
                            ? &probe.layers[slot.layer].bias[slot.offset]
                            : &probe.layers[slot.layer].weights.data[slot.offset];
        const double saved = *value;
        *value = saved + h;
        const double plus = loss_fn(probe, nullptr);
        *value = saved - h;
        const double minus = loss_fn(probe, nullptr);
        *value = saved;

        const double numeric = (plus - minus) / (2.0 * h);
        const double exact = slot.bias ? analytic.db[slot.layer][slot.offset]
                                       : analytic.dw[slot.layer].data[slot.offset];
        const double rel = std::abs(exact - numeric) /
                           std::max(std::abs(exact) + std::abs(numeric), 1e-2);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

// --------------------------------------------------------- checkpoints

namespace {

constexpr char kMagic[4] = {'B', 'P', 'L', 'Y'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        fail("truncated-file", "checkpoint ended inside a u32 field");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        fail("truncated-file", "checkpoint ended inside a double field");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_params(const ModelParams& params, std::ostream& out) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    put_u32(out, static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& layer : params.layers) {
        put_u32(out, static_cast<std::uint32_t>(layer.weights.rows));
        put_u32(out, static_cast<std::uint32_t>(layer.weights.cols));
        out.put(static_cast<char>(static_cast<std::uint8_t>(layer.act)));
        for (double w : layer.weights.data) put_f64(out, w);
        for (double b : layer.bias) put_f64(out, b);
    }
    if (!out) fail("io-error", "checkpoint write failed");
}

ModelParams load_params(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) fail("truncated-file", "missing checkpoint magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        fail("bad-magic", std::string("expected BPLY, got ") + std::string(magic, 4));
    const int version = in.get();
    if (version != kVersion)
        fail("bad-version", "checkpoint version " + std::to_string(version));
    const std::uint32_t count = get_u32(in);
    ModelParams params;
    for (std::uint32_t k = 0; k < count; ++k) {
        Layer layer;
        const std::uint32_t rows = get_u32(in);
        const std::uint32_t cols = get_u32(in);
        const int act = in.get();
        if (act < 0 || act > 2) fail("bad-activation-tag", std::to_string(act));
        layer.act = static_cast<Activation>(act);
        layer.weights = Tensor2(rows, cols);
        for (double& w : layer.weights.data) w = get_f64(in);
        layer.bias.resize(rows);
        for (double& b : layer.bias) b = get_f64(in);
        params.layers.push_back(std::move(layer));
    }
    params.validate_chain();
    return params;
}

void save_params_file(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    save_params(params, out);
}

ModelParams load_params_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-error", "cannot open " + path);
    return load_params(in);
}

std::size_t serialized_size(const ModelParams& params) {
    std::size_t bytes = 4 + 1 + 4;  // magic, version, layer count
    for (const auto& layer : params.layers)
        bytes += 4 + 4 + 1 + 8 * (layer.weights.size() + layer.bias.size());
    return bytes;
}

}  // namespace binplay::nn
