#include "binplay/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace binplay::replay {

// ------------------------------------------------------------- ledger

void BatchLedger::open_batch(const std::vector<int>& classes, std::uint64_t count) {
    if (count == 0) fail("invalid-spec", "batch must contain at least one sample");
    BatchRecord rec;
    rec.first = total() + 1;
    rec.last = rec.first + count - 1;
    rec.classes = classes;
    records_.push_back(std::move(rec));
}

std::uint64_t BatchLedger::total() const {
    return records_.empty() ? 0 : records_.back().last;
}

std::uint64_t BatchLedger::current_first() const {
    if (records_.empty()) fail("index-out-of-range", "ledger has no batches");
    return records_.back().first;
}

std::size_t BatchLedger::batch_count() const { return records_.size(); }

const BatchRecord& BatchLedger::record(std::size_t batch) const {
    if (batch < 1 || batch > records_.size())
        fail("index-out-of-range", "batch " + std::to_string(batch));
    return records_[batch - 1];
}

std::size_t BatchLedger::batch_of(std::uint64_t index) const {
    for (std::size_t b = 0; b < records_.size(); ++b)
        if (index >= records_[b].first && index <= records_[b].last) return b + 1;
    fail("index-out-of-range", "index " + std::to_string(index) + " with N=" +
                                   std::to_string(total()));
}

void BatchLedger::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    out << "batch,first,last,classes\n";
    for (std::size_t b = 0; b < records_.size(); ++b) {
        out << (b + 1) << "," << records_[b].first << "," << records_[b].last << ",";
        for (std::size_t c = 0; c < records_[b].classes.size(); ++c) {
            if (c) out << "|";
            out << records_[b].classes[c];
        }
        out << "\n";
    }
}

BatchLedger BatchLedger::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    BatchLedger ledger;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string batch_s, first_s, last_s, classes_s;
        if (!std::getline(ss, batch_s, ',') || !std::getline(ss, first_s, ',') ||
            !std::getline(ss, last_s, ',') || !std::getline(ss, classes_s))
            fail("parse-error", path + ": bad ledger row '" + line + "'");
        std::vector<int> classes;
        std::stringstream cs(classes_s);
        std::string field;
        while (std::getline(cs, field, '|')) classes.push_back(std::stoi(field));
        const std::uint64_t first = std::stoull(first_s);
        const std::uint64_t last = std::stoull(last_s);
        if (first != ledger.total() + 1 || last < first)
            fail("parse-error", path + ": ledger ranges do not chain");
        ledger.open_batch(classes, last - first + 1);
    }
    return ledger;
}

// ------------------------------------------------------ autoencoder

AutoencoderState make_autoencoder(const codes::CodeLayout& layout,
                                  std::size_t image_size, std::size_t encoder_hidden,
                                  std::size_t decoder_hidden, rng::Engine& encoder_rng,
                                  rng::Engine& decoder_rng) {
    layout.validate();
    const std::size_t n = static_cast<std::size_t>(layout.code_length());
    AutoencoderState state;
    state.layout = layout;
    state.encoder = nn::make_mlp(
        {image_size, encoder_hidden, n},
        {nn::Activation::leaky_relu, nn::Activation::identity}, encoder_rng);
    state.decoder = nn::make_mlp(
        {n, decoder_hidden, image_size},
        {nn::Activation::leaky_relu, nn::Activation::logistic}, decoder_rng);
    return state;
}

const nn::ModelParams& snapshot_decoder(AutoencoderState& state) {
    state.decoder_snapshot = state.decoder;
    return *state.decoder_snapshot;
}

namespace {

// Code used when index i is a decoder training input. Past batches use the
// raw index; the current (frozen) batch maps through its assignment.
codes::BinaryCode training_code(const AutoencoderState& state, std::uint64_t i,
                                std::uint64_t k_first, const BatchLedger& ledger) {
    if (i < k_first)
        return codes::full_code(ledger.batch_of(i), i, state.layout);
    const std::size_t b = ledger.batch_count();
    const FrozenAssignment& fa = state.frozen.at(b - 1);
    return codes::full_code(b, fa.code_index.at(static_cast<std::size_t>(i - fa.first)),
                            state.layout);
}

void check_finite(double value, const char* phase, std::size_t epoch, std::size_t step) {
    if (!std::isfinite(value))
        fail("non-finite-loss", std::string("phase ") + phase + " epoch " +
                                    std::to_string(epoch) + " step " +
                                    std::to_string(step) + " loss " +
                                    std::to_string(value));
}

struct EpochStats {
    double recon = 0.0;
    double reg = 0.0;
};

// One pass over the current batch: encoder then decoder, reconstruction
// loss plus (optionally) the latent pull toward assigned codes.
EpochStats ae_epoch(AutoencoderState& state, const Tensor2& images,
                    const std::vector<codes::BinaryCode>& codebook,
                    const assign::Assignment* asg, double lambda_reg,
                    const AeHyper& hyper, nn::AdamState& enc_adam,
                    nn::AdamState& dec_adam, rng::Engine& rng, const char* phase,
                    std::size_t epoch) {
    const std::size_t count = images.rows;
    const auto perm = rng.permutation(count);
    EpochStats stats;
    for (std::size_t start = 0, step = 0; start < count;
         start += hyper.minibatch, ++step) {
        const std::size_t mb = std::min(hyper.minibatch, count - start);
        Tensor2 x(mb, images.cols);
        for (std::size_t r = 0; r < mb; ++r)
            std::copy(images.row(perm[start + r]),
                      images.row(perm[start + r]) + images.cols, x.row(r));

        nn::ForwardCache enc_cache, dec_cache;
        const Tensor2& z = nn::forward(state.encoder, x, enc_cache);
        const Tensor2& recon = nn::forward(state.decoder, z, dec_cache);
        nn::Loss mse = nn::mse_loss(recon, x);
        check_finite(mse.value, phase, epoch, step);
        stats.recon += mse.value * static_cast<double>(mb);

        nn::Gradients dec_grads = nn::Gradients::zeros_like(state.decoder);
        Tensor2 d_z = nn::backward(state.decoder, dec_cache, mse.grad, dec_grads);

        if (asg != nullptr && lambda_reg > 0.0) {
            double reg_sum = 0.0;
            for (std::size_t r = 0; r < mb; ++r) {
                const auto& code = codebook[asg->code_of_sample[perm[start + r]]];
                for (std::size_t d = 0; d < z.cols; ++d) {
                    const double diff = z.at(r, d) - code[d];
                    reg_sum += diff * diff;
                    d_z.at(r, d) += lambda_reg * 2.0 * diff / static_cast<double>(mb);
                }
            }
            check_finite(reg_sum, phase, epoch, step);
            stats.reg += reg_sum;
        }

        nn::Gradients enc_grads = nn::Gradients::zeros_like(state.encoder);
        nn::backward(state.encoder, enc_cache, d_z, enc_grads);
        nn::adam_step(state.encoder, enc_grads, enc_adam, hyper.adam);
        nn::adam_step(state.decoder, dec_grads, dec_adam, hyper.adam);
    }
    stats.recon /= static_cast<double>(count);
    stats.reg /= static_cast<double>(count);
    return stats;
}

Tensor2 encode_all(const AutoencoderState& state, const Tensor2& images) {
    return nn::forward(state.encoder, images);
}

}  // namespace

TrainingPair make_training_pair(std::uint64_t i, std::uint64_t k_first,
                                std::uint64_t n_total, const Tensor2& current_images,
                                const AutoencoderState& state, const BatchLedger& ledger) {
    if (i < 1 || i > n_total)
        fail("index-out-of-range", "i=" + std::to_string(i) + " with N=" +
                                       std::to_string(n_total));
    TrainingPair pair;
    if (i < k_first) {
        if (!state.decoder_snapshot)
            fail("missing-snapshot", "replayed pair requested without a decoder snapshot");
        pair.code = codes::full_code(ledger.batch_of(i), i, state.layout);
        Tensor2 in(1, pair.code.size());
        std::copy(pair.code.begin(), pair.code.end(), in.row(0));
        Tensor2 out = nn::forward(*state.decoder_snapshot, in);
        pair.target.assign(out.row(0), out.row(0) + out.cols);
    } else {
        pair.code = training_code(state, i, k_first, ledger);
        const std::size_t row = static_cast<std::size_t>(i - k_first);
        pair.target.assign(current_images.row(row),
                           current_images.row(row) + current_images.cols);
    }
    return pair;
}

std::vector<AeEpochLog> train_batch(AutoencoderState& state, const Tensor2& batch_images,
                                    const BatchLedger& ledger, const AeHyper& hyper,
                                    rng::Engine& rng) {
    if (batch_images.rows == 0) fail("invalid-spec", "empty training batch");
    if (hyper.assign_epoch_cap < 1) fail("invalid-spec", "assign_epoch_cap must be >= 1");
    const std::size_t b = ledger.batch_count();
    const std::uint64_t k_first = ledger.current_first();
    const std::uint64_t n_total = ledger.total();
    if (batch_images.rows != n_total - k_first + 1)
        fail("shape-mismatch", "batch image count does not match ledger range");
    if (state.frozen.size() != b - 1)
        fail("invalid-spec", "frozen assignments out of step with ledger");

    snapshot_decoder(state);
    const auto codebook = codes::codebook(b, k_first, n_total, state.layout);
    const std::size_t count = batch_images.rows;
    std::vector<AeEpochLog> logs;

    nn::AdamState enc_adam = nn::AdamState::zeros_like(state.encoder);
    nn::AdamState dec_adam = nn::AdamState::zeros_like(state.decoder);

    // Phase A: reconstruction only, zero regularization gradient.
    for (std::size_t epoch = 1; epoch <= hyper.warmup_epochs; ++epoch) {
        EpochStats s = ae_epoch(state, batch_images, codebook, nullptr, 0.0, hyper,
                                enc_adam, dec_adam, rng, "A", epoch);
        logs.push_back({'A', epoch, s.recon, 0.0});
    }

    // Phase B: assign, train, repeat until the mapping settles.
    std::vector<assign::Assignment> history;
    bool stable = false;
    for (std::size_t epoch = 1; epoch <= hyper.assign_epoch_cap; ++epoch) {
        const Tensor2 latents = encode_all(state, batch_images);
        const auto order = assign::shuffle_order(count, rng);
        history.push_back(assign::greedy_assign(latents, codebook, order));
        if (assign::is_stable(history, hyper.stability_k)) {
            stable = true;
            break;
        }
        EpochStats s = ae_epoch(state, batch_images, codebook, &history.back(),
                                hyper.lambda_reg, hyper, enc_adam, dec_adam, rng, "B",
                                epoch);
        logs.push_back({'B', epoch, s.recon, s.reg});
    }
    if (!stable) {
        // Cap reached: take one final mapping from the trained encoder.
        const Tensor2 latents = encode_all(state, batch_images);
        const auto order = assign::shuffle_order(count, rng);
        history.push_back(assign::greedy_assign(latents, codebook, order));
    }

    FrozenAssignment frozen;
    frozen.first = k_first;
    frozen.code_index.resize(count);
    frozen.dist_sq.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        frozen.code_index[s] = k_first + history.back().code_of_sample[s];
        frozen.dist_sq[s] = history.back().dist_sq[s];
    }
    state.frozen.push_back(std::move(frozen));

    // Phase C: decoder-only fitting of code -> target pairs over 1..N.
    // Targets for past indices come from the frozen snapshot, so they are
    // computed once and reused across epochs.
    Tensor2 replay_targets;
    if (k_first > 1) {
        Tensor2 past_codes(k_first - 1, static_cast<std::size_t>(state.layout.code_length()));
        for (std::uint64_t i = 1; i < k_first; ++i) {
            const auto code = codes::full_code(ledger.batch_of(i), i, state.layout);
            std::copy(code.begin(), code.end(), past_codes.row(i - 1));
        }
        replay_targets = nn::forward(*state.decoder_snapshot, past_codes);
    }

    nn::AdamState dec_adam_c = nn::AdamState::zeros_like(state.decoder);
    const std::size_t n_all = static_cast<std::size_t>(n_total);
    for (std::size_t epoch = 1; epoch <= hyper.phase_c_epochs; ++epoch) {
        const auto perm = rng.permutation(n_all);  // positions 0..N-1 = index-1
        double epoch_mse = 0.0;
        for (std::size_t start = 0, step = 0; start < n_all;
             start += hyper.minibatch, ++step) {
            const std::size_t mb = std::min(hyper.minibatch, n_all - start);
            Tensor2 code_in(mb, static_cast<std::size_t>(state.layout.code_length()));
            Tensor2 target(mb, batch_images.cols);
            for (std::size_t r = 0; r < mb; ++r) {
                const std::uint64_t i = perm[start + r] + 1;
                const auto code = training_code(state, i, k_first, ledger);
                std::copy(code.begin(), code.end(), code_in.row(r));
                const double* src = (i < k_first)
                                        ? replay_targets.row(i - 1)
                                        : batch_images.row(i - k_first);
                std::copy(src, src + batch_images.cols, target.row(r));
            }
            nn::ForwardCache dec_cache;
            const Tensor2& recon = nn::forward(state.decoder, code_in, dec_cache);
            nn::Loss mse = nn::mse_loss(recon, target);
            check_finite(mse.value, "C", epoch, step);
            epoch_mse += mse.value * static_cast<double>(mb);
            nn::Gradients dec_grads = nn::Gradients::zeros_like(state.decoder);
            nn::backward(state.decoder, dec_cache, mse.grad, dec_grads);
            nn::adam_step(state.decoder, dec_grads, dec_adam_c, hyper.adam);
        }
        logs.push_back({'C', epoch, epoch_mse / static_cast<double>(n_all), 0.0});
    }

    state.decoder_snapshot.reset();
    return logs;
}

std::vector<double> reconstruct(const AutoencoderState& state, std::uint64_t i,
                                const BatchLedger& ledger) {
    Tensor2 out = reconstruct_many(state, {i}, ledger);
    return std::vector<double>(out.row(0), out.row(0) + out.cols);
}

Tensor2 reconstruct_many(const AutoencoderState& state,
                         const std::vector<std::uint64_t>& indices,
                         const BatchLedger& ledger) {
    const std::size_t n = static_cast<std::size_t>(state.layout.code_length());
    Tensor2 code_in(indices.size(), n);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::uint64_t i = indices[r];
        if (i < 1 || i > ledger.total())
            fail("index-out-of-range", "index " + std::to_string(i) + " with N=" +
                                           std::to_string(ledger.total()));
        const std::size_t b = ledger.batch_of(i);
        if (b > state.frozen.size())
            fail("index-out-of-range",
                 "batch " + std::to_string(b) + " has no frozen assignment yet");
        const FrozenAssignment& fa = state.frozen[b - 1];
        const auto code = codes::full_code(
            b, fa.code_index.at(static_cast<std::size_t>(i - fa.first)), state.layout);
        std::copy(code.begin(), code.end(), code_in.row(r));
    }
    return nn::forward(state.decoder, code_in);
}

std::vector<std::uint64_t> sample_replay_indices(std::size_t count, std::uint64_t upper,
                                                 rng::Engine& rng) {
    if (upper == 0 && count > 0)
        fail("index-out-of-range", "cannot sample from an empty index range");
    std::vector<std::uint64_t> indices(count);
    for (auto& i : indices) i = rng.below(upper) + 1;
    return indices;
}

std::vector<std::pair<std::uint64_t, std::vector<double>>> sample_replay(
    const AutoencoderState& state, std::size_t count, std::uint64_t upper,
    rng::Engine& rng, const BatchLedger& ledger) {
    if (upper > ledger.total())
        fail("index-out-of-range", "upper bound exceeds observed samples");
    const auto indices = sample_replay_indices(count, upper, rng);
    Tensor2 images = reconstruct_many(state, indices, ledger);
    std::vector<std::pair<std::uint64_t, std::vector<double>>> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r)
        out.emplace_back(indices[r],
                         std::vector<double>(images.row(r), images.row(r) + images.cols));
    return out;
}

double recon_drift(const AutoencoderState& state, const nn::ModelParams& old_decoder,
                   std::uint64_t first, std::uint64_t last, const BatchLedger& ledger) {
    std::vector<std::uint64_t> indices;
    for (std::uint64_t i = first; i <= last; ++i) indices.push_back(i);
    Tensor2 current = reconstruct_many(state, indices, ledger);

    AutoencoderState old_view;
    old_view.decoder = old_decoder;
    old_view.layout = state.layout;
    old_view.frozen = state.frozen;
    Tensor2 before = reconstruct_many(old_view, indices, ledger);
    return nn::mse_loss(current, before).value;
}

void save_assignment_csv(const FrozenAssignment& fa, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    out << "global_index,code_index,distance_sq\n";
    char buf[64];
    for (std::size_t s = 0; s < fa.code_index.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%.17g", fa.dist_sq[s]);
        out << (fa.first + s) << "," << fa.code_index[s] << "," << buf << "\n";
    }
}

FrozenAssignment load_assignment_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open " + path);
    FrozenAssignment fa;
    std::string line;
    std::getline(in, line);  // header
    bool first_row = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string gi, ci, ds;
        if (!std::getline(ss, gi, ',') || !std::getline(ss, ci, ',') ||
            !std::getline(ss, ds))
            fail("parse-error", path + ": bad assignment row '" + line + "'");
        if (first_row) {
            fa.first = std::stoull(gi);
            first_row = false;
        }
        fa.code_index.push_back(std::stoull(ci));
        fa.dist_sq.push_back(std::stod(ds));
    }
    return fa;
}

}  // namespace binplay::replay
