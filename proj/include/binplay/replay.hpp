#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binplay/assign.hpp"
#include "binplay/codes.hpp"
#include "binplay/nn.hpp"
#include "binplay/rng.hpp"
#include "binplay/tensor.hpp"

namespace binplay::replay {

// ------------------------------------------------------------- ledger

struct BatchRecord {
    std::uint64_t first = 0;  // K_b
    std::uint64_t last = 0;   // N_b
    std::vector<int> classes;
};

// Batch boundaries over the global chronological index space 1..N. The
// only persistent metadata besides model weights and frozen assignments.
class BatchLedger {
public:
    void open_batch(const std::vector<int>& classes, std::uint64_t count);

    std::uint64_t total() const;          // N, samples seen so far
    std::uint64_t current_first() const;  // K of the most recent batch
    std::size_t batch_count() const;
    const BatchRecord& record(std::size_t batch) const;  // batch is 1-based
    std::size_t batch_of(std::uint64_t index) const;

    void save_csv(const std::string& path) const;
    static BatchLedger load_csv(const std::string& path);

private:
    std::vector<BatchRecord> records_;
};

// ------------------------------------------------------ autoencoder

// Bijection from a completed batch's global indices onto its code range:
// sample i carries the code of global index code_index[i - first].
struct FrozenAssignment {
    std::uint64_t first = 0;
    std::vector<std::uint64_t> code_index;
    std::vector<double> dist_sq;
};

struct AutoencoderState {
    nn::ModelParams encoder;
    nn::ModelParams decoder;
    std::optional<nn::ModelParams> decoder_snapshot;  // only during batch training
    std::vector<FrozenAssignment> frozen;             // one per completed batch
    codes::CodeLayout layout;
};

AutoencoderState make_autoencoder(const codes::CodeLayout& layout,
                                  std::size_t image_size, std::size_t encoder_hidden,
                                  std::size_t decoder_hidden, rng::Engine& encoder_rng,
                                  rng::Engine& decoder_rng);

// Deep copy of the current decoder, kept immutable for the batch.
const nn::ModelParams& snapshot_decoder(AutoencoderState& state);

struct TrainingPair {
    codes::BinaryCode code;
    std::vector<double> target;
};

// i < K: pair regenerated from the decoder snapshot; i >= K: the stored
// image with its frozen assigned code.
TrainingPair make_training_pair(std::uint64_t i, std::uint64_t k_first,
                                std::uint64_t n_total, const Tensor2& current_images,
                                const AutoencoderState& state, const BatchLedger& ledger);

struct AeHyper {
    std::size_t warmup_epochs = 5;
    std::size_t assign_epoch_cap = 30;
    std::size_t stability_k = 3;
    std::size_t phase_c_epochs = 40;
    std::size_t minibatch = 64;
    double lambda_reg = 0.1;
    nn::AdamConfig adam;
};

struct AeEpochLog {
    char phase = 'A';
    std::size_t epoch = 0;
    double recon_mse = 0.0;
    double reg_loss = 0.0;  // mean per-sample squared latent distance
};

// Three-phase training on the batch whose range the ledger just opened:
// A) warm-up on reconstruction only, B) per-epoch greedy code assignment
// with latent regularization until stable, then freeze, C) decoder-only
// fitting of code->target pairs over all indices 1..N, past targets
// regenerated from the snapshot.
std::vector<AeEpochLog> train_batch(AutoencoderState& state, const Tensor2& batch_images,
                                    const BatchLedger& ledger, const AeHyper& hyper,
                                    rng::Engine& rng);

// Decode index i through the current decoder; the code is recomputed from
// the formula and the frozen assignment, never loaded from storage.
std::vector<double> reconstruct(const AutoencoderState& state, std::uint64_t i,
                                const BatchLedger& ledger);

// Batched variant: one decoder pass over many indices.
Tensor2 reconstruct_many(const AutoencoderState& state,
                         const std::vector<std::uint64_t>& indices,
                         const BatchLedger& ledger);

// `count` indices drawn uniformly with replacement from 1..upper, decoded.
std::vector<std::uint64_t> sample_replay_indices(std::size_t count, std::uint64_t upper,
                                                 rng::Engine& rng);
std::vector<std::pair<std::uint64_t, std::vector<double>>> sample_replay(
    const AutoencoderState& state, std::size_t count, std::uint64_t upper,
    rng::Engine& rng, const BatchLedger& ledger);

// Mean per-pixel MSE between two decoders' reconstructions of a range.
double recon_drift(const AutoencoderState& state, const nn::ModelParams& old_decoder,
                   std::uint64_t first, std::uint64_t last, const BatchLedger& ledger);

void save_assignment_csv(const FrozenAssignment& fa, const std::string& path);
FrozenAssignment load_assignment_csv(const std::string& path);

}  // namespace binplay::replay
