#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binplay/rng.hpp"
#include "binplay/tensor.hpp"

namespace binplay::data {

struct Dataset {
    Tensor2 images;           // count x (rows*cols), pixel values in [0,1]
    std::vector<int> labels;  // class ids < 10
    std::size_t image_rows = 0;
    std::size_t image_cols = 0;
    std::string images_path;
    std::string labels_path;
    std::uint32_t images_crc32 = 0;
    std::uint32_t labels_crc32 = 0;

    std::size_t count() const { return images.rows; }
};

// Big-endian IDX parsing: image magic 0x00000803 then count, rows, cols;
// label magic 0x00000801 then count; unsigned-byte payloads, pixels
// divided by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// -------------------------------------------------------------- scenario

struct ScenarioBatch {
    std::vector<int> classes;
    std::vector<std::size_t> dataset_rows;  // chronological sample order
};

struct Scenario {
    std::vector<ScenarioBatch> batches;
    std::uint64_t seed = 0;
};

// Batch b holds only the b-th class set, subsampled to per_class_cap with
// the seeded generator; global indices follow batch-by-batch order.
Scenario build_scenario(const Dataset& dataset,
                        const std::vector<std::vector<int>>& class_sets,
                        std::size_t per_class_cap, std::uint64_t seed);

// Materialize one batch as an image tensor plus labels.
void extract_batch(const Dataset& dataset, const ScenarioBatch& batch,
                   Tensor2& images, std::vector<int>& labels);

// ------------------------------------------------- synthetic stand-in

// Renders 28x28 digit images from a bundled set of 8x8 handwritten-digit
// glyphs (bilinear upscale under a small random affine map, intensity
// jitter, additive noise) and writes them as IDX train/test files. Train
// and test sets draw from disjoint glyph pools per class.
struct SynthConfig {
    std::size_t train_per_class = 1000;
    std::size_t test_per_class = 1000;
    double train_glyph_fraction = 0.7;
    std::uint64_t seed = 1;
};

void make_synth_idx(const std::string& glyph_csv, const std::string& out_dir,
                    const SynthConfig& cfg);

}  // namespace binplay::data
