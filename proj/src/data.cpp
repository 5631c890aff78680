#include "binplay/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace binplay::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-error", "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                   const std::string& path) {
    if (offset + 4 > bytes.size()) fail("truncated-file", path + " ended inside header");
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>((v >> 24) & 0xff), static_cast<char>((v >> 16) & 0xff),
                 static_cast<char>((v >> 8) & 0xff), static_cast<char>(v & 0xff)};
    out.write(b, 4);
}

std::uint32_t crc_of(const std::vector<std::uint8_t>& bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", v);
    return std::string(buf);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img_bytes = read_file(images_path);
    const auto lbl_bytes = read_file(labels_path);

    const std::uint32_t img_magic = be32(img_bytes, 0, images_path);
    if (img_magic != kImageMagic)
        fail("bad-magic", images_path + " has magic 0x" + hex32(img_magic) +
                              ", expected 0x" + hex32(kImageMagic));
    const std::uint32_t lbl_magic = be32(lbl_bytes, 0, labels_path);
    if (lbl_magic != kLabelMagic)
        fail("bad-magic", labels_path + " has magic 0x" + hex32(lbl_magic) +
                              ", expected 0x" + hex32(kLabelMagic));

    const std::uint32_t count = be32(img_bytes, 4, images_path);
    const std::uint32_t rows = be32(img_bytes, 8, images_path);
    const std::uint32_t cols = be32(img_bytes, 12, images_path);
    const std::uint32_t lbl_count = be32(lbl_bytes, 4, labels_path);
    if (count != lbl_count)
        fail("count-mismatch", std::to_string(count) + " images vs " +
                                   std::to_string(lbl_count) + " labels");

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    if (img_bytes.size() != 16 + static_cast<std::size_t>(count) * pixels)
        fail("truncated-file", images_path + " payload size mismatch");
    if (lbl_bytes.size() != 8 + static_cast<std::size_t>(count))
        fail("truncated-file", labels_path + " payload size mismatch");

    Dataset ds;
    ds.image_rows = rows;
    ds.image_cols = cols;
    ds.images = Tensor2(count, pixels);
    ds.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* src = img_bytes.data() + 16 + i * pixels;
        double* dst = ds.images.row(i);
        for (std::size_t p = 0; p < pixels; ++p)
            dst[p] = static_cast<double>(src[p]) / 255.0;
        ds.labels[i] = static_cast<int>(lbl_bytes[8 + i]);
    }
    ds.images_path = images_path;
    ds.labels_path = labels_path;
    ds.images_crc32 = crc_of(img_bytes);
    ds.labels_crc32 = crc_of(lbl_bytes);
    return ds;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
    if (pixels.size() != static_cast<std::size_t>(count) * rows * cols)
        fail("count-mismatch", "pixel buffer does not match header counts");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    put_be32(out, kImageMagic);
    put_be32(out, count);
    put_be32(out, rows);
    put_be32(out, cols);
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) fail("io-error", "write failed for " + path);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-error", "cannot open " + path + " for writing");
    put_be32(out, kLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    if (!out) fail("io-error", "write failed for " + path);
}

Scenario build_scenario(const Dataset& dataset,
                        const std::vector<std::vector<int>>& class_sets,
                        std::size_t per_class_cap, std::uint64_t seed) {
    std::set<int> all_classes;
    for (const auto& set : class_sets)
        for (int c : set)
            if (!all_classes.insert(c).second)
                fail("non-disjoint-classes", "class " + std::to_string(c) +
                                                 " appears in more than one batch");

    rng::Engine rng(seed);
    Scenario scenario;
    scenario.seed = seed;
    for (const auto& classes : class_sets) {
        ScenarioBatch batch;
        batch.classes = classes;
        for (int c : classes) {
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < dataset.count(); ++i)
                if (dataset.labels[i] == c) rows.push_back(i);
            if (rows.size() < per_class_cap)
                fail("cap-exceeds-available",
                     "class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                         " samples, cap " + std::to_string(per_class_cap));
            rng.shuffle(rows);
            rows.resize(per_class_cap);
            batch.dataset_rows.insert(batch.dataset_rows.end(), rows.begin(), rows.end());
        }
        rng.shuffle(batch.dataset_rows);
        scenario.batches.push_back(std::move(batch));
    }
    return scenario;
}

void extract_batch(const Dataset& dataset, const ScenarioBatch& batch,
                   Tensor2& images, std::vector<int>& labels) {
    images = Tensor2(batch.dataset_rows.size(), dataset.images.cols);
    labels.resize(batch.dataset_rows.size());
    for (std::size_t i = 0; i < batch.dataset_rows.size(); ++i) {
        const std::size_t row = batch.dataset_rows[i];
        std::copy(dataset.images.row(row), dataset.images.row(row) + dataset.images.cols,
                  images.row(i));
        labels[i] = dataset.labels[row];
    }
}

// ------------------------------------------------- synthetic stand-in

namespace {

struct Glyph {
    int label = 0;
    double pixels[64];  // 8x8, already scaled to [0,1]
};

std::vector<Glyph> load_glyphs(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) fail("io-error", "cannot open glyph file " + csv_path);
    std::vector<Glyph> glyphs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        Glyph g;
        if (!std::getline(ss, field, ',')) fail("parse-error", "glyph row missing label");
        g.label = std::stoi(field);
        for (int i = 0; i < 64; ++i) {
            if (!std::getline(ss, field, ','))
                fail("parse-error", "glyph row has fewer than 64 pixels");
            g.pixels[i] = std::stod(field) / 16.0;
        }
        glyphs.push_back(g);
    }
    if (glyphs.empty()) fail("parse-error", "no glyphs in " + csv_path);
    return glyphs;
}

double sample_bilinear(const double* img, int w, int h, double x, double y) {
    if (x < 0.0 || y < 0.0 || x > w - 1.0 || y > h - 1.0) return 0.0;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img[y0 * w + x0] * (1.0 - fx) + img[y0 * w + x1] * fx;
    const double bot = img[y1 * w + x0] * (1.0 - fx) + img[y1 * w + x1] * fx;
    return top * (1.0 - fy) + bot * fy;
}

constexpr int kOut = 28;

void render(const Glyph& glyph, rng::Engine& rng, std::uint8_t* out) {
    const double angle = rng.uniform(-0.12, 0.12);
    const double scale = 2.5 * rng.uniform(0.85, 1.10);  // 8px glyph -> ~20px
    const double shift_x = rng.uniform(-2.0, 2.0);
    const double shift_y = rng.uniform(-2.0, 2.0);
    const double gain = rng.uniform(0.75, 1.0);
    const double cos_a = std::cos(angle);
    const double sin_a = std::sin(angle);

    for (int r = 0; r < kOut; ++r) {
        for (int c = 0; c < kOut; ++c) {
            // Inverse affine map from output pixel to glyph coordinates.
            const double dx = (c - (kOut - 1) / 2.0 - shift_x) / scale;
            const double dy = (r - (kOut - 1) / 2.0 - shift_y) / scale;
            const double gx = cos_a * dx + sin_a * dy + 3.5;
            const double gy = -sin_a * dx + cos_a * dy + 3.5;
            double v = gain * sample_bilinear(glyph.pixels, 8, 8, gx, gy);
            v += rng.uniform(-0.04, 0.04);
            v = std::clamp(v, 0.0, 1.0);
            out[r * kOut + c] = static_cast<std::uint8_t>(std::lround(255.0 * v));
        }
    }
}

void render_split(const std::vector<const Glyph*>& pool, std::size_t per_class_count,
                  int label, rng::Engine& rng, std::vector<std::uint8_t>& pixels,
                  std::vector<std::uint8_t>& labels) {
    for (std::size_t s = 0; s < per_class_count; ++s) {
        const Glyph* g = pool[rng.below(pool.size())];
        const std::size_t base = pixels.size();
        pixels.resize(base + kOut * kOut);
        render(*g, rng, pixels.data() + base);
        labels.push_back(static_cast<std::uint8_t>(label));
    }
}

}  // namespace

void make_synth_idx(const std::string& glyph_csv, const std::string& out_dir,
                    const SynthConfig& cfg) {
    const auto glyphs = load_glyphs(glyph_csv);
    rng::Engine engine(rng::derive(cfg.seed, rng::kSynthStream));

    std::vector<std::uint8_t> train_pixels, train_labels, test_pixels, test_labels;
    for (int label = 0; label < 10; ++label) {
        std::vector<const Glyph*> of_class;
        for (const auto& g : glyphs)
            if (g.label == label) of_class.push_back(&g);
        if (of_class.size() < 4)
            fail("cap-exceeds-available", "too few glyphs for class " + std::to_string(label));
        std::vector<std::size_t> perm = engine.permutation(of_class.size());
        const std::size_t split =
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         cfg.train_glyph_fraction * of_class.size()));
        std::vector<const Glyph*> train_pool, test_pool;
        for (std::size_t i = 0; i < perm.size(); ++i)
            (i < split ? train_pool : test_pool).push_back(of_class[perm[i]]);

        render_split(train_pool, cfg.train_per_class, label, engine, train_pixels,
                     train_labels);
        render_split(test_pool, cfg.test_per_class, label, engine, test_pixels,
                     test_labels);
    }

    std::filesystem::create_directories(out_dir);
    const std::string dir = out_dir + "/";
    write_idx_images(dir + "train-images-idx3-ubyte", train_pixels,
                     static_cast<std::uint32_t>(train_labels.size()), kOut, kOut);
    write_idx_labels(dir + "train-labels-idx1-ubyte", train_labels);
    write_idx_images(dir + "t10k-images-idx3-ubyte", test_pixels,
                     static_cast<std::uint32_t>(test_labels.size()), kOut, kOut);
    write_idx_labels(dir + "t10k-labels-idx1-ubyte", test_labels);
}

}  // namespace binplay::data
