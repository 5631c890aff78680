#include "binplay/config.hpp"

#include <fstream>
#include <sstream>

#include "binplay/error.hpp"

namespace binplay {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::defaults() {
    Config cfg;
    auto& v = cfg.values_;

    // Binary code layout.
    v["codes.index_m"] = "16";
    v["codes.index_primes"] = "3,5,7,11";
    v["codes.prefix_m"] = "8";
    v["codes.prefix_p"] = "3";

    // Network widths (fully connected; input width comes from the data).
    v["nn.encoder_hidden"] = "512";
    v["nn.decoder_hidden"] = "512";
    v["nn.classifier_hidden"] = "256";

    // Autoencoder training schedule.
    v["ae.warmup_epochs"] = "5";
    v["ae.assign_epoch_cap"] = "30";
    v["ae.stability_k"] = "3";
    v["ae.phase_c_epochs"] = "40";
    v["ae.minibatch"] = "64";
    v["ae.lr"] = "0.001";
    v["ae.lambda_reg"] = "0.1";

    // Classifier training.
    v["clf.epochs"] = "20";
    v["clf.minibatch_current"] = "32";
    v["clf.minibatch_replay"] = "32";
    v["clf.lr"] = "0.001";
    v["clf.lambda_replay"] = "auto";  // auto = (K-1)/N
    v["clf.preprocess_current"] = "true";
    v["clf.soft_targets"] = "true";

    // Adam moments, shared by all optimizers.
    v["opt.beta1"] = "0.9";
    v["opt.beta2"] = "0.999";
    v["opt.eps"] = "1e-8";

    // Data locations; data.dir empty means use $BINPLAY_DATA.
    v["data.dir"] = "";
    v["data.train_images"] = "train-images-idx3-ubyte";
    v["data.train_labels"] = "train-labels-idx1-ubyte";
    v["data.test_images"] = "t10k-images-idx3-ubyte";
    v["data.test_labels"] = "t10k-labels-idx1-ubyte";
    v["data.train_images_crc32"] = "";  // hex, verified when non-empty
    v["data.train_labels_crc32"] = "";
    v["data.test_images_crc32"] = "";
    v["data.test_labels_crc32"] = "";
    v["data.per_class_cap"] = "500";
    v["data.classes"] = "0|1,2|3,4|5,6|7,8|9";

    v["run.seed"] = "1";
    v["run.drift_bound"] = "0.05";
    return cfg;
}

Config Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open config " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    Config cfg = defaults();
    cfg.apply_text(buffer.str(), path);
    return cfg;
}

void Config::apply_text(const std::string& text, const std::string& origin) {
    std::stringstream stream(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("config-parse-error",
                 origin + ":" + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (values_.find(key) == values_.end())
            fail("unknown-config-key", origin + ":" + std::to_string(lineno) + " " + key);
        values_[key] = value;
    }
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end()) fail("unknown-config-key", key);
    values_[key] = value;
}

const std::string& Config::get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail("unknown-config-key", key);
    return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
    try {
        return std::stoll(get_str(key));
    } catch (const std::exception&) {
        fail("config-parse-error", key + " = " + get_str(key) + " is not an integer");
    }
}

std::uint64_t Config::get_u64(const std::string& key) const {
    try {
        return std::stoull(get_str(key));
    } catch (const std::exception&) {
        fail("config-parse-error", key + " = " + get_str(key) + " is not an unsigned integer");
    }
}

std::size_t Config::get_size(const std::string& key) const {
    return static_cast<std::size_t>(get_u64(key));
}

double Config::get_double(const std::string& key) const {
    try {
        return std::stod(get_str(key));
    } catch (const std::exception&) {
        fail("config-parse-error", key + " = " + get_str(key) + " is not a number");
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string& s = get_str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail("config-parse-error", key + " = " + s + " is not a boolean");
}

std::vector<std::uint64_t> Config::get_u64_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    std::stringstream ss(get_str(key));
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        if (field.empty()) continue;
        try {
            out.push_back(std::stoull(field));
        } catch (const std::exception&) {
            fail("config-parse-error", key + " contains non-integer '" + field + "'");
        }
    }
    return out;
}

std::vector<std::vector<int>> Config::get_class_sets(const std::string& key) const {
    std::vector<std::vector<int>> sets;
    std::stringstream ss(get_str(key));
    std::string group;
    while (std::getline(ss, group, ',')) {
        group = trim(group);
        if (group.empty()) continue;
        std::vector<int> classes;
        std::stringstream gs(group);
        std::string field;
        while (std::getline(gs, field, '|')) {
            field = trim(field);
            try {
                classes.push_back(std::stoi(field));
            } catch (const std::exception&) {
                fail("config-parse-error", key + " contains non-integer class '" + field + "'");
            }
        }
        if (classes.empty()) fail("config-parse-error", key + " has an empty class group");
        sets.push_back(std::move(classes));
    }
    if (sets.empty()) fail("config-parse-error", key + " defines no batches");
    return sets;
}

std::string Config::resolved_text() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    }
    return out;
}

std::uint64_t Config::hash() const {
    const std::string text = resolved_text();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char byte : text) {
        h ^= byte;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace binplay
