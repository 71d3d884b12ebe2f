// SPDX-License-Identifier: Apache-2.0
#include "mixsent/runconfig.hpp"

#include <fstream>

namespace mixsent {

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw BadInput("config key '" + key + "': expected a boolean, got '" + value + "'");
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw BadInput("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw BadInput("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t comma = value.find(',', start);
        const std::string item =
            value.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) {
            seeds.push_back(static_cast<std::uint64_t>(parse_long(key, item)));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (seeds.empty()) throw BadInput("config key '" + key + "': empty seed list");
    return seeds;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    // paths
    if (key == "train") { train_path = value; return; }
    if (key == "valid") { valid_path = value; return; }
    if (key == "test") { test_path = value; return; }
    if (key == "vocab") { vocab_path = value; return; }
    if (key == "checkpoint") { checkpoint_path = value; return; }
    if (key == "gold") { gold_path = value; return; }
    if (key == "predictions") { predictions_path = value; return; }
    if (key == "out") { out_dir = value; return; }
    // textnorm
    if (key == "norm.collapse_min_run") {
        norm.collapse_min_run = static_cast<int>(parse_long(key, value));
        if (norm.collapse_min_run < 2) throw BadInput("norm.collapse_min_run must be >= 2");
        return;
    }
    if (key == "norm.collapse") { norm.collapse_repeats = parse_bool(key, value); return; }
    if (key == "norm.mentions") { norm.remove_mentions = parse_bool(key, value); return; }
    if (key == "norm.hashtags") { norm.remove_hashtags = parse_bool(key, value); return; }
    if (key == "norm.accents") { norm.strip_marks = parse_bool(key, value); return; }
    if (key == "norm.squeeze") { norm.squeeze_whitespace = parse_bool(key, value); return; }
    // model
    if (key == "model.n_layers") { model.n_layers = static_cast<int>(parse_long(key, value)); return; }
    if (key == "model.hidden") { model.hidden = static_cast<int>(parse_long(key, value)); return; }
    if (key == "model.n_heads") { model.n_heads = static_cast<int>(parse_long(key, value)); return; }
    if (key == "model.ff_dim") { model.ff_dim = static_cast<int>(parse_long(key, value)); return; }
    if (key == "model.vocab_size") { model.vocab_size = static_cast<int>(parse_long(key, value)); return; }
    if (key == "model.max_len") {
        model.max_len = static_cast<int>(parse_long(key, value));
        train.max_len = model.max_len;
        return;
    }
    if (key == "model.dropout") { model.dropout = parse_double(key, value); return; }
    // training
    if (key == "train.batch_size") { train.batch_size = static_cast<int>(parse_long(key, value)); return; }
    if (key == "train.weight_decay") { train.weight_decay = parse_double(key, value); return; }
    if (key == "train.epochs") { train.epochs = static_cast<int>(parse_long(key, value)); return; }
    if (key == "train.seed") { train.seed = static_cast<std::uint64_t>(parse_long(key, value)); return; }
    if (key == "train.mask_rate") { train.mlm_mask_rate = parse_double(key, value); return; }
    if (key == "train.max_steps") { train.max_steps = parse_long(key, value); return; }
    // fine-tuning schedule
    if (key == "sched.lr_max") { sched.lr_max = parse_double(key, value); return; }
    if (key == "sched.cut_frac") { sched.cut_frac = parse_double(key, value); return; }
    if (key == "sched.ratio") { sched.ratio = parse_double(key, value); return; }
    if (key == "sched.discr_factor") { sched.discr_factor = parse_double(key, value); return; }
    // pre-training
    if (key == "pretrain.lr_max") { pretrain_lr_max = parse_double(key, value); return; }
    if (key == "pretrain.epochs") { pretrain_epochs = static_cast<int>(parse_long(key, value)); return; }
    if (key == "vocab.min_freq") { vocab_min_freq = static_cast<std::size_t>(parse_long(key, value)); return; }
    // ablation toggles
    if (key == "preprocessing") { preprocessing = parse_bool(key, value); return; }
    if (key == "ulmfit") { ulmfit = parse_bool(key, value); return; }
    if (key == "ablate.seeds") { ablate_seeds = parse_seed_list(key, value); return; }
    // synthetic corpus
    if (key == "synth.train") { synth_train = static_cast<std::size_t>(parse_long(key, value)); return; }
    if (key == "synth.valid") { synth_valid = static_cast<std::size_t>(parse_long(key, value)); return; }
    if (key == "synth.test") { synth_test = static_cast<std::size_t>(parse_long(key, value)); return; }
    if (key == "synth.min_tokens") { synth.min_tokens = static_cast<std::size_t>(parse_long(key, value)); return; }
    if (key == "synth.max_tokens") { synth.max_tokens = static_cast<std::size_t>(parse_long(key, value)); return; }
    if (key == "synth.elongation") { synth.elongation_rate = parse_double(key, value); return; }
    if (key == "synth.uppercase") { synth.uppercase_rate = parse_double(key, value); return; }
    if (key == "synth.accent") { synth.accent_rate = parse_double(key, value); return; }
    if (key == "synth.mention") { synth.mention_rate = parse_double(key, value); return; }
    if (key == "synth.hashtag") { synth.hashtag_rate = parse_double(key, value); return; }

    throw BadInput("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open config file: " + path.string());
    RunConfig rc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw BadInput("config file " + path.string() + " line " + std::to_string(line_no) +
                           ": expected key=value");
        }
        rc.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return rc;
}

}  // namespace mixsent
