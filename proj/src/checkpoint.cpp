// SPDX-License-Identifier: Apache-2.0
#include "mixsent/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace mixsent {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as raw little-endian doubles");

namespace {

constexpr char kMagic[4] = {'M', 'X', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

void append_u32(std::string& buf, std::uint32_t v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void append_u64(std::string& buf, std::uint64_t v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

struct Cursor {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) {
            throw MalformedCheckpoint("checkpoint record overruns the file");
        }
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, buf.data() + pos, 4);
        pos += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, buf.data() + pos, 8);
        pos += 8;
        return v;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

nlohmann::json config_record(const Model& model) {
    const ModelConfig& c = model.config();
    return nlohmann::json{{"n_layers", c.n_layers},     {"hidden", c.hidden},
                          {"n_heads", c.n_heads},       {"ff_dim", c.ff_dim},
                          {"vocab_size", c.vocab_size}, {"max_len", c.max_len},
                          {"n_classes", c.n_classes},   {"dropout", c.dropout},
                          {"head", std::string(to_string(model.head()))}};
}

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    append_u32(buf, kVersion);

    const std::string record = config_record(model).dump();
    append_u32(buf, static_cast<std::uint32_t>(record.size()));
    buf += record;

    for (const auto& p : model.parameters()) {
        append_u32(buf, static_cast<std::uint32_t>(p.name.size()));
        buf += p.name;
        append_u32(buf, static_cast<std::uint32_t>(p.value.rank()));
        for (std::size_t d : p.value.shape()) append_u64(buf, d);
        buf.append(reinterpret_cast<const char*>(p.value.data()),
                   p.value.numel() * sizeof(double));
    }

    const auto crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size())));
    append_u32(buf, crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
        throw IoError("cannot write checkpoint file: " + path.string());
    }
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint file: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("cannot read checkpoint file: " + path.string());

    if (buf.size() < sizeof(kMagic) + 4 + 4 + 4) {
        throw ChecksumMismatch("checkpoint file is truncated: " + path.string());
    }
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw BadMagic("not a checkpoint file: " + path.string());
    }

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
    const auto computed = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size() - 4)));
    if (stored_crc != computed) {
        throw ChecksumMismatch("checkpoint CRC mismatch: " + path.string());
    }

    Cursor cur{buf, sizeof(kMagic)};
    const std::uint32_t version = cur.u32();
    if (version != kVersion) {
        throw VersionMismatch("checkpoint version " + std::to_string(version) +
                              ", expected " + std::to_string(kVersion));
    }

    const std::uint32_t record_len = cur.u32();
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(cur.bytes(record_len));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedCheckpoint(std::string("bad config record: ") + e.what());
    }

    ModelConfig config;
    HeadKind head;
    try {
        config.n_layers = record.at("n_layers").get<int>();
        config.hidden = record.at("hidden").get<int>();
        config.n_heads = record.at("n_heads").get<int>();
        config.ff_dim = record.at("ff_dim").get<int>();
        config.vocab_size = record.at("vocab_size").get<int>();
        config.max_len = record.at("max_len").get<int>();
        config.n_classes = record.at("n_classes").get<int>();
        config.dropout = record.at("dropout").get<double>();
        const auto head_str = record.at("head").get<std::string>();
        if (head_str == "mlm") {
            head = HeadKind::mlm;
        } else if (head_str == "classifier") {
            head = HeadKind::classifier;
        } else {
            throw MalformedCheckpoint("unknown head kind '" + head_str + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedCheckpoint(std::string("bad config record: ") + e.what());
    }

    Model model = Model::init(config, 0);
    if (head == HeadKind::classifier) model.swap_head(HeadKind::classifier, 0);

    const std::size_t payload_end = buf.size() - 4;
    for (auto& p : model.parameters()) {
        if (cur.pos >= payload_end) {
            throw MalformedCheckpoint("checkpoint is missing parameter '" + p.name + "'");
        }
        const std::uint32_t name_len = cur.u32();
        const std::string name = cur.bytes(name_len);
        if (name != p.name) {
            throw MalformedCheckpoint("unexpected parameter '" + name + "', expected '" +
                                      p.name + "'");
        }
        const std::uint32_t rank = cur.u32();
        std::vector<std::size_t> dims(rank);
        for (auto& d : dims) d = static_cast<std::size_t>(cur.u64());
        if (dims != p.value.shape()) {
            throw MalformedCheckpoint("parameter '" + name + "' has unexpected shape");
        }
        const std::size_t payload = p.value.numel() * sizeof(double);
        cur.need(payload);
        std::memcpy(p.value.data(), buf.data() + cur.pos, payload);
        cur.pos += payload;
    }
    if (cur.pos != payload_end) {
        throw MalformedCheckpoint("checkpoint has trailing parameter records");
    }
    return model;
}

}  // namespace mixsent
