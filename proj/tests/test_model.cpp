// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "mixsent/checkpoint.hpp"
#include "mixsent/model.hpp"
#include "mixsent/ops.hpp"
#include "mixsent/rng.hpp"

#include "support.hpp"

using namespace mixsent;

namespace {

using testsupport::make_seq;
using testsupport::tiny_batch;
using testsupport::tiny_config;
using testsupport::flatten_params;
using testsupport::unflatten_params;
using testsupport::flatten_grads;
using testsupport::scale_weights;

// hand-summed parameter count for a model with the MLM head attached
std::size_t expected_param_count(const ModelConfig& c) {
    const std::size_t H = static_cast<std::size_t>(c.hidden);
    const std::size_t F = static_cast<std::size_t>(c.ff_dim);
    const std::size_t V = static_cast<std::size_t>(c.vocab_size);
    const std::size_t L = static_cast<std::size_t>(c.max_len);
    const std::size_t embeddings = V * H + L * H;
    const std::size_t attn = 4 * (H * H + H);
    const std::size_t ff = H * F + F + F * H + H;
    const std::size_t norms = 2 * (H + H);
    const std::size_t per_layer = attn + ff + norms;
    const std::size_t head = H * V + V;
    return embeddings + static_cast<std::size_t>(c.n_layers) * per_layer + head;
}

}  // namespace

TEST_CASE("init is deterministic and validates the config") {
    const ModelConfig cfg = tiny_config();
    const Model a = Model::init(cfg, 3);
    const Model b = Model::init(cfg, 3);
    REQUIRE(a.parameters().size() == b.parameters().size());
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        CHECK(a.parameters()[i].value.values() == b.parameters()[i].value.values());
        CHECK(a.parameters()[i].name == b.parameters()[i].name);
    }

    ModelConfig bad = cfg;
    bad.hidden = 6;
    bad.n_heads = 4;
    CHECK_THROWS_AS(Model::init(bad, 0), InvalidConfig);
}

TEST_CASE("parameter count matches the closed form") {
    {
        const Model m = Model::init(tiny_config(), 0);
        CHECK(m.n_scalars() == expected_param_count(tiny_config()));
    }
    {
        ModelConfig cfg = tiny_config();
        cfg.max_len = 12;
        const Model m = Model::init(cfg, 0);
        CHECK(m.n_scalars() == expected_param_count(cfg));
        CHECK(m.n_scalars() == 1840);  // hand-summed
    }
}

TEST_CASE("groups are head-first with embeddings last") {
    const Model m = Model::init(tiny_config(), 1);
    CHECK(m.n_groups() == 4);  // head, layer 1, layer 0, embeddings
    REQUIRE(m.groups().size() == 4);
    for (std::size_t idx : m.groups()[0]) {
        CHECK(m.parameters()[idx].name.starts_with("head."));
    }
    for (std::size_t idx : m.groups()[1]) {
        CHECK(m.parameters()[idx].name.starts_with("layers.1."));
    }
    for (std::size_t idx : m.groups()[2]) {
        CHECK(m.parameters()[idx].name.starts_with("layers.0."));
    }
    for (std::size_t idx : m.groups()[3]) {
        CHECK(m.parameters()[idx].name.starts_with("embeddings."));
    }
    // every parameter belongs to exactly one group
    std::size_t total = 0;
    for (const auto& g : m.groups()) total += g.size();
    CHECK(total == m.parameters().size());
}

TEST_CASE("PAD keys receive exactly zero attention and rows renormalize") {
    const Model m = Model::init(tiny_config(), 5);
    const auto batch = tiny_batch(8);
    // example 1 has real length 5 (CLS + 3 + SEP), PAD at 5..7
    for (int layer = 0; layer < 2; ++layer) {
        for (int head = 0; head < 2; ++head) {
            const Tensor att = m.attention_probs(batch, layer, head, 1);
            const std::size_t n = att.dim(0);
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j >= 5) CHECK(att[i * n + j] == 0.0);
                    sum += att[i * n + j];
                }
                CHECK(std::abs(sum - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("eval-mode forward is bit-deterministic") {
    const Model m = Model::init(tiny_config(), 6);
    const auto batch = tiny_batch(8);
    const Tensor a = m.forward_encoder(batch, false);
    const Tensor b = m.forward_encoder(batch, false);
    CHECK(a.values() == b.values());
}

TEST_CASE("forward is permutation-equivariant across the batch") {
    const Model m = Model::init(tiny_config(), 7);
    auto batch = tiny_batch(8);
    const Tensor ab = m.forward_encoder(batch, false);
    std::swap(batch[0], batch[1]);
    const Tensor ba = m.forward_encoder(batch, false);
    const std::size_t stride = ab.numel() / 2;
    for (std::size_t i = 0; i < stride; ++i) {
        CHECK(ab[i] == ba[stride + i]);
        CHECK(ab[stride + i] == ba[i]);
    }
}

TEST_CASE("forward_mlm shapes and baseline loss") {
    Model m = Model::init(tiny_config(), 8);
    const auto batch = tiny_batch(8);

    const Tensor empty = m.forward_mlm(batch, {});
    CHECK(empty.shape() == std::vector<std::size_t>{0, 32});

    const std::vector<MaskedPosition> masked = {{0, 1}, {0, 3}, {1, 2}};
    const Tensor logits = m.forward_mlm(batch, masked);
    CHECK(logits.shape() == std::vector<std::size_t>{3, 32});

    // untrained loss is close to the uniform baseline ln(V)
    const std::vector<int> targets = {7, 21, 28};
    const double loss = m.mlm_loss(batch, masked, targets, false, false, 0);
    CHECK(loss == doctest::Approx(std::log(32.0)).epsilon(0.15));

    const std::vector<MaskedPosition> bad = {{1, 7}};  // PAD position
    CHECK_THROWS_AS(m.forward_mlm(batch, bad), IdOutOfRange);

    m.swap_head(HeadKind::classifier, 0);
    CHECK_THROWS_AS(m.forward_mlm(batch, masked), WrongHead);
}

TEST_CASE("forward_classify shapes and baseline distribution") {
    Model m = Model::init(tiny_config(), 0);
    const auto batch = tiny_batch(8);
    CHECK_THROWS_AS(m.forward_classify(batch), WrongHead);

    m.swap_head(HeadKind::classifier, 0);
    const Tensor logits = m.forward_classify(batch);
    CHECK(logits.shape() == std::vector<std::size_t>{2, 3});

    // zero-weight head: logits equal the bias for every input
    Model zero = m;
    for (auto& p : zero.parameters()) {
        if (p.name == "head.classifier.weight") {
            std::fill(p.value.values().begin(), p.value.values().end(), 0.0);
        }
        if (p.name == "head.classifier.bias") {
            p.value.values() = {0.25, -0.5, 1.5};
        }
    }
    const Tensor biased = zero.forward_classify(batch);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(biased[e * 3 + 0] == 0.25);
        CHECK(biased[e * 3 + 1] == -0.5);
        CHECK(biased[e * 3 + 2] == 1.5);
    }

    // averaged over a batch, untrained class probabilities are near 1/3
    Rng rng(0);
    std::vector<TokenSequence> big;
    for (int i = 0; i < 16; ++i) {
        std::vector<int> ids;
        const auto len = rng.uniform_int(2, 6);
        for (std::uint64_t k = 0; k < len; ++k) {
            ids.push_back(static_cast<int>(rng.uniform_int(5, 31)));
        }
        big.push_back(make_seq(ids, 8));
    }
    const Tensor big_logits = m.forward_classify(big);
    double mean[3] = {0, 0, 0};
    for (std::size_t e = 0; e < 16; ++e) {
        const Tensor p = softmax(Tensor({3}, {big_logits[e * 3], big_logits[e * 3 + 1],
                                              big_logits[e * 3 + 2]}));
        for (int c = 0; c < 3; ++c) mean[c] += p[static_cast<std::size_t>(c)] / 16.0;
    }
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mean[c] - 1.0 / 3.0) <= 0.15);
}

TEST_CASE("predict_class breaks ties toward the Sentiment order") {
    const double tie[3] = {0.5, 0.5, 0.1};
    CHECK(predict_class(tie) == 0);
    const double tie2[3] = {0.1, 0.5, 0.5};
    CHECK(predict_class(tie2) == 1);
    const double clear[3] = {0.1, 0.2, 0.5};
    CHECK(predict_class(clear) == 2);
}

TEST_CASE("swap_head preserves the encoder bit for bit") {
    Model m = Model::init(tiny_config(), 9);
    const std::uint32_t before = m.encoder_checksum();

    m.swap_head(HeadKind::classifier, 17);
    CHECK(m.encoder_checksum() == before);
    CHECK(m.head() == HeadKind::classifier);
    const auto& head_w = m.parameters()[m.parameters().size() - 2];
    const auto& head_b = m.parameters().back();
    CHECK(head_w.value.shape() == std::vector<std::size_t>{8, 3});
    CHECK(head_b.value.shape() == std::vector<std::size_t>{3});
    CHECK(head_w.group == 0);

    // swapping to the already-attached head kind reinitializes it
    const std::vector<double> w1 = head_w.value.values();
    m.swap_head(HeadKind::classifier, 18);
    CHECK(m.encoder_checksum() == before);
    CHECK(m.parameters()[m.parameters().size() - 2].value.values() != w1);

    m.swap_head(HeadKind::mlm, 19);
    CHECK(m.encoder_checksum() == before);
    CHECK(m.parameters()[m.parameters().size() - 2].value.shape() ==
          std::vector<std::size_t>{8, 32});
}

TEST_CASE("full-model gradients match finite differences (both heads)") {
    const auto batch = tiny_batch(8);

    // MLM head
    {
        Model m = Model::init(tiny_config(), 4);
        scale_weights(m, 12.0);
        const std::vector<MaskedPosition> masked = {{0, 1}, {0, 4}, {1, 2}};
        const std::vector<int> targets = {9, 30, 5};

        m.zero_grads();
        const double base = m.mlm_loss(batch, masked, targets, true, true, 99);
        CHECK(base > 0.0);
        const std::vector<double> analytic = flatten_grads(m);
        std::vector<double> point = flatten_params(m);

        const auto f = [&](std::span<const double> x) {
            unflatten_params(m, x);
            return m.mlm_loss(batch, masked, targets, false, true, 99);
        };
        const auto report = grad_check(f, point, analytic);
        unflatten_params(m, point);
        CHECK(report.max_rel_err <= 1e-4);
    }

    // classifier head
    {
        Model m = Model::init(tiny_config(), 4);
        m.swap_head(HeadKind::classifier, 5);
        scale_weights(m, 12.0);
        const std::vector<int> labels = {0, 2};

        m.zero_grads();
        const double base = m.classify_loss(batch, labels, true, true, 77);
        CHECK(base > 0.0);
        const std::vector<double> analytic = flatten_grads(m);
        std::vector<double> point = flatten_params(m);

        const auto f = [&](std::span<const double> x) {
            unflatten_params(m, x);
            return m.classify_loss(batch, labels, false, true, 77);
        };
        const auto report = grad_check(f, point, analytic);
        unflatten_params(m, point);
        CHECK(report.max_rel_err <= 1e-4);
    }
}

TEST_CASE("gradients remain correct with dropout active") {
    ModelConfig cfg = tiny_config();
    cfg.n_layers = 1;
    cfg.dropout = 0.3;
    Model m = Model::init(cfg, 3);
    m.swap_head(HeadKind::classifier, 4);
    scale_weights(m, 12.0);
    const auto batch = tiny_batch(8);
    const std::vector<int> labels = {1, 0};

    m.zero_grads();
    m.classify_loss(batch, labels, true, true, 123);
    const std::vector<double> analytic = flatten_grads(m);
    std::vector<double> point = flatten_params(m);
    const auto f = [&](std::span<const double> x) {
        unflatten_params(m, x);
        return m.classify_loss(batch, labels, false, true, 123);
    };
    const auto report = grad_check(f, point, analytic);
    unflatten_params(m, point);
    CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("checkpoint round trip is bit exact") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "mixsent_ckpt_test.mxl";

    ModelConfig cfg = tiny_config();
    cfg.dropout = 0.1;
    Model m = Model::init(cfg, 33);
    m.swap_head(HeadKind::classifier, 34);

    save_checkpoint(m, path);
    const Model loaded = load_checkpoint(path);
    CHECK(loaded.config() == m.config());
    CHECK(loaded.head() == HeadKind::classifier);
    REQUIRE(loaded.parameters().size() == m.parameters().size());
    for (std::size_t i = 0; i < m.parameters().size(); ++i) {
        CHECK(loaded.parameters()[i].name == m.parameters()[i].name);
        CHECK(loaded.parameters()[i].group == m.parameters()[i].group);
        CHECK(loaded.parameters()[i].value.values() == m.parameters()[i].value.values());
    }
    CHECK(loaded.groups() == m.groups());
    fs::remove(path);
}

TEST_CASE("checkpoint corruption is rejected") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "mixsent_ckpt_corrupt.mxl";
    const Model m = Model::init(tiny_config(), 35);
    save_checkpoint(m, path);

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }

    const auto write_bytes = [&](const std::string& data) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
    };

    // truncated file
    write_bytes(bytes.substr(0, bytes.size() - 11));
    CHECK_THROWS_AS(load_checkpoint(path), ChecksumMismatch);

    // flipped payload byte
    {
        std::string flipped = bytes;
        flipped[flipped.size() / 2] = static_cast<char>(flipped[flipped.size() / 2] ^ 0x5A);
        write_bytes(flipped);
        CHECK_THROWS_AS(load_checkpoint(path), ChecksumMismatch);
    }

    // wrong magic
    {
        std::string wrong = bytes;
        wrong[0] = 'X';
        write_bytes(wrong);
        CHECK_THROWS_AS(load_checkpoint(path), BadMagic);
    }

    // future version with a recomputed CRC
    {
        std::string future = bytes;
        future[4] = 2;
        const auto crc = static_cast<std::uint32_t>(
            crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(future.data()),
                  static_cast<uInt>(future.size() - 4)));
        std::memcpy(future.data() + future.size() - 4, &crc, 4);
        write_bytes(future);
        CHECK_THROWS_AS(load_checkpoint(path), VersionMismatch);
    }

    CHECK_THROWS_AS(load_checkpoint(fs::temp_directory_path() / "mixsent_no_such.mxl"),
                    IoError);
    fs::remove(path);
}

TEST_CASE("encoder rejects malformed input") {
    const Model m = Model::init(tiny_config(), 40);
    CHECK_THROWS_AS(m.forward_encoder({}, false), ShapeMismatch);

    TokenSequence bad_len = make_seq({5}, 8);
    bad_len.ids.pop_back();
    bad_len.attention_mask.pop_back();
    CHECK_THROWS_AS(m.forward_encoder({bad_len}, false), ShapeMismatch);

    TokenSequence bad_id = make_seq({5}, 8);
    bad_id.ids[1] = 32;
    CHECK_THROWS_AS(m.forward_encoder({bad_id}, false), IdOutOfRange);
}
