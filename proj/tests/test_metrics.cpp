// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "mixsent/metrics.hpp"
#include "mixsent/rng.hpp"

using namespace mixsent;

namespace {

// Independent brute-force oracle: f1 per class straight from the
// definition, weighted by support.
double oracle_weighted_f1(const std::vector<Sentiment>& y_true,
                          const std::vector<Sentiment>& y_pred) {
    double result = 0.0;
    for (int c = 0; c < 3; ++c) {
        double tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const int t = static_cast<int>(y_true[i]);
            const int p = static_cast<int>(y_pred[i]);
            if (t == c) support += 1;
            if (t == c && p == c) tp += 1;
            if (t != c && p == c) fp += 1;
            if (t == c && p != c) fn += 1;
        }
        const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f1 =
            precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        result += support / static_cast<double>(y_true.size()) * f1;
    }
    return result;
}

}  // namespace

TEST_CASE("confusion matrix examples") {
    using S = Sentiment;
    const std::vector<S> perfect = {S::positive, S::negative, S::neutral, S::positive};
    const auto diag = confusion_matrix(perfect, perfect);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            if (r != c) CHECK(diag[r][c] == 0);
        }
    }
    CHECK(diag[0][0] == 2);

    const std::vector<S> y_true = {S::positive, S::positive, S::negative};
    const std::vector<S> y_pred = {S::positive, S::negative, S::negative};
    const auto m = confusion_matrix(y_true, y_pred);
    CHECK(m[0][0] == 1);
    CHECK(m[0][1] == 1);
    CHECK(m[0][2] == 0);
    CHECK(m[1][1] == 1);
    CHECK(m[2][2] == 0);

    // column sums equal prediction counts
    std::size_t pred_counts[3] = {0, 0, 0};
    for (S p : y_pred) pred_counts[static_cast<std::size_t>(p)]++;
    for (std::size_t c = 0; c < 3; ++c) {
        std::size_t col = 0;
        for (std::size_t r = 0; r < 3; ++r) col += m[r][c];
        CHECK(col == pred_counts[c]);
    }

    CHECK_THROWS_AS(confusion_matrix(y_true, std::vector<S>{S::positive}), LengthMismatch);
    CHECK_THROWS_AS(confusion_matrix(std::vector<S>{}, std::vector<S>{}), EmptyEval);
}

TEST_CASE("weighted f1 hand-derived case") {
    using S = Sentiment;
    const std::vector<S> y_true = {S::positive, S::positive, S::negative};
    const std::vector<S> y_pred = {S::positive, S::negative, S::negative};
    CHECK(std::abs(weighted_f1(y_true, y_pred) - 2.0 / 3.0) <= 1e-9);

    const EvalReport report = evaluate(y_true, y_pred);
    CHECK(report.per_class[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.per_class[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.per_class[2].support == 0);
    CHECK(report.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("weighted f1 boundary cases") {
    using S = Sentiment;
    const std::vector<S> balanced = {S::positive, S::negative, S::neutral};
    CHECK(weighted_f1(balanced, balanced) == doctest::Approx(1.0).epsilon(1e-12));

    // all predictions one class on balanced truth: 1/3 of that class's f1
    const std::vector<S> all_pos = {S::positive, S::positive, S::positive};
    const EvalReport report = evaluate(balanced, all_pos);
    CHECK(report.weighted_f1 ==
          doctest::Approx(report.per_class[0].f1 / 3.0).epsilon(1e-12));
}

TEST_CASE("weighted f1 equals the brute-force oracle on random vectors") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(0, 29);
        std::vector<Sentiment> y_true(n);
        std::vector<Sentiment> y_pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<Sentiment>(rng.uniform_int(0, 2));
            y_pred[i] = static_cast<Sentiment>(rng.uniform_int(0, 2));
        }
        const EvalReport report = evaluate(y_true, y_pred);
        CHECK(std::abs(report.weighted_f1 - oracle_weighted_f1(y_true, y_pred)) <= 1e-12);
        CHECK(report.weighted_f1 >= 0.0);
        CHECK(report.weighted_f1 <= 1.0);

        // permutation invariance: reverse both vectors
        std::vector<Sentiment> rt(y_true.rbegin(), y_true.rend());
        std::vector<Sentiment> rp(y_pred.rbegin(), y_pred.rend());
        CHECK(weighted_f1(rt, rp) == report.weighted_f1);

        // weighted f1 is 1 iff the confusion matrix is diagonal
        bool diagonal = true;
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                if (r != c && report.confusion[r][c]) diagonal = false;
            }
        }
        CHECK((report.weighted_f1 == 1.0) == diagonal);
    }
}

TEST_CASE("weighted f1 consistency inside the report") {
    Rng rng(43);
    std::vector<Sentiment> y_true(100);
    std::vector<Sentiment> y_pred(100);
    for (std::size_t i = 0; i < 100; ++i) {
        y_true[i] = static_cast<Sentiment>(rng.uniform_int(0, 2));
        y_pred[i] = static_cast<Sentiment>(rng.uniform_int(0, 2));
    }
    const EvalReport r = evaluate(y_true, y_pred);
    std::size_t total = 0;
    double weighted = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        std::size_t row = 0;
        for (std::size_t p = 0; p < 3; ++p) row += r.confusion[c][p];
        CHECK(row == r.per_class[c].support);
        weighted += static_cast<double>(r.per_class[c].support) / 100.0 * r.per_class[c].f1;
        total += row;
    }
    CHECK(total == r.total);
    CHECK(std::abs(weighted - r.weighted_f1) <= 1e-12);
}

TEST_CASE("write_predictions format and round trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "mixsent_preds_test.csv";

    const std::vector<Tweet> tweets = {{"1", {{"hola", LangTag::spa()}}, std::nullopt}};
    const std::vector<Sentiment> preds = {Sentiment::positive};
    write_predictions(tweets, preds, path);
    {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        CHECK(content == "Uid,Sentiment\n1,positive\n");
    }

    write_predictions({}, {}, path);
    {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        CHECK(content == "Uid,Sentiment\n");
    }

    const std::vector<Tweet> more = {{"a", {{"x", LangTag::en()}}, std::nullopt},
                                     {"b", {{"y", LangTag::en()}}, std::nullopt}};
    const std::vector<Sentiment> labels = {Sentiment::neutral, Sentiment::negative};
    write_predictions(more, labels, path);
    const auto rows = read_predictions(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::pair<std::string, Sentiment>{"a", Sentiment::neutral});
    CHECK(rows[1] == std::pair<std::string, Sentiment>{"b", Sentiment::negative});

    CHECK_THROWS_AS(write_predictions(more, preds, path), LengthMismatch);
    fs::remove(path);
}
