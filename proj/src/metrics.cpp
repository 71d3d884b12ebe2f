// SPDX-License-Identifier: Apache-2.0
#include "mixsent/metrics.hpp"

#include <fstream>
#include <sstream>

namespace mixsent {

std::array<std::array<std::size_t, 3>, 3> confusion_matrix(std::span<const Sentiment> y_true,
                                                           std::span<const Sentiment> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw LengthMismatch("confusion_matrix: " + std::to_string(y_true.size()) +
                             " labels vs " + std::to_string(y_pred.size()) + " predictions");
    }
    if (y_true.empty()) throw EmptyEval();
    std::array<std::array<std::size_t, 3>, 3> m{};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        m[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])]++;
    }
    return m;
}

EvalReport evaluate(std::span<const Sentiment> y_true, std::span<const Sentiment> y_pred) {
    EvalReport report;
    report.confusion = confusion_matrix(y_true, y_pred);
    report.total = y_true.size();

    const double n = static_cast<double>(report.total);
    double weighted = 0.0;
    std::size_t correct = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t tp = report.confusion[c][c];
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t o = 0; o < 3; ++o) {
            if (o == c) continue;
            fp += report.confusion[o][c];
            fn += report.confusion[c][o];
        }
        correct += tp;
        ClassMetrics& cm = report.per_class[c];
        cm.support = tp + fn;
        cm.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        cm.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        cm.f1 = (cm.precision + cm.recall > 0.0)
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        weighted += static_cast<double>(cm.support) / n * cm.f1;
    }
    report.weighted_f1 = weighted;
    report.accuracy = static_cast<double>(correct) / n;
    return report;
}

double weighted_f1(std::span<const Sentiment> y_true, std::span<const Sentiment> y_pred) {
    return evaluate(y_true, y_pred).weighted_f1;
}

std::string EvalReport::to_kv() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            os << "confusion." << to_string(kAllSentiments[r]) << '.'
               << to_string(kAllSentiments[c]) << '=' << confusion[r][c] << '\n';
        }
    }
    for (std::size_t c = 0; c < 3; ++c) {
        const auto name = to_string(kAllSentiments[c]);
        os << name << ".precision=" << per_class[c].precision << '\n';
        os << name << ".recall=" << per_class[c].recall << '\n';
        os << name << ".f1=" << per_class[c].f1 << '\n';
        os << name << ".support=" << per_class[c].support << '\n';
    }
    os << "weighted_f1=" << weighted_f1 << '\n';
    os << "accuracy=" << accuracy << '\n';
    os << "total=" << total << '\n';
    return os.str();
}

void write_predictions(std::span<const Tweet> tweets, std::span<const Sentiment> preds,
                       const std::filesystem::path& path) {
    if (tweets.size() != preds.size()) {
        throw LengthMismatch("write_predictions: " + std::to_string(tweets.size()) +
                             " tweets vs " + std::to_string(preds.size()) + " predictions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write predictions file: " + path.string());
    out << "Uid,Sentiment\n";
    for (std::size_t i = 0; i < tweets.size(); ++i) {
        out << tweets[i].uid << ',' << to_string(preds[i]) << '\n';
    }
}

std::vector<std::pair<std::string, Sentiment>> read_predictions(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open predictions file: " + path.string());
    std::vector<std::pair<std::string, Sentiment>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            first = false;
            if (line != "Uid,Sentiment") {
                throw std::runtime_error("predictions file " + path.string() + ": bad header");
            }
            continue;
        }
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("predictions file " + path.string() + ": bad row '" + line +
                                     "'");
        }
        const auto label = sentiment_from_string(line.substr(comma + 1));
        if (!label) {
            throw std::runtime_error("predictions file " + path.string() +
                                     ": unknown sentiment in row '" + line + "'");
        }
        rows.emplace_back(line.substr(0, comma), *label);
    }
    return rows;
}

}  // namespace mixsent
