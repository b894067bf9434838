#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "labelset.hpp"

namespace plotdyn {

/// Lowercased ASCII alphanumeric runs of length >= 2. Every other byte
/// (punctuation, whitespace, non-ASCII) separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) out.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (c < 128 && std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

struct LabeledText {
    std::string text;
    std::string label;
};

/// Multinomial naive Bayes with additive smoothing over a fixed label set.
class NaiveBayesModel {
public:
    NaiveBayesModel() = default;

    const LabelSet& labelset() const { return labelset_; }
    double smoothing_alpha() const { return alpha_; }
    const std::vector<double>& log_priors() const { return log_prior_; }
    std::size_t vocabulary_size() const { return vocab_.size(); }
    bool fitted() const { return !vocab_.empty(); }

    /// log P(token | label); nullopt for out-of-vocabulary tokens.
    std::optional<double> log_likelihood(std::size_t label, std::string_view token) const {
        auto it = vocab_.find(std::string(token));
        if (it == vocab_.end()) return std::nullopt;
        return log_lik_[label][it->second];
    }

    /// Posterior over labels. Out-of-vocabulary tokens are ignored, so empty
    /// or fully unseen text yields the priors.
    Distribution posterior(std::string_view text) const {
        if (!fitted()) throw ConfigError("naive Bayes model is not fitted");
        std::vector<double> score = log_prior_;
        for (const auto& tok : tokenize(text)) {
            auto it = vocab_.find(tok);
            if (it == vocab_.end()) continue;
            for (std::size_t c = 0; c < score.size(); ++c) score[c] += log_lik_[c][it->second];
        }
        const double mx = *std::max_element(score.begin(), score.end());
        Distribution p(score.size());
        double sum = 0.0;
        for (std::size_t c = 0; c < score.size(); ++c) {
            p[c] = std::exp(score[c] - mx);
            sum += p[c];
        }
        for (double& v : p) v /= sum;
        return p;
    }

    friend NaiveBayesModel fit_naive_bayes(const std::vector<LabeledText>&, const LabelSet&, double);

private:
    LabelSet labelset_;
    double alpha_ = 1.0;
    std::unordered_map<std::string, std::size_t> vocab_;
    std::vector<double> log_prior_;
    std::vector<std::vector<double>> log_lik_;  // [label][token]
};

/// Fits the model. Token likelihoods are (count + alpha) / (total + alpha * V);
/// priors are (docs + alpha) / (N + alpha * C), so labels without training
/// documents keep a non-zero prior.
inline NaiveBayesModel fit_naive_bayes(const std::vector<LabeledText>& data, const LabelSet& labelset,
                                       double smoothing_alpha = 1.0) {
    if (!(smoothing_alpha > 0.0) || !std::isfinite(smoothing_alpha)) {
        throw ConfigError("smoothing_alpha must be positive");
    }
    if (data.empty()) throw DataError("empty training set");

    NaiveBayesModel m;
    m.labelset_ = labelset;
    m.alpha_ = smoothing_alpha;
    const std::size_t n_labels = labelset.size();
    std::vector<std::size_t> docs(n_labels, 0);
    std::vector<std::unordered_map<std::size_t, double>> counts(n_labels);

    for (const auto& item : data) {
        auto c = labelset.index_of(item.label);
        if (!c) throw DataError("training label '" + item.label + "' is not in " + labelset.name());
        ++docs[*c];
        for (const auto& tok : tokenize(item.text)) {
            auto [it, inserted] = m.vocab_.emplace(tok, m.vocab_.size());
            counts[*c][it->second] += 1.0;
        }
    }
    if (m.vocab_.empty()) throw DataError("training texts contain no tokens");

    const double v = static_cast<double>(m.vocab_.size());
    const double n_docs = static_cast<double>(data.size());
    m.log_prior_.resize(n_labels);
    m.log_lik_.assign(n_labels, std::vector<double>(m.vocab_.size()));
    for (std::size_t c = 0; c < n_labels; ++c) {
        m.log_prior_[c] = std::log((static_cast<double>(docs[c]) + smoothing_alpha) /
                                   (n_docs + smoothing_alpha * static_cast<double>(n_labels)));
        double label_total = 0.0;
        for (const auto& [tok, cnt] : counts[c]) label_total += cnt;
        const double denom = std::log(label_total + smoothing_alpha * v);
        auto& row = m.log_lik_[c];
        std::fill(row.begin(), row.end(), std::log(smoothing_alpha) - denom);
        for (const auto& [tok, cnt] : counts[c]) row[tok] = std::log(cnt + smoothing_alpha) - denom;
    }
    return m;
}

}  // namespace plotdyn
