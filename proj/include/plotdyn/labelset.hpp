#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "error.hpp"

namespace plotdyn {

/// A named, ordered set of labels. Label order defines the coordinate order
/// of every distribution over the set.
class LabelSet {
public:
    LabelSet() = default;
    LabelSet(std::string name, std::vector<std::string> labels)
        : name_(std::move(name)), labels_(std::move(labels)) {
        if (labels_.empty()) throw ConfigError("label set '" + name_ + "' is empty");
        std::unordered_set<std::string> seen;
        for (const auto& l : labels_) {
            if (!seen.insert(l).second) {
                throw ConfigError("label set '" + name_ + "' repeats label '" + l + "'");
            }
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    const std::string& operator[](std::size_t i) const { return labels_[i]; }

    std::optional<std::size_t> index_of(std::string_view label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels_.begin());
    }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    std::string name_;
    std::vector<std::string> labels_;
};

inline const LabelSet& genres20() {
    static const LabelSet set("genres20",
                              {"Comedy", "Drama", "Western", "Adventure", "Animation", "Action",
                               "Thriller", "Family", "Romance", "Fantasy", "Horror", "History",
                               "Music", "Sci-Fi", "War", "Crime", "Musical", "Biography",
                               "Mystery", "Sport"});
    return set;
}

inline const LabelSet& emoji11() {
    static const LabelSet set("emoji11", {"Love", "Happy", "Wink", "Deal", "Force", "Eyes", "Fear",
                                          "Mad", "Sad", "Music", "Misc"});
    return set;
}

/// Looks up one of the built-in label sets by name.
inline const LabelSet& builtin_labelset(std::string_view name) {
    if (name == "genres20") return genres20();
    if (name == "emoji11") return emoji11();
    throw ConfigError("unknown label set '" + std::string(name) + "' (expected genres20|emoji11)");
}

inline constexpr double kSimplexTolerance = 1e-9;

/// A probability vector over a label set.
using Distribution = std::vector<double>;

inline double total(std::span<const double> d) { return std::accumulate(d.begin(), d.end(), 0.0); }

/// True when every component is finite and >= 0 and the sum is 1 within tol.
inline bool on_simplex(std::span<const double> d, double tol = kSimplexTolerance) {
    if (d.empty()) return false;
    for (double v : d) {
        if (!std::isfinite(v) || v < 0.0) return false;
    }
    return std::abs(total(d) - 1.0) <= tol;
}

inline Distribution uniform_distribution(std::size_t n) {
    return Distribution(n, 1.0 / static_cast<double>(n));
}

/// Divides by the sum. Throws DegenerateInputError on a non-positive sum.
inline Distribution normalized(Distribution d) {
    const double s = total(d);
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DegenerateInputError("cannot normalise a vector with sum " + std::to_string(s));
    }
    for (double& v : d) v /= s;
    return d;
}

}  // namespace plotdyn
