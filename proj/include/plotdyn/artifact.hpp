#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace plotdyn {

/// Per-record problem found while reading an input file. Recoverable
/// problems are collected rather than thrown.
struct Diagnostic {
    std::size_t line = 0;  // 1-based, 0 when not tied to a line
    std::string message;
};

/// Provenance carried in the header of every file the pipeline writes.
/// An empty config_hash marks an external file (e.g. adapter output).
struct ArtifactMeta {
    std::string kind;
    std::string config_hash;
    std::optional<std::uint64_t> seed;

    void write_to(nlohmann::ordered_json& j) const {
        j["artifact"] = kind;
        if (!config_hash.empty()) j["config_hash"] = config_hash;
        if (seed) j["seed"] = *seed;
    }

    static ArtifactMeta read_from(const nlohmann::json& j) {
        ArtifactMeta m;
        if (auto it = j.find("artifact"); it != j.end() && it->is_string()) m.kind = it->get<std::string>();
        if (auto it = j.find("config_hash"); it != j.end() && it->is_string()) {
            m.config_hash = it->get<std::string>();
        }
        if (auto it = j.find("seed"); it != j.end() && it->is_number_unsigned()) {
            m.seed = it->get<std::uint64_t>();
        }
        return m;
    }
};

/// Combines the provenance of several inputs. Inputs with different non-empty
/// config hashes were produced by different configurations and are rejected.
inline std::string merge_config_hashes(const std::vector<ArtifactMeta>& inputs) {
    std::string hash;
    for (const auto& m : inputs) {
        if (m.config_hash.empty()) continue;
        if (hash.empty()) {
            hash = m.config_hash;
        } else if (hash != m.config_hash) {
            throw DataError("inputs come from different configurations (config_hash " + hash +
                            " vs " + m.config_hash + ")");
        }
    }
    return hash;
}

}  // namespace plotdyn
