#pragma once

// Scheme files: one JSON document
//   {"format": 1, "B": .., "V": .., "R": .., "K": .., "mu": .., "occupancy": [[servers of fragment 1], ...]}
// Ids are 1-based. R and K are null for schemes whose replication or server
// load is not uniform; when present every fragment and server must match them.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "repdl/scheme.hpp"

namespace repdl {

inline constexpr int kSchemeFormat = 1;

inline nlohmann::json scheme_to_json(const StorageScheme& scheme) {
    const auto& p = scheme.params();
    bool uniform_r = true, uniform_k = true;
    for (const auto& phi : scheme.occupancy_sets()) uniform_r = uniform_r && phi.size() == p.R;
    for (const auto& s : scheme.fragment_sets()) uniform_k = uniform_k && s.size() == p.K;

    nlohmann::json j;
    j["format"] = kSchemeFormat;
    j["B"] = p.B;
    j["V"] = p.V;
    j["R"] = uniform_r ? nlohmann::json(p.R) : nlohmann::json(nullptr);
    j["K"] = uniform_k ? nlohmann::json(p.K) : nlohmann::json(nullptr);
    j["mu"] = p.mu;
    j["occupancy"] = scheme.occupancy_sets();
    return j;
}

inline StorageScheme scheme_from_json(const nlohmann::json& j) {
    auto fail = [](const std::string& msg) { detail::fail(ErrorCode::ValidationFailed, msg); };
    if (!j.is_object()) detail::fail(ErrorCode::ParseError, "scheme document must be an object");
    if (!j.contains("format") || !j["format"].is_number_integer())
        detail::fail(ErrorCode::ParseError, "missing integer field 'format'");
    if (j["format"].get<int>() != kSchemeFormat)
        detail::fail(ErrorCode::SchemaVersionUnsupported,
                     "format " + j["format"].dump() + " (supported: " + std::to_string(kSchemeFormat) + ")");
    for (const char* key : {"B", "V", "mu", "occupancy"})
        if (!j.contains(key)) detail::fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");

    std::uint32_t B = 0, V = 0;
    double mu = 0;
    std::vector<std::vector<ServerId>> occupancy;
    std::optional<std::uint32_t> R, K;
    auto optional_count = [&j](const char* key) {
        return j.contains(key) && !j[key].is_null() ? std::optional<std::uint32_t>(j[key].get<std::uint32_t>())
                                                    : std::nullopt;
    };
    try {
        B = j.at("B").get<std::uint32_t>();
        V = j.at("V").get<std::uint32_t>();
        mu = j.at("mu").get<double>();
        occupancy = j.at("occupancy").get<std::vector<std::vector<ServerId>>>();
        R = optional_count("R");
        K = optional_count("K");
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorCode::ParseError, e.what());
    }
    if (!(mu > 0)) fail("mu must be positive");
    if (occupancy.size() != V)
        fail("occupancy lists " + std::to_string(occupancy.size()) + " fragments but V=" + std::to_string(V));

    for (std::size_t v = 0; v < occupancy.size(); ++v) {
        if (R && occupancy[v].size() != *R)
            fail("fragment " + std::to_string(v + 1) + " has " + std::to_string(occupancy[v].size()) +
                 " replicas, expected R=" + std::to_string(*R));
        for (ServerId b : occupancy[v])
            if (b == 0 || b > B)
                fail("fragment " + std::to_string(v + 1) + " lists server " + std::to_string(b) + " outside [1, " +
                     std::to_string(B) + "]");
    }
    StorageScheme scheme;
    try {
        scheme = StorageScheme(std::move(occupancy), mu, B);
    } catch (const Error& e) {
        fail(e.what());
    }
    if (K)
        for (ServerId b = 1; b <= B; ++b)
            if (scheme.fragment_set(b).size() != *K)
                fail("server " + std::to_string(b) + " holds " + std::to_string(scheme.fragment_set(b).size()) +
                     " fragments, expected K=" + std::to_string(*K));
    return scheme;
}

inline StorageScheme parse_scheme(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        detail::fail(ErrorCode::ParseError, e.what());
    }
    return scheme_from_json(j);
}

inline StorageScheme read_scheme(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::fail(ErrorCode::ParseError, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scheme(buf.str());
}

inline void write_scheme(const StorageScheme& scheme, const std::string& path) {
    std::ofstream out(path);
    if (!out) detail::fail(ErrorCode::InvalidParams, "cannot write " + path);
    out << scheme_to_json(scheme).dump(2) << '\n';
}

} // namespace repdl
