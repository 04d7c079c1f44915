#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ropewarp/error.hpp"
#include "ropewarp/tnsr.hpp"
#include "ropewarp/version.hpp"

namespace ropewarp {

// ===== Run manifests =====
//
// Every CLI output file gets a "<output>.manifest.json" sidecar recording the
// command, its resolved parameters, the seed, digests of every input, and the
// tool version. Manifests contain nothing run-dependent, so identical
// manifests imply identical outputs.

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string digest_file(const std::string& path) {
    const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

// A directory input digests to {filename: digest} over its regular files in
// sorted order; a plain file digests to a string.
inline nlohmann::json digest_input(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
        std::sort(names.begin(), names.end());
        nlohmann::json j = nlohmann::json::object();
        for (const std::string& name : names)
            j[name] = digest_file((fs::path(path) / name).string());
        return j;
    }
    return digest_file(path);
}

struct RunManifest {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    nlohmann::json inputs = nlohmann::json::object();  // {path: digest or per-file map}

    void add_input(const std::string& path) { inputs[path] = digest_input(path); }

    nlohmann::json to_json() const {
        return {{"command", command},
                {"parameters", parameters},
                {"inputs", inputs},
                {"version", ROPEWARP_VERSION}};
    }

    void write_for(const std::string& output_path) const {
        const std::string path = output_path + ".manifest.json";
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + path);
        f << to_json().dump(2) << "\n";
        if (!f) throw IoError("write failed: " + path);
    }
};

}  // namespace ropewarp
