#pragma once

#include <map>
#include <string>
#include <vector>

namespace c3 {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Content hash of a file, as fixed-width hex. Used in run manifests.
std::string file_hash_hex(const std::string& path);

// Run manifest: resolved configuration plus input hashes and output paths.
// Deliberately timestamp-free so reruns are byte-identical.
struct RunManifest {
    std::string command;
    std::string config_json;  // resolved config as a JSON object string ("{}" if none)
    std::map<std::string, std::string> inputs;  // path -> content hash
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace c3
