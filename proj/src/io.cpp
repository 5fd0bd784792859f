#include "c3/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "c3/rng.hpp"

namespace c3 {

using json = nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string file_hash_hex(const std::string& path) {
    const std::string bytes = read_text_file(path);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    json j;
    j["command"] = manifest.command;
    j["config"] = json::parse(manifest.config_json.empty() ? "{}" : manifest.config_json);
    json in = json::object();
    for (const auto& [p, h] : manifest.inputs) in[p] = h;
    j["inputs"] = std::move(in);
    j["outputs"] = manifest.outputs;
    j["seed"] = manifest.seed;
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace c3
