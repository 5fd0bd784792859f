#include "c3/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "c3/rng.hpp"

namespace c3 {

using json = nlohmann::json;

Vocabulary Vocabulary::build(const std::vector<Document>& docs, int min_freq, size_t max_size) {
    std::map<std::string, int64_t> freq;
    for (const auto& doc : docs)
        for (const auto& sen : doc.sentences)
            for (const auto& tok : sen.tokens) ++freq[tok];
    if (freq.empty()) throw std::runtime_error("build_vocabulary: empty corpus");

    std::vector<std::pair<std::string, int64_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> kept;
    for (const auto& [tok, n] : items) {
        if (n < min_freq) continue;
        kept.push_back(tok);
        if (kept.size() + kNumReserved >= max_size) break;
    }
    return from_tokens(kept);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    v.tokens_ = {"<pad>", "<oov>", "<blank>"};
    v.tokens_.insert(v.tokens_.end(), tokens.begin(), tokens.end());
    for (size_t i = 0; i < v.tokens_.size(); ++i) {
        auto [it, fresh] = v.index_.emplace(v.tokens_[i], static_cast<int>(i));
        if (!fresh) throw std::runtime_error("vocabulary: duplicate token '" + v.tokens_[i] + "'");
    }
    return v;
}

uint64_t Vocabulary::hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tokens_) {
        h = fnv1a64(t, h);
        h = fnv1a64("\x1f", h);  // separator so ("ab","c") != ("a","bc")
    }
    return h;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    json arr = json::array();
    for (const auto& t : vocab.entries()) arr.push_back(t);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
    out << json{{"tokens", std::move(arr)}}.dump() << "\n";
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read vocabulary: " + path);
    json j = json::parse(in);
    std::vector<std::string> tokens;
    for (const json& t : j.at("tokens")) tokens.push_back(t.get<std::string>());
    if (tokens.size() < Vocabulary::kNumReserved || tokens[0] != "<pad>" || tokens[1] != "<oov>" ||
        tokens[2] != "<blank>")
        throw std::runtime_error("malformed vocabulary file: " + path);
    return Vocabulary::from_tokens(
        std::vector<std::string>(tokens.begin() + Vocabulary::kNumReserved, tokens.end()));
}

}  // namespace c3
