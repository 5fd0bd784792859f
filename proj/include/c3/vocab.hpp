#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "c3/types.hpp"

namespace c3 {

// Token-id vocabulary with reserved PAD/OOV/BLANK entries at indices 0, 1, 2.
// Real tokens are ordered by frequency (descending), ties broken
// lexicographically, so a vocabulary is fully determined by its corpus.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kOov = 1;
    static constexpr int kBlank = 2;
    static constexpr int kNumReserved = 3;

    Vocabulary() = default;

    static Vocabulary build(const std::vector<Document>& docs, int min_freq = 1, size_t max_size = 20000);
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);  // pre-ordered real tokens

    int id(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? kOov : it->second;
    }
    const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
    bool contains(const std::string& token) const { return index_.count(token) > 0; }

    size_t size() const { return tokens_.size(); }

    std::vector<int> encode(const std::vector<std::string>& tokens) const {
        std::vector<int> ids;
        ids.reserve(tokens.size());
        for (const auto& t : tokens) ids.push_back(id(t));
        return ids;
    }

    // All entries including reserved ones, in index order.
    const std::vector<std::string>& entries() const { return tokens_; }

    uint64_t hash() const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

// JSON round-trip of the full entry list (reserved tokens included).
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace c3
