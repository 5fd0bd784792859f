#pragma once

#include <string>
#include <vector>

namespace c3 {

// Lowercase, strip emoji blocks, punctuation, symbols and digits, collapse
// whitespace runs to single spaces. Idempotent. Empty output is allowed.
std::string clean_text(const std::string& raw);

// Split raw text into sentence chunks on sentence-final punctuation (. ! ?)
// and line breaks. Text without any delimiter yields exactly one chunk.
// Chunks are raw (uncleaned) and never empty after trimming.
std::vector<std::string> segment_raw(const std::string& raw);

// Whitespace tokenization of cleaned text. No subword splitting.
std::vector<std::string> tokenize(const std::string& clean);

// Codepoint count of a UTF-8 string (malformed bytes count singly).
size_t utf8_length(const std::string& s);

}  // namespace c3
