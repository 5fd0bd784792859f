#include "c3/text.hpp"

#include <cstdint>

namespace c3 {
namespace {

// Decode one UTF-8 codepoint starting at i; advances i. Malformed bytes are
// consumed one at a time and reported as U+FFFD.
uint32_t decode_utf8(const std::string& s, size_t& i) {
    const auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    auto cont = [&](size_t k) { return k < s.size() && (byte(k) & 0xc0) == 0x80; };
    if ((b0 & 0xe0) == 0xc0 && cont(i + 1)) {
        const uint32_t cp = ((b0 & 0x1fu) << 6) | (byte(i + 1) & 0x3fu);
        i += 2;
        return cp;
    }
    if ((b0 & 0xf0) == 0xe0 && cont(i + 1) && cont(i + 2)) {
        const uint32_t cp = ((b0 & 0x0fu) << 12) | ((byte(i + 1) & 0x3fu) << 6) | (byte(i + 2) & 0x3fu);
        i += 3;
        return cp;
    }
    if ((b0 & 0xf8) == 0xf0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        const uint32_t cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3fu) << 12) | ((byte(i + 2) & 0x3fu) << 6) |
                            (byte(i + 3) & 0x3fu);
        i += 4;
        return cp;
    }
    i += 1;
    return 0xfffd;
}

void encode_utf8(uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

bool in_range(uint32_t cp, uint32_t lo, uint32_t hi) { return cp >= lo && cp <= hi; }

bool is_whitespace_cp(uint32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0x00a0 ||
           cp == 0x3000;
}

// Emoji, pictographs, symbols, dingbats and the joiners that glue them.
bool is_emoji_or_symbol(uint32_t cp) {
    return in_range(cp, 0x1f000, 0x1fbff)    // emoji planes, pictographs, symbols-ext
           || in_range(cp, 0x2600, 0x27bf)   // misc symbols, dingbats
           || in_range(cp, 0x2190, 0x2bff)   // arrows, math operators, misc technical
           || in_range(cp, 0xfe00, 0xfe0f)   // variation selectors
           || in_range(cp, 0x2000, 0x206f)   // general punctuation
           || cp == 0x200d || cp == 0x20e3;  // ZWJ, combining keycap
}

bool is_removed_nonascii(uint32_t cp) {
    if (is_emoji_or_symbol(cp)) return true;
    if (in_range(cp, 0x3001, 0x303f)) return true;  // CJK punctuation (ideographic space handled as ws)
    if (in_range(cp, 0xff01, 0xff0f) || in_range(cp, 0xff1a, 0xff20) || in_range(cp, 0xff3b, 0xff40) ||
        in_range(cp, 0xff5b, 0xff65))
        return true;                                // fullwidth ASCII punctuation
    if (in_range(cp, 0xff10, 0xff19)) return true;  // fullwidth digits
    if (in_range(cp, 0x00a1, 0x00bf)) return true;  // latin-1 punctuation and signs
    return false;
}

}  // namespace

std::string clean_text(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    bool emitted = false;
    size_t i = 0;
    while (i < raw.size()) {
        const uint32_t cp = decode_utf8(raw, i);
        if (is_whitespace_cp(cp)) {
            pending_space = true;
            continue;
        }
        uint32_t keep = 0;
        if (cp < 0x80) {
            if (cp >= 'a' && cp <= 'z') keep = cp;
            else if (cp >= 'A' && cp <= 'Z') keep = cp - 'A' + 'a';
            // ASCII digits, punctuation and control characters are dropped
        } else if (!is_removed_nonascii(cp) && cp != 0xfffd) {
            keep = cp;  // letters of caseless scripts pass through
        }
        if (keep != 0) {
            if (pending_space && emitted) out.push_back(' ');
            pending_space = false;
            encode_utf8(keep, out);
            emitted = true;
        }
    }
    return out;
}

std::vector<std::string> segment_raw(const std::string& raw) {
    std::vector<std::string> chunks;
    std::string current;
    size_t i = 0;
    auto flush = [&]() {
        size_t a = current.find_first_not_of(" \t\r");
        if (a != std::string::npos) {
            size_t b = current.find_last_not_of(" \t\r");
            chunks.push_back(current.substr(a, b - a + 1));
        }
        current.clear();
    };
    while (i < raw.size()) {
        const char c = raw[i];
        if (c == '.' || c == '!' || c == '?' || c == '\n') {
            // swallow delimiter runs ("..", "?!")
            while (i < raw.size() && (raw[i] == '.' || raw[i] == '!' || raw[i] == '?' || raw[i] == '\n' ||
                                      raw[i] == '\r'))
                ++i;
            flush();
            continue;
        }
        current.push_back(c);
        ++i;
    }
    flush();
    return chunks;
}

size_t utf8_length(const std::string& s) {
    size_t n = 0, i = 0;
    while (i < s.size()) {
        decode_utf8(s, i);
        ++n;
    }
    return n;
}

std::vector<std::string> tokenize(const std::string& clean) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < clean.size()) {
        while (i < clean.size() && (clean[i] == ' ' || clean[i] == '\t')) ++i;
        size_t j = i;
        while (j < clean.size() && clean[j] != ' ' && clean[j] != '\t') ++j;
        if (j > i) tokens.push_back(clean.substr(i, j - i));
        i = j;
    }
    return tokens;
}

}  // namespace c3
