#pragma once

#include <string>
#include <vector>

namespace c3 {

// Reserved label for non-crime documents. Not a CrimeClass.
inline constexpr const char* kGeneralLabel = "general";

struct CrimeClass {
    std::string id;            // short identifier, e.g. "drugs"
    std::string display_name;  // human-readable name

    bool operator==(const CrimeClass& o) const { return id == o.id; }
};

struct Sentence {
    int index = 0;
    std::vector<std::string> tokens;  // lowercase, non-empty
};

struct Document {
    std::string id;
    std::string raw_text;
    std::string clean_text;
    std::string label;  // crime class id or kGeneralLabel
    std::string date;   // ISO-8601 date or empty
    std::vector<Sentence> sentences;
};

// Segment, clean and tokenize raw_text, filling clean_text and sentences.
// Sentences that are empty after cleaning are dropped.
void preprocess_document(Document& doc);

}  // namespace c3
