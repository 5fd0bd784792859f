#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "c3/types.hpp"

namespace c3 {

struct SyntheticClassSpec {
    CrimeClass cls;
    std::vector<std::vector<std::string>> sublexicons;  // planted code words, partitioned
    std::vector<std::string> novel_words;               // planted only in latest-date documents

    std::vector<std::string> lexicon() const;  // flattened sublexicons
};

struct SyntheticSpec {
    std::vector<SyntheticClassSpec> classes;
    std::vector<std::string> overlap_words;  // declared overlap set, planted in every class
    size_t docs_per_class = 500;
    size_t general_docs = 0;
    size_t recent_docs_per_class = 0;
    size_t general_vocab_size = 120;
    // Topical co-occurrence structure: per-class context words and
    // per-sublexicon marker words generated alongside the general vocabulary.
    // Zero disables them and yields plain general-vocabulary templates.
    size_t context_words_per_class = 8;
    size_t markers_per_sublexicon = 2;
    // Per-token filler composition of crime documents: sub-lexicon marker
    // words vs class context words, remainder general vocabulary. Their sum
    // must stay at most 1.
    double marker_rate = 0.20;
    double context_rate = 0.25;
    // Fraction of general documents that borrow 1-2 class context words,
    // making the general/crime boundary realistic instead of trivially
    // separable. Never leaks planted code words.
    double general_topic_leak = 0.0;
    uint64_t seed = 0;

    static SyntheticSpec from_json_file(const std::string& path);
};

struct PlantedWord {
    std::string word;
    bool novel = false;
};

struct GoldAnnotation {
    std::string doc_id;
    std::string label;
    std::vector<PlantedWord> planted;
};

struct SyntheticCorpus {
    std::vector<Document> docs;  // crime, recent and general documents, dates mark recency
    std::vector<GoldAnnotation> gold;
    std::string latest_date;
};

// Deterministic per spec.seed. Crime documents are template sentences over the
// general vocabulary (plus optional topical words) carrying 1-3 planted code
// words of one sub-lexicon; recent documents additionally carry novel words and
// the latest date; general documents carry no planted words.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

void save_gold_jsonl(const SyntheticCorpus& corpus, const std::string& path);

}  // namespace c3
