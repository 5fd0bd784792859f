#pragma once

#include <string>
#include <vector>

#include "c3/types.hpp"

namespace c3 {

struct SplitRatios {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

struct CorpusSplit {
    std::vector<Document> train;
    std::vector<Document> validation;
    std::vector<Document> test;
    std::vector<Document> profile;  // carved from train, used for class mean vectors
    uint64_t seed = 0;
};

struct MixComponent {
    std::string label;  // crime class id or kGeneralLabel
    double proportion = 0.0;
};

struct MixSpec {
    std::vector<MixComponent> ratio;
    size_t total_size = 0;
};

// Stratified, seed-deterministic split. The profile subset is carved from the
// training share per class after the three-way split. Throws
// "insufficient corpus" when any class has fewer than 10 documents.
CorpusSplit split_corpus(const std::vector<Document>& docs, const SplitRatios& ratios, double profile_fraction,
                         uint64_t seed);

// Draw documents from per-label source pools according to spec proportions
// (largest-remainder rounding, so per-class counts match within 1) and
// shuffle the combined result deterministically.
std::vector<Document> mix_test_set(const std::vector<std::vector<Document>>& sources,
                                   const std::vector<std::string>& source_labels, const MixSpec& spec, uint64_t seed);

// Parse "8:1:1" into normalized ratios (any number of parts >= 2).
std::vector<double> parse_ratio(const std::string& text);

// Line-delimited JSON records {id, text, label, date}. Loading runs the
// preprocessing pipeline on each record.
std::vector<Document> load_corpus_jsonl(const std::string& path);
void save_corpus_jsonl(const std::vector<Document>& docs, const std::string& path);

}  // namespace c3
