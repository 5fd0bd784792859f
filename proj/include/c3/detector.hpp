#pragma once

#include <Eigen/Core>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "c3/model.hpp"
#include "c3/types.hpp"
#include "c3/vocab.hpp"

namespace c3 {

// Label used for sentences and documents that match no crime-class profile.
inline constexpr const char* kNoneLabel = "none";

struct ClassProfile {
    std::string crime_class;
    Eigen::VectorXd mean_vector;
    size_t n = 0;  // contributing vectors
};

struct DetectorConfig {
    double theta = 0.7;  // cosine threshold in [-1, 1]
    int min_word_len = 2;
    std::set<std::string> stopwords;

    void validate() const;  // throws std::invalid_argument
};

struct DictionaryEntry {
    std::string word;
    std::string crime_class;
    std::string date_added;  // ISO-8601
    std::string source;      // "seed" or "detected"
};

// Known coded words, unique per (word, crime_class), kept sorted by
// (crime_class, word) so serialized form is stable.
class C3Dictionary {
public:
    bool has(const std::string& word, const std::string& crime_class) const;
    // Throws on duplicate (word, class).
    void add(const DictionaryEntry& entry);
    const std::vector<DictionaryEntry>& entries() const { return entries_; }
    std::set<std::string> words_of_class(const std::string& crime_class) const;
    size_t size() const { return entries_.size(); }

    void save(const std::string& path) const;
    static C3Dictionary load(const std::string& path);

private:
    std::vector<DictionaryEntry> entries_;
};

struct SentenceDecision {
    int sentence_index = 0;
    std::string assigned;  // crime class id, or kNoneLabel
    std::vector<std::pair<std::string, double>> scores;  // per profile, profile order
};

struct WordCandidate {
    std::string word;
    std::string crime_class;
    double similarity = 0;
};

struct DetectionResult {
    std::string doc_id;
    std::vector<SentenceDecision> sentences;
    std::vector<WordCandidate> candidates;
    C3Dictionary updated_dictionary;
};

// (a.b)/(|a||b|); errors on dimension mismatch or zero-norm input.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Document token ids: sentence tokens concatenated in order.
std::vector<int> document_token_ids(const Document& doc, const Vocabulary& vocab);

// Mean encoded vector over the documents; errors when docs is empty.
ClassProfile build_class_profile(const AutoEncoderModel& model, const Vocabulary& vocab,
                                 const std::vector<Document>& docs, const std::string& crime_class);

// Argmax similarity over profiles, assigned only when it reaches theta;
// ties break toward the lexicographically lower class id.
SentenceDecision classify_vector(const Eigen::VectorXd& v, const std::vector<ClassProfile>& profiles,
                                 const DetectorConfig& config, int sentence_index = 0);
SentenceDecision classify_sentence(const AutoEncoderModel& model, const Vocabulary& vocab,
                                   const Sentence& sentence, const std::vector<ClassProfile>& profiles,
                                   const DetectorConfig& config);

// Word-level pass over sentences already assigned to the profile's class:
// deduplicated tokens, filtered by min length and stopwords, encoded as
// single-token sequences; candidates reach theta and are absent from the
// dictionary for this class. Sorted by similarity descending, word ascending.
std::vector<WordCandidate> detect_words(const AutoEncoderModel& model, const Vocabulary& vocab,
                                        const std::vector<Sentence>& sentences,
                                        const ClassProfile& profile, const C3Dictionary& dictionary,
                                        const DetectorConfig& config);

// Pure insert of detected candidates; the input dictionary is not modified.
C3Dictionary update_dictionary(const C3Dictionary& dictionary,
                               const std::vector<WordCandidate>& candidates,
                               const std::string& crime_class, const std::string& date);

// Full two-step pass over one document: classify sentences, collect word
// candidates per assigned class, and fold them into a new dictionary.
DetectionResult detect_document(const AutoEncoderModel& model, const Vocabulary& vocab,
                                const Document& doc, const std::vector<ClassProfile>& profiles,
                                const C3Dictionary& dictionary, const DetectorConfig& config,
                                const std::string& date);

// Profiles round-trip as JSON; order preserved.
void save_profiles(const std::vector<ClassProfile>& profiles, const std::string& path);
std::vector<ClassProfile> load_profiles(const std::string& path);

}  // namespace c3
