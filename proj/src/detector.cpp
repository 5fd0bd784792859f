#include "c3/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "c3/text.hpp"

namespace c3 {

using json = nlohmann::json;

void DetectorConfig::validate() const {
    if (theta < -1.0 || theta > 1.0) throw std::invalid_argument("theta must be in [-1,1]");
    if (min_word_len < 1) throw std::invalid_argument("min_word_len must be positive");
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_similarity: zero-norm vector");
    return a.dot(b) / (na * nb);
}

std::vector<int> document_token_ids(const Document& doc, const Vocabulary& vocab) {
    std::vector<int> ids;
    for (const Sentence& s : doc.sentences) {
        std::vector<int> sent = vocab.encode(s.tokens);
        ids.insert(ids.end(), sent.begin(), sent.end());
    }
    return ids;
}

ClassProfile build_class_profile(const AutoEncoderModel& model, const Vocabulary& vocab,
                                 const std::vector<Document>& docs, const std::string& crime_class) {
    std::vector<std::vector<int>> seqs;
    for (const Document& d : docs) {
        if (d.label != crime_class) continue;
        std::vector<int> ids = document_token_ids(d, vocab);
        if (!ids.empty()) seqs.push_back(std::move(ids));
    }
    if (seqs.empty()) throw std::invalid_argument("build_class_profile: no documents for class " + crime_class);
    Eigen::MatrixXd latents = model.encode_batch(seqs);
    ClassProfile p;
    p.crime_class = crime_class;
    p.mean_vector = latents.colwise().mean().transpose();
    p.n = seqs.size();
    return p;
}

SentenceDecision classify_vector(const Eigen::VectorXd& v, const std::vector<ClassProfile>& profiles,
                                 const DetectorConfig& config, int sentence_index) {
    if (profiles.empty()) throw std::invalid_argument("classify_vector: no profiles");
    SentenceDecision d;
    d.sentence_index = sentence_index;
    size_t best_idx = 0;
    double best = -2.0;
    for (size_t i = 0; i < profiles.size(); ++i) {
        const double s = cosine_similarity(v, profiles[i].mean_vector);
        d.scores.emplace_back(profiles[i].crime_class, s);
        if (s > best || (s == best && profiles[i].crime_class < profiles[best_idx].crime_class)) {
            best = s;
            best_idx = i;
        }
    }
    d.assigned = best >= config.theta ? profiles[best_idx].crime_class : kNoneLabel;
    return d;
}

SentenceDecision classify_sentence(const AutoEncoderModel& model, const Vocabulary& vocab,
                                   const Sentence& sentence, const std::vector<ClassProfile>& profiles,
                                   const DetectorConfig& config) {
    if (sentence.tokens.empty()) throw std::invalid_argument("classify_sentence: empty sentence");
    SentenceDecision d = classify_vector(model.encode(vocab.encode(sentence.tokens)), profiles, config,
                                         sentence.index);
    return d;
}

std::vector<WordCandidate> detect_words(const AutoEncoderModel& model, const Vocabulary& vocab,
                                        const std::vector<Sentence>& sentences,
                                        const ClassProfile& profile, const C3Dictionary& dictionary,
                                        const DetectorConfig& config) {
    std::vector<std::string> words;
    std::set<std::string> seen;
    for (const Sentence& s : sentences)
        for (const std::string& w : s.tokens) {
            if (utf8_length(w) < static_cast<size_t>(config.min_word_len)) continue;
            if (config.stopwords.count(w)) continue;
            if (dictionary.has(w, profile.crime_class)) continue;
            if (seen.insert(w).second) words.push_back(w);
        }

    std::vector<WordCandidate> out;
    for (const std::string& w : words) {
        const double sim =
            cosine_similarity(model.encode({vocab.id(w)}), profile.mean_vector);
        if (sim >= config.theta) out.push_back({w, profile.crime_class, sim});
    }
    std::sort(out.begin(), out.end(), [](const WordCandidate& a, const WordCandidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.word < b.word;
    });
    return out;
}

bool C3Dictionary::has(const std::string& word, const std::string& crime_class) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const DictionaryEntry& e) {
        return e.word == word && e.crime_class == crime_class;
    });
}

void C3Dictionary::add(const DictionaryEntry& entry) {
    if (has(entry.word, entry.crime_class))
        throw std::invalid_argument("dictionary already contains '" + entry.word + "' for class " +
                                    entry.crime_class);
    auto pos = std::lower_bound(entries_.begin(), entries_.end(), entry,
                                [](const DictionaryEntry& a, const DictionaryEntry& b) {
                                    if (a.crime_class != b.crime_class) return a.crime_class < b.crime_class;
                                    return a.word < b.word;
                                });
    entries_.insert(pos, entry);
}

std::set<std::string> C3Dictionary::words_of_class(const std::string& crime_class) const {
    std::set<std::string> out;
    for (const DictionaryEntry& e : entries_)
        if (e.crime_class == crime_class) out.insert(e.word);
    return out;
}

void C3Dictionary::save(const std::string& path) const {
    json arr = json::array();
    for (const DictionaryEntry& e : entries_)
        arr.push_back(json{{"word", e.word},
                           {"crime_class", e.crime_class},
                           {"date_added", e.date_added},
                           {"source", e.source}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dictionary: " + path);
    out << json{{"entries", std::move(arr)}}.dump(2) << "\n";
}

C3Dictionary C3Dictionary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read dictionary: " + path);
    json j = json::parse(in);
    C3Dictionary d;
    for (const json& e : j.at("entries"))
        d.add({e.at("word").get<std::string>(), e.at("crime_class").get<std::string>(),
               e.at("date_added").get<std::string>(), e.at("source").get<std::string>()});
    return d;
}

C3Dictionary update_dictionary(const C3Dictionary& dictionary,
                               const std::vector<WordCandidate>& candidates,
                               const std::string& crime_class, const std::string& date) {
    C3Dictionary out = dictionary;
    for (const WordCandidate& c : candidates)
        out.add({c.word, crime_class, date, "detected"});
    return out;
}

DetectionResult detect_document(const AutoEncoderModel& model, const Vocabulary& vocab,
                                const Document& doc, const std::vector<ClassProfile>& profiles,
                                const C3Dictionary& dictionary, const DetectorConfig& config,
                                const std::string& date) {
    DetectionResult result;
    result.doc_id = doc.id;
    std::map<std::string, std::vector<Sentence>> by_class;
    for (const Sentence& s : doc.sentences) {
        SentenceDecision d = classify_sentence(model, vocab, s, profiles, config);
        if (d.assigned != kNoneLabel) by_class[d.assigned].push_back(s);
        result.sentences.push_back(std::move(d));
    }
    result.updated_dictionary = dictionary;
    for (const ClassProfile& p : profiles) {
        auto it = by_class.find(p.crime_class);
        if (it == by_class.end()) continue;
        std::vector<WordCandidate> words =
            detect_words(model, vocab, it->second, p, result.updated_dictionary, config);
        result.updated_dictionary = update_dictionary(result.updated_dictionary, words, p.crime_class, date);
        result.candidates.insert(result.candidates.end(), words.begin(), words.end());
    }
    return result;
}

void save_profiles(const std::vector<ClassProfile>& profiles, const std::string& path) {
    json arr = json::array();
    for (const ClassProfile& p : profiles) {
        json vec = json::array();
        for (Eigen::Index i = 0; i < p.mean_vector.size(); ++i) vec.push_back(p.mean_vector(i));
        arr.push_back(json{{"crime_class", p.crime_class}, {"n", p.n}, {"mean_vector", std::move(vec)}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write profiles: " + path);
    out << json{{"profiles", std::move(arr)}}.dump(2) << "\n";
}

std::vector<ClassProfile> load_profiles(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read profiles: " + path);
    json j = json::parse(in);
    std::vector<ClassProfile> out;
    for (const json& e : j.at("profiles")) {
        ClassProfile p;
        p.crime_class = e.at("crime_class").get<std::string>();
        p.n = e.at("n").get<size_t>();
        const json& vec = e.at("mean_vector");
        p.mean_vector.resize(static_cast<Eigen::Index>(vec.size()));
        for (size_t i = 0; i < vec.size(); ++i) p.mean_vector(static_cast<Eigen::Index>(i)) = vec[i].get<double>();
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace c3
