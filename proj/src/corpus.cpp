#include "c3/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "c3/rng.hpp"
#include "c3/text.hpp"

namespace c3 {

void preprocess_document(Document& doc) {
    doc.sentences.clear();
    std::string joined;
    int index = 0;
    for (const auto& chunk : segment_raw(doc.raw_text)) {
        const std::string clean = clean_text(chunk);
        auto tokens = tokenize(clean);
        if (tokens.empty()) continue;
        if (!joined.empty()) joined.push_back(' ');
        joined += clean;
        Sentence s;
        s.index = index++;
        s.tokens = std::move(tokens);
        doc.sentences.push_back(std::move(s));
    }
    doc.clean_text = std::move(joined);
}

namespace {

// Largest-remainder apportionment of `total` into weighted parts.
std::vector<size_t> apportion(const std::vector<double>& weights, size_t total) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, size_t>> remainders;
    size_t assigned = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(total) * weights[i] / wsum;
        counts[i] = static_cast<size_t>(exact);
        assigned += counts[i];
        remainders.push_back({exact - static_cast<double>(counts[i]), i});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t k = 0; assigned < total; ++k, ++assigned) counts[remainders[k % remainders.size()].second]++;
    return counts;
}

}  // namespace

CorpusSplit split_corpus(const std::vector<Document>& docs, const SplitRatios& ratios, double profile_fraction,
                         uint64_t seed) {
    const double rsum = ratios.train + ratios.validation + ratios.test;
    if (std::abs(rsum - 1.0) > 1e-9) throw std::invalid_argument("split_corpus: ratios must sum to 1");
    if (profile_fraction < 0.0 || profile_fraction >= 1.0)
        throw std::invalid_argument("split_corpus: profile_fraction outside [0,1)");

    std::map<std::string, std::vector<size_t>> by_label;
    for (size_t i = 0; i < docs.size(); ++i) by_label[docs[i].label].push_back(i);
    for (const auto& [label, idx] : by_label)
        if (idx.size() < 10) throw std::runtime_error("insufficient corpus: class '" + label + "' has fewer than 10 documents");

    CorpusSplit out;
    out.seed = seed;
    for (auto& [label, idx] : by_label) {
        Rng rng(derive_seed(seed, "split/" + label));
        rng.shuffle(idx);
        const auto counts = apportion({ratios.train, ratios.validation, ratios.test}, idx.size());
        size_t pos = 0;
        std::vector<size_t> train_idx(idx.begin(), idx.begin() + counts[0]);
        pos += counts[0];
        for (size_t k = 0; k < counts[1]; ++k) out.validation.push_back(docs[idx[pos + k]]);
        pos += counts[1];
        for (size_t k = 0; k < counts[2]; ++k) out.test.push_back(docs[idx[pos + k]]);

        const size_t n_profile = static_cast<size_t>(static_cast<double>(train_idx.size()) * profile_fraction + 0.5);
        for (size_t k = 0; k < train_idx.size(); ++k) {
            if (k < n_profile) out.profile.push_back(docs[train_idx[k]]);
            else out.train.push_back(docs[train_idx[k]]);
        }
    }
    return out;
}

std::vector<Document> mix_test_set(const std::vector<std::vector<Document>>& sources,
                                   const std::vector<std::string>& source_labels, const MixSpec& spec, uint64_t seed) {
    if (sources.size() != source_labels.size())
        throw std::invalid_argument("mix_test_set: sources/labels size mismatch");
    double psum = 0.0;
    for (const auto& c : spec.ratio) psum += c.proportion;
    if (std::abs(psum - 1.0) > 1e-9) throw std::invalid_argument("mix_test_set: proportions must sum to 1");

    std::vector<double> weights;
    for (const auto& c : spec.ratio) weights.push_back(c.proportion);
    auto counts = apportion(weights, spec.total_size);

    // Presence floor: every component with positive proportion contributes at
    // least one document when the total allows, taking from the largest
    // component. Extreme ratios (e.g. 99.99:0.005:0.005 at desk scale) would
    // otherwise round rare classes to zero and make recall unmeasurable.
    if (spec.total_size >= spec.ratio.size()) {
        for (size_t i = 0; i < counts.size(); ++i) {
            if (weights[i] <= 0.0 || counts[i] > 0) continue;
            const size_t donor =
                static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            if (counts[donor] <= 1) break;
            counts[donor] -= 1;
            counts[i] += 1;
        }
    }

    std::vector<Document> out;
    out.reserve(spec.total_size);
    for (size_t ci = 0; ci < spec.ratio.size(); ++ci) {
        const auto& label = spec.ratio[ci].label;
        auto it = std::find(source_labels.begin(), source_labels.end(), label);
        if (it == source_labels.end()) throw std::runtime_error("mix_test_set: no source for class '" + label + "'");
        const auto& pool = sources[static_cast<size_t>(it - source_labels.begin())];
        if (pool.size() < counts[ci])
            throw std::runtime_error("mix_test_set: insufficient source documents for class '" + label + "'");
        std::vector<size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed(seed, "mix/" + label));
        rng.shuffle(idx);
        for (size_t k = 0; k < counts[ci]; ++k) out.push_back(pool[idx[k]]);
    }
    Rng rng(derive_seed(seed, "mix/shuffle"));
    rng.shuffle(out);
    return out;
}

std::vector<double> parse_ratio(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        if (item.empty()) throw std::invalid_argument("parse_ratio: empty component in '" + text + "'");
        parts.push_back(std::stod(item));
    }
    if (parts.size() < 2) throw std::invalid_argument("parse_ratio: need at least two components");
    const double sum = std::accumulate(parts.begin(), parts.end(), 0.0);
    if (sum <= 0.0) throw std::invalid_argument("parse_ratio: nonpositive total");
    for (auto& p : parts) p /= sum;
    return parts;
}

std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<Document> docs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
        }
        Document d;
        d.id = j.at("id").get<std::string>();
        d.raw_text = j.at("text").get<std::string>();
        d.label = j.value("label", std::string(kGeneralLabel));
        d.date = j.value("date", std::string());
        preprocess_document(d);
        docs.push_back(std::move(d));
    }
    return docs;
}

void save_corpus_jsonl(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    for (const auto& d : docs) {
        nlohmann::json j{{"id", d.id}, {"text", d.raw_text}, {"label", d.label}};
        if (!d.date.empty()) j["date"] = d.date;
        out << j.dump() << "\n";
    }
}

}  // namespace c3
