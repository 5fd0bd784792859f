#include "c3/synth.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "c3/rng.hpp"

namespace c3 {

std::vector<std::string> SyntheticClassSpec::lexicon() const {
    std::vector<std::string> all;
    for (const auto& sub : sublexicons) all.insert(all.end(), sub.begin(), sub.end());
    return all;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synthetic spec: " + path);
    nlohmann::json j;
    in >> j;
    SyntheticSpec spec;
    spec.seed = j.value("seed", 0ULL);
    spec.docs_per_class = j.value("docs_per_class", 500ULL);
    spec.general_docs = j.value("general_docs", 0ULL);
    spec.recent_docs_per_class = j.value("recent_docs_per_class", 0ULL);
    spec.general_vocab_size = j.value("general_vocab_size", 120ULL);
    spec.context_words_per_class = j.value("context_words_per_class", 8ULL);
    spec.markers_per_sublexicon = j.value("markers_per_sublexicon", 2ULL);
    spec.general_topic_leak = j.value("general_topic_leak", 0.0);
    spec.marker_rate = j.value("marker_rate", 0.20);
    spec.context_rate = j.value("context_rate", 0.25);
    if (j.contains("overlap_words")) spec.overlap_words = j["overlap_words"].get<std::vector<std::string>>();
    for (const auto& cj : j.at("classes")) {
        SyntheticClassSpec cs;
        cs.cls.id = cj.at("id").get<std::string>();
        cs.cls.display_name = cj.value("display_name", cs.cls.id);
        cs.sublexicons = cj.at("sublexicons").get<std::vector<std::vector<std::string>>>();
        if (cj.contains("novel_words")) cs.novel_words = cj["novel_words"].get<std::vector<std::string>>();
        spec.classes.push_back(std::move(cs));
    }
    return spec;
}

namespace {

constexpr const char* kEarlyYear = "2022";
constexpr const char* kLatestDate = "2022-12-31";

std::string make_pseudo_word(Rng& rng) {
    static const char* kOnsets[] = {"b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                    "br", "dr", "kr", "pl", "st", "tr"};
    static const char* kVowels[] = {"a", "e", "i", "o", "u"};
    const size_t n_syllables = 2 + rng.uniform_int(2);
    std::string w;
    for (size_t s = 0; s < n_syllables; ++s) {
        w += kOnsets[rng.uniform_int(std::size(kOnsets))];
        w += kVowels[rng.uniform_int(std::size(kVowels))];
    }
    return w;
}

std::vector<std::string> make_word_pool(Rng& rng, size_t count, std::set<std::string>& used) {
    static const char* kVowels[] = {"a", "e", "i", "o", "u"};
    std::vector<std::string> pool;
    pool.reserve(count);
    while (pool.size() < count) {
        std::string w = make_pseudo_word(rng);
        while (used.count(w)) w += kVowels[rng.uniform_int(std::size(kVowels))];
        used.insert(w);
        pool.push_back(std::move(w));
    }
    return pool;
}

void validate(const SyntheticSpec& spec) {
    const std::set<std::string> overlap(spec.overlap_words.begin(), spec.overlap_words.end());
    std::vector<std::set<std::string>> lexicons;
    std::set<std::string> all_visible(overlap.begin(), overlap.end());
    for (const auto& cs : spec.classes) {
        std::set<std::string> lex;
        for (const auto& sub : cs.sublexicons)
            for (const auto& w : sub)
                if (!lex.insert(w).second)
                    throw std::runtime_error("synthetic spec: word '" + w + "' in multiple sub-lexicons of class " +
                                             cs.cls.id);
        lexicons.push_back(lex);
        all_visible.insert(lex.begin(), lex.end());
    }
    for (size_t a = 0; a < lexicons.size(); ++a)
        for (size_t b = a + 1; b < lexicons.size(); ++b)
            for (const auto& w : lexicons[a])
                if (lexicons[b].count(w) && !overlap.count(w))
                    throw std::runtime_error("synthetic spec: lexicons overlap on '" + w +
                                             "' outside the declared overlap set");
    for (const auto& cs : spec.classes)
        for (const auto& w : cs.novel_words)
            if (all_visible.count(w))
                throw std::runtime_error("synthetic spec: novel word '" + w + "' collides with the visible lexicon");
    for (const auto& cs : spec.classes)
        if (!cs.novel_words.empty() && spec.recent_docs_per_class == 0)
            throw std::runtime_error("synthetic spec: novel words given but recent_docs_per_class is 0");
    if (spec.general_topic_leak < 0.0 || spec.general_topic_leak > 1.0)
        throw std::runtime_error("synthetic spec: general_topic_leak must be in [0, 1]");
    if (spec.marker_rate < 0.0 || spec.context_rate < 0.0 ||
        spec.marker_rate + spec.context_rate > 1.0)
        throw std::runtime_error("synthetic spec: marker_rate + context_rate must be in [0, 1]");
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
    validate(spec);

    std::set<std::string> planted_all(spec.overlap_words.begin(), spec.overlap_words.end());
    for (const auto& cs : spec.classes) {
        const auto lex = cs.lexicon();
        planted_all.insert(lex.begin(), lex.end());
        planted_all.insert(cs.novel_words.begin(), cs.novel_words.end());
    }
    std::set<std::string> used = planted_all;

    Rng vocab_rng(derive_seed(spec.seed, "synth/vocab"));
    const auto general_vocab = make_word_pool(vocab_rng, spec.general_vocab_size, used);

    struct ClassPools {
        std::vector<std::string> context;                  // class topical words
        std::vector<std::vector<std::string>> markers;     // per sub-lexicon
        std::vector<std::pair<std::string, int>> coverage; // (word, sublex index or -1 for overlap)
    };
    std::vector<ClassPools> pools(spec.classes.size());
    for (size_t ci = 0; ci < spec.classes.size(); ++ci) {
        const auto& cs = spec.classes[ci];
        pools[ci].context = make_word_pool(vocab_rng, spec.context_words_per_class, used);
        for (size_t si = 0; si < cs.sublexicons.size(); ++si)
            pools[ci].markers.push_back(make_word_pool(vocab_rng, spec.markers_per_sublexicon, used));
        for (size_t si = 0; si < cs.sublexicons.size(); ++si)
            for (const auto& w : cs.sublexicons[si]) pools[ci].coverage.push_back({w, static_cast<int>(si)});
        for (const auto& w : spec.overlap_words) pools[ci].coverage.push_back({w, -1});
    }

    SyntheticCorpus out;
    out.latest_date = kLatestDate;

    auto pick = [](Rng& rng, const std::vector<std::string>& pool) -> const std::string& {
        return pool[rng.uniform_int(pool.size())];
    };

    auto make_filler = [&](Rng& rng, size_t ci, int sublex, size_t length) {
        std::vector<std::string> toks;
        toks.reserve(length);
        for (size_t k = 0; k < length; ++k) {
            const double r = rng.uniform();
            if (sublex >= 0 && !pools[ci].markers.empty() && r < spec.marker_rate) {
                toks.push_back(pick(rng, pools[ci].markers[static_cast<size_t>(sublex)]));
            } else if (!pools[ci].context.empty() && r < spec.marker_rate + spec.context_rate) {
                toks.push_back(pick(rng, pools[ci].context));
            } else {
                toks.push_back(pick(rng, general_vocab));
            }
        }
        return toks;
    };

    auto decorate = [](Rng& rng, std::vector<std::string> toks, const std::set<std::string>& protect) {
        // Raw-text texture the cleaning stage must strip out again.
        static const char* kEmoji[] = {"\xF0\x9F\x92\x8A", "\xF0\x9F\x94\xA5", "\xF0\x9F\x91\x80"};
        std::string raw;
        for (size_t k = 0; k < toks.size(); ++k) {
            std::string t = toks[k];
            if (!protect.count(t)) {
                const double r = rng.uniform();
                if (r < 0.06) t = "#" + t;
                else if (r < 0.10) t += std::to_string(rng.uniform_int(100));
            }
            if (!raw.empty()) raw.push_back(' ');
            raw += t;
            if (rng.uniform() < 0.04) raw += std::string(" ") + kEmoji[rng.uniform_int(std::size(kEmoji))];
        }
        const double tail = rng.uniform();
        if (tail < 0.2) raw += "!!";
        else if (tail < 0.4) raw += ".";
        return raw;
    };

    auto early_date = [](Rng& rng) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%s-%02d-%02d", kEarlyYear, static_cast<int>(1 + rng.uniform_int(11)),
                      static_cast<int>(1 + rng.uniform_int(28)));
        return std::string(buf);
    };

    for (size_t ci = 0; ci < spec.classes.size(); ++ci) {
        const auto& cs = spec.classes[ci];
        Rng rng(derive_seed(spec.seed, "synth/class/" + cs.cls.id));
        const std::set<std::string>& protect = planted_all;

        auto emit_doc = [&](const std::string& id, const std::string& date, bool recent, size_t serial) {
            Document d;
            d.id = id;
            d.label = cs.cls.id;
            d.date = date;
            GoldAnnotation gold{d.id, d.label, {}};

            // Coverage-first plant: cycle through the lexicon so every word
            // appears, then add 0-2 more words from the same sub-lexicon.
            const auto& [word0, sub0] = pools[ci].coverage[serial % pools[ci].coverage.size()];
            int sublex = sub0 >= 0 ? sub0 : static_cast<int>(rng.uniform_int(cs.sublexicons.size()));
            std::vector<std::string> planted{word0};
            const size_t extra = rng.uniform_int(3);  // 0..2
            for (size_t e = 0; e < extra && planted.size() < 3; ++e) {
                const auto& sub = cs.sublexicons[static_cast<size_t>(sublex)];
                const std::string& w = sub[rng.uniform_int(sub.size())];
                if (std::find(planted.begin(), planted.end(), w) == planted.end()) planted.push_back(w);
            }
            if (!spec.overlap_words.empty() && sub0 >= 0 && planted.size() < 3 && rng.uniform() < 0.15)
                planted.push_back(spec.overlap_words[rng.uniform_int(spec.overlap_words.size())]);
            for (const auto& w : planted) gold.planted.push_back({w, false});

            if (recent && !cs.novel_words.empty()) {
                const std::string& nw = cs.novel_words[serial % cs.novel_words.size()];
                planted.push_back(nw);
                gold.planted.push_back({nw, true});
                if (cs.novel_words.size() > 1 && rng.uniform() < 0.3) {
                    const std::string& nw2 = cs.novel_words[rng.uniform_int(cs.novel_words.size())];
                    if (nw2 != nw) {
                        planted.push_back(nw2);
                        gold.planted.push_back({nw2, true});
                    }
                }
            }

            auto toks = make_filler(rng, ci, sublex, 7 + rng.uniform_int(5));
            for (const auto& w : planted) {
                const size_t pos = rng.uniform_int(toks.size() + 1);
                toks.insert(toks.begin() + static_cast<long>(pos), w);
            }
            d.raw_text = decorate(rng, std::move(toks), protect);
            preprocess_document(d);
            out.docs.push_back(std::move(d));
            out.gold.push_back(std::move(gold));
        };

        for (size_t i = 0; i < spec.docs_per_class; ++i) {
            char id[64];
            std::snprintf(id, sizeof(id), "%s-%05zu", cs.cls.id.c_str(), i);
            emit_doc(id, early_date(rng), false, i);
        }
        for (size_t i = 0; i < spec.recent_docs_per_class; ++i) {
            char id[64];
            std::snprintf(id, sizeof(id), "%s-r%04zu", cs.cls.id.c_str(), i);
            emit_doc(id, kLatestDate, true, i);
        }
    }

    if (!spec.classes.empty() || spec.general_docs > 0) {
        Rng rng(derive_seed(spec.seed, "synth/general"));
        std::set<std::string> no_protect;
        for (size_t i = 0; i < spec.general_docs; ++i) {
            Document d;
            char id[64];
            std::snprintf(id, sizeof(id), "gen-%05zu", i);
            d.id = id;
            d.label = kGeneralLabel;
            d.date = early_date(rng);
            std::vector<std::string> toks;
            const size_t len = 8 + rng.uniform_int(5);
            for (size_t k = 0; k < len; ++k) toks.push_back(general_vocab[rng.uniform_int(general_vocab.size())]);
            if (!spec.classes.empty() && rng.uniform() < spec.general_topic_leak) {
                const auto& ctx = pools[rng.uniform_int(pools.size())].context;
                const size_t borrow = ctx.empty() ? 0 : 1 + rng.uniform_int(2);
                for (size_t b = 0; b < borrow; ++b)
                    toks[rng.uniform_int(toks.size())] = ctx[rng.uniform_int(ctx.size())];
            }
            d.raw_text = decorate(rng, std::move(toks), no_protect);
            preprocess_document(d);
            out.gold.push_back({d.id, d.label, {}});
            out.docs.push_back(std::move(d));
        }
    }
    return out;
}

void save_gold_jsonl(const SyntheticCorpus& corpus, const std::string& path) {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot write gold file: " + path);
    for (const auto& g : corpus.gold) {
        nlohmann::json words = nlohmann::json::array();
        for (const auto& p : g.planted) words.push_back({{"word", p.word}, {"novel", p.novel}});
        outf << nlohmann::json{{"doc_id", g.doc_id}, {"class", g.label}, {"planted", words}}.dump() << "\n";
    }
}

}  // namespace c3
