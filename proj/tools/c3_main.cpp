// c3: coded-word detection pipeline driver.
//
// Subcommands cover the full flow: synth/prepare produce a corpus directory,
// train fits an autoencoder checkpoint, profile derives class mean vectors,
// detect/new-words/overlap/taxonomy run the detection-side analyses, and
// evaluate/calibrate-theta/plot handle measurement and figures.
//
// Exit codes: 0 success, 1 usage error, 2 data or config error. Every command
// writes a manifest (resolved config + input hashes) next to its outputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "c3/analysis.hpp"
#include "c3/corpus.hpp"
#include "c3/detector.hpp"
#include "c3/eval.hpp"
#include "c3/io.hpp"
#include "c3/model.hpp"
#include "c3/synth.hpp"
#include "c3/text.hpp"
#include "c3/types.hpp"
#include "c3/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SeedFlag {
    std::uint64_t value = 0;
    bool set = false;
};

void add_seed_option(CLI::App* cmd, SeedFlag& seed) {
    cmd->add_option("--seed", seed.value, "Random seed (falls back to C3_SEED, then 0)")
        ->each([&seed](const std::string&) { seed.set = true; });
}

// Precedence: --seed flag, then an explicit config value, then C3_SEED, then 0.
std::uint64_t resolve_seed(const SeedFlag& flag, const std::uint64_t* config_value = nullptr) {
    if (flag.set) return flag.value;
    if (config_value) return *config_value;
    if (const char* env = std::getenv("C3_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    c3::write_text_file(path, j.dump(2) + "\n");
}

std::vector<c3::Document> docs_with_label(const std::vector<c3::Document>& docs, const std::string& label) {
    std::vector<c3::Document> out;
    for (const auto& d : docs)
        if (d.label == label) out.push_back(d);
    return out;
}

// Sentence token-id sequences over all documents; empty sentences cannot
// occur, documents without sentences are skipped.
std::vector<std::vector<int>> sentence_sequences(const std::vector<c3::Document>& docs,
                                                 const c3::Vocabulary& vocab) {
    std::vector<std::vector<int>> seqs;
    for (const auto& d : docs)
        for (const auto& s : d.sentences) seqs.push_back(vocab.encode(s.tokens));
    return seqs;
}

std::set<std::string> parse_stopwords(const std::string& csv) {
    std::set<std::string> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    return out;
}

json metrics_to_json(const c3::MetricsReport& report) {
    json per_class = json::object();
    for (const auto& [cls, m] : report.per_class)
        per_class[cls] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    json confusion = json::object();
    for (const auto& [gold, row] : report.confusion) {
        json r = json::object();
        for (const auto& [pred, count] : row) r[pred] = count;
        confusion[gold] = r;
    }
    return {{"per_class", per_class},
            {"macro", {{"precision", report.macro.precision}, {"recall", report.macro.recall}, {"f1", report.macro.f1}}},
            {"confusion", confusion}};
}

json dictionary_to_json(const c3::C3Dictionary& dict) {
    json entries = json::array();
    for (const auto& e : dict.entries())
        entries.push_back(
            {{"word", e.word}, {"class", e.crime_class}, {"date_added", e.date_added}, {"source", e.source}});
    return entries;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string spec_path;
    std::string out_dir;
    SeedFlag seed;
};

int run_synth(const SynthArgs& a) {
    auto spec = c3::SyntheticSpec::from_json_file(a.spec_path);
    spec.seed = resolve_seed(a.seed, a.seed.set ? nullptr : &spec.seed);
    fs::create_directories(a.out_dir);
    const auto corpus = c3::generate_synthetic_corpus(spec);

    std::vector<c3::Document> crime, general, recent;
    for (const auto& d : corpus.docs) {
        if (d.date == corpus.latest_date)
            recent.push_back(d);
        else if (d.label == c3::kGeneralLabel)
            general.push_back(d);
        else
            crime.push_back(d);
    }
    const auto path = [&](const char* name) { return (fs::path(a.out_dir) / name).string(); };
    c3::save_corpus_jsonl(crime, path("corpus.jsonl"));
    c3::save_corpus_jsonl(general, path("general.jsonl"));
    c3::save_corpus_jsonl(recent, path("recent.jsonl"));
    c3::save_gold_jsonl(corpus, path("gold.jsonl"));

    c3::RunManifest m;
    m.command = "synth";
    m.seed = spec.seed;
    m.config_json = c3::read_text_file(a.spec_path);
    m.inputs[a.spec_path] = c3::file_hash_hex(a.spec_path);
    m.outputs = {path("corpus.jsonl"), path("general.jsonl"), path("recent.jsonl"), path("gold.jsonl")};
    c3::write_manifest(m, path("synth.manifest.json"));

    std::cout << a.out_dir << ": " << crime.size() << " crime, " << general.size() << " general, "
              << recent.size() << " recent documents\n";
    return 0;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareArgs {
    std::string in_path;
    std::string general_path;
    std::vector<std::string> extra_paths;
    std::string out_dir;
    std::string split = "8:1:1";
    double profile_fraction = 0.1;
    int min_freq = 1;
    std::size_t max_vocab = 20000;
    SeedFlag seed;
};

int run_prepare(const PrepareArgs& a) {
    const std::uint64_t seed = resolve_seed(a.seed);
    auto docs = c3::load_corpus_jsonl(a.in_path);
    if (!a.general_path.empty()) {
        auto general = c3::load_corpus_jsonl(a.general_path);
        docs.insert(docs.end(), general.begin(), general.end());
    }

    const auto parts = c3::parse_ratio(a.split);
    if (parts.size() != 3) throw std::runtime_error("prepare: --split needs exactly three parts");
    c3::SplitRatios ratios{parts[0], parts[1], parts[2]};
    const auto split = c3::split_corpus(docs, ratios, a.profile_fraction, seed);

    // The vocabulary covers every document the pipeline may encode, including
    // held-out extras such as recent documents; word frequencies still come
    // from real usage, so planted-but-unseen words get untrained embeddings.
    auto vocab_docs = docs;
    for (const auto& p : a.extra_paths) {
        auto extra = c3::load_corpus_jsonl(p);
        vocab_docs.insert(vocab_docs.end(), extra.begin(), extra.end());
    }
    const auto vocab = c3::Vocabulary::build(vocab_docs, a.min_freq, a.max_vocab);

    fs::create_directories(a.out_dir);
    const auto path = [&](const char* name) { return (fs::path(a.out_dir) / name).string(); };
    c3::save_corpus_jsonl(split.train, path("train.jsonl"));
    c3::save_corpus_jsonl(split.validation, path("validation.jsonl"));
    c3::save_corpus_jsonl(split.test, path("test.jsonl"));
    c3::save_corpus_jsonl(split.profile, path("profile.jsonl"));
    c3::save_vocabulary(vocab, path("vocab.json"));

    c3::RunManifest m;
    m.command = "prepare";
    m.seed = seed;
    m.config_json = json{{"split", a.split},
                         {"profile_fraction", a.profile_fraction},
                         {"min_freq", a.min_freq},
                         {"max_vocab", a.max_vocab}}
                        .dump();
    m.inputs[a.in_path] = c3::file_hash_hex(a.in_path);
    if (!a.general_path.empty()) m.inputs[a.general_path] = c3::file_hash_hex(a.general_path);
    for (const auto& p : a.extra_paths) m.inputs[p] = c3::file_hash_hex(p);
    m.outputs = {path("train.jsonl"), path("validation.jsonl"), path("test.jsonl"), path("profile.jsonl"),
                 path("vocab.json")};
    c3::write_manifest(m, path("prepare.manifest.json"));

    std::cout << a.out_dir << ": train " << split.train.size() << ", validation " << split.validation.size()
              << ", test " << split.test.size() << ", profile " << split.profile.size() << ", vocab "
              << vocab.size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string variant;
    std::string config_path;
    std::string corpus_dir;
    std::string out_path;
    int epochs = -1;
    SeedFlag seed;
};

int run_train(const TrainArgs& a) {
    c3::ModelConfig config;  // defaults
    std::uint64_t config_seed = 0;
    bool config_has_seed = false;
    if (!a.config_path.empty()) {
        const std::string text = c3::read_text_file(a.config_path);
        config = c3::model_config_from_json_text(text, config);
        const json j = json::parse(text);
        if (j.contains("seed")) {
            config_has_seed = true;
            config_seed = config.seed;
        }
    }
    if (!a.variant.empty()) config.variant = c3::parse_variant(a.variant);
    if (a.epochs >= 0) config.epochs = a.epochs;
    config.seed = resolve_seed(a.seed, config_has_seed ? &config_seed : nullptr);
    config.validate();

    const auto path = [&](const char* name) { return (fs::path(a.corpus_dir) / name).string(); };
    const auto vocab = c3::load_vocabulary(path("vocab.json"));
    const auto train_docs = c3::load_corpus_jsonl(path("train.jsonl"));
    const auto val_docs = c3::load_corpus_jsonl(path("validation.jsonl"));

    c3::AutoEncoderModel model(config, vocab);
    const auto& history =
        model.train(sentence_sequences(train_docs, vocab), sentence_sequences(val_docs, vocab));
    model.save(a.out_path);

    c3::RunManifest m;
    m.command = "train";
    m.seed = config.seed;
    m.config_json = c3::model_config_to_json_text(config);
    if (!a.config_path.empty()) m.inputs[a.config_path] = c3::file_hash_hex(a.config_path);
    for (const char* name : {"vocab.json", "train.jsonl", "validation.jsonl"})
        m.inputs[path(name)] = c3::file_hash_hex(path(name));
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    for (std::size_t e = 0; e < history.size(); ++e)
        std::cout << "epoch " << (e + 1) << " total " << history[e].total << " recon " << history[e].recon
                  << " val " << history[e].val_recon << "\n";
    std::cout << a.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// profile

struct ProfileArgs {
    std::string model_path;
    std::string corpus_dir;
    std::string out_path;
    std::string classes_csv;
};

int run_profile(const ProfileArgs& a) {
    const auto path = [&](const char* name) { return (fs::path(a.corpus_dir) / name).string(); };
    const auto vocab = c3::load_vocabulary(path("vocab.json"));
    const auto model = c3::AutoEncoderModel::load(a.model_path, vocab);
    const auto docs = c3::load_corpus_jsonl(path("profile.jsonl"));

    std::set<std::string> classes;
    if (a.classes_csv.empty()) {
        for (const auto& d : docs)
            if (d.label != c3::kGeneralLabel && !d.label.empty()) classes.insert(d.label);
    } else {
        classes = parse_stopwords(a.classes_csv);
    }
    if (classes.empty()) throw std::runtime_error("profile: no crime classes in the profile set");

    std::vector<c3::ClassProfile> profiles;
    for (const auto& cls : classes)
        profiles.push_back(c3::build_class_profile(model, vocab, docs_with_label(docs, cls), cls));
    c3::save_profiles(profiles, a.out_path);

    c3::RunManifest m;
    m.command = "profile";
    m.seed = model.config().seed;
    json cfg{{"classes", json::array()}};
    for (const auto& c : classes) cfg["classes"].push_back(c);
    m.config_json = cfg.dump();
    m.inputs[a.model_path] = c3::file_hash_hex(a.model_path);
    m.inputs[path("vocab.json")] = c3::file_hash_hex(path("vocab.json"));
    m.inputs[path("profile.jsonl")] = c3::file_hash_hex(path("profile.jsonl"));
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    for (const auto& p : profiles) std::cout << p.crime_class << ": " << p.n << " documents\n";
    std::cout << a.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
    std::string model_path;
    std::string vocab_path;
    std::string profiles_path;
    std::string dict_path;
    std::string in_path;
    std::string out_path;
    std::string out_dict_path;
    std::string date;
    double theta = 0.7;
    int min_word_len = 2;
    std::string stopwords_csv;
};

int run_detect(const DetectArgs& a) {
    const auto vocab = c3::load_vocabulary(a.vocab_path);
    const auto model = c3::AutoEncoderModel::load(a.model_path, vocab);
    const auto profiles = c3::load_profiles(a.profiles_path);
    auto dict = a.dict_path.empty() ? c3::C3Dictionary{} : c3::C3Dictionary::load(a.dict_path);
    const auto docs = c3::load_corpus_jsonl(a.in_path);

    c3::DetectorConfig config;
    config.theta = a.theta;
    config.min_word_len = a.min_word_len;
    config.stopwords = parse_stopwords(a.stopwords_csv);
    config.validate();

    json results = json::array();
    for (const auto& doc : docs) {
        const std::string date = a.date.empty() ? doc.date : a.date;
        const auto r = c3::detect_document(model, vocab, doc, profiles, dict, config, date);
        json sentences = json::array();
        for (const auto& s : r.sentences) {
            json scores = json::object();
            for (const auto& [cls, sim] : s.scores) scores[cls] = sim;
            sentences.push_back({{"index", s.sentence_index}, {"assigned", s.assigned}, {"scores", scores}});
        }
        json candidates = json::array();
        for (const auto& c : r.candidates)
            candidates.push_back({{"word", c.word}, {"class", c.crime_class}, {"similarity", c.similarity}});
        results.push_back({{"doc_id", r.doc_id}, {"sentences", sentences}, {"candidates", candidates}});
        dict = r.updated_dictionary;
    }

    write_json_file(a.out_path, json{{"theta", a.theta},
                                     {"documents", results},
                                     {"dictionary", dictionary_to_json(dict)}});
    if (!a.out_dict_path.empty()) dict.save(a.out_dict_path);

    c3::RunManifest m;
    m.command = "detect";
    m.config_json = json{{"theta", a.theta}, {"min_word_len", a.min_word_len}, {"date", a.date}}.dump();
    for (const auto& p : {a.model_path, a.vocab_path, a.profiles_path, a.in_path})
        m.inputs[p] = c3::file_hash_hex(p);
    if (!a.dict_path.empty()) m.inputs[a.dict_path] = c3::file_hash_hex(a.dict_path);
    m.outputs = {a.out_path};
    if (!a.out_dict_path.empty()) m.outputs.push_back(a.out_dict_path);
    c3::write_manifest(m, a.out_path + ".manifest.json");

    std::cout << a.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// calibrate-theta

struct CalibrateArgs {
    std::string model_path;
    std::string vocab_path;
    std::string profiles_path;
    std::string in_path;
    std::string out_path;
    int min_word_len = 2;
    std::string stopwords_csv;
};

int run_calibrate(const CalibrateArgs& a) {
    const auto vocab = c3::load_vocabulary(a.vocab_path);
    const auto model = c3::AutoEncoderModel::load(a.model_path, vocab);
    const auto profiles = c3::load_profiles(a.profiles_path);
    const auto docs = c3::load_corpus_jsonl(a.in_path);

    c3::DetectorConfig config;
    config.min_word_len = a.min_word_len;
    config.stopwords = parse_stopwords(a.stopwords_csv);

    const auto cal = c3::calibrate_theta(model, vocab, docs, profiles, config);
    json sweep = json::array();
    for (const auto& [t, f1] : cal.sweep) sweep.push_back({t, f1});
    write_json_file(a.out_path, json{{"theta", cal.theta}, {"macro_f1", cal.macro_f1}, {"sweep", sweep}});

    c3::RunManifest m;
    m.command = "calibrate-theta";
    m.config_json = json{{"min_word_len", a.min_word_len}}.dump();
    for (const auto& p : {a.model_path, a.vocab_path, a.profiles_path, a.in_path})
        m.inputs[p] = c3::file_hash_hex(p);
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    std::cout << "theta " << cal.theta << " macro_f1 " << cal.macro_f1 << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// new-words

struct NewWordsArgs {
    std::string model_path;
    std::string vocab_path;
    std::string profiles_path;
    std::string dict_path;
    std::string in_path;
    std::string out_path;
    std::string crime_class;
    std::string band = "individual";
    double alpha = 0.05;
    double theta = 0.7;
    int min_word_len = 2;
    std::string stopwords_csv;
};

int run_new_words(const NewWordsArgs& a) {
    const auto vocab = c3::load_vocabulary(a.vocab_path);
    const auto model = c3::AutoEncoderModel::load(a.model_path, vocab);
    const auto profiles = c3::load_profiles(a.profiles_path);
    const auto dict = a.dict_path.empty() ? c3::C3Dictionary{} : c3::C3Dictionary::load(a.dict_path);
    const auto docs = c3::load_corpus_jsonl(a.in_path);

    const c3::ClassProfile* profile = nullptr;
    for (const auto& p : profiles)
        if (p.crime_class == a.crime_class) profile = &p;
    if (!profile) throw std::runtime_error("new-words: no profile for class " + a.crime_class);

    c3::DetectorConfig config;
    config.theta = a.theta;
    config.min_word_len = a.min_word_len;
    config.stopwords = parse_stopwords(a.stopwords_csv);
    config.validate();

    // Class-associated words from sentences the detector assigns to the class.
    std::vector<c3::Sentence> assigned;
    for (const auto& doc : docs)
        for (const auto& s : doc.sentences)
            if (c3::classify_sentence(model, vocab, s, profiles, config).assigned == a.crime_class)
                assigned.push_back(s);
    const auto candidates =
        c3::detect_words(model, vocab, assigned, *profile, c3::C3Dictionary{}, config);
    if (candidates.empty()) throw std::runtime_error("new-words: no class-associated words collected");

    std::vector<std::string> words;
    Eigen::MatrixXd vectors(static_cast<Eigen::Index>(candidates.size()), model.config().latent_dim);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        words.push_back(candidates[i].word);
        vectors.row(static_cast<Eigen::Index>(i)) =
            model.encode({vocab.id(candidates[i].word)}).transpose();
    }

    // The band is fitted on the class's established dictionary words; the
    // collected candidates are tested against it. Words cross-listed under
    // another class sit between the class clusters and would inflate the
    // band, so only single-class words anchor it. Too few known words fall
    // back to fitting on the candidates themselves.
    const auto known = dict.words_of_class(a.crime_class);
    std::map<std::string, std::set<std::string>> word_classes;
    for (const auto& e : dict.entries()) word_classes[e.word].insert(e.crime_class);
    std::vector<std::string> fit_words;
    for (const auto& w : known)
        if (vocab.contains(w) && word_classes[w].size() == 1) fit_words.push_back(w);
    Eigen::MatrixXd fit_vectors;
    if (fit_words.size() >= 3) {
        fit_vectors.resize(static_cast<Eigen::Index>(fit_words.size()), model.config().latent_dim);
        for (std::size_t i = 0; i < fit_words.size(); ++i)
            fit_vectors.row(static_cast<Eigen::Index>(i)) = model.encode({vocab.id(fit_words[i])}).transpose();
    } else {
        fit_vectors = vectors;
    }
    const auto band_mode = a.band == "mean_ci" ? c3::BandMode::mean_ci : c3::BandMode::individual;
    if (a.band != "individual" && a.band != "mean_ci")
        throw std::runtime_error("new-words: --band must be individual or mean_ci");
    const auto outlier = c3::fit_outlier_model(fit_vectors, a.alpha, band_mode);
    const auto flags = c3::detect_new_words(words, vectors, outlier);

    json jf = json::array();
    for (const auto& f : flags) jf.push_back({{"word", f.word}, {"statistic", f.statistic}, {"tail", f.tail}});
    json jc = json::array();
    for (const auto& c : candidates) jc.push_back({{"word", c.word}, {"similarity", c.similarity}});
    write_json_file(a.out_path, json{{"class", a.crime_class},
                                     {"alpha", a.alpha},
                                     {"band", a.band},
                                     {"mu", outlier.mu},
                                     {"sigma", outlier.sigma},
                                     {"lower", outlier.lower},
                                     {"upper", outlier.upper},
                                     {"fit_on", fit_words.size() >= 3 ? "dictionary" : "candidates"},
                                     {"flags", jf},
                                     {"candidates", jc}});

    c3::RunManifest m;
    m.command = "new-words";
    m.config_json =
        json{{"class", a.crime_class}, {"alpha", a.alpha}, {"band", a.band}, {"theta", a.theta}}.dump();
    for (const auto& p : {a.model_path, a.vocab_path, a.profiles_path, a.in_path})
        m.inputs[p] = c3::file_hash_hex(p);
    if (!a.dict_path.empty()) m.inputs[a.dict_path] = c3::file_hash_hex(a.dict_path);
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    for (const auto& f : flags)
        if (f.tail == "upper") std::cout << f.word << " " << f.statistic << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// overlap

struct OverlapArgs {
    std::vector<std::string> dict_paths;
    std::string class_a, class_b;
    std::string in_path;
    std::string out_path;
};

std::set<std::string> dict_words(const c3::C3Dictionary& dict, std::string& cls) {
    if (cls.empty()) {
        std::set<std::string> classes;
        for (const auto& e : dict.entries()) classes.insert(e.crime_class);
        if (classes.size() != 1)
            throw std::runtime_error("overlap: dictionary covers several classes, pass --class-a/--class-b");
        cls = *classes.begin();
    }
    return dict.words_of_class(cls);
}

int run_overlap(const OverlapArgs& a) {
    if (a.dict_paths.size() != 2) throw std::runtime_error("overlap: --dicts needs exactly two paths");
    auto dict_a = c3::C3Dictionary::load(a.dict_paths[0]);
    auto dict_b = c3::C3Dictionary::load(a.dict_paths[1]);
    std::string class_a = a.class_a, class_b = a.class_b;
    const auto words_a = dict_words(dict_a, class_a);
    const auto words_b = dict_words(dict_b, class_b);
    const auto docs = c3::load_corpus_jsonl(a.in_path);

    const auto report = c3::detect_overlap(words_a, class_a, words_b, class_b, docs);
    json per_doc = json::array();
    for (const auto& d : report.per_document)
        per_doc.push_back(
            {{"doc_id", d.doc_id}, {"ratio_a", d.ratio_a}, {"ratio_b", d.ratio_b}, {"is_mixed", d.is_mixed}});
    write_json_file(a.out_path, json{{"class_a", report.class_a},
                                     {"class_b", report.class_b},
                                     {"overlap_words", report.overlap_words},
                                     {"per_document", per_doc}});

    c3::RunManifest m;
    m.command = "overlap";
    m.config_json = json{{"class_a", class_a}, {"class_b", class_b}}.dump();
    for (const auto& p : a.dict_paths) m.inputs[p] = c3::file_hash_hex(p);
    m.inputs[a.in_path] = c3::file_hash_hex(a.in_path);
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    for (const auto& w : report.overlap_words) std::cout << w << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// taxonomy

struct TaxonomyArgs {
    std::string model_path;
    std::string vocab_path;
    std::string dict_path;
    std::string in_path;
    std::string out_path;
    std::string crime_class;
    std::string k = "auto";
    std::string epsilon = "auto";
    SeedFlag seed;
};

int run_taxonomy(const TaxonomyArgs& a) {
    const auto vocab = c3::load_vocabulary(a.vocab_path);
    const auto model = c3::AutoEncoderModel::load(a.model_path, vocab);
    const auto dict = c3::C3Dictionary::load(a.dict_path);
    const std::uint64_t seed = resolve_seed(a.seed);

    std::vector<std::string> words;
    for (const auto& w : dict.words_of_class(a.crime_class))
        if (vocab.contains(w)) words.push_back(w);
    if (words.size() < 2) throw std::runtime_error("taxonomy: need at least two in-vocabulary words for class " +
                                                   a.crime_class);
    Eigen::MatrixXd vectors;
    if (!a.in_path.empty()) {
        const auto docs = c3::load_corpus_jsonl(a.in_path);
        vectors = c3::word_context_vectors(model, vocab, words, docs);
    } else {
        vectors.resize(static_cast<Eigen::Index>(words.size()), model.config().latent_dim);
        for (std::size_t i = 0; i < words.size(); ++i)
            vectors.row(static_cast<Eigen::Index>(i)) = model.encode({vocab.id(words[i])}).transpose();
    }

    int k;
    if (a.k == "auto") {
        const int k_max = static_cast<int>(std::min<std::size_t>(12, words.size() - 1));
        k = c3::estimate_k(vectors, {2, k_max}, seed);
    } else {
        k = std::stoi(a.k);
    }
    const double epsilon = a.epsilon == "auto" ? -1.0 : std::stod(a.epsilon);
    const auto taxonomy = c3::build_taxonomy(words, vectors, k, epsilon, seed);

    json clusters = json::array();
    for (const auto& c : taxonomy.clusters)
        clusters.push_back({{"category", c.category_word},
                            {"subcategories", c.subcategory_words},
                            {"members", c.members}});
    write_json_file(a.out_path, json{{"class", a.crime_class},
                                     {"k", taxonomy.k},
                                     {"epsilon", taxonomy.epsilon},
                                     {"clusters", clusters}});

    c3::RunManifest m;
    m.command = "taxonomy";
    m.seed = seed;
    m.config_json = json{{"class", a.crime_class}, {"k", a.k}, {"epsilon", a.epsilon}}.dump();
    for (const auto& p : {a.model_path, a.vocab_path, a.dict_path}) m.inputs[p] = c3::file_hash_hex(p);
    if (!a.in_path.empty()) m.inputs[a.in_path] = c3::file_hash_hex(a.in_path);
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    for (const auto& c : taxonomy.clusters) {
        std::cout << c.category_word << ":";
        for (const auto& w : c.subcategory_words) std::cout << " " << w;
        std::cout << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string spec_path;
    std::string out_dir;
    SeedFlag seed;
};

int run_evaluate(const EvaluateArgs& a) {
    const json spec = load_json_file(a.spec_path);
    const auto vocab = c3::load_vocabulary(spec.at("vocab").get<std::string>());
    const auto model = c3::AutoEncoderModel::load(spec.at("model").get<std::string>(), vocab);
    const auto profiles = c3::load_profiles(spec.at("profiles").get<std::string>());

    c3::DetectorConfig config;
    if (spec.contains("theta_file"))
        config.theta = load_json_file(spec["theta_file"].get<std::string>()).at("theta").get<double>();
    else
        config.theta = spec.value("theta", 0.7);
    config.min_word_len = spec.value("min_word_len", 2);
    for (const auto& w : spec.value("stopwords", std::vector<std::string>{})) config.stopwords.insert(w);
    config.validate();

    const auto pool_docs = c3::load_corpus_jsonl(spec.at("pools").get<std::string>());
    std::map<std::string, std::vector<c3::Document>> pools;
    for (const auto& d : pool_docs) pools[d.label].push_back(d);

    std::vector<c3::MixCase> mixes;
    for (const auto& mj : spec.at("mixes")) {
        c3::MixCase mix;
        mix.name = mj.at("name").get<std::string>();
        mix.total_size = mj.at("total_size").get<std::size_t>();
        for (const auto& [label, share] : mj.at("proportions").items())
            mix.proportions.push_back({label, share.get<double>()});
        mixes.push_back(std::move(mix));
    }
    std::vector<std::uint64_t> seeds = spec.value("seeds", std::vector<std::uint64_t>{});
    if (seeds.empty()) seeds.push_back(resolve_seed(a.seed));

    const auto cells = c3::run_experiment(model, vocab, pools, profiles, config, mixes, seeds);

    fs::create_directories(a.out_dir);
    json summary = json::array();
    std::vector<std::string> outputs;
    for (const auto& cell : cells) {
        const std::string name =
            "report_" + sanitize_name(cell.mix_name) + "_" + std::to_string(cell.seed) + ".json";
        const std::string path = (fs::path(a.out_dir) / name).string();
        write_json_file(path, json{{"variant", cell.variant},
                                   {"mix", cell.mix_name},
                                   {"seed", cell.seed},
                                   {"theta", config.theta},
                                   {"metrics", metrics_to_json(cell.metrics)},
                                   {"reconstruction_error_pct", cell.reconstruction_error_pct}});
        outputs.push_back(path);
        summary.push_back({{"variant", cell.variant},
                           {"mix", cell.mix_name},
                           {"seed", cell.seed},
                           {"macro_f1", cell.metrics.macro.f1},
                           {"macro_precision", cell.metrics.macro.precision},
                           {"macro_recall", cell.metrics.macro.recall},
                           {"reconstruction_error_pct", cell.reconstruction_error_pct}});
        std::cout << cell.mix_name << " seed " << cell.seed << " macro_f1 " << cell.metrics.macro.f1 << "\n";
    }
    const std::string summary_path = (fs::path(a.out_dir) / "summary.json").string();
    write_json_file(summary_path, summary);
    outputs.push_back(summary_path);

    c3::RunManifest m;
    m.command = "evaluate";
    m.seed = seeds.front();
    m.config_json = spec.dump();
    m.inputs[a.spec_path] = c3::file_hash_hex(a.spec_path);
    for (const char* key : {"model", "vocab", "profiles", "pools"})
        m.inputs[spec.at(key).get<std::string>()] = c3::file_hash_hex(spec.at(key).get<std::string>());
    if (spec.contains("theta_file"))
        m.inputs[spec["theta_file"].get<std::string>()] =
            c3::file_hash_hex(spec["theta_file"].get<std::string>());
    m.outputs = outputs;
    c3::write_manifest(m, (fs::path(a.out_dir) / "evaluate.manifest.json").string());
    return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
    std::string in_path;
    std::string out_path;
    SeedFlag seed;
};

int run_plot(const PlotArgs& a) {
    const json j = load_json_file(a.in_path);
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    const auto rows = j.at("vectors").get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows.size() != labels.size())
        throw std::runtime_error("plot: vectors and labels must be non-empty and equal-length");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw std::runtime_error("plot: ragged vector rows");
        for (std::size_t d = 0; d < rows[i].size(); ++d)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    }
    const std::uint64_t seed = resolve_seed(a.seed);
    const Eigen::MatrixXd Y = c3::project_2d(X, seed);
    c3::emit_plot(Y, labels, a.out_path);

    c3::RunManifest m;
    m.command = "plot";
    m.seed = seed;
    m.config_json = "{}";
    m.inputs[a.in_path] = c3::file_hash_hex(a.in_path);
    m.outputs = {a.out_path};
    c3::write_manifest(m, a.out_path + ".manifest.json");

    std::cout << a.out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"c3: cybercrime coded-word detection pipeline"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    synth_cmd->add_option("--spec", synth.spec_path, "Synthetic corpus spec (JSON)")->required();
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
    add_seed_option(synth_cmd, synth.seed);

    PrepareArgs prepare;
    auto* prepare_cmd = app.add_subcommand("prepare", "Clean, split and index a corpus");
    prepare_cmd->add_option("--in", prepare.in_path, "Corpus JSONL")->required();
    prepare_cmd->add_option("--general", prepare.general_path, "General (non-crime) corpus JSONL");
    prepare_cmd->add_option("--extra", prepare.extra_paths,
                            "Extra JSONL whose tokens join the vocabulary (repeatable)");
    prepare_cmd->add_option("--out", prepare.out_dir, "Output directory")->required();
    prepare_cmd->add_option("--split", prepare.split, "train:validation:test ratio (default 8:1:1)");
    prepare_cmd->add_option("--profile-fraction", prepare.profile_fraction,
                            "Training share carved out for class profiles (default 0.1)");
    prepare_cmd->add_option("--min-freq", prepare.min_freq, "Minimum token frequency (default 1)");
    prepare_cmd->add_option("--max-vocab", prepare.max_vocab, "Vocabulary size cap (default 20000)");
    add_seed_option(prepare_cmd, prepare.seed);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train an autoencoder variant");
    train_cmd->add_option("--variant", train.variant, "sae|dae|sdae|vae|aae");
    train_cmd->add_option("--config", train.config_path, "Model config (JSON)");
    train_cmd->add_option("--corpus", train.corpus_dir, "Prepared corpus directory")->required();
    train_cmd->add_option("--out", train.out_path, "Checkpoint path")->required();
    train_cmd->add_option("--epochs", train.epochs, "Override epoch count");
    add_seed_option(train_cmd, train.seed);

    ProfileArgs profile;
    auto* profile_cmd = app.add_subcommand("profile", "Build class mean vectors");
    profile_cmd->add_option("--model", profile.model_path, "Checkpoint")->required();
    profile_cmd->add_option("--corpus", profile.corpus_dir, "Prepared corpus directory")->required();
    profile_cmd->add_option("--out", profile.out_path, "Profiles path")->required();
    profile_cmd->add_option("--classes", profile.classes_csv, "Comma-separated class ids (default: all)");

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "Two-step detection over documents");
    detect_cmd->add_option("--model", detect.model_path, "Checkpoint")->required();
    detect_cmd->add_option("--vocab", detect.vocab_path, "Vocabulary JSON")->required();
    detect_cmd->add_option("--profiles", detect.profiles_path, "Profiles path")->required();
    detect_cmd->add_option("--dict", detect.dict_path, "Dictionary JSON (default: empty)");
    detect_cmd->add_option("--in", detect.in_path, "Documents JSONL")->required();
    detect_cmd->add_option("--theta", detect.theta, "Cosine threshold (default 0.7)");
    detect_cmd->add_option("--out", detect.out_path, "Result JSON")->required();
    detect_cmd->add_option("--out-dict", detect.out_dict_path, "Write the updated dictionary here");
    detect_cmd->add_option("--date", detect.date, "date_added for new entries (default: document date)");
    detect_cmd->add_option("--min-word-len", detect.min_word_len, "Minimum candidate length (default 2)");
    detect_cmd->add_option("--stopwords", detect.stopwords_csv, "Comma-separated stopwords");

    CalibrateArgs calibrate;
    auto* calibrate_cmd = app.add_subcommand("calibrate-theta", "Sweep theta on labeled documents");
    calibrate_cmd->add_option("--model", calibrate.model_path, "Checkpoint")->required();
    calibrate_cmd->add_option("--vocab", calibrate.vocab_path, "Vocabulary JSON")->required();
    calibrate_cmd->add_option("--profiles", calibrate.profiles_path, "Profiles path")->required();
    calibrate_cmd->add_option("--in", calibrate.in_path, "Labeled documents JSONL")->required();
    calibrate_cmd->add_option("--out", calibrate.out_path, "Calibration JSON")->required();
    calibrate_cmd->add_option("--min-word-len", calibrate.min_word_len, "Minimum candidate length");
    calibrate_cmd->add_option("--stopwords", calibrate.stopwords_csv, "Comma-separated stopwords");

    NewWordsArgs new_words;
    auto* new_words_cmd = app.add_subcommand("new-words", "Flag outlier words in a class latent cluster");
    new_words_cmd->add_option("--model", new_words.model_path, "Checkpoint")->required();
    new_words_cmd->add_option("--vocab", new_words.vocab_path, "Vocabulary JSON")->required();
    new_words_cmd->add_option("--profiles", new_words.profiles_path, "Profiles path")->required();
    new_words_cmd->add_option("--dict", new_words.dict_path, "Dictionary JSON (band fit set)");
    new_words_cmd->add_option("--in", new_words.in_path, "Documents JSONL")->required();
    new_words_cmd->add_option("--class", new_words.crime_class, "Crime class id")->required();
    new_words_cmd->add_option("--alpha", new_words.alpha, "Band significance (default 0.05)");
    new_words_cmd->add_option("--band", new_words.band, "individual|mean_ci (default individual)");
    new_words_cmd->add_option("--theta", new_words.theta, "Cosine threshold (default 0.7)");
    new_words_cmd->add_option("--out", new_words.out_path, "Result JSON")->required();
    new_words_cmd->add_option("--min-word-len", new_words.min_word_len, "Minimum candidate length");
    new_words_cmd->add_option("--stopwords", new_words.stopwords_csv, "Comma-separated stopwords");

    OverlapArgs overlap;
    auto* overlap_cmd = app.add_subcommand("overlap", "Cross-class dictionary overlap");
    overlap_cmd->add_option("--dicts", overlap.dict_paths, "Two dictionary JSON paths")
        ->required()
        ->expected(2);
    overlap_cmd->add_option("--class-a", overlap.class_a, "Class id in the first dictionary");
    overlap_cmd->add_option("--class-b", overlap.class_b, "Class id in the second dictionary");
    overlap_cmd->add_option("--in", overlap.in_path, "Documents JSONL")->required();
    overlap_cmd->add_option("--out", overlap.out_path, "Report JSON")->required();

    TaxonomyArgs taxonomy;
    auto* taxonomy_cmd = app.add_subcommand("taxonomy", "Cluster a class lexicon into categories");
    taxonomy_cmd->add_option("--model", taxonomy.model_path, "Checkpoint")->required();
    taxonomy_cmd->add_option("--vocab", taxonomy.vocab_path, "Vocabulary JSON")->required();
    taxonomy_cmd->add_option("--dict", taxonomy.dict_path, "Dictionary JSON")->required();
    taxonomy_cmd->add_option("--in", taxonomy.in_path,
                             "Documents JSONL grounding each word in its usage contexts");
    taxonomy_cmd->add_option("--class", taxonomy.crime_class, "Crime class id")->required();
    taxonomy_cmd->add_option("--k", taxonomy.k, "Cluster count or 'auto' (silhouette)");
    taxonomy_cmd->add_option("--epsilon", taxonomy.epsilon, "Subcategory radius or 'auto' (median)");
    taxonomy_cmd->add_option("--out", taxonomy.out_path, "Taxonomy JSON")->required();
    add_seed_option(taxonomy_cmd, taxonomy.seed);

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Run mixture-ratio experiments");
    evaluate_cmd->add_option("--spec", evaluate.spec_path, "Experiment spec (JSON)")->required();
    evaluate_cmd->add_option("--out", evaluate.out_dir, "Output directory")->required();
    add_seed_option(evaluate_cmd, evaluate.seed);

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plot", "Project vectors to 2D and emit an SVG");
    plot_cmd->add_option("--in", plot.in_path, "Vectors JSON {labels, vectors}")->required();
    plot_cmd->add_option("--out", plot.out_path, "SVG path")->required();
    add_seed_option(plot_cmd, plot.seed);

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed()) return run_synth(synth);
        if (prepare_cmd->parsed()) return run_prepare(prepare);
        if (train_cmd->parsed()) return run_train(train);
        if (profile_cmd->parsed()) return run_profile(profile);
        if (detect_cmd->parsed()) return run_detect(detect);
        if (calibrate_cmd->parsed()) return run_calibrate(calibrate);
        if (new_words_cmd->parsed()) return run_new_words(new_words);
        if (overlap_cmd->parsed()) return run_overlap(overlap);
        if (taxonomy_cmd->parsed()) return run_taxonomy(taxonomy);
        if (evaluate_cmd->parsed()) return run_evaluate(evaluate);
        if (plot_cmd->parsed()) return run_plot(plot);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun 'c3 --help' for usage.\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
