#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "c3/corpus.hpp"
#include "c3/types.hpp"

using namespace c3;

namespace {

std::vector<Document> labeled_docs(const std::map<std::string, int>& per_label) {
    std::vector<Document> docs;
    for (const auto& [label, n] : per_label)
        for (int i = 0; i < n; ++i) {
            Document d;
            d.id = label + "-" + std::to_string(i);
            d.raw_text = "token alpha beta. gamma delta.";
            d.label = label;
            preprocess_document(d);
            docs.push_back(std::move(d));
        }
    return docs;
}

std::map<std::string, int> count_labels(const std::vector<Document>& docs) {
    std::map<std::string, int> c;
    for (const auto& d : docs) ++c[d.label];
    return c;
}

std::set<std::string> ids_of(const std::vector<Document>& docs) {
    std::set<std::string> s;
    for (const auto& d : docs) s.insert(d.id);
    return s;
}

}  // namespace

TEST_CASE("preprocess_document fills clean text and sentences") {
    Document d;
    d.raw_text = "Buy NOW!!! Great 100% stuff.\nThird line here";
    preprocess_document(d);
    CHECK(d.clean_text == "buy now great stuff third line here");
    REQUIRE(d.sentences.size() == 3);
    CHECK(d.sentences[0].index == 0);
    CHECK(d.sentences[0].tokens == std::vector<std::string>{"buy", "now"});
    CHECK(d.sentences[2].tokens == std::vector<std::string>{"third", "line", "here"});
}

TEST_CASE("preprocess_document drops sentences that clean to nothing") {
    Document d;
    d.raw_text = "real words here. 12345. more words.";
    preprocess_document(d);
    REQUIRE(d.sentences.size() == 2);
    CHECK(d.sentences[0].tokens.front() == "real");
    CHECK(d.sentences[1].tokens.front() == "more");
}

TEST_CASE("split_corpus is stratified within one document per bucket") {
    const auto docs = labeled_docs({{"drugs", 100}, {"weapons", 50}, {"general", 200}});
    const auto split = split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.0, 7);

    const auto tr = count_labels(split.train);
    const auto va = count_labels(split.validation);
    const auto te = count_labels(split.test);
    for (const auto& [label, total] : std::map<std::string, int>{{"drugs", 100}, {"weapons", 50}, {"general", 200}}) {
        CHECK(std::abs(tr.at(label) - static_cast<int>(0.8 * total)) <= 1);
        CHECK(std::abs(va.at(label) - static_cast<int>(0.1 * total)) <= 1);
        CHECK(std::abs(te.at(label) - static_cast<int>(0.1 * total)) <= 1);
        CHECK(tr.at(label) + va.at(label) + te.at(label) == total);
    }
}

TEST_CASE("split_corpus partitions without duplication or loss") {
    const auto docs = labeled_docs({{"a", 30}, {"b", 25}});
    const auto split = split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.0, 3);
    auto all = ids_of(split.train);
    for (const auto& d : split.validation) CHECK(all.insert(d.id).second);
    for (const auto& d : split.test) CHECK(all.insert(d.id).second);
    CHECK(all == ids_of(docs));
}

TEST_CASE("split_corpus profile subset is carved out of the training share") {
    const auto docs = labeled_docs({{"a", 100}, {"b", 100}});
    const auto split = split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.25, 11);
    CHECK(!split.profile.empty());
    // carving removes the profile documents from the remaining train set
    const auto train_ids = ids_of(split.train);
    for (const auto& d : split.profile) CHECK(train_ids.count(d.id) == 0);
    const auto pc = count_labels(split.profile);
    CHECK(pc.at("a") == 20);  // a quarter of the 80-document train share
    CHECK(pc.at("b") == 20);
    CHECK(count_labels(split.train).at("a") == 60);
}

TEST_CASE("split_corpus is seed-deterministic and seed-sensitive") {
    const auto docs = labeled_docs({{"a", 60}, {"b", 40}});
    const auto s1 = split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.1, 42);
    const auto s2 = split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.1, 42);
    REQUIRE(s1.train.size() == s2.train.size());
    for (size_t i = 0; i < s1.train.size(); ++i) CHECK(s1.train[i].id == s2.train[i].id);
    for (size_t i = 0; i < s1.test.size(); ++i) CHECK(s1.test[i].id == s2.test[i].id);

    const auto s3 = split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.1, 43);
    bool any_diff = s1.train.size() != s3.train.size();
    for (size_t i = 0; !any_diff && i < s1.train.size(); ++i) any_diff = s1.train[i].id != s3.train[i].id;
    CHECK(any_diff);
}

TEST_CASE("split_corpus rejects classes with fewer than 10 documents") {
    const auto docs = labeled_docs({{"a", 9}, {"b", 50}});
    CHECK_THROWS_WITH_AS(split_corpus(docs, SplitRatios{0.8, 0.1, 0.1}, 0.0, 1), doctest::Contains("insufficient corpus"),
                         std::runtime_error);
}

TEST_CASE("mix_test_set draws largest-remainder counts per label") {
    const auto a = labeled_docs({{"a", 200}});
    const auto b = labeled_docs({{"b", 200}});
    const auto g = labeled_docs({{"general", 400}});

    MixSpec spec;
    spec.ratio = {{"a", 0.6}, {"b", 0.2}, {"general", 0.2}};
    spec.total_size = 10;
    auto mixed = mix_test_set({a, b, g}, {"a", "b", "general"}, spec, 5);
    auto counts = count_labels(mixed);
    CHECK(mixed.size() == 10);
    CHECK(counts["a"] == 6);
    CHECK(counts["b"] == 2);
    CHECK(counts["general"] == 2);

    // 1/3 splits of 10 cannot be exact; largest remainder hands the spare
    // document to the first tied component
    spec.ratio = {{"a", 1.0 / 3}, {"b", 1.0 / 3}, {"general", 1.0 / 3}};
    mixed = mix_test_set({a, b, g}, {"a", "b", "general"}, spec, 5);
    counts = count_labels(mixed);
    CHECK(mixed.size() == 10);
    CHECK(counts["a"] + counts["b"] + counts["general"] == 10);
    for (const auto& [label, n] : counts) CHECK(std::abs(n - 10.0 / 3) < 1.0);
}

TEST_CASE("mix_test_set tiny shares keep at least the rounded count") {
    const auto a = labeled_docs({{"a", 3000}});
    const auto g = labeled_docs({{"general", 3000}});
    MixSpec spec;
    spec.ratio = {{"general", 0.9995}, {"a", 0.0005}};
    spec.total_size = 2000;
    const auto mixed = mix_test_set({a, g}, {"a", "general"}, spec, 1);
    const auto counts = count_labels(mixed);
    CHECK(mixed.size() == 2000);
    CHECK(counts.at("a") == 1);  // 0.0005 * 2000
}

TEST_CASE("mix_test_set is deterministic per seed") {
    const auto a = labeled_docs({{"a", 100}});
    const auto b = labeled_docs({{"b", 100}});
    MixSpec spec;
    spec.ratio = {{"a", 0.5}, {"b", 0.5}};
    spec.total_size = 40;
    const auto m1 = mix_test_set({a, b}, {"a", "b"}, spec, 9);
    const auto m2 = mix_test_set({a, b}, {"a", "b"}, spec, 9);
    REQUIRE(m1.size() == m2.size());
    for (size_t i = 0; i < m1.size(); ++i) CHECK(m1[i].id == m2[i].id);
}

TEST_CASE("parse_ratio normalizes and validates") {
    const auto r = parse_ratio("8:1:1");
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(0.8));
    CHECK(r[1] == doctest::Approx(0.1));
    CHECK(r[2] == doctest::Approx(0.1));

    const auto r2 = parse_ratio("5:5");
    REQUIRE(r2.size() == 2);
    CHECK(r2[0] == doctest::Approx(0.5));

    const auto r3 = parse_ratio("99.99:0.005:0.005");
    REQUIRE(r3.size() == 3);
    CHECK(r3[0] == doctest::Approx(0.9999));
    CHECK(r3[1] == doctest::Approx(0.00005));

    CHECK_THROWS(parse_ratio("8"));
    CHECK_THROWS(parse_ratio(""));
    CHECK_THROWS(parse_ratio("a:b"));
    CHECK_THROWS(parse_ratio("1:-1"));
}

TEST_CASE("corpus jsonl round-trips documents") {
    const std::string path = "/tmp/c3_test_corpus_rt.jsonl";
    std::vector<Document> docs;
    Document d1;
    d1.id = "x1";
    d1.raw_text = "Grab the GOODS now! Cheap 50% off.";
    d1.label = "drugs";
    d1.date = "2024-03-01";
    preprocess_document(d1);
    Document d2;
    d2.id = "x2";
    d2.raw_text = "plain general text";
    d2.label = "general";
    preprocess_document(d2);
    docs = {d1, d2};

    save_corpus_jsonl(docs, path);
    const auto loaded = load_corpus_jsonl(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "x1");
    CHECK(loaded[0].label == "drugs");
    CHECK(loaded[0].date == "2024-03-01");
    CHECK(loaded[0].clean_text == d1.clean_text);
    REQUIRE(loaded[0].sentences.size() == d1.sentences.size());
    CHECK(loaded[0].sentences[1].tokens == d1.sentences[1].tokens);
    CHECK(loaded[1].id == "x2");
    std::remove(path.c_str());
}

TEST_CASE("load_corpus_jsonl missing file is an error") {
    CHECK_THROWS(load_corpus_jsonl("/tmp/c3_does_not_exist_anywhere.jsonl"));
}
