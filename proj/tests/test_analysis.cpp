#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "c3/analysis.hpp"
#include "c3/corpus.hpp"
#include "c3/model.hpp"
#include "c3/rng.hpp"
#include "c3/vocab.hpp"

using namespace c3;

namespace {

// Four colinear points whose distances from their own mean are
// {0.4, 0.4, 0.9, 0.9} by construction.
Eigen::MatrixXd colinear_points(double cx = 2.0) {
    Eigen::MatrixXd X(4, 2);
    X << cx - 0.4, 0, cx + 0.4, 0, cx - 0.9, 0, cx + 0.9, 0;
    return X;
}

Eigen::MatrixXd blob(Rng& rng, int n, double cx, double cy, double spread) {
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = cx + rng.normal(0, spread);
        X(i, 1) = cy + rng.normal(0, spread);
    }
    return X;
}

}  // namespace

TEST_CASE("scalarize measures euclidean distance from the center") {
    Eigen::MatrixXd X(2, 2);
    X << 3, 4, 0, 0;
    const auto d = scalarize(X, Eigen::Vector2d(0, 0));
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(0.0));

    const auto d2 = scalarize(X, Eigen::Vector2d(3, 0));
    CHECK(d2[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(d2[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("confidence interval oracle values") {
    const auto [lo, hi] = confidence_interval(0.0, 1.0, 100, 0.05);
    CHECK(lo == doctest::Approx(-0.19599639845400535).epsilon(1e-9));
    CHECK(hi == doctest::Approx(0.19599639845400535).epsilon(1e-9));

    const auto [lo2, hi2] = confidence_interval(10.0, 10.0, 100, 0.05);
    CHECK(lo2 == doctest::Approx(8.040036015459947).epsilon(1e-9));
    CHECK(hi2 == doctest::Approx(11.959963984540053).epsilon(1e-9));

    // quadrupling n halves the width
    const auto [a1, b1] = confidence_interval(0.0, 2.0, 50, 0.05);
    const auto [a2, b2] = confidence_interval(0.0, 2.0, 200, 0.05);
    CHECK((b2 - a2) == doctest::Approx((b1 - a1) / 2.0).epsilon(1e-9));

    CHECK_THROWS(confidence_interval(0, 1, 0, 0.05));
    CHECK_THROWS(confidence_interval(0, 0, 10, 0.05));
    CHECK_THROWS(confidence_interval(0, 1, 10, 0.0));
    CHECK_THROWS(confidence_interval(0, 1, 10, 1.0));
}

TEST_CASE("outlier model individual band from known distances") {
    const auto m = fit_outlier_model(colinear_points(), 0.05, BandMode::individual);
    CHECK(m.n == 4);
    CHECK(m.mu == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(m.sigma == doctest::Approx(0.28867513459481287).epsilon(1e-9));
    CHECK(m.lower == doctest::Approx(0.08420713296191429).epsilon(1e-6));
    CHECK(m.upper == doctest::Approx(1.2157928670380858).epsilon(1e-6));
    CHECK((m.center - Eigen::Vector2d(2.0, 0.0)).norm() <= 1e-12);
}

TEST_CASE("outlier model mean-ci band applies the root-n shrink") {
    const auto m = fit_outlier_model(colinear_points(), 0.05, BandMode::mean_ci);
    CHECK(m.lower == doctest::Approx(0.3671035664809571).epsilon(1e-6));
    CHECK(m.upper == doctest::Approx(0.9328964335190429).epsilon(1e-6));
}

TEST_CASE("outlier model rejects degenerate inputs") {
    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 1, 1;
    CHECK_THROWS(fit_outlier_model(two, 0.05, BandMode::individual));

    Eigen::MatrixXd same(3, 2);
    same << 1, 1, 1, 1, 1, 1;  // zero spread
    CHECK_THROWS(fit_outlier_model(same, 0.05, BandMode::individual));
}

TEST_CASE("detect_new_words flags tails against the fitted band") {
    const auto m = fit_outlier_model(colinear_points(), 0.05, BandMode::individual);
    Eigen::MatrixXd probes(3, 2);
    probes << 2.0, 0.0,    // at the center: distance 0, below the lower bound
        2.65, 0.0,         // distance 0.65 = mu, inside the band
        4.5, 0.0;          // distance 2.5, above the upper bound
    const auto flags = detect_new_words({"low", "mid", "high"}, probes, m);
    REQUIRE(flags.size() == 2);
    std::map<std::string, std::string> tail;
    for (const auto& f : flags) tail[f.word] = f.tail;
    CHECK(tail.at("low") == "lower");
    CHECK(tail.at("high") == "upper");
    CHECK(tail.count("mid") == 0);
    for (const auto& f : flags)
        if (f.word == "high") CHECK(f.statistic == doctest::Approx(2.5).epsilon(1e-12));

    CHECK_THROWS(detect_new_words({"one"}, probes, m));
}

TEST_CASE("one far point among many near ones is the only upper flag") {
    // 99 points evenly on the unit circle sum to zero, so the center lands at
    // (10,0)/100 and every circle point stays within the band while the far
    // point sits ~9.9 from center.
    const int n = 99;
    Eigen::MatrixXd X(n + 1, 2);
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * M_PI * i / n;
        X(i, 0) = std::cos(t);
        X(i, 1) = std::sin(t);
        words.push_back("w" + std::to_string(i));
    }
    X(n, 0) = 10.0;
    X(n, 1) = 0.0;
    words.push_back("far");

    const auto m = fit_outlier_model(X, 0.05, BandMode::individual);
    const auto flags = detect_new_words(words, X, m);
    std::vector<std::string> upper;
    for (const auto& f : flags)
        if (f.tail == "upper") upper.push_back(f.word);
    REQUIRE(upper.size() == 1);
    CHECK(upper[0] == "far");
}

TEST_CASE("detect_overlap matches a brute-force recomputation") {
    const std::set<std::string> da = {"snow", "rock"};
    const std::set<std::string> db = {"rock", "iron"};

    std::vector<Document> docs(3);
    docs[0].id = "m1";
    docs[0].raw_text = "snow rock plain iron";
    docs[1].id = "m2";
    docs[1].raw_text = "plain plain snow";
    docs[2].id = "m3";
    docs[2].raw_text = "plain words only here";
    for (auto& d : docs) preprocess_document(d);

    const auto r = detect_overlap(da, "drugs", db, "arms", docs);
    CHECK(r.class_a == "drugs");
    CHECK(r.class_b == "arms");
    CHECK(r.overlap_words == std::vector<std::string>{"rock"});
    REQUIRE(r.per_document.size() == 3);
    CHECK(r.per_document[0].ratio_a == doctest::Approx(0.5));
    CHECK(r.per_document[0].ratio_b == doctest::Approx(0.5));
    CHECK(r.per_document[0].is_mixed);
    CHECK(r.per_document[1].ratio_a == doctest::Approx(1.0 / 3));
    CHECK(r.per_document[1].ratio_b == doctest::Approx(0.0));
    CHECK(!r.per_document[1].is_mixed);
    CHECK(!r.per_document[2].is_mixed);
}

TEST_CASE("detect_overlap fuzz against set intersection") {
    Rng rng(31);
    const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    for (int trial = 0; trial < 50; ++trial) {
        std::set<std::string> wa, wb;
        for (const auto& w : pool) {
            if (rng.bernoulli(0.4)) wa.insert(w);
            if (rng.bernoulli(0.4)) wb.insert(w);
        }
        std::vector<std::string> expect;
        std::set_intersection(wa.begin(), wa.end(), wb.begin(), wb.end(), std::back_inserter(expect));
        const auto r = detect_overlap(wa, "x", wb, "y", {});
        CHECK(r.overlap_words == expect);
    }
}

TEST_CASE("kmeans recovers two well-separated blobs") {
    Rng rng(5);
    Eigen::MatrixXd X(40, 2);
    X.topRows(20) = blob(rng, 20, 0, 0, 0.2);
    X.bottomRows(20) = blob(rng, 20, 10, 10, 0.2);

    const auto r = kmeans(X, 2, 9);
    REQUIRE(r.assignment.size() == 40);
    std::set<int> first(r.assignment.begin(), r.assignment.begin() + 20);
    std::set<int> second(r.assignment.begin() + 20, r.assignment.end());
    CHECK(first.size() == 1);
    CHECK(second.size() == 1);
    CHECK(*first.begin() != *second.begin());
    CHECK(r.inertia < 10.0);

    // determinism per seed
    const auto r2 = kmeans(X, 2, 9);
    CHECK(r.assignment == r2.assignment);
    CHECK(r.inertia == r2.inertia);

    CHECK_THROWS(kmeans(X, 0, 1));
    CHECK_THROWS(kmeans(X, 41, 1));
}

TEST_CASE("kmeans k=1 yields the global mean") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 2, 4, 6;
    const auto r = kmeans(X, 1, 3);
    CHECK(r.centroids(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.inertia == doctest::Approx(20.0).epsilon(1e-9));  // 9+1+1+9
}

TEST_CASE("mean silhouette prefers the true grouping") {
    Rng rng(6);
    Eigen::MatrixXd X(20, 2);
    X.topRows(10) = blob(rng, 10, 0, 0, 0.3);
    X.bottomRows(10) = blob(rng, 10, 8, 0, 0.3);
    std::vector<int> good(20), bad(20);
    for (int i = 0; i < 20; ++i) {
        good[i] = i < 10 ? 0 : 1;
        bad[i] = i % 2;
    }
    CHECK(mean_silhouette(X, good, 2) > 0.8);
    CHECK(mean_silhouette(X, good, 2) > mean_silhouette(X, bad, 2));
}

TEST_CASE("estimate_k finds the planted cluster count") {
    Rng rng(7);
    Eigen::MatrixXd X(60, 2);
    X.topRows(20) = blob(rng, 20, 0, 0, 0.25);
    X.middleRows(20, 20) = blob(rng, 20, 10, 0, 0.25);
    X.bottomRows(20) = blob(rng, 20, 5, 9, 0.25);
    CHECK(estimate_k(X, {2, 6}, 13) == 3);
    CHECK_THROWS(estimate_k(X, {1, 6}, 13));
    CHECK_THROWS(estimate_k(X, {5, 4}, 13));
}

TEST_CASE("taxonomy picks the member nearest each centroid as category word") {
    // two tight stars whose first member sits exactly on the centroid
    Eigen::MatrixXd X(8, 2);
    X << 0, 0, 0, 0.4, 0, -0.4, 0.4, 0,   // cluster around (0.1, 0)
        9, 0, 9, 0.3, 9, -0.3, 9.3, 0;    // cluster around (9.15, 0)
    const std::vector<std::string> words = {"a0", "a1", "a2", "a3", "b0", "b1", "b2", "b3"};

    const auto tax = build_taxonomy(words, X, 2, -1.0, 17);
    REQUIRE(tax.clusters.size() == 2);
    CHECK(tax.k == 2);
    CHECK(tax.epsilon > 0);

    std::map<std::string, const TaxonomyCluster*> by_cat;
    for (const auto& c : tax.clusters) by_cat[c.category_word] = &c;
    REQUIRE(by_cat.count("a0") == 1);
    REQUIRE(by_cat.count("b0") == 1);

    // brute-force nearest-to-centroid agreement per cluster
    for (const auto& c : tax.clusters) {
        double best = 1e18;
        std::string best_word;
        for (const auto& w : c.members) {
            const auto it = std::find(words.begin(), words.end(), w);
            const Eigen::Index idx = it - words.begin();
            const double d = (X.row(idx).transpose() - c.centroid).norm();
            if (d < best) {
                best = d;
                best_word = w;
            }
        }
        CHECK(c.category_word == best_word);
        CHECK(c.members.size() == 4);
        CHECK(c.subcategory_words.size() <= 4);
        for (const auto& w : c.subcategory_words) CHECK(w != c.category_word);
    }

    CHECK_THROWS(build_taxonomy({"one"}, X, 2, -1.0, 17));  // length mismatch
    CHECK_THROWS(build_taxonomy(words, X, 9, -1.0, 17));    // k > n
}

TEST_CASE("taxonomy epsilon bounds subcategory distance") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 0.1, 0.2, 5.0;  // one straggler far from the pack
    const auto tax = build_taxonomy({"near0", "near1", "near2", "straggler"}, X, 1, 0.5, 3);
    REQUIRE(tax.clusters.size() == 1);
    const auto& c = tax.clusters[0];
    CHECK(c.members.size() == 4);
    // straggler is a member but too far to be a subcategory word
    CHECK(std::find(c.subcategory_words.begin(), c.subcategory_words.end(), "straggler") ==
          c.subcategory_words.end());
}

TEST_CASE("2d projection separates groups and is deterministic") {
    Rng rng(8);

    // below 20 rows the projection is a principal-component map
    Eigen::MatrixXd small(12, 6);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 6; ++j) small(i, j) = rng.normal(0, 0.1) + (i < 6 ? 0.0 : 4.0);
    const auto p_small = project_2d(small, 21);
    REQUIRE(p_small.rows() == 12);
    REQUIRE(p_small.cols() == 2);
    double min_cross = 1e18, max_within = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            max_within = std::max(max_within, (p_small.row(i) - p_small.row(j)).norm());
            min_cross = std::min(min_cross, (p_small.row(i) - p_small.row(6 + j)).norm());
        }
    CHECK(min_cross > max_within);

    const auto p_again = project_2d(small, 21);
    CHECK((p_small - p_again).norm() == 0.0);

    // at 20 rows and above the embedding is stochastic-neighbor based
    Eigen::MatrixXd large(24, 4);
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 4; ++j) large(i, j) = rng.normal(0, 0.15) + (i < 12 ? 0.0 : 3.0);
    const auto p_large = project_2d(large, 22);
    REQUIRE(p_large.rows() == 24);
    REQUIRE(p_large.cols() == 2);
    const auto p_large2 = project_2d(large, 22);
    CHECK((p_large - p_large2).norm() == 0.0);
}

TEST_CASE("word context vectors average sentence latents with fallback") {
    const auto vocab = Vocabulary::from_tokens({"alpha", "beta", "gamma", "delta"});
    ModelConfig cfg;
    cfg.latent_dim = 3;
    cfg.embedding_dim = 4;
    cfg.hidden_layers = 1;
    cfg.hidden_size = 4;
    cfg.dropout = 0.0;
    cfg.epochs = 0;
    cfg.max_seq_len = 8;
    cfg.seed = 2;
    AutoEncoderModel m(cfg, vocab);

    std::vector<Document> docs(2);
    docs[0].raw_text = "alpha beta. alpha gamma.";
    docs[1].raw_text = "beta delta.";
    for (auto& d : docs) preprocess_document(d);

    const auto V = word_context_vectors(m, vocab, {"alpha", "beta", "zzz"}, docs);
    REQUIRE(V.rows() == 3);
    REQUIRE(V.cols() == 3);

    const auto z1 = m.encode(vocab.encode({"alpha", "beta"}));
    const auto z2 = m.encode(vocab.encode({"alpha", "gamma"}));
    const auto z3 = m.encode(vocab.encode({"beta", "delta"}));
    CHECK((V.row(0).transpose() - (z1 + z2) / 2.0).norm() <= 1e-12);
    CHECK((V.row(1).transpose() - (z1 + z3) / 2.0).norm() <= 1e-12);
    // zzz never occurs: falls back to its isolated (oov) encoding
    CHECK((V.row(2).transpose() - m.encode({vocab.id("zzz")})).norm() <= 1e-12);
}
