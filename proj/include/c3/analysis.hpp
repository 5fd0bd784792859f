#pragma once

#include <Eigen/Core>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "c3/types.hpp"

namespace c3 {

enum class BandMode { individual, mean_ci };

// Normal band on the distance-from-center statistic of a class's vectors.
struct OutlierModel {
    double mu = 0;
    double sigma = 0;
    size_t n = 0;
    double alpha = 0.05;
    double lower = 0;
    double upper = 0;
    BandMode band_mode = BandMode::individual;
    Eigen::VectorXd center;
};

struct NewWordFlag {
    std::string word;
    double statistic = 0;
    std::string tail;  // "upper" (far from center: new-word candidates) or "lower"
};

struct OverlapReport {
    std::string class_a;
    std::string class_b;
    std::vector<std::string> overlap_words;  // sorted
    struct DocRatios {
        std::string doc_id;
        double ratio_a = 0;  // dictionary-word hits / total tokens
        double ratio_b = 0;
        bool is_mixed = false;
    };
    std::vector<DocRatios> per_document;
};

struct TaxonomyCluster {
    Eigen::VectorXd centroid;
    std::string category_word;
    std::vector<std::string> subcategory_words;  // nearest-first, within epsilon, at most 4
    std::vector<std::string> members;
};

struct Taxonomy {
    std::vector<TaxonomyCluster> clusters;
    int k = 0;
    double epsilon = 0;
};

struct KMeansResult {
    Eigen::MatrixXd centroids;      // k x dim
    std::vector<int> assignment;    // per row of the input
    double inertia = 0;             // sum of squared distances to assigned centroid
};

// Euclidean distance of each row from the center.
std::vector<double> scalarize(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& center);

// (x_bar - z*sigma/sqrt(n), x_bar + z*sigma/sqrt(n)) for a two-sided band at
// significance alpha; errors unless alpha in (0,1), sigma > 0, n >= 1.
std::pair<double, double> confidence_interval(double x_bar, double sigma, size_t n, double alpha);

// Distances are measured from the mean vector of the inputs. individual mode
// bands single points (mu +- z*sigma); mean_ci applies the sqrt(n) shrink.
OutlierModel fit_outlier_model(const Eigen::MatrixXd& class_vectors, double alpha = 0.05,
                               BandMode band_mode = BandMode::individual);

// Words whose statistic falls outside the model band, annotated by tail.
std::vector<NewWordFlag> detect_new_words(const std::vector<std::string>& words,
                                          const Eigen::MatrixXd& vectors, const OutlierModel& model);

// Exact intersection plus per-document dictionary-hit ratios.
OverlapReport detect_overlap(const std::set<std::string>& words_a, const std::string& class_a,
                             const std::set<std::string>& words_b, const std::string& class_b,
                             const std::vector<Document>& docs);

// Lloyd iterations from k-means++ seeding, best inertia over `restarts`.
KMeansResult kmeans(const Eigen::MatrixXd& X, int k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 100);

// Mean silhouette over all points; singleton clusters contribute 0.
double mean_silhouette(const Eigen::MatrixXd& X, const std::vector<int>& assignment, int k);

// k in [k_range.first, k_range.second] maximizing mean silhouette.
int estimate_k(const Eigen::MatrixXd& vectors, std::pair<int, int> k_range, std::uint64_t seed);

// Clusters the word vectors; per cluster the member nearest the centroid is
// the category word and up to 4 next-nearest members within epsilon are the
// subcategory words. epsilon < 0 selects the median within-cluster distance.
Taxonomy build_taxonomy(const std::vector<std::string>& words, const Eigen::MatrixXd& vectors, int k,
                        double epsilon, std::uint64_t seed);

// 2D map of the rows: t-SNE (perplexity min(30, n/4)) for n >= 20, top-2
// principal components below that. Deterministic per seed.
Eigen::MatrixXd project_2d(const Eigen::MatrixXd& vectors, std::uint64_t seed);

class AutoEncoderModel;
class Vocabulary;

// One vector per word: the mean latent of the sentences the word occurs in.
// Words with no occurrences fall back to their isolated encoding. Usage
// context separates a lexicon's internal structure far better than
// single-token encodings.
Eigen::MatrixXd word_context_vectors(const AutoEncoderModel& model, const Vocabulary& vocab,
                                     const std::vector<std::string>& words,
                                     const std::vector<Document>& docs);

}  // namespace c3
