#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "c3/corpus.hpp"
#include "c3/detector.hpp"
#include "c3/model.hpp"
#include "c3/types.hpp"

namespace c3 {

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    size_t support = 0;  // gold count
};

struct MetricsReport {
    std::map<std::string, ClassMetrics> per_class;  // crime classes only
    ClassMetrics macro;                             // unweighted mean over crime classes
    // confusion[gold][predicted]; includes "general" gold rows and "none" predictions
    std::map<std::string, std::map<std::string, size_t>> confusion;
};

// One-vs-rest metrics per crime class (every gold label except "general").
// "none" predictions are misses for every crime class. Errors on length mismatch.
MetricsReport precision_recall_f1(const std::vector<std::string>& predictions,
                                  const std::vector<std::string>& gold);

// Majority vote over non-none sentence labels; all none -> none; ties break
// toward the lexicographically lower class id.
std::string classify_document(const std::vector<std::string>& sentence_labels);

// Sentence-majority label for one document under the given profiles/theta.
std::string predict_document(const AutoEncoderModel& model, const Vocabulary& vocab,
                             const Document& doc, const std::vector<ClassProfile>& profiles,
                             const DetectorConfig& config);

// Document-level metrics over a labeled set; gold "general" maps to none.
MetricsReport evaluate_documents(const AutoEncoderModel& model, const Vocabulary& vocab,
                                 const std::vector<Document>& docs,
                                 const std::vector<ClassProfile>& profiles,
                                 const DetectorConfig& config);

struct ThetaCalibration {
    double theta = 0;
    double macro_f1 = 0;
    std::vector<std::pair<double, double>> sweep;  // (theta, macro_f1) per grid point
};

// Sweeps theta over [0, 0.99] in steps of 0.01 maximizing document-level
// macro-F1 on the given labeled documents; ties keep the lowest theta.
ThetaCalibration calibrate_theta(const AutoEncoderModel& model, const Vocabulary& vocab,
                                 const std::vector<Document>& docs,
                                 const std::vector<ClassProfile>& profiles, DetectorConfig config);

struct MixCase {
    std::string name;                                       // e.g. "5:5"
    std::vector<std::pair<std::string, double>> proportions;  // label -> share, sums to 1
    size_t total_size = 0;
};

struct ExperimentCell {
    std::string variant;
    std::string mix_name;
    std::uint64_t seed = 0;
    MetricsReport metrics;
    double reconstruction_error_pct = 0;  // over the mixed test documents
};

// One cell per (mix, seed) for the given trained model: builds the mix from
// the per-label test pools, classifies documents, and scores against gold.
std::vector<ExperimentCell> run_experiment(const AutoEncoderModel& model, const Vocabulary& vocab,
                                           const std::map<std::string, std::vector<Document>>& test_pools,
                                           const std::vector<ClassProfile>& profiles,
                                           const DetectorConfig& config,
                                           const std::vector<MixCase>& mixes,
                                           const std::vector<std::uint64_t>& seeds);

// Deterministic scatter plot of labeled 2D points written as SVG; identical
// inputs produce identical bytes. Errors on empty input or unwritable path.
void emit_plot(const Eigen::MatrixXd& points_2d, const std::vector<std::string>& labels,
               const std::string& path);

}  // namespace c3
