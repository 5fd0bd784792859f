#include "c3/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace c3 {

MetricsReport precision_recall_f1(const std::vector<std::string>& predictions,
                                  const std::vector<std::string>& gold) {
    if (predictions.size() != gold.size())
        throw std::invalid_argument("precision_recall_f1: length mismatch");

    std::set<std::string> crime_classes;
    for (const std::string& g : gold)
        if (g != kGeneralLabel && g != kNoneLabel) crime_classes.insert(g);

    MetricsReport report;
    for (size_t i = 0; i < predictions.size(); ++i) report.confusion[gold[i]][predictions[i]] += 1;

    for (const std::string& c : crime_classes) {
        size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (size_t i = 0; i < predictions.size(); ++i) {
            const bool gold_c = gold[i] == c;
            const bool pred_c = predictions[i] == c;
            if (gold_c) ++support;
            if (gold_c && pred_c) ++tp;
            else if (!gold_c && pred_c) ++fp;
            else if (gold_c && !pred_c) ++fn;  // includes "none" predictions
        }
        ClassMetrics m;
        m.support = support;
        m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        report.per_class[c] = m;
    }
    if (!report.per_class.empty()) {
        for (const auto& [cls, m] : report.per_class) {
            report.macro.precision += m.precision;
            report.macro.recall += m.recall;
            report.macro.f1 += m.f1;
            report.macro.support += m.support;
        }
        const double k = static_cast<double>(report.per_class.size());
        report.macro.precision /= k;
        report.macro.recall /= k;
        report.macro.f1 /= k;
    }
    return report;
}

std::string classify_document(const std::vector<std::string>& sentence_labels) {
    if (sentence_labels.empty()) throw std::invalid_argument("classify_document: empty input");
    std::map<std::string, size_t> votes;
    for (const std::string& s : sentence_labels)
        if (s != kNoneLabel) votes[s] += 1;
    if (votes.empty()) return kNoneLabel;
    // std::map iterates ids in ascending order, so the first maximum wins ties.
    std::string best;
    size_t best_n = 0;
    for (const auto& [cls, n] : votes)
        if (n > best_n) {
            best = cls;
            best_n = n;
        }
    return best;
}

std::string predict_document(const AutoEncoderModel& model, const Vocabulary& vocab,
                             const Document& doc, const std::vector<ClassProfile>& profiles,
                             const DetectorConfig& config) {
    std::vector<std::string> labels;
    for (const Sentence& s : doc.sentences)
        labels.push_back(classify_sentence(model, vocab, s, profiles, config).assigned);
    if (labels.empty()) return kNoneLabel;
    return classify_document(labels);
}

MetricsReport evaluate_documents(const AutoEncoderModel& model, const Vocabulary& vocab,
                                 const std::vector<Document>& docs,
                                 const std::vector<ClassProfile>& profiles,
                                 const DetectorConfig& config) {
    std::vector<std::string> preds, gold;
    for (const Document& d : docs) {
        preds.push_back(predict_document(model, vocab, d, profiles, config));
        gold.push_back(d.label);
    }
    return precision_recall_f1(preds, gold);
}

ThetaCalibration calibrate_theta(const AutoEncoderModel& model, const Vocabulary& vocab,
                                 const std::vector<Document>& docs,
                                 const std::vector<ClassProfile>& profiles, DetectorConfig config) {
    if (docs.empty()) throw std::invalid_argument("calibrate_theta: empty document set");

    // Scores depend only on the latent vectors, so compute sentence scores
    // once and sweep the threshold over them.
    struct DocScores {
        std::string gold;
        std::vector<std::vector<std::pair<std::string, double>>> sentence_scores;
    };
    std::vector<DocScores> cache;
    DetectorConfig any = config;
    any.theta = -1.0;  // assignment ignored during caching
    for (const Document& d : docs) {
        DocScores ds;
        ds.gold = d.label;
        for (const Sentence& s : d.sentences)
            ds.sentence_scores.push_back(
                classify_sentence(model, vocab, s, profiles, any).scores);
        cache.push_back(std::move(ds));
    }

    ThetaCalibration out;
    out.macro_f1 = -1.0;
    for (int step = 0; step < 100; ++step) {
        const double theta = 0.01 * step;
        std::vector<std::string> preds, gold;
        for (const DocScores& ds : cache) {
            std::vector<std::string> labels;
            for (const auto& scores : ds.sentence_scores) {
                std::string best = kNoneLabel;
                double best_s = -2.0;
                for (const auto& [cls, s] : scores)
                    if (s > best_s || (s == best_s && best != kNoneLabel && cls < best)) {
                        best_s = s;
                        best = cls;
                    }
                labels.push_back(best_s >= theta ? best : std::string(kNoneLabel));
            }
            preds.push_back(labels.empty() ? kNoneLabel : classify_document(labels));
            gold.push_back(ds.gold);
        }
        const double f1 = precision_recall_f1(preds, gold).macro.f1;
        out.sweep.emplace_back(theta, f1);
        if (f1 > out.macro_f1) {
            out.macro_f1 = f1;
            out.theta = theta;
        }
    }
    return out;
}

std::vector<ExperimentCell> run_experiment(const AutoEncoderModel& model, const Vocabulary& vocab,
                                           const std::map<std::string, std::vector<Document>>& test_pools,
                                           const std::vector<ClassProfile>& profiles,
                                           const DetectorConfig& config,
                                           const std::vector<MixCase>& mixes,
                                           const std::vector<std::uint64_t>& seeds) {
    if (mixes.empty() || seeds.empty())
        throw std::invalid_argument("run_experiment: mixes and seeds must be nonempty");
    std::vector<std::vector<Document>> sources;
    std::vector<std::string> labels;
    for (const auto& [label, pool] : test_pools) {
        labels.push_back(label);
        sources.push_back(pool);
    }

    std::vector<ExperimentCell> cells;
    for (const MixCase& mix : mixes) {
        MixSpec spec;
        spec.total_size = mix.total_size;
        for (const auto& [label, share] : mix.proportions) spec.ratio.push_back({label, share});
        for (std::uint64_t seed : seeds) {
            std::vector<Document> docs = mix_test_set(sources, labels, spec, seed);
            ExperimentCell cell;
            cell.variant = variant_name(model.config().variant);
            cell.mix_name = mix.name;
            cell.seed = seed;
            cell.metrics = evaluate_documents(model, vocab, docs, profiles, config);
            std::vector<std::vector<int>> seqs;
            for (const Document& d : docs) {
                std::vector<int> ids = document_token_ids(d, vocab);
                if (!ids.empty()) seqs.push_back(std::move(ids));
            }
            cell.reconstruction_error_pct = reconstruction_error_rate(model, seqs);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

namespace {

// Fixed-precision formatting keeps plot bytes identical across runs.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

void emit_plot(const Eigen::MatrixXd& points_2d, const std::vector<std::string>& labels,
               const std::string& path) {
    if (points_2d.rows() == 0) throw std::invalid_argument("emit_plot: empty input");
    if (points_2d.cols() != 2) throw std::invalid_argument("emit_plot: points must be 2D");
    if (static_cast<size_t>(points_2d.rows()) != labels.size())
        throw std::invalid_argument("emit_plot: points/labels length mismatch");

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::vector<std::string> classes;
    for (const std::string& l : labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    std::sort(classes.begin(), classes.end());

    const double W = 640, H = 480, margin = 48;
    double xmin = points_2d.col(0).minCoeff(), xmax = points_2d.col(0).maxCoeff();
    double ymin = points_2d.col(1).minCoeff(), ymax = points_2d.col(1).maxCoeff();
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (W - 2 * margin); };
    auto sy = [&](double y) { return H - margin - (y - ymin) / (ymax - ymin) * (H - 2 * margin); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) +
           "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (Eigen::Index i = 0; i < points_2d.rows(); ++i) {
        const size_t ci =
            static_cast<size_t>(std::find(classes.begin(), classes.end(), labels[static_cast<size_t>(i)]) -
                                classes.begin());
        svg += "<circle cx=\"" + fmt(sx(points_2d(i, 0))) + "\" cy=\"" + fmt(sy(points_2d(i, 1))) +
               "\" r=\"3\" fill=\"" + kPalette[ci % 10] + "\" fill-opacity=\"0.75\"/>\n";
    }
    for (size_t c = 0; c < classes.size(); ++c) {
        const double ly = 20.0 + 18.0 * static_cast<double>(c);
        svg += "<circle cx=\"" + fmt(W - 150.0) + "\" cy=\"" + fmt(ly) + "\" r=\"4\" fill=\"" +
               kPalette[c % 10] + "\"/>\n";
        svg += "<text x=\"" + fmt(W - 140.0) + "\" y=\"" + fmt(ly + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + classes[c] + "</text>\n";
    }
    svg += "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot: cannot write " + path);
    out << svg;
    if (!out) throw std::runtime_error("emit_plot: write failed for " + path);
}

}  // namespace c3
