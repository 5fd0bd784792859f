#include "c3/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "c3/model.hpp"
#include "c3/rng.hpp"
#include "c3/stats.hpp"
#include "c3/vocab.hpp"

namespace c3 {

std::vector<double> scalarize(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& center) {
    if (vectors.cols() != center.size())
        throw std::invalid_argument("scalarize: dimension mismatch");
    std::vector<double> out(static_cast<size_t>(vectors.rows()));
    for (Eigen::Index i = 0; i < vectors.rows(); ++i)
        out[static_cast<size_t>(i)] = (vectors.row(i).transpose() - center).norm();
    return out;
}

std::pair<double, double> confidence_interval(double x_bar, double sigma, size_t n, double alpha) {
    if (sigma <= 0.0) throw std::invalid_argument("confidence_interval: sigma must be positive");
    if (n < 1) throw std::invalid_argument("confidence_interval: n must be >= 1");
    const double z = z_critical(alpha);  // validates alpha
    const double half = z * sigma / std::sqrt(static_cast<double>(n));
    return {x_bar - half, x_bar + half};
}

OutlierModel fit_outlier_model(const Eigen::MatrixXd& class_vectors, double alpha, BandMode band_mode) {
    if (class_vectors.rows() < 3)
        throw std::invalid_argument("fit_outlier_model: need at least 3 vectors");
    OutlierModel m;
    m.alpha = alpha;
    m.band_mode = band_mode;
    m.n = static_cast<size_t>(class_vectors.rows());
    m.center = class_vectors.colwise().mean().transpose();
    const std::vector<double> d = scalarize(class_vectors, m.center);
    m.mu = mean(d);
    m.sigma = stdev(d);
    if (m.sigma <= 0.0) throw std::invalid_argument("degenerate cluster");
    if (band_mode == BandMode::individual) {
        const double z = z_critical(alpha);
        m.lower = m.mu - z * m.sigma;
        m.upper = m.mu + z * m.sigma;
    } else {
        std::tie(m.lower, m.upper) = confidence_interval(m.mu, m.sigma, m.n, alpha);
    }
    return m;
}

std::vector<NewWordFlag> detect_new_words(const std::vector<std::string>& words,
                                          const Eigen::MatrixXd& vectors, const OutlierModel& model) {
    if (static_cast<Eigen::Index>(words.size()) != vectors.rows())
        throw std::invalid_argument("detect_new_words: words/vectors length mismatch");
    const std::vector<double> stats = scalarize(vectors, model.center);
    std::vector<NewWordFlag> out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (stats[i] > model.upper)
            out.push_back({words[i], stats[i], "upper"});
        else if (stats[i] < model.lower)
            out.push_back({words[i], stats[i], "lower"});
    }
    return out;
}

OverlapReport detect_overlap(const std::set<std::string>& words_a, const std::string& class_a,
                             const std::set<std::string>& words_b, const std::string& class_b,
                             const std::vector<Document>& docs) {
    OverlapReport r;
    r.class_a = class_a;
    r.class_b = class_b;
    std::set_intersection(words_a.begin(), words_a.end(), words_b.begin(), words_b.end(),
                          std::back_inserter(r.overlap_words));
    for (const Document& d : docs) {
        OverlapReport::DocRatios row;
        row.doc_id = d.id;
        size_t total = 0, hits_a = 0, hits_b = 0;
        for (const Sentence& s : d.sentences)
            for (const std::string& w : s.tokens) {
                ++total;
                if (words_a.count(w)) ++hits_a;
                if (words_b.count(w)) ++hits_b;
            }
        if (total > 0) {
            row.ratio_a = static_cast<double>(hits_a) / static_cast<double>(total);
            row.ratio_b = static_cast<double>(hits_b) / static_cast<double>(total);
        }
        row.is_mixed = row.ratio_a > 0.0 && row.ratio_b > 0.0;
        r.per_document.push_back(std::move(row));
    }
    return r;
}

namespace {

double sq_dist(const Eigen::MatrixXd& X, Eigen::Index i, const Eigen::RowVectorXd& c) {
    return (X.row(i) - c).squaredNorm();
}

KMeansResult kmeans_once(const Eigen::MatrixXd& X, int k, Rng& rng, int max_iter) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd centroids(k, X.cols());

    // k-means++ seeding: first center uniform, then D^2-weighted draws.
    std::vector<double> d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    centroids.row(0) = X.row(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n))));
    for (int c = 1; c < k; ++c) {
        double total = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            d2[static_cast<size_t>(i)] =
                std::min(d2[static_cast<size_t>(i)], sq_dist(X, i, centroids.row(c - 1)));
            total += d2[static_cast<size_t>(i)];
        }
        Eigen::Index pick = 0;
        if (total > 0) {
            double target = rng.uniform(0.0, total), acc = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        }
        centroids.row(c) = X.row(pick);
    }

    std::vector<int> assign(static_cast<size_t>(n), -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(X, i, centroids.row(0));
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(X, i, centroids.row(c));
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[static_cast<size_t>(i)] != best) {
                assign[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<size_t>(i)]) += X.row(i);
            counts[static_cast<size_t>(assign[static_cast<size_t>(i)])] += 1;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                centroids.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
            } else {
                // Re-seed an empty cluster at the point farthest from its centroid.
                Eigen::Index far = 0;
                double fd = -1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d = sq_dist(X, i, centroids.row(assign[static_cast<size_t>(i)]));
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centroids.row(c) = X.row(far);
            }
        }
    }

    KMeansResult r;
    r.centroids = std::move(centroids);
    r.assignment = std::move(assign);
    r.inertia = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        r.inertia += sq_dist(X, i, r.centroids.row(r.assignment[static_cast<size_t>(i)]));
    return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& X, int k, std::uint64_t seed, int restarts, int max_iter) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
    if (X.rows() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, "kmeans/restart/" + std::to_string(r)));
        KMeansResult cur = kmeans_once(X, k, rng, max_iter);
        if (cur.inertia < best.inertia) best = std::move(cur);
    }
    return best;
}

double mean_silhouette(const Eigen::MatrixXd& X, const std::vector<int>& assignment, int k) {
    const Eigen::Index n = X.rows();
    if (static_cast<size_t>(n) != assignment.size())
        throw std::invalid_argument("mean_silhouette: assignment length mismatch");
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int a : assignment) counts.at(static_cast<size_t>(a)) += 1;

    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int ci = assignment[static_cast<size_t>(i)];
        if (counts[static_cast<size_t>(ci)] <= 1) continue;  // singleton: silhouette 0
        std::vector<double> mean_dist(static_cast<size_t>(k), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[static_cast<size_t>(assignment[static_cast<size_t>(j)])] +=
                (X.row(i) - X.row(j)).norm();
        }
        double a = mean_dist[static_cast<size_t>(ci)] / (counts[static_cast<size_t>(ci)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == ci || counts[static_cast<size_t>(c)] == 0) continue;
            b = std::min(b, mean_dist[static_cast<size_t>(c)] / counts[static_cast<size_t>(c)]);
        }
        if (std::isfinite(b) && std::max(a, b) > 0) total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

int estimate_k(const Eigen::MatrixXd& vectors, std::pair<int, int> k_range, std::uint64_t seed) {
    const auto [k_min, k_max] = k_range;
    if (k_min < 2 || k_max < k_min) throw std::invalid_argument("estimate_k: invalid k range");
    if (vectors.rows() < k_max + 1)
        throw std::invalid_argument("estimate_k: too few vectors for the requested range");
    int best_k = k_min;
    double best_sil = -2.0;
    for (int k = k_min; k <= k_max; ++k) {
        KMeansResult r = kmeans(vectors, k, derive_seed(seed, "estimate_k/" + std::to_string(k)));
        const double sil = mean_silhouette(vectors, r.assignment, k);
        if (sil > best_sil) {
            best_sil = sil;
            best_k = k;
        }
    }
    return best_k;
}

Taxonomy build_taxonomy(const std::vector<std::string>& words, const Eigen::MatrixXd& vectors, int k,
                        double epsilon, std::uint64_t seed) {
    if (static_cast<Eigen::Index>(words.size()) != vectors.rows())
        throw std::invalid_argument("build_taxonomy: words/vectors length mismatch");
    if (k < 1) throw std::invalid_argument("build_taxonomy: k must be positive");
    if (vectors.rows() < k) throw std::invalid_argument("build_taxonomy: k exceeds number of words");

    KMeansResult km = kmeans(vectors, k, derive_seed(seed, "taxonomy"));

    std::vector<double> dist(words.size());
    for (size_t i = 0; i < words.size(); ++i)
        dist[i] = (vectors.row(static_cast<Eigen::Index>(i)) -
                   km.centroids.row(km.assignment[i]))
                      .norm();
    if (epsilon < 0) {
        std::vector<double> sorted = dist;
        std::sort(sorted.begin(), sorted.end());
        const size_t n = sorted.size();
        epsilon = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }

    Taxonomy tax;
    tax.k = k;
    tax.epsilon = epsilon;
    for (int c = 0; c < k; ++c) {
        TaxonomyCluster cluster;
        cluster.centroid = km.centroids.row(c).transpose();
        std::vector<std::pair<double, std::string>> ranked;
        for (size_t i = 0; i < words.size(); ++i)
            if (km.assignment[i] == c) {
                ranked.emplace_back(dist[i], words[i]);
                cluster.members.push_back(words[i]);
            }
        if (ranked.empty()) continue;
        std::sort(ranked.begin(), ranked.end());
        cluster.category_word = ranked[0].second;
        for (size_t i = 1; i < ranked.size() && cluster.subcategory_words.size() < 4; ++i)
            if (ranked[i].first <= epsilon) cluster.subcategory_words.push_back(ranked[i].second);
        tax.clusters.push_back(std::move(cluster));
    }
    return tax;
}

namespace {

Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / std::max<double>(1.0, X.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::Index d = cov.rows();
    Eigen::MatrixXd basis(d, 2);
    basis.col(0) = es.eigenvectors().col(d - 1);  // eigenvalues ascending
    if (d >= 2)
        basis.col(1) = es.eigenvectors().col(d - 2);
    else
        basis.col(1).setZero();
    // Sign convention: make the largest-magnitude loading positive.
    for (int c = 0; c < 2; ++c) {
        Eigen::Index imax = 0;
        basis.col(c).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, c) < 0) basis.col(c) = -basis.col(c);
    }
    return centered * basis;
}

// Exact (O(n^2)) stochastic neighbor embedding.
Eigen::MatrixXd tsne_2d(const Eigen::MatrixXd& X, std::uint64_t seed) {
    const Eigen::Index n = X.rows();
    const double perplexity = std::min(30.0, static_cast<double>(n) / 4.0);

    Eigen::MatrixXd D2(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) D2(i, j) = (X.row(i) - X.row(j)).squaredNorm();

    // Per-point precision by bisection to hit log(perplexity) entropy.
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    const double target_entropy = std::log(perplexity);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
        Eigen::VectorXd p(n);
        for (int it = 0; it < 64; ++it) {
            double sum = 0;
            for (Eigen::Index j = 0; j < n; ++j) {
                p(j) = (j == i) ? 0.0 : std::exp(-beta * D2(i, j));
                sum += p(j);
            }
            if (sum <= 0) sum = 1e-12;
            double entropy = 0;
            for (Eigen::Index j = 0; j < n; ++j) {
                p(j) /= sum;
                if (p(j) > 1e-12) entropy -= p(j) * std::log(p(j));
            }
            if (std::abs(entropy - target_entropy) < 1e-5) break;
            if (entropy > target_entropy) {
                beta_lo = beta;
                beta = std::isfinite(beta_hi) ? 0.5 * (beta + beta_hi) : beta * 2.0;
            } else {
                beta_hi = beta;
                beta = 0.5 * (beta + beta_lo);
            }
        }
        P.row(i) = p.transpose();
    }
    P = (P + P.transpose()) / (2.0 * n);
    P = P.cwiseMax(1e-12);

    Rng rng(derive_seed(seed, "tsne/init"));
    Eigen::MatrixXd Y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) Y(i, c) = rng.normal(0.0, 1e-2);

    Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(n, 2);
    const int iters = 400;
    for (int it = 0; it < iters; ++it) {
        const double exaggeration = it < 100 ? 4.0 : 1.0;
        const double momentum = it < 200 ? 0.5 : 0.8;

        Eigen::MatrixXd Qnum(n, n);
        double qsum = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Qnum(i, i) = 0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double q = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
                Qnum(i, j) = q;
                Qnum(j, i) = q;
                qsum += 2 * q;
            }
        }
        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, 2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double mult =
                    (exaggeration * P(i, j) - Qnum(i, j) / qsum) * Qnum(i, j);
                grad.row(i) += 4.0 * mult * (Y.row(i) - Y.row(j));
            }
        vel = momentum * vel - 200.0 * grad;
        Y += vel;
        Y.rowwise() -= Y.colwise().mean();  // keep the map centered
    }
    return Y;
}

}  // namespace

Eigen::MatrixXd project_2d(const Eigen::MatrixXd& vectors, std::uint64_t seed) {
    if (vectors.rows() < 2) throw std::invalid_argument("project_2d: need at least 2 vectors");
    if (vectors.rows() < 20) return pca_2d(vectors);
    return tsne_2d(vectors, seed);
}

Eigen::MatrixXd word_context_vectors(const AutoEncoderModel& model, const Vocabulary& vocab,
                                     const std::vector<std::string>& words,
                                     const std::vector<Document>& docs) {
    const Eigen::Index dim = model.config().latent_dim;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(words.size()), dim);
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < words.size(); ++i) index[words[i]] = i;

    std::vector<Eigen::VectorXd> sums(words.size(), Eigen::VectorXd::Zero(dim));
    std::vector<int> counts(words.size(), 0);
    for (const Document& d : docs)
        for (const Sentence& s : d.sentences) {
            std::set<size_t> hits;
            for (const std::string& t : s.tokens) {
                auto it = index.find(t);
                if (it != index.end()) hits.insert(it->second);
            }
            if (hits.empty()) continue;
            std::vector<int> ids;
            ids.reserve(s.tokens.size());
            for (const std::string& t : s.tokens) ids.push_back(vocab.id(t));
            const Eigen::VectorXd z = model.encode(ids);
            for (size_t i : hits) {
                sums[i] += z;
                counts[i] += 1;
            }
        }
    for (size_t i = 0; i < words.size(); ++i) {
        const Eigen::VectorXd v =
            counts[i] > 0 ? Eigen::VectorXd(sums[i] / counts[i]) : model.encode({vocab.id(words[i])});
        out.row(static_cast<Eigen::Index>(i)) = v.transpose();
    }
    return out;
}

}  // namespace c3
