#include "c3/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace c3::ad {

Graph::Ref Graph::make(Mat value, bool needs_grad) {
    auto node = std::make_unique<Node>();
    node->value = std::move(value);
    node->needs_grad = needs_grad && grad_enabled_;
    if (node->needs_grad) node->grad = Mat::Zero(node->value.rows(), node->value.cols());
    nodes_.push_back(std::move(node));
    return nodes_.back().get();
}

Graph::Ref Graph::constant(Mat v) { return make(std::move(v), false); }

Graph::Ref Graph::param(Param& p) {
    Ref n = make(p.value, true);
    if (!n->needs_grad) return n;
    Param* pp = &p;
    n->backward = [n, pp] { pp->grad += n->grad; };
    return n;
}

Graph::Ref Graph::matmul(Ref a, Ref b) {
    if (a->value.cols() != b->value.rows()) throw std::invalid_argument("matmul: shape mismatch");
    Ref n = make(a->value * b->value, a->needs_grad || b->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, b] {
        if (a->needs_grad) a->grad.noalias() += n->grad * b->value.transpose();
        if (b->needs_grad) b->grad.noalias() += a->value.transpose() * n->grad;
    };
    return n;
}

Graph::Ref Graph::add(Ref a, Ref b) {
    Ref n = make(a->value + b->value, a->needs_grad || b->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, b] {
        if (a->needs_grad) a->grad += n->grad;
        if (b->needs_grad) b->grad += n->grad;
    };
    return n;
}

Graph::Ref Graph::sub(Ref a, Ref b) {
    Ref n = make(a->value - b->value, a->needs_grad || b->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, b] {
        if (a->needs_grad) a->grad += n->grad;
        if (b->needs_grad) b->grad -= n->grad;
    };
    return n;
}

Graph::Ref Graph::add_rowvec(Ref a, Ref row) {
    if (row->value.rows() != 1 || row->value.cols() != a->value.cols())
        throw std::invalid_argument("add_rowvec: shape mismatch");
    Mat v = a->value;
    v.rowwise() += row->value.row(0);
    Ref n = make(std::move(v), a->needs_grad || row->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, row] {
        if (a->needs_grad) a->grad += n->grad;
        if (row->needs_grad) row->grad.row(0) += n->grad.colwise().sum();
    };
    return n;
}

Graph::Ref Graph::cmul(Ref a, Ref b) {
    Ref n = make(a->value.cwiseProduct(b->value), a->needs_grad || b->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, b] {
        if (a->needs_grad) a->grad += n->grad.cwiseProduct(b->value);
        if (b->needs_grad) b->grad += n->grad.cwiseProduct(a->value);
    };
    return n;
}

Graph::Ref Graph::affine(Ref a, double k, double m) {
    Ref n = make((a->value.array() * k + m).matrix(), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, k] { a->grad += k * n->grad; };
    return n;
}

Graph::Ref Graph::sigmoid(Ref a) {
    Mat v = (1.0 / (1.0 + (-a->value.array()).exp())).matrix();
    Ref n = make(std::move(v), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a] {
        a->grad.array() += n->grad.array() * n->value.array() * (1.0 - n->value.array());
    };
    return n;
}

Graph::Ref Graph::tanh(Ref a) {
    Ref n = make(a->value.array().tanh().matrix(), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a] {
        a->grad.array() += n->grad.array() * (1.0 - n->value.array().square());
    };
    return n;
}

Graph::Ref Graph::exp(Ref a) {
    Ref n = make(a->value.array().exp().matrix(), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a] { a->grad.array() += n->grad.array() * n->value.array(); };
    return n;
}

Graph::Ref Graph::log(Ref a) {
    Ref n = make(a->value.array().log().matrix(), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a] { a->grad.array() += n->grad.array() / a->value.array(); };
    return n;
}

Graph::Ref Graph::concat_cols(Ref a, Ref b) {
    if (a->value.rows() != b->value.rows()) throw std::invalid_argument("concat_cols: row mismatch");
    Mat v(a->value.rows(), a->value.cols() + b->value.cols());
    v << a->value, b->value;
    Ref n = make(std::move(v), a->needs_grad || b->needs_grad);
    if (!n->needs_grad) return n;
    const Eigen::Index ac = a->value.cols();
    n->backward = [n, a, b, ac] {
        if (a->needs_grad) a->grad += n->grad.leftCols(ac);
        if (b->needs_grad) b->grad += n->grad.rightCols(n->grad.cols() - ac);
    };
    return n;
}

Graph::Ref Graph::slice_cols(Ref a, int start, int cols) {
    Ref n = make(a->value.middleCols(start, cols), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, start, cols] { a->grad.middleCols(start, cols) += n->grad; };
    return n;
}

Graph::Ref Graph::gather_rows(Ref table, const std::vector<int>& ids) {
    Mat v(static_cast<Eigen::Index>(ids.size()), table->value.cols());
    for (size_t i = 0; i < ids.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = table->value.row(ids[i]);
    Ref n = make(std::move(v), table->needs_grad);
    if (!n->needs_grad) return n;
    std::vector<int> idx = ids;
    n->backward = [n, table, idx = std::move(idx)] {
        for (size_t i = 0; i < idx.size(); ++i)
            table->grad.row(idx[i]) += n->grad.row(static_cast<Eigen::Index>(i));
    };
    return n;
}

Graph::Ref Graph::mix_rows(Ref a, Ref b, const Eigen::VectorXd& mask) {
    if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols() || mask.size() != a->value.rows())
        throw std::invalid_argument("mix_rows: shape mismatch");
    Mat v = mask.asDiagonal() * a->value + (1.0 - mask.array()).matrix().asDiagonal() * b->value;
    Ref n = make(std::move(v), a->needs_grad || b->needs_grad);
    if (!n->needs_grad) return n;
    Eigen::VectorXd m = mask;
    n->backward = [n, a, b, m = std::move(m)] {
        if (a->needs_grad) a->grad += m.asDiagonal() * n->grad;
        if (b->needs_grad) b->grad += (1.0 - m.array()).matrix().asDiagonal() * n->grad;
    };
    return n;
}

Graph::Ref Graph::sum_all(Ref a) {
    Mat v(1, 1);
    v(0, 0) = a->value.sum();
    Ref n = make(std::move(v), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a] { a->grad.array() += n->grad(0, 0); };
    return n;
}

Graph::Ref Graph::mean_all(Ref a) {
    Mat v(1, 1);
    v(0, 0) = a->value.mean();
    Ref n = make(std::move(v), a->needs_grad);
    if (!n->needs_grad) return n;
    const double inv = 1.0 / static_cast<double>(a->value.size());
    n->backward = [n, a, inv] { a->grad.array() += n->grad(0, 0) * inv; };
    return n;
}

Graph::Ref Graph::clamp(Ref a, double lo, double hi) {
    Ref n = make(a->value.array().max(lo).min(hi).matrix(), a->needs_grad);
    if (!n->needs_grad) return n;
    n->backward = [n, a, lo, hi] {
        a->grad.array() +=
            n->grad.array() * ((a->value.array() > lo) && (a->value.array() < hi)).cast<double>();
    };
    return n;
}

Graph::Ref Graph::bce_sigmoid_onehot(Ref logits, const std::vector<int>& target_ids,
                                     const Eigen::VectorXd& mask, double eps) {
    const Eigen::Index B = logits->value.rows();
    if (static_cast<Eigen::Index>(target_ids.size()) != B || mask.size() != B)
        throw std::invalid_argument("bce_sigmoid_onehot: shape mismatch");
    Eigen::ArrayXXd s = 1.0 / (1.0 + (-logits->value.array()).exp());
    Eigen::ArrayXXd sc = s.max(eps).min(1.0 - eps);
    double total = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
        if (mask(b) == 0.0) continue;
        // All-zeros target except the hot index: sum of -log(1-s) plus the
        // hot-index correction from -log(1-s) to -log(s).
        total += -(1.0 - sc.row(b)).log().sum();
        const double sh = sc(b, target_ids[b]);
        total += -std::log(sh) + std::log(1.0 - sh);
    }
    Mat v(1, 1);
    v(0, 0) = total;
    Ref n = make(std::move(v), logits->needs_grad);
    if (!n->needs_grad) return n;
    std::vector<int> ids = target_ids;
    Eigen::VectorXd m = mask;
    n->backward = [n, logits, ids = std::move(ids), m = std::move(m), eps] {
        const double g = n->grad(0, 0);
        Eigen::ArrayXXd s = 1.0 / (1.0 + (-logits->value.array()).exp());
        // d/dlogit of clamped BCE is (s - x) where the clamp is inactive, 0 inside it.
        Eigen::ArrayXXd active = ((s > eps) && (s < 1.0 - eps)).cast<double>();
        for (Eigen::Index b = 0; b < s.rows(); ++b) {
            if (m(b) == 0.0) continue;
            Eigen::ArrayXd x = Eigen::ArrayXd::Zero(s.cols());
            x(ids[static_cast<size_t>(b)]) = 1.0;
            logits->grad.row(b).array() += g * active.row(b).transpose() * (s.row(b).transpose() - x);
        }
    };
    return n;
}

void Graph::backward(Ref loss) {
    if (!grad_enabled_) throw std::logic_error("backward: gradients disabled on this graph");
    if (loss->value.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    loss->grad(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node* n = it->get();
        if (n->needs_grad && n->backward) n->backward();
    }
}

}  // namespace c3::ad
