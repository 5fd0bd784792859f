#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace c3::ad {

using Mat = Eigen::MatrixXd;

// A named trainable parameter. Gradients accumulate across backward passes
// until the optimizer consumes and clears them.
struct Param {
    std::string name;
    Mat value;
    Mat grad;

    Param(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
        grad = Mat::Zero(value.rows(), value.cols());
    }
};

// Dynamic reverse-mode tape over dense matrices. A Graph is built per batch;
// nodes are created in topological order, so backward() is a reverse sweep.
class Graph {
public:
    struct Node {
        Mat value;
        Mat grad;
        bool needs_grad = false;
        std::function<void()> backward;
    };
    using Ref = Node*;

    explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    bool grad_enabled() const { return grad_enabled_; }
    size_t size() const { return nodes_.size(); }

    Ref constant(Mat v);
    Ref param(Param& p);  // tracked leaf when grads are enabled, constant otherwise

    Ref matmul(Ref a, Ref b);
    Ref add(Ref a, Ref b);
    Ref sub(Ref a, Ref b);
    Ref add_rowvec(Ref a, Ref row);         // row: 1 x cols, broadcast over rows
    Ref cmul(Ref a, Ref b);                 // elementwise
    Ref affine(Ref a, double k, double m);  // k*a + m elementwise
    Ref sigmoid(Ref a);
    Ref tanh(Ref a);
    Ref exp(Ref a);
    Ref log(Ref a);
    Ref concat_cols(Ref a, Ref b);
    Ref slice_cols(Ref a, int start, int n);
    Ref gather_rows(Ref table, const std::vector<int>& ids);
    // mask(i)*a.row(i) + (1-mask(i))*b.row(i)
    Ref mix_rows(Ref a, Ref b, const Eigen::VectorXd& mask);
    Ref sum_all(Ref a);   // 1x1
    Ref mean_all(Ref a);  // 1x1
    Ref clamp(Ref a, double lo, double hi);

    // Sum over rows with mask(b) != 0 of the binary cross-entropy between the
    // one-hot row indicated by target_ids[b] and sigmoid(logits(b,:)), with
    // probabilities clamped to [eps, 1-eps]. Returns a 1x1 node.
    Ref bce_sigmoid_onehot(Ref logits, const std::vector<int>& target_ids, const Eigen::VectorXd& mask, double eps);

    // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse.
    void backward(Ref loss);

private:
    Ref make(Mat value, bool needs_grad);

    std::vector<std::unique_ptr<Node>> nodes_;
    bool grad_enabled_;
};

}  // namespace c3::ad
