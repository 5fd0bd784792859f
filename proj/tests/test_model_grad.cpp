#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "c3/model.hpp"
#include "c3/rng.hpp"
#include "c3/vocab.hpp"

using c3::AutoEncoderModel;
using c3::ModelConfig;
using c3::PaddedBatch;
using c3::Variant;
using c3::Vocabulary;
using c3::ad::Graph;

namespace {

Vocabulary tiny_vocab() {
    return Vocabulary::from_tokens({"aa", "bb", "cc", "dd", "ee"});  // 8 with reserved
}

ModelConfig tiny_config(Variant variant) {
    ModelConfig c;
    c.variant = variant;
    c.latent_dim = 3;
    c.embedding_dim = 5;
    c.hidden_layers = 2;
    c.hidden_size = 4;
    c.dropout = 0.0;
    c.batch_size = 4;
    c.epochs = 1;
    c.max_seq_len = 8;
    c.seed = 21;
    return c;
}

// Ragged batch so the mask path is exercised.
const std::vector<std::vector<int>> kSeqs{{3, 4, 5}, {6, 7}};

// Checks every entry of the given parameters against central finite
// differences of the scalar produced by `build`.
void check_param_gradients(const std::vector<c3::ad::Param*>& params,
                           const std::function<double(Graph&)>& build, double tol = 1e-4) {
    const double h = 1e-5;
    Graph g(true);
    (void)build(g);
    for (c3::ad::Param* p : params) {
        for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
            for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
                const double saved = p->value(i, j);
                p->value(i, j) = saved + h;
                Graph gp(false);
                const double fp = build(gp);
                p->value(i, j) = saved - h;
                Graph gm(false);
                const double fm = build(gm);
                p->value(i, j) = saved;
                const double numeric = (fp - fm) / (2.0 * h);
                const double analytic = p->grad(i, j);
                const double scale = std::max({1.0, std::fabs(numeric), std::fabs(analytic)});
                INFO("param ", p->name, " (", i, ",", j, "): numeric ", numeric, " analytic ", analytic);
                REQUIRE(std::fabs(numeric - analytic) / scale < tol);
            }
        }
        p->grad.setZero();
    }
}

}  // namespace

TEST_CASE("reconstruction objective gradients match finite differences") {
    const Vocabulary vocab = tiny_vocab();
    AutoEncoderModel model(tiny_config(Variant::SAE), vocab);
    auto build = [&](Graph& g) {
        PaddedBatch batch = c3::pad_batch(kSeqs, model.config().max_seq_len);
        Graph::Ref latent = model.encode_graph(g, batch, false, nullptr);
        Graph::Ref loss = model.decode_loss_graph(g, latent, batch, false, nullptr);
        if (g.grad_enabled()) g.backward(loss);
        return loss->value(0, 0);
    };
    check_param_gradients(model.all_params(), build);
}

TEST_CASE("variational objective gradients match finite differences") {
    const Vocabulary vocab = tiny_vocab();
    AutoEncoderModel model(tiny_config(Variant::VAE), vocab);
    // Fixed reparametrization noise keeps the objective deterministic.
    c3::Rng noise_rng(33);
    Eigen::MatrixXd eps(2, 3);
    for (int i = 0; i < eps.rows(); ++i)
        for (int j = 0; j < eps.cols(); ++j) eps(i, j) = noise_rng.normal();
    auto build = [&](Graph& g) {
        PaddedBatch batch = c3::pad_batch(kSeqs, model.config().max_seq_len);
        Graph::Ref mu = nullptr;
        Graph::Ref logvar = nullptr;
        model.encode_graph(g, batch, false, nullptr, &mu, &logvar);
        Graph::Ref sigma = g.exp(g.affine(logvar, 0.5, 0.0));
        Graph::Ref z = g.add(mu, g.cmul(sigma, g.constant(eps)));
        Graph::Ref recon = model.decode_loss_graph(g, z, batch, false, nullptr);
        Graph::Ref loss = g.add(recon, model.kl_graph(g, mu, logvar));
        if (g.grad_enabled()) g.backward(loss);
        return loss->value(0, 0);
    };
    check_param_gradients(model.all_params(), build);
}

TEST_CASE("adversarial objectives: gradients flow per step as specified") {
    const Vocabulary vocab = tiny_vocab();
    AutoEncoderModel model(tiny_config(Variant::AAE), vocab);

    c3::Rng prior_rng(44);
    Eigen::MatrixXd prior(2, 3);
    for (int i = 0; i < prior.rows(); ++i)
        for (int j = 0; j < prior.cols(); ++j) prior(i, j) = prior_rng.normal();
    const Eigen::MatrixXd encoded = model.encode_batch(kSeqs);

    SUBCASE("discriminator loss gradients match finite differences") {
        // Encoder output enters as a constant, as in the discriminator step.
        auto build = [&](Graph& g) {
            Graph::Ref d_prior = model.discriminator_graph(g, g.constant(prior), true);
            Graph::Ref d_enc = model.discriminator_graph(g, g.constant(encoded), true);
            Graph::Ref loss = g.add(g.mean_all(g.affine(g.log(d_prior), -1.0, 0.0)),
                                    g.mean_all(g.affine(g.log(g.affine(d_enc, -1.0, 1.0)), -1.0, 0.0)));
            if (g.grad_enabled()) g.backward(loss);
            return loss->value(0, 0);
        };
        Graph g(false);
        const double got = build(g);
        Eigen::VectorXd dp(2), de(2);
        {
            Graph gv(false);
            dp = model.discriminator_graph(gv, gv.constant(prior), false)->value.col(0);
            de = model.discriminator_graph(gv, gv.constant(encoded), false)->value.col(0);
        }
        CHECK(got == doctest::Approx(c3::aae_discriminator_loss(dp, de)).epsilon(1e-10));
        check_param_gradients(model.all_params(), build);
    }

    SUBCASE("generator loss reaches the encoder but not the discriminator") {
        auto build = [&](Graph& g) {
            PaddedBatch batch = c3::pad_batch(kSeqs, model.config().max_seq_len);
            Graph::Ref z = model.encode_graph(g, batch, false, nullptr);
            Graph::Ref d = model.discriminator_graph(g, z, false);
            Graph::Ref loss = g.mean_all(g.affine(g.log(d), -1.0, 0.0));
            if (g.grad_enabled()) g.backward(loss);
            return loss->value(0, 0);
        };
        Graph g(true);
        build(g);
        bool encoder_touched = false;
        for (c3::ad::Param* p : model.encoder_params())
            if (p->grad.cwiseAbs().maxCoeff() > 0.0) encoder_touched = true;
        CHECK(encoder_touched);
        for (c3::ad::Param* p : model.discriminator_params())
            CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
        for (c3::ad::Param* p : model.all_params()) p->grad.setZero();
        // Frozen discriminator weights are excluded: their true derivative is
        // nonzero but the step deliberately does not take it.
        check_param_gradients(model.encoder_params(), build);
    }
}
