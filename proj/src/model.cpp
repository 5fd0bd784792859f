#include "c3/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace c3 {

using json = nlohmann::json;
using ad::Graph;
using Mat = Eigen::MatrixXd;

namespace {
constexpr double kProbEps = 1e-7;
constexpr char kCkptMagic[8] = {'C', '3', 'A', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;
}  // namespace

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::SAE: return "sae";
        case Variant::DAE: return "dae";
        case Variant::SDAE: return "sdae";
        case Variant::VAE: return "vae";
        case Variant::AAE: return "aae";
    }
    return "sae";
}

Variant parse_variant(const std::string& name) {
    std::string s;
    for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "sae") return Variant::SAE;
    if (s == "dae") return Variant::DAE;
    if (s == "sdae") return Variant::SDAE;
    if (s == "vae") return Variant::VAE;
    if (s == "aae") return Variant::AAE;
    throw std::invalid_argument("unknown variant: " + name);
}

void ModelConfig::validate() const {
    if (latent_dim <= 0) throw std::invalid_argument("latent_dim must be positive");
    if (embedding_dim <= 0) throw std::invalid_argument("embedding_dim must be positive");
    if (hidden_size <= 0) throw std::invalid_argument("hidden_size must be positive");
    if (hidden_layers <= 0) throw std::invalid_argument("hidden_layers must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0,1)");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
    if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
    if (max_seq_len <= 0) throw std::invalid_argument("max_seq_len must be positive");
    if (variant == Variant::SDAE && hidden_layers < 2)
        throw std::invalid_argument("sdae requires hidden_layers >= 2");
    auto prob = [](double p, const char* what) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument(std::string(what) + " must be in [0,1]");
    };
    prob(noise.delete_prob, "delete_prob");
    prob(noise.blank_prob, "blank_prob");
    prob(noise.replace_prob, "replace_prob");
    if (noise.shuffle_window < 0) throw std::invalid_argument("shuffle_window must be nonnegative");
}

std::vector<int> apply_noise(const std::vector<int>& token_ids, const NoiseSpec& spec, Rng& rng,
                             int vocab_size) {
    if (token_ids.empty()) throw std::invalid_argument("apply_noise: empty sequence");
    const size_t n = token_ids.size();

    // Local shuffle: stable sort by i + U[0, window+1). A token at i can beat
    // at most `window` later tokens, so displacement stays within the window.
    std::vector<int> out;
    if (spec.shuffle_window > 0) {
        std::vector<std::pair<double, size_t>> keys(n);
        for (size_t i = 0; i < n; ++i)
            keys[i] = {static_cast<double>(i) + rng.uniform(0.0, spec.shuffle_window + 1.0), i};
        std::stable_sort(keys.begin(), keys.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        out.reserve(n);
        for (const auto& [key, i] : keys) out.push_back(token_ids[i]);
    } else {
        out = token_ids;
    }

    if (spec.delete_prob > 0.0) {
        std::vector<int> kept;
        kept.reserve(out.size());
        for (int id : out)
            if (rng.uniform() >= spec.delete_prob) kept.push_back(id);
        out = std::move(kept);
    }
    if (out.empty()) return {Vocabulary::kBlank};

    if (spec.blank_prob > 0.0)
        for (int& id : out)
            if (rng.uniform() < spec.blank_prob) id = Vocabulary::kBlank;

    // Replacement draws uniformly from the non-reserved vocabulary so it stays
    // a distinct corruption from BLANK substitution.
    if (spec.replace_prob > 0.0 && vocab_size > Vocabulary::kNumReserved)
        for (int& id : out)
            if (rng.uniform() < spec.replace_prob)
                id = Vocabulary::kNumReserved +
                     static_cast<int>(rng.uniform_int(
                         static_cast<std::uint64_t>(vocab_size - Vocabulary::kNumReserved)));
    return out;
}

double reconstruction_loss(const Mat& target_one_hot, const Mat& predicted) {
    if (target_one_hot.rows() != predicted.rows() || target_one_hot.cols() != predicted.cols())
        throw std::invalid_argument("reconstruction_loss: shape mismatch");
    if (target_one_hot.size() == 0) throw std::invalid_argument("reconstruction_loss: empty input");
    Eigen::ArrayXXd p = predicted.array().max(kProbEps).min(1.0 - kProbEps);
    Eigen::ArrayXXd x = target_one_hot.array();
    return -(x * p.log() + (1.0 - x) * (1.0 - p).log()).mean();
}

double kl_divergence(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                     bool literal_log_sigma) {
    if (mu.size() != sigma.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    if ((sigma.array() <= 0.0).any()) throw std::invalid_argument("kl_divergence: sigma must be positive");
    Eigen::ArrayXd logterm =
        literal_log_sigma ? sigma.array().log().eval() : (2.0 * sigma.array().log()).eval();
    return -0.5 * (1.0 + logterm - mu.array().square() - sigma.array().square()).sum();
}

double aae_discriminator_loss(const Eigen::VectorXd& d_prior, const Eigen::VectorXd& d_encoded) {
    if (d_prior.size() == 0 || d_encoded.size() == 0)
        throw std::invalid_argument("aae_discriminator_loss: empty input");
    Eigen::ArrayXd p = d_prior.array().max(kProbEps).min(1.0 - kProbEps);
    Eigen::ArrayXd q = d_encoded.array().max(kProbEps).min(1.0 - kProbEps);
    return -p.log().mean() - (1.0 - q).log().mean();
}

double aae_generator_loss(const Eigen::VectorXd& d_encoded) {
    if (d_encoded.size() == 0) throw std::invalid_argument("aae_generator_loss: empty input");
    Eigen::ArrayXd q = d_encoded.array().max(kProbEps).min(1.0 - kProbEps);
    return -q.log().mean();
}

PaddedBatch pad_batch(const std::vector<std::vector<int>>& seqs, int max_seq_len) {
    if (seqs.empty()) throw std::invalid_argument("pad_batch: empty batch");
    PaddedBatch b;
    b.B = static_cast<int>(seqs.size());
    for (const auto& s : seqs) {
        if (s.empty()) throw std::invalid_argument("pad_batch: empty sequence");
        b.T = std::max(b.T, static_cast<int>(std::min<size_t>(s.size(), max_seq_len)));
    }
    b.ids.assign(b.T, std::vector<int>(b.B, Vocabulary::kPad));
    b.mask.assign(b.T, Eigen::VectorXd::Zero(b.B));
    for (int i = 0; i < b.B; ++i) {
        const int len = static_cast<int>(std::min<size_t>(seqs[i].size(), max_seq_len));
        for (int t = 0; t < len; ++t) {
            b.ids[t][i] = seqs[i][t];
            b.mask[t](i) = 1.0;
        }
        b.real_positions += len;
    }
    return b;
}

AutoEncoderModel::AutoEncoderModel(const ModelConfig& config, const Vocabulary& vocab)
    : config_(config), vocab_size_(static_cast<int>(vocab.size())), vocab_hash_(vocab.hash()) {
    config_.validate();
    init_params();
}

ad::Param& AutoEncoderModel::add_param(const std::string& name, int rows, int cols) {
    params_.push_back(std::make_unique<ad::Param>(name, Mat::Zero(rows, cols)));
    return *params_.back();
}

ad::Param* AutoEncoderModel::find_param(const std::string& name) const {
    for (const auto& p : params_)
        if (p->name == name) return p.get();
    throw std::logic_error("missing parameter: " + name);
}

void AutoEncoderModel::init_params() {
    const int E = config_.embedding_dim, H = config_.hidden_size, Z = config_.latent_dim;
    const int V = vocab_size_, L = config_.hidden_layers;

    auto uniform_init = [&](ad::Param& p, int fan_in) {
        Rng rng(derive_seed(config_.seed, "init/" + p.name));
        const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < p.value.rows(); ++i)
            for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = rng.uniform(-k, k);
    };
    auto lstm_bias_init = [&](ad::Param& p) {
        // Forget-gate bias starts at 1 so early memory survives; gate order i,f,g,o.
        p.value.setZero();
        p.value.block(0, H, 1, H).setConstant(1.0);
    };

    {
        ad::Param& emb = add_param("emb", V, E);
        Rng rng(derive_seed(config_.seed, "init/emb"));
        for (Eigen::Index i = 0; i < emb.value.rows(); ++i)
            for (Eigen::Index j = 0; j < emb.value.cols(); ++j)
                emb.value(i, j) = rng.normal(0.0, config_.embedding_init_scale);
        emb.value.row(Vocabulary::kPad).setZero();
    }

    for (int l = 0; l < L; ++l) {
        const int in = (l == 0) ? E : 2 * H;
        for (const char* dir : {"f", "b"}) {
            ad::Param& W = add_param("enc.l" + std::to_string(l) + "." + dir + ".W", in + H, 4 * H);
            uniform_init(W, in + H);
            ad::Param& bias = add_param("enc.l" + std::to_string(l) + "." + dir + ".b", 1, 4 * H);
            lstm_bias_init(bias);
        }
    }

    if (config_.variant == Variant::VAE) {
        for (const char* head : {"mu", "logvar"}) {
            ad::Param& W = add_param(std::string(head) + ".W", 2 * H, Z);
            uniform_init(W, 2 * H);
            add_param(std::string(head) + ".b", 1, Z);
        }
    } else {
        ad::Param& W = add_param("lat.W", 2 * H, Z);
        uniform_init(W, 2 * H);
        add_param("lat.b", 1, Z);
    }

    for (int l = 0; l < L; ++l) {
        // First decoder layer sees the previous target token's embedding next
        // to the latent (teacher forcing).
        const int in = (l == 0) ? E + Z : H;
        ad::Param& W = add_param("dec.l" + std::to_string(l) + ".W", in + H, 4 * H);
        uniform_init(W, in + H);
        ad::Param& bias = add_param("dec.l" + std::to_string(l) + ".b", 1, 4 * H);
        lstm_bias_init(bias);
    }
    {
        ad::Param& W = add_param("out.W", H, V);
        uniform_init(W, H);
        add_param("out.b", 1, V);
    }

    if (config_.variant == Variant::AAE) {
        const int Dh = std::max(8, Z);
        ad::Param& W1 = add_param("disc.W1", Z, Dh);
        uniform_init(W1, Z);
        add_param("disc.b1", 1, Dh);
        ad::Param& W2 = add_param("disc.W2", Dh, 1);
        uniform_init(W2, Dh);
        add_param("disc.b2", 1, 1);
    }
}

std::vector<ad::Param*> AutoEncoderModel::encoder_params() {
    std::vector<ad::Param*> out;
    for (const auto& p : params_) {
        const std::string& n = p->name;
        if (n == "emb" || n.rfind("enc.", 0) == 0 || n.rfind("lat.", 0) == 0 ||
            n.rfind("mu.", 0) == 0 || n.rfind("logvar.", 0) == 0)
            out.push_back(p.get());
    }
    return out;
}

std::vector<ad::Param*> AutoEncoderModel::decoder_params() {
    std::vector<ad::Param*> out;
    for (const auto& p : params_)
        if (p->name.rfind("dec.", 0) == 0 || p->name.rfind("out.", 0) == 0) out.push_back(p.get());
    return out;
}

std::vector<ad::Param*> AutoEncoderModel::discriminator_params() {
    std::vector<ad::Param*> out;
    for (const auto& p : params_)
        if (p->name.rfind("disc.", 0) == 0) out.push_back(p.get());
    return out;
}

std::vector<ad::Param*> AutoEncoderModel::all_params() {
    std::vector<ad::Param*> out;
    for (const auto& p : params_) out.push_back(p.get());
    return out;
}

Graph::Ref AutoEncoderModel::dropout_node(Graph& g, Graph::Ref x, bool training, Rng* rng) {
    if (!training || config_.dropout <= 0.0 || rng == nullptr) return x;
    const double p = config_.dropout;
    Mat mask(x->value.rows(), x->value.cols());
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
        for (Eigen::Index j = 0; j < mask.cols(); ++j)
            mask(i, j) = (rng->uniform() >= p) ? 1.0 / (1.0 - p) : 0.0;
    return g.cmul(x, g.constant(std::move(mask)));
}

// Runs one LSTM direction over the timestep inputs; masked steps carry the
// previous state through unchanged. Returns the final state; per-step states
// go to `outputs` when requested.
Graph::Ref AutoEncoderModel::lstm_sequence(Graph& g, const std::vector<Graph::Ref>& inputs,
                                           const std::vector<Eigen::VectorXd>& mask,
                                           const std::string& prefix, bool reverse,
                                           std::vector<Graph::Ref>* outputs) {
    const int T = static_cast<int>(inputs.size());
    const int B = static_cast<int>(inputs[0]->value.rows());
    const int H = config_.hidden_size;
    Graph::Ref W = g.param(*find_param(prefix + ".W"));
    Graph::Ref bias = g.param(*find_param(prefix + ".b"));
    Graph::Ref h = g.constant(Mat::Zero(B, H));
    Graph::Ref c = g.constant(Mat::Zero(B, H));
    if (outputs) outputs->assign(T, nullptr);
    for (int step = 0; step < T; ++step) {
        const int t = reverse ? T - 1 - step : step;
        Graph::Ref zc = g.add_rowvec(g.matmul(g.concat_cols(inputs[t], h), W), bias);
        Graph::Ref gi = g.sigmoid(g.slice_cols(zc, 0, H));
        Graph::Ref gf = g.sigmoid(g.slice_cols(zc, H, H));
        Graph::Ref gg = g.tanh(g.slice_cols(zc, 2 * H, H));
        Graph::Ref go = g.sigmoid(g.slice_cols(zc, 3 * H, H));
        Graph::Ref c_new = g.add(g.cmul(gi, gg), g.cmul(gf, c));
        Graph::Ref h_new = g.cmul(go, g.tanh(c_new));
        c = g.mix_rows(c_new, c, mask[t]);
        h = g.mix_rows(h_new, h, mask[t]);
        if (outputs) (*outputs)[t] = h;
    }
    return h;
}

Graph::Ref AutoEncoderModel::encode_graph(Graph& g, const PaddedBatch& in, bool training,
                                          Rng* dropout_rng, Graph::Ref* mu_out,
                                          Graph::Ref* logvar_out) {
    Graph::Ref emb = g.param(*find_param("emb"));
    std::vector<Graph::Ref> layer_in(in.T);
    for (int t = 0; t < in.T; ++t) layer_in[t] = g.gather_rows(emb, in.ids[t]);

    Graph::Ref final_f = nullptr;
    Graph::Ref final_b = nullptr;
    for (int l = 0; l < config_.hidden_layers; ++l) {
        const std::string base = "enc.l" + std::to_string(l);
        std::vector<Graph::Ref> out_f, out_b;
        final_f = lstm_sequence(g, layer_in, in.mask, base + ".f", false, &out_f);
        final_b = lstm_sequence(g, layer_in, in.mask, base + ".b", true, &out_b);
        if (l + 1 < config_.hidden_layers) {
            for (int t = 0; t < in.T; ++t)
                layer_in[t] = dropout_node(g, g.concat_cols(out_f[t], out_b[t]), training, dropout_rng);
        }
    }
    Graph::Ref both = g.concat_cols(final_f, final_b);

    if (config_.variant == Variant::VAE) {
        Graph::Ref mu =
            g.add_rowvec(g.matmul(both, g.param(*find_param("mu.W"))), g.param(*find_param("mu.b")));
        Graph::Ref logvar = g.add_rowvec(g.matmul(both, g.param(*find_param("logvar.W"))),
                                         g.param(*find_param("logvar.b")));
        if (mu_out) *mu_out = mu;
        if (logvar_out) *logvar_out = logvar;
        return mu;
    }
    if (mu_out) *mu_out = nullptr;
    if (logvar_out) *logvar_out = nullptr;
    return g.add_rowvec(g.matmul(both, g.param(*find_param("lat.W"))), g.param(*find_param("lat.b")));
}

Graph::Ref AutoEncoderModel::decode_loss_graph(Graph& g, Graph::Ref latent, const PaddedBatch& target,
                                               bool training, Rng* dropout_rng) {
    // Teacher forcing: step t sees the previous target token's embedding next
    // to the latent, which is fed at every timestep. BLANK stands in as the
    // start-of-sequence token so PAD's zero row stays untouched.
    Graph::Ref emb = g.param(*find_param("emb"));
    std::vector<Graph::Ref> layer_in(target.T);
    const std::vector<int> bos(static_cast<size_t>(target.B), Vocabulary::kBlank);
    for (int t = 0; t < target.T; ++t) {
        const std::vector<int>& prev = (t == 0) ? bos : target.ids[t - 1];
        layer_in[t] = g.concat_cols(g.gather_rows(emb, prev), latent);
    }
    for (int l = 0; l < config_.hidden_layers; ++l) {
        std::vector<Graph::Ref> outs;
        lstm_sequence(g, layer_in, target.mask, "dec.l" + std::to_string(l), false, &outs);
        for (int t = 0; t < target.T; ++t)
            layer_in[t] =
                (l + 1 < config_.hidden_layers) ? dropout_node(g, outs[t], training, dropout_rng) : outs[t];
    }
    Graph::Ref outW = g.param(*find_param("out.W"));
    Graph::Ref outB = g.param(*find_param("out.b"));
    Graph::Ref total = nullptr;
    for (int t = 0; t < target.T; ++t) {
        Graph::Ref logits = g.add_rowvec(g.matmul(layer_in[t], outW), outB);
        Graph::Ref bce = g.bce_sigmoid_onehot(logits, target.ids[t], target.mask[t], kProbEps);
        total = total ? g.add(total, bce) : bce;
    }
    // Mean per position and vocabulary dimension, padding excluded.
    return g.affine(total, 1.0 / (target.real_positions * vocab_size_), 0.0);
}

Graph::Ref AutoEncoderModel::discriminator_graph(Graph& g, Graph::Ref z, bool trainable) {
    if (config_.variant != Variant::AAE) throw std::logic_error("discriminator requires variant aae");
    auto weight = [&](const char* name) -> Graph::Ref {
        ad::Param* p = find_param(name);
        return trainable ? g.param(*p) : g.constant(p->value);
    };
    Graph::Ref h = g.tanh(g.add_rowvec(g.matmul(z, weight("disc.W1")), weight("disc.b1")));
    return g.sigmoid(g.add_rowvec(g.matmul(h, weight("disc.W2")), weight("disc.b2")));
}

Graph::Ref AutoEncoderModel::kl_graph(Graph& g, Graph::Ref mu, Graph::Ref logvar) {
    const double B = static_cast<double>(mu->value.rows());
    // 1 + log sigma^2 - mu^2 - sigma^2, with the literal-form flag swapping in
    // log sigma = logvar/2.
    const double log_coeff = config_.kl_literal_log_sigma ? 0.5 : 1.0;
    Graph::Ref inner =
        g.sub(g.sub(g.affine(logvar, log_coeff, 1.0), g.cmul(mu, mu)), g.exp(logvar));
    return g.affine(g.sum_all(inner), -0.5 / B, 0.0);
}

Eigen::MatrixXd AutoEncoderModel::encode_batch(const std::vector<std::vector<int>>& seqs) const {
    if (seqs.empty()) throw std::invalid_argument("encode: empty batch");
    for (const auto& s : seqs)
        if (s.empty()) throw std::invalid_argument("encode: empty sequence");
    auto* self = const_cast<AutoEncoderModel*>(this);  // graphs read parameters; grads disabled
    Graph g(false);
    PaddedBatch batch = pad_batch(seqs, config_.max_seq_len);
    Graph::Ref latent = self->encode_graph(g, batch, false, nullptr);
    return latent->value;
}

Eigen::VectorXd AutoEncoderModel::encode(const std::vector<int>& token_ids) const {
    return encode_batch({token_ids}).row(0).transpose();
}

double AutoEncoderModel::document_loss(const std::vector<int>& token_ids) const {
    if (token_ids.empty()) throw std::invalid_argument("document_loss: empty sequence");
    auto* self = const_cast<AutoEncoderModel*>(this);
    Graph g(false);
    PaddedBatch batch = pad_batch({token_ids}, config_.max_seq_len);
    Graph::Ref latent = self->encode_graph(g, batch, false, nullptr);
    Graph::Ref loss = self->decode_loss_graph(g, latent, batch, false, nullptr);
    return loss->value(0, 0);
}

AaeLosses AutoEncoderModel::aae_losses(const std::vector<std::vector<int>>& batch,
                                       std::uint64_t sample_seed) const {
    if (config_.variant != Variant::AAE) throw std::logic_error("aae_losses requires variant aae");
    if (batch.empty()) throw std::invalid_argument("aae_losses: empty batch");
    auto* self = const_cast<AutoEncoderModel*>(this);
    Graph g(false);
    PaddedBatch padded = pad_batch(batch, config_.max_seq_len);
    Graph::Ref latent = self->encode_graph(g, padded, false, nullptr);
    Graph::Ref recon = self->decode_loss_graph(g, latent, padded, false, nullptr);

    Rng rng(derive_seed(sample_seed, "aae/prior"));
    Mat prior(latent->value.rows(), latent->value.cols());
    for (Eigen::Index i = 0; i < prior.rows(); ++i)
        for (Eigen::Index j = 0; j < prior.cols(); ++j) prior(i, j) = rng.normal();
    Graph::Ref d_prior = self->discriminator_graph(g, g.constant(std::move(prior)), false);
    Graph::Ref d_enc = self->discriminator_graph(g, latent, false);

    AaeLosses out;
    out.reconstruction = recon->value(0, 0);
    out.discriminator = aae_discriminator_loss(d_prior->value.col(0), d_enc->value.col(0));
    out.generator = aae_generator_loss(d_enc->value.col(0));
    return out;
}

// Adaptive-moment gradient step; per-parameter state, bias-corrected.
class Trainer {
public:
    explicit Trainer(double lr) : lr_(lr) {}

    void step(const std::vector<ad::Param*>& params) {
        for (ad::Param* p : params) {
            State& s = state_[p];
            if (s.m.size() == 0) {
                s.m = Mat::Zero(p->value.rows(), p->value.cols());
                s.v = Mat::Zero(p->value.rows(), p->value.cols());
            }
            s.t += 1;
            s.m = 0.9 * s.m + 0.1 * p->grad;
            s.v = 0.999 * s.v.array() + 0.001 * p->grad.array().square();
            const double bc1 = 1.0 - std::pow(0.9, s.t);
            const double bc2 = 1.0 - std::pow(0.999, s.t);
            p->value.array() -=
                lr_ * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + 1e-8);
            p->grad.setZero();
        }
    }

private:
    struct State {
        Mat m, v;
        long t = 0;
    };
    double lr_;
    std::unordered_map<ad::Param*, State> state_;
};

const std::vector<EpochStats>& AutoEncoderModel::train(
    const std::vector<std::vector<int>>& train_seqs, const std::vector<std::vector<int>>& val_seqs) {
    if (train_seqs.empty()) throw std::invalid_argument("empty training set");
    for (const auto& s : train_seqs)
        if (s.empty()) throw std::invalid_argument("train: empty sequence");

    Trainer opt(config_.learning_rate);
    const size_t N = train_seqs.size();
    const size_t bs = static_cast<size_t>(config_.batch_size);
    const bool denoising = config_.variant == Variant::DAE || config_.variant == Variant::SDAE;

    // Start the output bias at the corpus log-odds. Without this the fastest
    // descent direction for the base token rate runs through the recurrent
    // stack, which saturates it into a constant channel and erases the
    // document dependence the latent space exists to carry.
    if (config_.output_bias_prior && history_.empty()) {
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(vocab_size_);
        double positions = 0.0;
        for (const auto& s : train_seqs) {
            const size_t len = std::min<size_t>(s.size(), static_cast<size_t>(config_.max_seq_len));
            for (size_t t = 0; t < len; ++t) counts(s[t]) += 1.0;
            positions += static_cast<double>(len);
        }
        Eigen::MatrixXd& out_b = find_param("out.b")->value;
        for (int j = 0; j < vocab_size_; ++j) {
            const double p = std::clamp(counts(j) / positions, 1e-6, 1.0 - 1e-6);
            out_b(0, j) = std::log(p / (1.0 - p));
        }
    }

    auto validation_loss = [&]() -> double {
        if (val_seqs.empty()) return 0.0;
        double weighted = 0.0, positions = 0.0;
        for (size_t start = 0; start < val_seqs.size(); start += bs) {
            std::vector<std::vector<int>> chunk(
                val_seqs.begin() + start,
                val_seqs.begin() + std::min(val_seqs.size(), start + bs));
            Graph g(false);
            PaddedBatch padded = pad_batch(chunk, config_.max_seq_len);
            Graph::Ref latent = encode_graph(g, padded, false, nullptr);
            Graph::Ref loss = decode_loss_graph(g, latent, padded, false, nullptr);
            weighted += loss->value(0, 0) * padded.real_positions;
            positions += padded.real_positions;
        }
        return weighted / positions;
    };

    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        const std::string etag = "epoch/" + std::to_string(epoch);
        std::vector<size_t> order(N);
        std::iota(order.begin(), order.end(), 0);
        {
            Rng shuffle_rng(derive_seed(config_.seed, etag + "/order"));
            shuffle_rng.shuffle(order);
        }

        EpochStats stats;
        size_t batches = 0;
        for (size_t start = 0; start < N; start += bs, ++batches) {
            const std::string btag = etag + "/batch/" + std::to_string(batches);
            std::vector<std::vector<int>> clean;
            clean.reserve(bs);
            for (size_t i = start; i < std::min(N, start + bs); ++i)
                clean.push_back(train_seqs[order[i]]);
            PaddedBatch target = pad_batch(clean, config_.max_seq_len);

            Rng drop_rng(derive_seed(config_.seed, btag + "/drop"));

            if (config_.variant == Variant::VAE) {
                Graph g;
                Graph::Ref mu = nullptr, logvar = nullptr;
                encode_graph(g, target, true, &drop_rng, &mu, &logvar);
                Rng eps_rng(derive_seed(config_.seed, btag + "/eps"));
                Mat eps(mu->value.rows(), mu->value.cols());
                for (Eigen::Index i = 0; i < eps.rows(); ++i)
                    for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = eps_rng.normal();
                Graph::Ref z =
                    g.add(mu, g.cmul(g.exp(g.affine(logvar, 0.5, 0.0)), g.constant(std::move(eps))));
                Graph::Ref recon = decode_loss_graph(g, z, target, true, &drop_rng);
                Graph::Ref kl = kl_graph(g, mu, logvar);
                Graph::Ref total = g.add(recon, kl);
                g.backward(total);
                opt.step(all_params());
                stats.recon += recon->value(0, 0);
                stats.kl += kl->value(0, 0);
                stats.total += total->value(0, 0);
            } else if (config_.variant == Variant::AAE) {
                // Encoder/decoder reconstruction step.
                double recon_value;
                {
                    Graph g;
                    Graph::Ref latent = encode_graph(g, target, true, &drop_rng);
                    Graph::Ref recon = decode_loss_graph(g, latent, target, true, &drop_rng);
                    g.backward(recon);
                    recon_value = recon->value(0, 0);
                    auto enc = encoder_params();
                    auto dec = decoder_params();
                    enc.insert(enc.end(), dec.begin(), dec.end());
                    opt.step(enc);
                }
                // Discriminator step against a fresh prior sample; encoder
                // outputs enter as constants.
                double disc_value;
                {
                    Graph g;
                    Graph::Ref latents = g.constant(encode_batch(clean));
                    Rng prior_rng(derive_seed(config_.seed, btag + "/prior"));
                    Mat prior(latents->value.rows(), latents->value.cols());
                    for (Eigen::Index i = 0; i < prior.rows(); ++i)
                        for (Eigen::Index j = 0; j < prior.cols(); ++j) prior(i, j) = prior_rng.normal();
                    Graph::Ref d_prior =
                        g.clamp(discriminator_graph(g, g.constant(std::move(prior)), true), kProbEps,
                                1.0 - kProbEps);
                    Graph::Ref d_enc = g.clamp(discriminator_graph(g, latents, true), kProbEps,
                                               1.0 - kProbEps);
                    Graph::Ref loss =
                        g.sub(g.affine(g.mean_all(g.log(d_prior)), -1.0, 0.0),
                              g.mean_all(g.log(g.affine(d_enc, -1.0, 1.0))));
                    g.backward(loss);
                    disc_value = loss->value(0, 0);
                    opt.step(discriminator_params());
                }
                // Generator step: encoder fooled discriminator, weights frozen.
                double gen_value;
                {
                    Graph g;
                    Graph::Ref latent = encode_graph(g, target, true, &drop_rng);
                    Graph::Ref d_enc =
                        g.clamp(discriminator_graph(g, latent, false), kProbEps, 1.0 - kProbEps);
                    Graph::Ref loss = g.affine(g.mean_all(g.log(d_enc)), -1.0, 0.0);
                    g.backward(loss);
                    gen_value = loss->value(0, 0);
                    opt.step(encoder_params());
                }
                stats.recon += recon_value;
                stats.disc += disc_value;
                stats.gen += gen_value;
                stats.total += recon_value;
            } else {
                PaddedBatch input = target;
                if (denoising) {
                    Rng noise_rng(derive_seed(config_.seed, btag + "/noise"));
                    std::vector<std::vector<int>> noisy;
                    noisy.reserve(clean.size());
                    for (const auto& s : clean)
                        noisy.push_back(apply_noise(s, config_.noise, noise_rng, vocab_size_));
                    input = pad_batch(noisy, config_.max_seq_len);
                }
                Graph g;
                Graph::Ref latent = encode_graph(g, input, true, &drop_rng);
                Graph::Ref recon = decode_loss_graph(g, latent, target, true, &drop_rng);
                g.backward(recon);
                auto enc = encoder_params();
                auto dec = decoder_params();
                enc.insert(enc.end(), dec.begin(), dec.end());
                opt.step(enc);
                stats.recon += recon->value(0, 0);
                stats.total += recon->value(0, 0);
            }
        }

        const double inv = 1.0 / static_cast<double>(batches);
        stats.total *= inv;
        stats.recon *= inv;
        stats.kl *= inv;
        stats.disc *= inv;
        stats.gen *= inv;
        stats.val_recon = validation_loss();
        history_.push_back(stats);
    }
    return history_;
}

double reconstruction_error_rate(const AutoEncoderModel& model,
                                 const std::vector<std::vector<int>>& docs) {
    if (docs.empty()) throw std::invalid_argument("reconstruction_error_rate: empty docs");
    double total = 0.0;
    for (const auto& d : docs) total += model.document_loss(d);
    return 100.0 * total / static_cast<double>(docs.size());
}

namespace {

json noise_to_json(const NoiseSpec& n) {
    return json{{"shuffle_window", n.shuffle_window},
                {"delete_prob", n.delete_prob},
                {"blank_prob", n.blank_prob},
                {"replace_prob", n.replace_prob}};
}

NoiseSpec noise_from_json(const json& j, NoiseSpec base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "shuffle_window") base.shuffle_window = value.get<int>();
        else if (key == "delete_prob") base.delete_prob = value.get<double>();
        else if (key == "blank_prob") base.blank_prob = value.get<double>();
        else if (key == "replace_prob") base.replace_prob = value.get<double>();
        else throw std::invalid_argument("unknown noise key: " + key);
    }
    return base;
}

json config_to_json(const ModelConfig& c) {
    return json{{"variant", variant_name(c.variant)},
                {"latent_dim", c.latent_dim},
                {"embedding_dim", c.embedding_dim},
                {"hidden_layers", c.hidden_layers},
                {"hidden_size", c.hidden_size},
                {"dropout", c.dropout},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"epochs", c.epochs},
                {"max_seq_len", c.max_seq_len},
                {"seed", c.seed},
                {"noise", noise_to_json(c.noise)},
                {"kl_literal_log_sigma", c.kl_literal_log_sigma},
                {"embedding_init_scale", c.embedding_init_scale},
                {"output_bias_prior", c.output_bias_prior}};
}

ModelConfig config_from_json(const json& j, ModelConfig base) {
    for (const auto& [key, value] : j.items()) {
        if (key == "variant") base.variant = parse_variant(value.get<std::string>());
        else if (key == "latent_dim") base.latent_dim = value.get<int>();
        else if (key == "embedding_dim") base.embedding_dim = value.get<int>();
        else if (key == "hidden_layers") base.hidden_layers = value.get<int>();
        else if (key == "hidden_size") base.hidden_size = value.get<int>();
        else if (key == "dropout") base.dropout = value.get<double>();
        else if (key == "batch_size") base.batch_size = value.get<int>();
        else if (key == "learning_rate") base.learning_rate = value.get<double>();
        else if (key == "epochs") base.epochs = value.get<int>();
        else if (key == "max_seq_len") base.max_seq_len = value.get<int>();
        else if (key == "seed") base.seed = value.get<std::uint64_t>();
        else if (key == "noise") base.noise = noise_from_json(value, base.noise);
        else if (key == "kl_literal_log_sigma") base.kl_literal_log_sigma = value.get<bool>();
        else if (key == "embedding_init_scale") base.embedding_init_scale = value.get<double>();
        else if (key == "output_bias_prior") base.output_bias_prior = value.get<bool>();
        else throw std::invalid_argument("unknown config key: " + key);
    }
    base.validate();
    return base;
}

}  // namespace

ModelConfig model_config_from_json_text(const std::string& json_text, ModelConfig base) {
    json j = json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("model config must be a JSON object");
    return config_from_json(j, base);
}

std::string model_config_to_json_text(const ModelConfig& config) {
    return config_to_json(config).dump(2);
}

void AutoEncoderModel::save(const std::string& path) const {
    json header;
    header["config"] = config_to_json(config_);
    header["vocab_hash"] = std::to_string(vocab_hash_);
    header["vocab_size"] = vocab_size_;
    json hist = json::array();
    for (const EpochStats& e : history_)
        hist.push_back(json{{"total", e.total},
                            {"recon", e.recon},
                            {"kl", e.kl},
                            {"disc", e.disc},
                            {"gen", e.gen},
                            {"val_recon", e.val_recon}});
    header["history"] = std::move(hist);
    json plist = json::array();
    for (const auto& p : params_)
        plist.push_back(json{{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
    header["params"] = std::move(plist);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const std::string head = header.dump();
    out.write(kCkptMagic, sizeof(kCkptMagic));
    const std::uint32_t version = kCkptVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t len = head.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& p : params_)
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(sizeof(double) * p->value.size()));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

AutoEncoderModel AutoEncoderModel::load(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != kCkptVersion) throw std::runtime_error("unsupported checkpoint version");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string head(len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
    json header = json::parse(head);

    const std::uint64_t stored_hash = std::stoull(header.at("vocab_hash").get<std::string>());
    if (stored_hash != vocab.hash())
        throw std::runtime_error("vocabulary hash mismatch: checkpoint was trained on a different vocabulary");

    ModelConfig config = config_from_json(header.at("config"), ModelConfig{});
    AutoEncoderModel model(config, vocab);
    if (header.at("vocab_size").get<int>() != model.vocab_size_)
        throw std::runtime_error("vocabulary size mismatch in checkpoint");

    const json& plist = header.at("params");
    if (plist.size() != model.params_.size())
        throw std::runtime_error("checkpoint parameter list mismatch");
    for (size_t i = 0; i < model.params_.size(); ++i) {
        ad::Param& p = *model.params_[i];
        const json& meta = plist[i];
        if (meta.at("name").get<std::string>() != p.name ||
            meta.at("rows").get<Eigen::Index>() != p.value.rows() ||
            meta.at("cols").get<Eigen::Index>() != p.value.cols())
            throw std::runtime_error("checkpoint parameter mismatch at " + p.name);
        in.read(reinterpret_cast<char*>(p.value.data()),
                static_cast<std::streamsize>(sizeof(double) * p.value.size()));
    }
    if (!in) throw std::runtime_error("truncated checkpoint data: " + path);

    model.history_.clear();
    for (const json& e : header.at("history")) {
        EpochStats s;
        s.total = e.at("total").get<double>();
        s.recon = e.at("recon").get<double>();
        s.kl = e.at("kl").get<double>();
        s.disc = e.at("disc").get<double>();
        s.gen = e.at("gen").get<double>();
        s.val_recon = e.at("val_recon").get<double>();
        model.history_.push_back(s);
    }
    return model;
}

}  // namespace c3
