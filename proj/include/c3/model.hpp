#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "c3/autodiff.hpp"
#include "c3/rng.hpp"
#include "c3/vocab.hpp"

namespace c3 {

enum class Variant { SAE, DAE, SDAE, VAE, AAE };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);  // case-insensitive; throws on unknown

// Token-level corruption for the denoising variants. Probabilities are per token.
struct NoiseSpec {
    int shuffle_window = 3;
    double delete_prob = 0.1;
    double blank_prob = 0.1;
    double replace_prob = 0.1;
};

struct ModelConfig {
    Variant variant = Variant::SAE;
    int latent_dim = 64;
    int embedding_dim = 128;
    int hidden_layers = 2;
    int hidden_size = 128;  // per direction
    double dropout = 0.5;
    int batch_size = 256;
    double learning_rate = 0.0005;
    int epochs = 50;
    int max_seq_len = 64;
    std::uint64_t seed = 0;
    NoiseSpec noise;
    // Eq. 5 as printed uses log(sigma); the standard closed form uses log(sigma^2).
    bool kl_literal_log_sigma = false;
    double embedding_init_scale = 0.08;
    // Start the decoder output bias at the training corpus log-odds so the
    // base token rate costs nothing to learn and gradients target content.
    bool output_bias_prior = true;

    void validate() const;  // throws std::invalid_argument
};

// Applies, in order: local shuffle (each token moves at most shuffle_window
// positions), per-token deletion, BLANK substitution, and replacement by a
// random non-reserved vocab id. A fully deleted sequence becomes [BLANK].
std::vector<int> apply_noise(const std::vector<int>& token_ids, const NoiseSpec& spec, Rng& rng,
                             int vocab_size);

// Mean binary cross-entropy over all positions/dimensions between a 0/1
// target matrix and predicted probabilities clamped to [1e-7, 1-1e-7].
double reconstruction_loss(const Eigen::MatrixXd& target_one_hot, const Eigen::MatrixXd& predicted);

// -1/2 sum(1 + log sigma^2 - mu^2 - sigma^2) over dimensions; sigma is the
// standard deviation. literal_log_sigma swaps in the paper's log(sigma).
double kl_divergence(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                     bool literal_log_sigma = false);

// Adversarial objectives over discriminator outputs in (0,1):
// mean(-log d_prior) + mean(-log(1 - d_encoded)), and mean(-log d_encoded).
double aae_discriminator_loss(const Eigen::VectorXd& d_prior, const Eigen::VectorXd& d_encoded);
double aae_generator_loss(const Eigen::VectorXd& d_encoded);

struct EpochStats {
    double total = 0;      // training objective
    double recon = 0;      // reconstruction component
    double kl = 0;         // VAE only
    double disc = 0;       // AAE only
    double gen = 0;        // AAE only
    double val_recon = 0;  // reconstruction loss on the validation set
};

struct AaeLosses {
    double reconstruction = 0;
    double discriminator = 0;
    double generator = 0;
};

// Token-id sequences padded to a common length, stored per timestep.
struct PaddedBatch {
    int T = 0;
    int B = 0;
    std::vector<std::vector<int>> ids;  // [T], each of length B
    std::vector<Eigen::VectorXd> mask;  // [T], 1 for real tokens, 0 for padding
    double real_positions = 0;
};
PaddedBatch pad_batch(const std::vector<std::vector<int>>& seqs, int max_seq_len);

class AutoEncoderModel {
public:
    AutoEncoderModel(const ModelConfig& config, const Vocabulary& vocab);

    const ModelConfig& config() const { return config_; }
    int vocab_size() const { return vocab_size_; }
    std::uint64_t vocab_hash() const { return vocab_hash_; }
    const std::vector<EpochStats>& history() const { return history_; }

    // Latent vector for one sequence; VAE returns the mu head output.
    Eigen::VectorXd encode(const std::vector<int>& token_ids) const;
    Eigen::MatrixXd encode_batch(const std::vector<std::vector<int>>& seqs) const;  // one row each

    // Clean-input reconstruction loss of one document (mean BCE per entry).
    double document_loss(const std::vector<int>& token_ids) const;

    // Forward-only AAE losses on a batch; the seed drives the prior sample.
    // Errors unless variant = AAE.
    AaeLosses aae_losses(const std::vector<std::vector<int>>& batch, std::uint64_t sample_seed) const;

    // Trains in place per the variant objective; appends to history and
    // returns it. Deterministic for a given config.seed.
    const std::vector<EpochStats>& train(const std::vector<std::vector<int>>& train_seqs,
                                         const std::vector<std::vector<int>>& val_seqs);

    void save(const std::string& path) const;
    static AutoEncoderModel load(const std::string& path, const Vocabulary& vocab);

    // Graph builders, exposed for the trainer and for finite-difference checks.
    // Returns the latent node (B x latent_dim); for VAE the latent is the mu
    // head and mu/logvar nodes are written through the out-parameters.
    ad::Graph::Ref encode_graph(ad::Graph& g, const PaddedBatch& in, bool training, Rng* dropout_rng,
                                ad::Graph::Ref* mu_out = nullptr,
                                ad::Graph::Ref* logvar_out = nullptr);
    // Mean masked BCE of decoding `latent` against `target`.
    ad::Graph::Ref decode_loss_graph(ad::Graph& g, ad::Graph::Ref latent, const PaddedBatch& target,
                                     bool training, Rng* dropout_rng);
    // Discriminator probability column (rows x 1), logistic output. With
    // trainable=false the discriminator weights enter as constants.
    ad::Graph::Ref discriminator_graph(ad::Graph& g, ad::Graph::Ref z, bool trainable);
    // -1/2 mean over batch rows of sum(1 + log sigma^2 - mu^2 - sigma^2).
    ad::Graph::Ref kl_graph(ad::Graph& g, ad::Graph::Ref mu, ad::Graph::Ref logvar);

    std::vector<ad::Param*> encoder_params();  // embedding + recurrent + latent heads
    std::vector<ad::Param*> decoder_params();
    std::vector<ad::Param*> discriminator_params();
    std::vector<ad::Param*> all_params();

private:
    friend class Trainer;

    ad::Param& add_param(const std::string& name, int rows, int cols);
    ad::Param* find_param(const std::string& name) const;
    void init_params();
    ad::Graph::Ref lstm_sequence(ad::Graph& g, const std::vector<ad::Graph::Ref>& inputs,
                                 const std::vector<Eigen::VectorXd>& mask, const std::string& prefix,
                                 bool reverse, std::vector<ad::Graph::Ref>* outputs);
    ad::Graph::Ref dropout_node(ad::Graph& g, ad::Graph::Ref x, bool training, Rng* rng);

    ModelConfig config_;
    int vocab_size_ = 0;
    std::uint64_t vocab_hash_ = 0;
    std::vector<std::unique_ptr<ad::Param>> params_;
    std::vector<EpochStats> history_;
};

// Percentage form of the mean per-document reconstruction loss; errors on empty docs.
double reconstruction_error_rate(const AutoEncoderModel& model,
                                 const std::vector<std::vector<int>>& docs);

// JSON bridge for config files and checkpoints. Keys mirror the field names;
// unknown keys are an error. Parsing overlays the given base.
ModelConfig model_config_from_json_text(const std::string& json_text, ModelConfig base = {});
std::string model_config_to_json_text(const ModelConfig& config);

}  // namespace c3
