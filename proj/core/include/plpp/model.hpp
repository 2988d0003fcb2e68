#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plpp/autodiff.hpp"
#include "plpp/matrix.hpp"

namespace plpp::model {

struct ModelConfig {
    std::size_t vocab_size = 256;
    std::size_t embed_dim = 32;
    std::size_t encoder_layers = 2;
    std::size_t attention_heads = 2;
    std::size_t joint_dim = 16;
    std::size_t prompt_len = 4;
    std::uint64_t seed = 0;

    std::size_t sequence_len() const { return prompt_len + 2; }
    std::size_t eot_token() const { return vocab_size - 1; }
    void validate() const;  // throws ParameterError
    bool operator==(const ModelConfig&) const = default;
};

// Frozen token embedding table E; also the tied LM-head weight.
struct VocabEmbedding {
    Matrix table;  // vocab_size x d
};

// The M learnable prompt vectors; the only trainable parameter.
struct PromptContext {
    Matrix v;  // M x d
};

struct EncoderLayer {
    Matrix wq, wk, wv, wo;  // d x d
    Matrix wff1;            // d x 4d
    Matrix wff2;            // 4d x d
    std::vector<double> ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
};

// Frozen causal mini transformer plus the joint-space projection.
struct TextEncoderState {
    std::vector<EncoderLayer> layers;
    std::vector<double> final_ln_gamma, final_ln_beta;
    Matrix positional;  // sequence_len x d
    Matrix proj;        // d x joint_dim
};

struct ClassSpec {
    std::size_t class_id = 0;
    std::size_t class_token = 0;
    std::string name;
};

// Precomputed unit-norm image features with labels.
struct ImageFeatureBank {
    Matrix features;  // n_images x joint_dim
    std::vector<std::size_t> labels;
};

struct Model {
    ModelConfig config;
    VocabEmbedding embedding;
    TextEncoderState encoder;
};

Model init_model(const ModelConfig& config);

// LM-head weight, materialized as E^T (tied; recomputed, never trained).
Matrix lm_head_weight(const Model& m);

// [v_1..v_M, E[class_token], E[eot]] as a graph node; prompt may be a
// parameter (training) or a constant (evaluation).
ad::Var build_prompt_sequence(const Model& m, const ad::Var& prompt, const ClassSpec& cls);

struct TextEncoding {
    ad::Var hidden;   // (M+2) x d final-layer states
    ad::Var feature;  // 1 x joint_dim, L2-normalized, taken at the eot position
};

TextEncoding encode_text(const Model& m, const ad::Var& seq);

// hidden rows 0..M-1 times E^T, no bias.
ad::Var lm_head_logits(const Model& m, const ad::Var& hidden);

// Value-only text feature for a prompt matrix (no gradients).
Matrix text_feature_values(const Model& m, const Matrix& prompt_v,
                           const std::vector<ClassSpec>& classes);  // K x joint_dim

}  // namespace plpp::model
