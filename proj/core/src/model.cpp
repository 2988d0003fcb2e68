#include "plpp/model.hpp"

#include <cmath>
#include <random>

#include "plpp/errors.hpp"

namespace plpp::model {

void ModelConfig::validate() const {
    if (vocab_size < 1 || embed_dim < 1 || encoder_layers < 1 || attention_heads < 1 ||
        joint_dim < 1 || prompt_len < 1) {
        throw ParameterError("ModelConfig: all counts must be >= 1");
    }
    if (embed_dim % attention_heads != 0) {
        throw ParameterError("ModelConfig: embed_dim must be divisible by attention_heads");
    }
    if (vocab_size < prompt_len + 2) {
        throw ParameterError("ModelConfig: vocab_size must be >= prompt_len + 2");
    }
}

namespace {

Matrix draw_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (double& x : m.values()) x = dist(rng);
    return m;
}

}  // namespace

Model init_model(const ModelConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    Model m;
    m.config = config;
    const std::size_t d = config.embed_dim;
    const double w_std = 1.0 / std::sqrt(static_cast<double>(d));

    m.embedding.table = draw_matrix(rng, config.vocab_size, d, 0.02);

    for (std::size_t l = 0; l < config.encoder_layers; ++l) {
        EncoderLayer layer;
        layer.wq = draw_matrix(rng, d, d, w_std);
        layer.wk = draw_matrix(rng, d, d, w_std);
        layer.wv = draw_matrix(rng, d, d, w_std);
        layer.wo = draw_matrix(rng, d, d, w_std);
        layer.wff1 = draw_matrix(rng, d, 4 * d, w_std);
        layer.wff2 = draw_matrix(rng, 4 * d, d, w_std);
        layer.ln1_gamma.assign(d, 1.0);
        layer.ln1_beta.assign(d, 0.0);
        layer.ln2_gamma.assign(d, 1.0);
        layer.ln2_beta.assign(d, 0.0);
        m.encoder.layers.push_back(std::move(layer));
    }
    m.encoder.final_ln_gamma.assign(d, 1.0);
    m.encoder.final_ln_beta.assign(d, 0.0);
    m.encoder.positional = draw_matrix(rng, config.sequence_len(), d, 0.02);
    m.encoder.proj = draw_matrix(rng, d, config.joint_dim, w_std);
    return m;
}

Matrix lm_head_weight(const Model& m) {
    return m.embedding.table.transposed();
}

ad::Var build_prompt_sequence(const Model& m, const ad::Var& prompt, const ClassSpec& cls) {
    const auto& cfg = m.config;
    if (cls.class_token >= cfg.vocab_size) {
        throw ParameterError("build_prompt_sequence: class token out of range");
    }
    if (cls.class_token == cfg.eot_token()) {
        throw ParameterError("build_prompt_sequence: class token collides with eot");
    }
    if (prompt->value.rows() != cfg.prompt_len || prompt->value.cols() != cfg.embed_dim) {
        throw DimensionError("build_prompt_sequence: prompt shape mismatch");
    }
    Matrix cls_row(1, cfg.embed_dim);
    Matrix eot_row(1, cfg.embed_dim);
    for (std::size_t c = 0; c < cfg.embed_dim; ++c) {
        cls_row.at(0, c) = m.embedding.table.at(cls.class_token, c);
        eot_row.at(0, c) = m.embedding.table.at(cfg.eot_token(), c);
    }
    return ad::concat_rows({prompt, ad::constant(std::move(cls_row)),
                            ad::constant(std::move(eot_row))});
}

namespace {

ad::Var attention_block(const Model& m, const EncoderLayer& layer, const ad::Var& x) {
    const std::size_t heads = m.config.attention_heads;
    const std::size_t dh = m.config.embed_dim / heads;
    ad::Var q = ad::matmul(x, ad::constant(layer.wq));
    ad::Var k = ad::matmul(x, ad::constant(layer.wk));
    ad::Var v = ad::matmul(x, ad::constant(layer.wv));
    std::vector<ad::Var> head_outputs;
    head_outputs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        ad::Var qh = ad::slice_cols(q, h * dh, dh);
        ad::Var kh = ad::slice_cols(k, h * dh, dh);
        ad::Var vh = ad::slice_cols(v, h * dh, dh);
        ad::Var scores = ad::scale(ad::matmul(qh, ad::transpose(kh)),
                                   1.0 / std::sqrt(static_cast<double>(dh)));
        ad::Var attn = ad::row_softmax(scores, 1.0, /*causal=*/true);
        head_outputs.push_back(ad::matmul(attn, vh));
    }
    return ad::matmul(ad::concat_cols(head_outputs), ad::constant(layer.wo));
}

}  // namespace

TextEncoding encode_text(const Model& m, const ad::Var& seq) {
    const auto& cfg = m.config;
    if (seq->value.rows() != cfg.sequence_len() || seq->value.cols() != cfg.embed_dim) {
        throw DimensionError("encode_text: sequence shape mismatch");
    }
    ad::Var x = ad::add(seq, ad::constant(m.encoder.positional));
    for (const auto& layer : m.encoder.layers) {
        // pre-LN residual blocks
        ad::Var h = ad::layer_norm(x, layer.ln1_gamma, layer.ln1_beta);
        x = ad::add(x, attention_block(m, layer, h));
        ad::Var h2 = ad::layer_norm(x, layer.ln2_gamma, layer.ln2_beta);
        ad::Var ff = ad::matmul(ad::gelu(ad::matmul(h2, ad::constant(layer.wff1))),
                                ad::constant(layer.wff2));
        x = ad::add(x, ff);
    }
    ad::Var hidden = ad::layer_norm(x, m.encoder.final_ln_gamma, m.encoder.final_ln_beta);
    ad::Var eot_state = ad::slice_rows(hidden, cfg.sequence_len() - 1, 1);
    ad::Var feature = ad::row_l2_normalize(ad::matmul(eot_state, ad::constant(m.encoder.proj)));
    return {hidden, feature};
}

ad::Var lm_head_logits(const Model& m, const ad::Var& hidden) {
    if (hidden->value.rows() != m.config.sequence_len() ||
        hidden->value.cols() != m.config.embed_dim) {
        throw DimensionError("lm_head_logits: hidden shape mismatch");
    }
    ad::Var prompt_states = ad::slice_rows(hidden, 0, m.config.prompt_len);
    return ad::matmul(prompt_states, ad::constant(lm_head_weight(m)));
}

Matrix text_feature_values(const Model& m, const Matrix& prompt_v,
                           const std::vector<ClassSpec>& classes) {
    Matrix out(classes.size(), m.config.joint_dim);
    ad::Var prompt = ad::constant(prompt_v);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        ad::Var seq = build_prompt_sequence(m, prompt, classes[i]);
        TextEncoding enc = encode_text(m, seq);
        for (std::size_t c = 0; c < m.config.joint_dim; ++c) {
            out.at(i, c) = enc.feature->value.at(0, c);
        }
    }
    return out;
}

}  // namespace plpp::model
