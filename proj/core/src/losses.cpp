#include "plpp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "plpp/errors.hpp"
#include "plpp/numerics.hpp"

namespace plpp::losses {

namespace {

void check_distribution(std::span<const double> v, const char* who) {
    double s = 0.0;
    for (double x : v) {
        if (x < 0.0 || !std::isfinite(x)) {
            throw ContractError(std::string(who) + ": not a distribution (negative entry)");
        }
        s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) {
        throw ContractError(std::string(who) + ": not a distribution (sum != 1)");
    }
}

}  // namespace

void PLPPConfig::validate(std::size_t vocab_size) const {
    if (lambda < 0.0) throw ParameterError("PLPPConfig: lambda must be >= 0");
    if (alpha < 0.0 || alpha > 1.0) throw ParameterError("PLPPConfig: alpha must be in [0,1]");
    if (k < 1 || k > vocab_size) throw ParameterError("PLPPConfig: k out of range");
    if (!(tau > 0.0) || !(tau_q > 0.0) || !(epsilon > 0.0)) {
        throw ParameterError("PLPPConfig: tau, tau_q and epsilon must be > 0");
    }
}

std::vector<double> prediction_probabilities(const Matrix& text_features,
                                             std::span<const double> image_feature,
                                             double tau) {
    if (!(tau > 0.0)) throw ParameterError("prediction_probabilities: tau must be > 0");
    if (text_features.cols() != image_feature.size()) {
        throw DimensionError("prediction_probabilities: feature width mismatch");
    }
    Matrix scores(1, text_features.rows());
    for (std::size_t i = 0; i < text_features.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t c = 0; c < text_features.cols(); ++c) {
            dot += text_features.at(i, c) * image_feature[c];
        }
        scores.at(0, i) = dot / tau;
    }
    Matrix probs = numerics::row_softmax(scores, 1.0);
    return probs.values();
}

double cross_entropy_alignment(std::span<const double> probs, std::size_t label,
                               double epsilon) {
    check_distribution(probs, "cross_entropy_alignment");
    if (label >= probs.size()) {
        throw ParameterError("cross_entropy_alignment: label out of range");
    }
    return -std::log(std::max(probs[label], epsilon));
}

std::vector<std::size_t> hard_prompt_labels(const Matrix& prompt_v, const Matrix& embedding) {
    Matrix cos = numerics::cosine_similarity_matrix(prompt_v, embedding);
    std::vector<std::size_t> labels(cos.rows());
    for (std::size_t m = 0; m < cos.rows(); ++m) {
        labels[m] = numerics::topk_indices(cos.row(m), 1)[0];
    }
    return labels;
}

TokenDistribution soft_prompt_labels(const Matrix& prompt_v, const Matrix& embedding,
                                     double tau_q) {
    Matrix cos = numerics::cosine_similarity_matrix(prompt_v, embedding);
    return {numerics::row_softmax(cos, tau_q)};
}

TokenDistribution output_distribution(const Matrix& logits) {
    return {numerics::row_softmax(logits, 1.0)};
}

TopKPair topk_pair(const TokenDistribution& q, const TokenDistribution& p, std::size_t k,
                   TopKSource source) {
    if (!q.probs.same_shape(p.probs)) throw DimensionError("topk_pair: Q/P shape mismatch");
    const Matrix& driver = source == TopKSource::from_q ? q.probs : p.probs;
    TopKPair pair;
    pair.source = source;
    pair.q = Matrix(q.probs.rows(), k);
    pair.p = Matrix(q.probs.rows(), k);
    for (std::size_t m = 0; m < q.probs.rows(); ++m) {
        auto idx = numerics::topk_indices(driver.row(m), k);
        auto qv = numerics::gather(q.probs.row(m), idx);
        auto pv = numerics::gather(p.probs.row(m), idx);
        double qs = 0.0, ps = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            qs += qv[j];
            ps += pv[j];
        }
        if (qs == 0.0 || ps == 0.0) throw DegenerateInputError("topk_pair: zero-mass selection");
        for (std::size_t j = 0; j < k; ++j) {
            pair.q.at(m, j) = qv[j] / qs;
            pair.p.at(m, j) = pv[j] / ps;
        }
        pair.indices.push_back(std::move(idx));
    }
    return pair;
}

double kl_divergence(std::span<const double> q, std::span<const double> p, double epsilon) {
    if (q.size() != p.size()) throw DimensionError("kl_divergence: length mismatch");
    check_distribution(q, "kl_divergence(q)");
    check_distribution(p, "kl_divergence(p)");
    double kl = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) {
            kl += q[i] * std::log(q[i] / std::max(p[i], epsilon));
        }
    }
    return kl;
}

double perplexity(std::span<const double> q, std::span<const double> p, double epsilon) {
    if (q.size() != p.size()) throw DimensionError("perplexity: length mismatch");
    check_distribution(q, "perplexity(q)");
    check_distribution(p, "perplexity(p)");
    double h = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) h -= q[i] * std::log(std::max(p[i], epsilon));
    }
    return std::exp(h);
}

double mutual_ppl_loss(const TopKPair& pair, double epsilon) {
    const std::size_t rows = pair.q.rows();
    if (rows == 0) throw ContractError("mutual_ppl_loss: empty pair");
    double kl_qp = 0.0, kl_pq = 0.0;
    for (std::size_t m = 0; m < rows; ++m) {
        kl_qp += kl_divergence(pair.q.row(m), pair.p.row(m), epsilon);
        kl_pq += kl_divergence(pair.p.row(m), pair.q.row(m), epsilon);
    }
    kl_qp /= static_cast<double>(rows);
    kl_pq /= static_cast<double>(rows);
    return std::exp(0.5 * kl_qp) + std::exp(0.5 * kl_pq);
}

LossBreakdown total_loss(double ce, double ppl, double ippl, const PLPPConfig& config) {
    if (!std::isfinite(ce) || !std::isfinite(ppl) || !std::isfinite(ippl)) {
        throw ContractError("total_loss: non-finite component");
    }
    LossBreakdown b;
    b.ce = ce;
    b.ppl = ppl;
    b.ippl = ippl;
    b.lambda = config.lambda;
    b.alpha = config.alpha;
    b.k = config.k;
    b.total = ce + config.lambda * (config.alpha * ppl + (1.0 - config.alpha) * ippl);
    return b;
}

std::string breakdown_csv_header() {
    return "step,ce,ppl,ippl,total,lambda,alpha,k";
}

std::string breakdown_csv_row(std::size_t step, const LossBreakdown& b) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu",
                  step, b.ce, b.ppl, b.ippl, b.total, b.lambda, b.alpha, b.k);
    return buf;
}

namespace {

// sum over all entries of a * (ln max(a,eps) - ln max(b,eps))
ad::Var kl_sum(const ad::Var& a, const ad::Var& b, double eps) {
    return ad::sum_all(ad::mul(a, ad::sub(ad::log_floor(a, eps), ad::log_floor(b, eps))));
}

}  // namespace

ObjectiveGraph build_objective(const model::Model& m, const ad::Var& prompt,
                               const std::vector<model::ClassSpec>& classes,
                               const Matrix& image_features,
                               const std::vector<std::size_t>& labels,
                               const PLPPConfig& config) {
    const auto& cfg = m.config;
    config.validate(cfg.vocab_size);
    if (classes.empty()) throw ParameterError("build_objective: no classes");
    if (image_features.rows() != labels.size() || image_features.rows() == 0) {
        throw ParameterError("build_objective: empty or inconsistent batch");
    }
    const std::size_t num_classes = classes.size();
    const std::size_t batch = image_features.rows();
    const double eps = config.epsilon;

    // soft labels Q: softmax of cosine(v_m, E_j) / tau_q, shared across classes
    Matrix norm_embedding = m.embedding.table;
    numerics::normalize_rows(norm_embedding);
    ad::Var q_dist = ad::row_softmax(
        ad::matmul(ad::row_l2_normalize(prompt), ad::constant(norm_embedding.transposed())),
        config.tau_q);

    // per-class encodings and output distributions P
    std::vector<ad::Var> features;
    std::vector<ad::Var> p_dists;
    features.reserve(num_classes);
    p_dists.reserve(num_classes);
    for (const auto& cls : classes) {
        ad::Var seq = model::build_prompt_sequence(m, prompt, cls);
        model::TextEncoding enc = model::encode_text(m, seq);
        features.push_back(enc.feature);
        p_dists.push_back(ad::row_softmax(model::lm_head_logits(m, enc.hidden), 1.0));
    }
    ad::Var text_features = ad::concat_rows(features);

    // cross-entropy alignment loss over the minibatch
    ad::Var scores = ad::scale(
        ad::matmul(ad::constant(image_features), ad::transpose(text_features)), 1.0 / config.tau);
    ad::Var pred = ad::row_softmax(scores, 1.0);
    ad::Var ce;
    for (std::size_t b = 0; b < batch; ++b) {
        if (labels[b] >= num_classes) throw ParameterError("build_objective: label out of range");
        ad::Var term = ad::scale(ad::log_floor(ad::entry(pred, b, labels[b]), eps), -1.0);
        ce = b == 0 ? term : ad::add(ce, term);
    }
    ce = ad::scale(ce, 1.0 / static_cast<double>(batch));

    // index-shared top-k pairs; KL averaged over M positions x K classes
    // before exponentiation
    std::vector<std::vector<std::size_t>> idx_q(cfg.prompt_len);
    for (std::size_t r = 0; r < cfg.prompt_len; ++r) {
        idx_q[r] = numerics::topk_indices(q_dist->value.row(r), config.k);
    }
    ad::Var q1 = ad::row_renormalize(ad::gather_per_row(q_dist, idx_q));
    ad::Var kl_q1p1, kl_p1q1, kl_q2p2, kl_p2q2;
    for (std::size_t c = 0; c < num_classes; ++c) {
        ad::Var p1 = ad::row_renormalize(ad::gather_per_row(p_dists[c], idx_q));
        ad::Var a = kl_sum(q1, p1, eps);
        ad::Var b = kl_sum(p1, q1, eps);

        std::vector<std::vector<std::size_t>> idx_p(cfg.prompt_len);
        for (std::size_t r = 0; r < cfg.prompt_len; ++r) {
            idx_p[r] = numerics::topk_indices(p_dists[c]->value.row(r), config.k);
        }
        ad::Var q2 = ad::row_renormalize(ad::gather_per_row(q_dist, idx_p));
        ad::Var p2 = ad::row_renormalize(ad::gather_per_row(p_dists[c], idx_p));
        ad::Var a2 = kl_sum(q2, p2, eps);
        ad::Var b2 = kl_sum(p2, q2, eps);

        kl_q1p1 = c == 0 ? a : ad::add(kl_q1p1, a);
        kl_p1q1 = c == 0 ? b : ad::add(kl_p1q1, b);
        kl_q2p2 = c == 0 ? a2 : ad::add(kl_q2p2, a2);
        kl_p2q2 = c == 0 ? b2 : ad::add(kl_p2q2, b2);
    }
    const double inv_mk = 1.0 / static_cast<double>(cfg.prompt_len * num_classes);
    ad::Var ppl = ad::add(ad::exp_elem(ad::scale(kl_q1p1, 0.5 * inv_mk)),
                          ad::exp_elem(ad::scale(kl_p1q1, 0.5 * inv_mk)));
    ad::Var ippl = ad::add(ad::exp_elem(ad::scale(kl_q2p2, 0.5 * inv_mk)),
                           ad::exp_elem(ad::scale(kl_p2q2, 0.5 * inv_mk)));

    ObjectiveGraph out;
    out.breakdown = total_loss(ce->value.at(0, 0), ppl->value.at(0, 0),
                               ippl->value.at(0, 0), config);
    if (config.lambda == 0.0) {
        out.loss = ce;
    } else {
        ad::Var reg = ad::add(ad::scale(ppl, config.alpha), ad::scale(ippl, 1.0 - config.alpha));
        out.loss = ad::add(ce, ad::scale(reg, config.lambda));
    }
    if (!out.loss->value.all_finite()) throw ContractError("build_objective: non-finite loss");
    return out;
}

}  // namespace plpp::losses
