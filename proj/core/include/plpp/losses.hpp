#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "plpp/matrix.hpp"
#include "plpp/model.hpp"

namespace plpp::losses {

struct PLPPConfig {
    double lambda = 10.0;
    double alpha = 0.2;
    std::size_t k = 5;
    double tau = 0.07;     // prediction temperature
    double tau_q = 1.0;    // soft-label temperature
    double epsilon = 1e-8; // probability floor inside logs

    void validate(std::size_t vocab_size) const;  // throws ParameterError
};

// Dense per-position probability rows over the vocabulary.
struct TokenDistribution {
    Matrix probs;  // M x vocab_size, rows sum to 1
};

enum class TopKSource { from_q, from_p };

// Index-shared renormalized top-k restriction of (Q, P).
struct TopKPair {
    std::vector<std::vector<std::size_t>> indices;  // M rows of k indices
    Matrix q;  // M x k, rows renormalized
    Matrix p;  // M x k, rows renormalized
    TopKSource source = TopKSource::from_q;
};

struct LossBreakdown {
    double ce = 0.0;
    double ppl = 0.0;
    double ippl = 0.0;
    double total = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;
    std::size_t k = 0;
};

// p(y=i|x) = softmax_i(cos(text_i, image)/tau); all rows unit-norm.
std::vector<double> prediction_probabilities(const Matrix& text_features,
                                             std::span<const double> image_feature,
                                             double tau);

double cross_entropy_alignment(std::span<const double> probs, std::size_t label,
                               double epsilon = 1e-8);

// argmax_j cos(v_m, E_j) per prompt position, ties to the lower index.
std::vector<std::size_t> hard_prompt_labels(const Matrix& prompt_v, const Matrix& embedding);

TokenDistribution soft_prompt_labels(const Matrix& prompt_v, const Matrix& embedding,
                                     double tau_q);

TokenDistribution output_distribution(const Matrix& logits);

TopKPair topk_pair(const TokenDistribution& q, const TokenDistribution& p, std::size_t k,
                   TopKSource source);

// sum q_i ln(q_i / max(p_i, eps)) with 0 ln(0/.) = 0; both args distributions.
double kl_divergence(std::span<const double> q, std::span<const double> p,
                     double epsilon = 1e-8);

// exp(H(q,p)); equals exp(KL(q||p)) for one-hot q.
double perplexity(std::span<const double> q, std::span<const double> p,
                  double epsilon = 1e-8);

// exp(KL/2) both ways, KL averaged over the pair's rows first.
double mutual_ppl_loss(const TopKPair& pair, double epsilon = 1e-8);

// L = ce + lambda * (alpha * ppl + (1 - alpha) * ippl)
LossBreakdown total_loss(double ce, double ppl, double ippl, const PLPPConfig& config);

std::string breakdown_csv_header();
std::string breakdown_csv_row(std::size_t step, const LossBreakdown& b);

// Full differentiable PLPP objective over one minibatch. `loss` is the node
// to backprop (the CE node alone when lambda == 0, so the lambda=0 trajectory
// is bit-identical to CE-only training).
struct ObjectiveGraph {
    ad::Var loss;
    LossBreakdown breakdown;
};

ObjectiveGraph build_objective(const model::Model& m, const ad::Var& prompt,
                               const std::vector<model::ClassSpec>& classes,
                               const Matrix& image_features,
                               const std::vector<std::size_t>& labels,
                               const PLPPConfig& config);

}  // namespace plpp::losses
