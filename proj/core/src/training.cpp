#include "plpp/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "plpp/errors.hpp"
#include "plpp/numerics.hpp"

namespace plpp::training {

void TrainConfig::validate() const {
    if (epochs < 1) throw ParameterError("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw ParameterError("TrainConfig: batch_size must be >= 1");
    if (lr < 0.0) throw ParameterError("TrainConfig: lr must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0) {
        throw ParameterError("TrainConfig: momentum must be in [0,1)");
    }
}

namespace {

void check_task_model(const data::FewShotTask& task, const model::Model& m) {
    if (task.spec.joint_dim != m.config.joint_dim) {
        throw ParameterError("task joint_dim does not match model joint_dim");
    }
    for (const auto& c : task.classes) {
        if (c.class_token >= m.config.eot_token()) {
            throw ParameterError("class token out of vocab range");
        }
    }
}

double cosine_lr(double base, std::size_t step, std::size_t total_steps) {
    return base * 0.5 *
           (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                           static_cast<double>(total_steps)));
}

Matrix batch_features(const model::ImageFeatureBank& bank,
                      std::span<const std::size_t> rows) {
    Matrix out(rows.size(), bank.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(bank.features.row(rows[i]).begin(), bank.features.row(rows[i]).end(),
                  out.row(i).begin());
    }
    return out;
}

}  // namespace

TrainResult train_prompts(const data::FewShotTask& task, const model::Model& m,
                          const losses::PLPPConfig& plpp_config,
                          const TrainConfig& train_config) {
    train_config.validate();
    check_task_model(task, m);
    losses::PLPPConfig cfg = plpp_config;
    if (train_config.objective == Objective::ce_only) cfg.lambda = 0.0;
    cfg.validate(m.config.vocab_size);

    std::mt19937_64 rng(train_config.seed);
    std::normal_distribution<double> init(0.0, 0.02);
    model::PromptContext prompt;
    prompt.v = Matrix(m.config.prompt_len, m.config.embed_dim);
    for (double& x : prompt.v.values()) x = init(rng);

    const std::size_t n = task.train.features.rows();
    if (n == 0) throw ParameterError("train_prompts: empty training bank");
    const std::size_t batches_per_epoch = (n + train_config.batch_size - 1) / train_config.batch_size;
    const std::size_t total_steps = train_config.epochs * batches_per_epoch;

    Matrix velocity(m.config.prompt_len, m.config.embed_dim);
    TrainResult result;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
            std::size_t lo = b * train_config.batch_size;
            std::size_t hi = std::min(lo + train_config.batch_size, n);
            std::span<const std::size_t> rows(order.data() + lo, hi - lo);
            Matrix images = batch_features(task.train, rows);
            std::vector<std::size_t> labels;
            labels.reserve(rows.size());
            for (std::size_t r : rows) labels.push_back(task.train.labels[r]);

            ad::Var v = ad::parameter(prompt.v, "prompt.V");
            auto obj = losses::build_objective(m, v, task.classes, images, labels, cfg);
            auto grads = ad::backward(obj.loss);
            if (grads.size() != 1 || grads[0].param_id != "prompt.V") {
                throw ContractError("train_prompts: expected exactly one gradient for prompt.V");
            }
            result.record.steps.push_back({step, epoch, obj.breakdown});

            double lr_t = train_config.schedule == Schedule::cosine_decay
                              ? cosine_lr(train_config.lr, step, total_steps)
                              : train_config.lr;
            for (std::size_t i = 0; i < prompt.v.size(); ++i) {
                velocity.values()[i] = train_config.momentum * velocity.values()[i] +
                                       grads[0].gradient.values()[i];
                prompt.v.values()[i] -= lr_t * velocity.values()[i];
            }
        }
        EpochRecord er;
        er.epoch = epoch;
        er.train_acc = evaluate(prompt, m, task.train, task.classes);
        er.test_acc = evaluate(prompt, m, task.test, task.classes);
        er.gap = er.train_acc - er.test_acc;
        result.record.epochs.push_back(er);
    }
    result.prompt = std::move(prompt);
    return result;
}

double evaluate(const model::PromptContext& prompt, const model::Model& m,
                const model::ImageFeatureBank& bank,
                const std::vector<model::ClassSpec>& classes) {
    if (bank.features.rows() == 0) throw ParameterError("evaluate: empty image set");
    if (classes.empty()) throw ParameterError("evaluate: no classes");
    Matrix text = model::text_feature_values(m, prompt.v, classes);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < bank.features.rows(); ++i) {
        auto img = bank.features.row(i);
        std::size_t best = 0;
        double best_score = -1e300;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            double dot = 0.0;
            for (std::size_t d = 0; d < text.cols(); ++d) dot += text.at(c, d) * img[d];
            if (dot > best_score) {
                best_score = dot;
                best = c;
            }
        }
        if (classes[best].class_id == bank.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(bank.features.rows());
}

GradCheckReport grad_check(const model::Model& m, const data::FewShotTask& task,
                           const losses::PLPPConfig& plpp_config, Objective objective,
                           std::uint64_t seed, double h) {
    check_task_model(task, m);
    losses::PLPPConfig cfg = plpp_config;
    if (objective == Objective::ce_only) cfg.lambda = 0.0;
    cfg.validate(m.config.vocab_size);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 0.02);
    Matrix v0(m.config.prompt_len, m.config.embed_dim);
    for (double& x : v0.values()) x = init(rng);

    const std::size_t batch = std::min<std::size_t>(8, task.train.features.rows());
    std::vector<std::size_t> rows(batch);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Matrix images = batch_features(task.train, rows);
    std::vector<std::size_t> labels(task.train.labels.begin(),
                                    task.train.labels.begin() + static_cast<std::ptrdiff_t>(batch));

    auto loss_value = [&](const Matrix& v) {
        auto obj = losses::build_objective(m, ad::constant(v), task.classes, images, labels, cfg);
        return obj.loss->value.at(0, 0);
    };

    auto obj = losses::build_objective(m, ad::parameter(v0, "prompt.V"), task.classes,
                                       images, labels, cfg);
    auto grads = ad::backward(obj.loss);
    if (grads.size() != 1) throw ContractError("grad_check: expected one gradient");
    const Matrix& analytic = grads[0].gradient;

    GradCheckReport report;
    for (std::size_t r = 0; r < v0.rows(); ++r) {
        for (std::size_t c = 0; c < v0.cols(); ++c) {
            Matrix vp = v0, vm = v0;
            vp.at(r, c) += h;
            vm.at(r, c) -= h;
            double fd = (loss_value(vp) - loss_value(vm)) / (2.0 * h);
            double a = analytic.at(r, c);
            double rel = std::abs(a - fd) / std::max(std::abs(fd), 1e-8);
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_row = r;
                report.worst_col = c;
                report.analytic = a;
                report.finite_diff = fd;
            }
        }
    }
    return report;
}

std::string record_to_csv(const TrainRecord& record) {
    std::ostringstream out;
    out << losses::breakdown_csv_header() << ",epoch,train_acc,test_acc,gap\n";
    char buf[128];
    for (const auto& s : record.steps) {
        out << losses::breakdown_csv_row(s.step, s.loss) << ',' << s.epoch;
        // accuracies are recorded on the final step of each epoch
        bool epoch_final = (&s == &record.steps.back()) || ((&s)[1].epoch != s.epoch);
        if (epoch_final && s.epoch < record.epochs.size()) {
            const auto& e = record.epochs[s.epoch];
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g", e.train_acc, e.test_acc, e.gap);
            out << buf;
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace plpp::training
