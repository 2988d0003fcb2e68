// plpp: prompt-tuning laboratory CLI.
//
// Subcommands: gen-data, train, grad-check, sweep, report.
// Exit codes: 0 success, 1 check failure, 2 usage/validation, 3 I/O.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plpp/data.hpp"
#include "plpp/errors.hpp"
#include "plpp/losses.hpp"
#include "plpp/model.hpp"
#include "plpp/snapshot.hpp"
#include "plpp/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// Relative output paths resolve under PLPP_OUTPUT_ROOT when it is set.
fs::path resolve_output(const std::string& path) {
    fs::path p(path);
    if (p.is_relative()) {
        if (const char* root = std::getenv("PLPP_OUTPUT_ROOT")) {
            return fs::path(root) / p;
        }
    }
    return p;
}

void write_manifest(const fs::path& path, const json& manifest) {
    std::ofstream out(path);
    if (!out) throw plpp::IoError("cannot write manifest " + path.string());
    out << manifest.dump(2) << '\n';
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct ModelFlags {
    std::size_t vocab_size = 256;
    std::size_t embed_dim = 32;
    std::size_t layers = 2;
    std::size_t heads = 2;
    std::size_t prompt_len = 4;
    std::uint64_t model_seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--vocab-size", vocab_size, "Vocabulary size");
        cmd->add_option("--embed-dim", embed_dim, "Token embedding width");
        cmd->add_option("--layers", layers, "Encoder layers");
        cmd->add_option("--heads", heads, "Attention heads");
        cmd->add_option("--prompt-len", prompt_len, "Learnable prompt length M");
        cmd->add_option("--model-seed", model_seed, "Seed for frozen weights");
    }

    plpp::model::ModelConfig to_config(std::size_t joint_dim) const {
        plpp::model::ModelConfig c;
        c.vocab_size = vocab_size;
        c.embed_dim = embed_dim;
        c.encoder_layers = layers;
        c.attention_heads = heads;
        c.joint_dim = joint_dim;
        c.prompt_len = prompt_len;
        c.seed = model_seed;
        return c;
    }

    json to_json() const {
        return {{"vocab_size", vocab_size}, {"embed_dim", embed_dim}, {"layers", layers},
                {"heads", heads},           {"prompt_len", prompt_len},
                {"model_seed", model_seed}};
    }
};

struct PlppFlags {
    double lambda = 10.0;
    double alpha = 0.2;
    std::size_t k = 5;
    double tau = 0.07;
    double tau_q = 1.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--lambda", lambda, "Regularization weight")->check(CLI::NonNegativeNumber);
        cmd->add_option("--alpha", alpha, "PPL/IPPL mix")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--k", k, "Top-k width")->check(CLI::PositiveNumber);
        cmd->add_option("--tau", tau, "Prediction temperature")->check(CLI::PositiveNumber);
        cmd->add_option("--tau-q", tau_q, "Soft-label temperature")->check(CLI::PositiveNumber);
    }

    plpp::losses::PLPPConfig to_config() const {
        plpp::losses::PLPPConfig c;
        c.lambda = lambda;
        c.alpha = alpha;
        c.k = k;
        c.tau = tau;
        c.tau_q = tau_q;
        return c;
    }
};

// ---- gen-data ----

struct GenDataArgs {
    std::size_t classes = 10;
    std::size_t shots = 4;
    std::size_t test_per_class = 20;
    std::size_t joint_dim = 16;
    double noise = 0.5;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen_data(const GenDataArgs& a) {
    plpp::data::SyntheticTaskSpec spec;
    spec.num_classes = a.classes;
    spec.shots_per_class = a.shots;
    spec.test_per_class = a.test_per_class;
    spec.joint_dim = a.joint_dim;
    spec.noise_sigma = a.noise;
    spec.seed = a.seed;
    auto task = plpp::data::generate_task(spec);
    fs::path out = resolve_output(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    plpp::data::save_task(task, out.string());
    json manifest = {
        {"command", "gen-data"},
        {"version", kVersion},
        {"classes", a.classes},
        {"shots", a.shots},
        {"test_per_class", a.test_per_class},
        {"joint_dim", a.joint_dim},
        {"noise", a.noise},
        {"seed", a.seed},
        {"outputs", {out.string()}},
    };
    write_manifest(out.string() + ".manifest.json", manifest);
    std::cout << "wrote " << out.string() << " (" << task.train.features.rows()
              << " train, " << task.test.features.rows() << " test rows)\n";
    return kExitOk;
}

// ---- train ----

struct TrainArgs {
    std::string task_path;
    std::string objective = "plpp";
    PlppFlags plpp;
    ModelFlags model;
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    double lr = 0.002;
    double momentum = 0.9;
    std::string schedule = "cosine";
    std::uint64_t seed = 0;
    std::string out_dir = "train_out";
};

int run_train(const TrainArgs& a) {
    if (!fs::exists(a.task_path)) {
        std::cerr << "error: task file not found: " << a.task_path << '\n';
        return kExitIo;
    }
    auto task = plpp::data::load_task(a.task_path);
    auto model = plpp::model::init_model(a.model.to_config(task.spec.joint_dim));

    plpp::training::TrainConfig tc;
    tc.epochs = a.epochs;
    tc.batch_size = a.batch_size;
    tc.lr = a.lr;
    tc.momentum = a.momentum;
    tc.schedule = a.schedule == "constant" ? plpp::training::Schedule::constant
                                           : plpp::training::Schedule::cosine_decay;
    tc.seed = a.seed;
    tc.objective = a.objective == "ce" ? plpp::training::Objective::ce_only
                                       : plpp::training::Objective::plpp;

    auto result = plpp::training::train_prompts(task, model, a.plpp.to_config(), tc);

    fs::path out_dir = resolve_output(a.out_dir);
    fs::create_directories(out_dir);
    fs::path csv_path = out_dir / "records.csv";
    {
        std::ofstream csv(csv_path);
        if (!csv) throw plpp::IoError("cannot write " + csv_path.string());
        csv << plpp::training::record_to_csv(result.record);
    }
    fs::path snap_path = out_dir / "prompt.snapshot";
    plpp::snapshot::save(plpp::snapshot::snapshot_prompt(model.config, result.prompt),
                         snap_path.string());

    const auto& last = result.record.epochs.back();
    double effective_lambda = tc.objective == plpp::training::Objective::ce_only ? 0.0
                                                                                 : a.plpp.lambda;
    json manifest = {
        {"command", "train"},
        {"version", kVersion},
        {"task", a.task_path},
        {"objective", a.objective},
        {"lambda", effective_lambda},
        {"alpha", a.plpp.alpha},
        {"k", a.plpp.k},
        {"tau", a.plpp.tau},
        {"tau_q", a.plpp.tau_q},
        {"model", a.model.to_json()},
        {"epochs", a.epochs},
        {"batch_size", a.batch_size},
        {"lr", a.lr},
        {"momentum", a.momentum},
        {"schedule", a.schedule},
        {"seed", a.seed},
        {"final_train_acc", last.train_acc},
        {"final_test_acc", last.test_acc},
        {"outputs", {csv_path.string(), snap_path.string()}},
    };
    write_manifest(out_dir / "manifest.json", manifest);
    std::cout << "final train_acc=" << fmt(last.train_acc)
              << " test_acc=" << fmt(last.test_acc) << " gap=" << fmt(last.gap) << '\n';
    return kExitOk;
}

// ---- grad-check ----

struct GradCheckArgs {
    std::string objective = "plpp";
    PlppFlags plpp;
    ModelFlags model{.vocab_size = 64, .embed_dim = 16};
    std::size_t classes = 5;
    std::size_t joint_dim = 16;
    double threshold = 1e-4;
    std::uint64_t seed = 7;
};

int run_grad_check(const GradCheckArgs& a) {
    plpp::data::SyntheticTaskSpec spec;
    spec.num_classes = a.classes;
    spec.shots_per_class = 2;
    spec.test_per_class = 1;
    spec.joint_dim = a.joint_dim;
    spec.noise_sigma = 0.3;
    spec.seed = a.seed;
    auto task = plpp::data::generate_task(spec);
    auto model = plpp::model::init_model(a.model.to_config(a.joint_dim));
    auto objective = a.objective == "ce" ? plpp::training::Objective::ce_only
                                         : plpp::training::Objective::plpp;
    auto report = plpp::training::grad_check(model, task, a.plpp.to_config(), objective, a.seed);
    std::cout << "objective=" << a.objective << " k=" << a.plpp.k
              << " max_rel_err=" << fmt(report.max_rel_err) << " worst=(m=" << report.worst_row
              << ",d=" << report.worst_col << ") analytic=" << fmt(report.analytic)
              << " finite_diff=" << fmt(report.finite_diff) << '\n';
    if (report.max_rel_err < a.threshold) {
        std::cout << "PASS (threshold " << fmt(a.threshold) << ")\n";
        return kExitOk;
    }
    std::cout << "FAIL (threshold " << fmt(a.threshold) << ")\n";
    return kExitCheckFailed;
}

// ---- sweep ----

struct SweepArgs {
    std::string task_path;
    std::vector<double> lambdas{0.0, 10.0};
    std::vector<double> alphas{0.2};
    std::vector<std::size_t> ks{5};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ModelFlags model;
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    double lr = 0.002;
    double momentum = 0.9;
    std::size_t jobs = 1;
    double base_fraction = 0.0;  // 0 disables the base/novel protocol
    std::string out = "sweep.csv";
};

struct SweepRun {
    double lambda;
    double alpha;
    std::size_t k;
    std::uint64_t seed;
    double train_acc = 0.0, test_acc = 0.0, gap = 0.0;
    double base_acc = -1.0, novel_acc = -1.0, hm = -1.0;
};

plpp::data::FewShotTask restrict_classes(const plpp::data::FewShotTask& task,
                                         const std::vector<std::size_t>& class_ids) {
    plpp::data::FewShotTask out;
    out.spec = task.spec;
    out.spec.num_classes = class_ids.size();
    std::map<std::size_t, bool> keep;
    for (std::size_t id : class_ids) keep[id] = true;
    for (const auto& c : task.classes) {
        if (keep.count(c.class_id)) out.classes.push_back(c);
    }
    auto filter = [&](const plpp::model::ImageFeatureBank& bank) {
        plpp::model::ImageFeatureBank fb;
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < bank.features.rows(); ++r) {
            if (keep.count(bank.labels[r])) rows.push_back(r);
        }
        fb.features = plpp::Matrix(rows.size(), bank.features.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::copy(bank.features.row(rows[i]).begin(), bank.features.row(rows[i]).end(),
                      fb.features.row(i).begin());
            fb.labels.push_back(bank.labels[rows[i]]);
        }
        return fb;
    };
    out.train = filter(task.train);
    out.test = filter(task.test);
    return out;
}

int run_sweep(const SweepArgs& a) {
    if (a.lambdas.empty() || a.alphas.empty() || a.ks.empty() || a.seeds.empty()) {
        std::cerr << "error: empty sweep grid\n";
        return kExitUsage;
    }
    if (!fs::exists(a.task_path)) {
        std::cerr << "error: task file not found: " << a.task_path << '\n';
        return kExitIo;
    }
    auto task = plpp::data::load_task(a.task_path);
    auto model = plpp::model::init_model(a.model.to_config(task.spec.joint_dim));

    std::vector<SweepRun> runs;
    for (double lambda : a.lambdas) {
        for (double alpha : a.alphas) {
            for (std::size_t k : a.ks) {
                for (std::uint64_t seed : a.seeds) {
                    runs.push_back({lambda, alpha, k, seed});
                }
            }
        }
    }

    auto execute = [&](SweepRun& run) {
        plpp::losses::PLPPConfig pc;
        pc.lambda = run.lambda;
        pc.alpha = run.alpha;
        pc.k = run.k;
        plpp::training::TrainConfig tc;
        tc.epochs = a.epochs;
        tc.batch_size = a.batch_size;
        tc.lr = a.lr;
        tc.momentum = a.momentum;
        tc.seed = run.seed;
        tc.objective = plpp::training::Objective::plpp;

        if (a.base_fraction > 0.0) {
            auto split = plpp::data::base_novel_split(task, a.base_fraction, run.seed);
            auto base_task = restrict_classes(split, split.partition->base);
            auto novel_task = restrict_classes(split, split.partition->novel);
            auto result = plpp::training::train_prompts(base_task, model, pc, tc);
            run.train_acc = result.record.epochs.back().train_acc;
            run.test_acc = result.record.epochs.back().test_acc;
            run.gap = result.record.epochs.back().gap;
            run.base_acc = run.test_acc;
            run.novel_acc = plpp::training::evaluate(result.prompt, model, novel_task.test,
                                                     novel_task.classes);
            run.hm = plpp::data::harmonic_mean(run.base_acc * 100.0, run.novel_acc * 100.0);
        } else {
            auto result = plpp::training::train_prompts(task, model, pc, tc);
            run.train_acc = result.record.epochs.back().train_acc;
            run.test_acc = result.record.epochs.back().test_acc;
            run.gap = result.record.epochs.back().gap;
        }
    };

    std::size_t jobs = std::max<std::size_t>(1, a.jobs);
    if (jobs == 1) {
        for (auto& run : runs) execute(run);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < runs.size(); i = next.fetch_add(1)) {
                    execute(runs[i]);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    fs::path out = resolve_output(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream csv(out);
    if (!csv) throw plpp::IoError("cannot write " + out.string());
    csv << "task,seed,objective,lambda,alpha,k,train_acc,test_acc,gap,base_acc,novel_acc,hm\n";
    for (const auto& r : runs) {
        csv << a.task_path << ',' << r.seed << ",plpp," << fmt(r.lambda) << ',' << fmt(r.alpha)
            << ',' << r.k << ',' << fmt(r.train_acc) << ',' << fmt(r.test_acc) << ','
            << fmt(r.gap);
        if (r.base_acc >= 0.0) {
            csv << ',' << fmt(r.base_acc) << ',' << fmt(r.novel_acc) << ',' << fmt(r.hm);
        } else {
            csv << ",,,";
        }
        csv << '\n';
    }
    json manifest = {
        {"command", "sweep"},    {"version", kVersion},
        {"task", a.task_path},   {"lambdas", a.lambdas},
        {"alphas", a.alphas},    {"ks", a.ks},
        {"seeds", a.seeds},      {"epochs", a.epochs},
        {"batch_size", a.batch_size}, {"lr", a.lr},
        {"momentum", a.momentum},     {"jobs", a.jobs},
        {"base_fraction", a.base_fraction},
        {"model", a.model.to_json()}, {"outputs", {out.string()}},
    };
    write_manifest(out.string() + ".manifest.json", manifest);
    std::cout << "wrote " << out.string() << " (" << runs.size() << " rows)\n";
    return kExitOk;
}

// ---- report ----

struct ReportArgs {
    std::string sweep_path;
    std::string out;  // empty -> stdout
};

struct Agg {
    std::vector<double> test, gap, base, novel;
};

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

int run_report(const ReportArgs& a) {
    std::ifstream in(a.sweep_path);
    if (!in) {
        std::cerr << "error: cannot open sweep CSV: " << a.sweep_path << '\n';
        return kExitIo;
    }
    std::string line;
    if (!std::getline(in, line) ||
        line != "task,seed,objective,lambda,alpha,k,train_acc,test_acc,gap,base_acc,novel_acc,hm") {
        std::cerr << "error: malformed sweep CSV header\n";
        return kExitIo;
    }
    std::map<std::string, Agg> groups;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        while (cells.size() < 12) cells.emplace_back();
        if (cells.size() != 12) {
            std::cerr << "error: malformed sweep CSV row: " << line << '\n';
            return kExitIo;
        }
        try {
            std::string key = "lambda=" + cells[3] + " alpha=" + cells[4] + " k=" + cells[5];
            auto& g = groups[key];
            g.test.push_back(std::stod(cells[7]));
            g.gap.push_back(std::stod(cells[8]));
            if (!cells[9].empty()) {
                g.base.push_back(std::stod(cells[9]));
                g.novel.push_back(std::stod(cells[10]));
            }
        } catch (const std::exception&) {
            std::cerr << "error: malformed sweep CSV row: " << line << '\n';
            return kExitIo;
        }
    }
    if (groups.empty()) {
        std::cerr << "error: sweep CSV has no data rows\n";
        return kExitIo;
    }
    std::ostringstream md;
    md << "# Sweep report\n\n";
    md << "| config | runs | test acc (mean±std) | gap (mean±std) | HM |\n";
    md << "|---|---|---|---|---|\n";
    char buf[128];
    for (const auto& [key, g] : groups) {
        std::snprintf(buf, sizeof(buf), "%.4f±%.4f", mean(g.test), stddev(g.test));
        std::string acc = buf;
        std::snprintf(buf, sizeof(buf), "%.4f±%.4f", mean(g.gap), stddev(g.gap));
        std::string gap = buf;
        std::string hm = "-";
        if (!g.base.empty()) {
            double h = plpp::data::harmonic_mean(mean(g.base) * 100.0, mean(g.novel) * 100.0);
            std::snprintf(buf, sizeof(buf), "%.2f", h);
            hm = buf;
        }
        md << "| " << key << " | " << g.test.size() << " | " << acc << " | " << gap << " | "
           << hm << " |\n";
    }
    if (a.out.empty()) {
        std::cout << md.str();
    } else {
        fs::path out = resolve_output(a.out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        std::ofstream f(out);
        if (!f) throw plpp::IoError("cannot write " + out.string());
        f << md.str();
        std::cout << "wrote " << out.string() << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PLPP prompt-tuning laboratory"};
    app.require_subcommand(1);

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic few-shot task file");
    gen->add_option("--classes", gd.classes, "Number of classes")->check(CLI::Range(2u, 100000u));
    gen->add_option("--shots", gd.shots, "Training shots per class")->check(CLI::PositiveNumber);
    gen->add_option("--test-per-class", gd.test_per_class, "Test images per class")
        ->check(CLI::PositiveNumber);
    gen->add_option("--joint-dim", gd.joint_dim, "Joint feature width")->check(CLI::PositiveNumber);
    gen->add_option("--noise", gd.noise, "Feature noise sigma")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gd.seed, "Generator seed");
    gen->add_option("--out", gd.out, "Output task file")->required();

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train prompt vectors on a task");
    train->add_option("--task", tr.task_path, "Task file")->required();
    train->add_option("--objective", tr.objective, "ce or plpp")
        ->check(CLI::IsMember({"ce", "plpp"}));
    tr.plpp.add_to(train);
    tr.model.add_to(train);
    train->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::PositiveNumber);
    train->add_option("--batch-size", tr.batch_size, "Batch size")->check(CLI::PositiveNumber);
    train->add_option("--lr", tr.lr, "Learning rate")->check(CLI::NonNegativeNumber);
    train->add_option("--momentum", tr.momentum, "Momentum")->check(CLI::Range(0.0, 0.999999));
    train->add_option("--schedule", tr.schedule, "constant or cosine")
        ->check(CLI::IsMember({"constant", "cosine"}));
    train->add_option("--seed", tr.seed, "Training seed");
    train->add_option("--out-dir", tr.out_dir, "Output directory");

    GradCheckArgs gc;
    auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient check");
    grad->add_option("--objective", gc.objective, "ce or plpp")
        ->check(CLI::IsMember({"ce", "plpp"}));
    gc.plpp.add_to(grad);
    gc.model.add_to(grad);
    grad->add_option("--classes", gc.classes, "Synthetic classes")->check(CLI::Range(2u, 1000u));
    grad->add_option("--joint-dim", gc.joint_dim, "Joint feature width")
        ->check(CLI::PositiveNumber);
    grad->add_option("--threshold", gc.threshold, "Max relative error to pass")
        ->check(CLI::NonNegativeNumber);
    grad->add_option("--seed", gc.seed, "Seed for V and the toy task");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Run a lambda x alpha x k x seed grid");
    sweep->add_option("--task", sw.task_path, "Task file")->required();
    sweep->add_option("--lambdas", sw.lambdas, "Lambda grid")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    sweep->add_option("--alphas", sw.alphas, "Alpha grid")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--ks", sw.ks, "Top-k grid")->delimiter(',')->check(CLI::PositiveNumber);
    sweep->add_option("--seeds", sw.seeds, "Seeds")->delimiter(',')->check(CLI::NonNegativeNumber);
    sw.model.add_to(sweep);
    sweep->add_option("--epochs", sw.epochs, "Epochs")->check(CLI::PositiveNumber);
    sweep->add_option("--batch-size", sw.batch_size, "Batch size")->check(CLI::PositiveNumber);
    sweep->add_option("--lr", sw.lr, "Learning rate")->check(CLI::NonNegativeNumber);
    sweep->add_option("--momentum", sw.momentum, "Momentum")->check(CLI::Range(0.0, 0.999999));
    sweep->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--base-fraction", sw.base_fraction,
                      "Base/novel protocol with this base class fraction (0 = off)")
        ->check(CLI::Range(0.0, 0.999999));
    sweep->add_option("--out", sw.out, "Output CSV");

    ReportArgs rp;
    auto* report = app.add_subcommand("report", "Summarize a sweep CSV as markdown");
    report->add_option("--sweep", rp.sweep_path, "Sweep CSV")->required();
    report->add_option("--out", rp.out, "Markdown output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen_data(gd);
        if (train->parsed()) return run_train(tr);
        if (grad->parsed()) return run_grad_check(gc);
        if (sweep->parsed()) return run_sweep(sw);
        if (report->parsed()) return run_report(rp);
    } catch (const plpp::ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const plpp::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    return kExitUsage;
}
