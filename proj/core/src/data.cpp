#include "plpp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "plpp/errors.hpp"
#include "plpp/numerics.hpp"

namespace plpp::data {

void SyntheticTaskSpec::validate() const {
    if (num_classes < 2) throw ParameterError("SyntheticTaskSpec: need at least 2 classes");
    if (shots_per_class < 1) throw ParameterError("SyntheticTaskSpec: shots must be >= 1");
    if (test_per_class < 1) throw ParameterError("SyntheticTaskSpec: test_per_class must be >= 1");
    if (joint_dim < 1) throw ParameterError("SyntheticTaskSpec: joint_dim must be >= 1");
    if (noise_sigma < 0.0) throw ParameterError("SyntheticTaskSpec: noise_sigma must be >= 0");
}

namespace {

std::vector<double> unit_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(dim);
    for (double& x : v) x = dist(rng);
    double n = numerics::l2_norm(v);
    if (n == 0.0) throw DegenerateInputError("unit_vector: zero draw");
    for (double& x : v) x /= n;
    return v;
}

}  // namespace

FewShotTask generate_task(const SyntheticTaskSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    FewShotTask task;
    task.spec = spec;
    std::vector<std::vector<double>> prototypes;
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        task.classes.push_back({c, c + 1, "class_" + std::to_string(c)});
        prototypes.push_back(unit_vector(rng, spec.joint_dim));
    }

    auto fill_bank = [&](model::ImageFeatureBank& bank, std::size_t per_class) {
        bank.features = Matrix(spec.num_classes * per_class, spec.joint_dim);
        std::size_t row = 0;
        for (std::size_t c = 0; c < spec.num_classes; ++c) {
            for (std::size_t s = 0; s < per_class; ++s, ++row) {
                for (std::size_t d = 0; d < spec.joint_dim; ++d) {
                    bank.features.at(row, d) =
                        prototypes[c][d] + spec.noise_sigma * noise(rng);
                }
                bank.labels.push_back(c);
            }
        }
        numerics::normalize_rows(bank.features);
    };
    fill_bank(task.train, spec.shots_per_class);
    fill_bank(task.test, spec.test_per_class);
    return task;
}

FewShotTask base_novel_split(FewShotTask task, double base_fraction, std::uint64_t seed) {
    if (!(base_fraction > 0.0 && base_fraction < 1.0)) {
        throw ParameterError("base_novel_split: base_fraction must be in (0,1)");
    }
    const std::size_t k = task.classes.size();
    std::vector<std::size_t> ids(k);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t n_base = static_cast<std::size_t>(
        std::ceil(static_cast<double>(k) * base_fraction));
    if (n_base < 1 || n_base >= k) {
        throw ParameterError("base_novel_split: degenerate partition");
    }
    BaseNovelPartition part;
    part.base.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_base));
    part.novel.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_base), ids.end());
    std::sort(part.base.begin(), part.base.end());
    std::sort(part.novel.begin(), part.novel.end());
    task.partition = std::move(part);
    return task;
}

double harmonic_mean(double base_acc, double novel_acc) {
    if (base_acc < 0.0 || novel_acc < 0.0) {
        throw ParameterError("harmonic_mean: accuracies must be >= 0");
    }
    if (base_acc == 0.0 && novel_acc == 0.0) {
        throw DegenerateInputError("harmonic_mean: undefined for (0, 0)");
    }
    return 2.0 * base_acc * novel_acc / (base_acc + novel_acc);
}

namespace {

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_bank(std::ofstream& out, const model::ImageFeatureBank& bank, const char* split) {
    for (std::size_t r = 0; r < bank.features.rows(); ++r) {
        out << "image " << split << ' ' << bank.labels[r];
        for (double x : bank.features.row(r)) out << ' ' << fmt_double(x);
        out << '\n';
    }
}

}  // namespace

void save_task(const FewShotTask& task, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_task: cannot open " + path);
    out << "plpp-task v1\n";
    const auto& s = task.spec;
    out << "spec classes=" << s.num_classes << " shots=" << s.shots_per_class
        << " test_per_class=" << s.test_per_class << " joint_dim=" << s.joint_dim
        << " noise=" << fmt_double(s.noise_sigma) << " seed=" << s.seed << '\n';
    for (const auto& c : task.classes) {
        out << "class " << c.class_id << ' ' << c.class_token << ' ' << c.name << '\n';
    }
    if (task.partition) {
        out << "partition";
        for (std::size_t id : task.partition->base) out << " b" << id;
        for (std::size_t id : task.partition->novel) out << " n" << id;
        out << '\n';
    }
    write_bank(out, task.train, "train");
    write_bank(out, task.test, "test");
    out << "end\n";
    if (!out) throw IoError("save_task: write failed for " + path);
}

FewShotTask load_task(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_task: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "plpp-task v1") {
        throw IoError("load_task: bad header in " + path);
    }
    FewShotTask task;
    auto& s = task.spec;
    if (!std::getline(in, line) ||
        std::sscanf(line.c_str(), "spec classes=%zu shots=%zu test_per_class=%zu "
                    "joint_dim=%zu noise=%lf seed=%lu",
                    &s.num_classes, &s.shots_per_class, &s.test_per_class, &s.joint_dim,
                    &s.noise_sigma, &s.seed) != 6) {
        throw IoError("load_task: bad spec line in " + path);
    }
    std::vector<std::vector<double>> train_rows, test_rows;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "class") {
            model::ClassSpec c;
            ls >> c.class_id >> c.class_token >> c.name;
            if (!ls) throw IoError("load_task: bad class line");
            task.classes.push_back(std::move(c));
        } else if (tag == "partition") {
            BaseNovelPartition part;
            std::string tok;
            while (ls >> tok) {
                std::size_t id = std::stoul(tok.substr(1));
                (tok[0] == 'b' ? part.base : part.novel).push_back(id);
            }
            task.partition = std::move(part);
        } else if (tag == "image") {
            std::string split;
            std::size_t label;
            ls >> split >> label;
            std::vector<double> row(s.joint_dim);
            for (double& x : row) ls >> x;
            if (!ls) throw IoError("load_task: bad image line");
            auto& rows = split == "train" ? train_rows : test_rows;
            auto& bank = split == "train" ? task.train : task.test;
            bank.labels.push_back(label);
            rows.push_back(std::move(row));
        } else {
            throw IoError("load_task: unknown record '" + tag + "'");
        }
    }
    if (!saw_end) throw IoError("load_task: truncated file " + path);
    auto pack = [&](model::ImageFeatureBank& bank, std::vector<std::vector<double>>& rows) {
        bank.features = Matrix(rows.size(), s.joint_dim);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::copy(rows[r].begin(), rows[r].end(), bank.features.row(r).begin());
        }
    };
    pack(task.train, train_rows);
    pack(task.test, test_rows);
    return task;
}

}  // namespace plpp::data
