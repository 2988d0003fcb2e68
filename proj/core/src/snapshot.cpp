#include "plpp/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "plpp/errors.hpp"

namespace plpp::snapshot {

const Matrix* Snapshot::find(const std::string& name) const {
    for (const auto& [n, m] : matrices) {
        if (n == name) return &m;
    }
    return nullptr;
}

void save(const Snapshot& snap, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("snapshot::save: cannot open " + path);
    const auto& c = snap.config;
    out << "plpp-snapshot v1\n";
    out << "config vocab_size=" << c.vocab_size << " embed_dim=" << c.embed_dim
        << " encoder_layers=" << c.encoder_layers << " attention_heads=" << c.attention_heads
        << " joint_dim=" << c.joint_dim << " prompt_len=" << c.prompt_len
        << " seed=" << c.seed << '\n';
    char buf[32];
    for (const auto& [name, m] : snap.matrices) {
        out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t col = 0; col < m.cols(); ++col) {
                std::snprintf(buf, sizeof(buf), "%.17g", m.at(r, col));
                out << (col ? " " : "") << buf;
            }
            out << '\n';
        }
    }
    out << "end\n";
    if (!out) throw IoError("snapshot::save: write failed for " + path);
}

Snapshot load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("snapshot::load: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "plpp-snapshot v1") {
        throw IoError("snapshot::load: bad header in " + path);
    }
    Snapshot snap;
    auto& c = snap.config;
    if (!std::getline(in, line) ||
        std::sscanf(line.c_str(),
                    "config vocab_size=%zu embed_dim=%zu encoder_layers=%zu "
                    "attention_heads=%zu joint_dim=%zu prompt_len=%zu seed=%lu",
                    &c.vocab_size, &c.embed_dim, &c.encoder_layers, &c.attention_heads,
                    &c.joint_dim, &c.prompt_len, &c.seed) != 7) {
        throw IoError("snapshot::load: bad config line in " + path);
    }
    while (std::getline(in, line)) {
        if (line == "end") return snap;
        std::istringstream ls(line);
        std::string tag, name;
        std::size_t rows, cols;
        ls >> tag >> name >> rows >> cols;
        if (!ls || tag != "matrix") throw IoError("snapshot::load: bad matrix header");
        Matrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!std::getline(in, line)) throw IoError("snapshot::load: truncated matrix");
            std::istringstream rs(line);
            for (std::size_t col = 0; col < cols; ++col) rs >> m.at(r, col);
            if (!rs) throw IoError("snapshot::load: bad matrix row");
        }
        snap.matrices.emplace_back(std::move(name), std::move(m));
    }
    throw IoError("snapshot::load: truncated file " + path);
}

namespace {

Matrix row_matrix(const std::vector<double>& v) {
    return Matrix(1, v.size(), v);
}

std::vector<double> need_row(const Snapshot& s, const std::string& name) {
    const Matrix* m = s.find(name);
    if (!m || m->rows() != 1) throw IoError("snapshot: missing vector " + name);
    return m->values();
}

Matrix need_matrix(const Snapshot& s, const std::string& name) {
    const Matrix* m = s.find(name);
    if (!m) throw IoError("snapshot: missing matrix " + name);
    return *m;
}

}  // namespace

Snapshot snapshot_model(const model::Model& m) {
    Snapshot s;
    s.config = m.config;
    s.matrices.emplace_back("embedding", m.embedding.table);
    for (std::size_t l = 0; l < m.encoder.layers.size(); ++l) {
        const auto& layer = m.encoder.layers[l];
        std::string p = "layer" + std::to_string(l) + ".";
        s.matrices.emplace_back(p + "wq", layer.wq);
        s.matrices.emplace_back(p + "wk", layer.wk);
        s.matrices.emplace_back(p + "wv", layer.wv);
        s.matrices.emplace_back(p + "wo", layer.wo);
        s.matrices.emplace_back(p + "wff1", layer.wff1);
        s.matrices.emplace_back(p + "wff2", layer.wff2);
        s.matrices.emplace_back(p + "ln1_gamma", row_matrix(layer.ln1_gamma));
        s.matrices.emplace_back(p + "ln1_beta", row_matrix(layer.ln1_beta));
        s.matrices.emplace_back(p + "ln2_gamma", row_matrix(layer.ln2_gamma));
        s.matrices.emplace_back(p + "ln2_beta", row_matrix(layer.ln2_beta));
    }
    s.matrices.emplace_back("final_ln_gamma", row_matrix(m.encoder.final_ln_gamma));
    s.matrices.emplace_back("final_ln_beta", row_matrix(m.encoder.final_ln_beta));
    s.matrices.emplace_back("positional", m.encoder.positional);
    s.matrices.emplace_back("proj", m.encoder.proj);
    return s;
}

model::Model model_from_snapshot(const Snapshot& snap) {
    snap.config.validate();
    model::Model m;
    m.config = snap.config;
    m.embedding.table = need_matrix(snap, "embedding");
    for (std::size_t l = 0; l < snap.config.encoder_layers; ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        model::EncoderLayer layer;
        layer.wq = need_matrix(snap, p + "wq");
        layer.wk = need_matrix(snap, p + "wk");
        layer.wv = need_matrix(snap, p + "wv");
        layer.wo = need_matrix(snap, p + "wo");
        layer.wff1 = need_matrix(snap, p + "wff1");
        layer.wff2 = need_matrix(snap, p + "wff2");
        layer.ln1_gamma = need_row(snap, p + "ln1_gamma");
        layer.ln1_beta = need_row(snap, p + "ln1_beta");
        layer.ln2_gamma = need_row(snap, p + "ln2_gamma");
        layer.ln2_beta = need_row(snap, p + "ln2_beta");
        m.encoder.layers.push_back(std::move(layer));
    }
    m.encoder.final_ln_gamma = need_row(snap, "final_ln_gamma");
    m.encoder.final_ln_beta = need_row(snap, "final_ln_beta");
    m.encoder.positional = need_matrix(snap, "positional");
    m.encoder.proj = need_matrix(snap, "proj");
    return m;
}

Snapshot snapshot_prompt(const model::ModelConfig& config, const model::PromptContext& prompt) {
    Snapshot s;
    s.config = config;
    s.matrices.emplace_back("prompt.V", prompt.v);
    return s;
}

model::PromptContext prompt_from_snapshot(const Snapshot& snap) {
    return {need_matrix(snap, "prompt.V")};
}

}  // namespace plpp::snapshot
