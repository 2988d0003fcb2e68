#include "plpp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>
#include <utility>

#include "plpp/errors.hpp"

namespace plpp::ad {

namespace {

Var make_node(Matrix value, std::vector<Var> parents,
              std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    return n;
}

void acc(const Var& p, const Matrix& g) {
    if (p->requires_grad) p->accumulate(g);
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a->value.same_shape(b->value)) {
        throw DimensionError(std::string(op) + ": shape mismatch");
    }
}

}  // namespace

void Node::accumulate(const Matrix& g) {
    if (!grad_init) {
        grad = Matrix(value.rows(), value.cols());
        grad_init = true;
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad.values()[i] += g.values()[i];
    }
}

Var constant(Matrix value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return n;
}

Var parameter(Matrix value, std::string id) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    n->param_id = std::move(id);
    return n;
}

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Matrix out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b->value.values()[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
        acc(self.parents[0], self.grad);
        acc(self.parents[1], self.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Matrix out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b->value.values()[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
        acc(self.parents[0], self.grad);
        if (self.parents[1]->requires_grad) {
            Matrix g = self.grad;
            for (double& x : g.values()) x = -x;
            self.parents[1]->accumulate(g);
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Matrix out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b->value.values()[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
        for (int side = 0; side < 2; ++side) {
            const Var& target = self.parents[side];
            const Var& other = self.parents[1 - side];
            if (!target->requires_grad) continue;
            Matrix g = self.grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                g.values()[i] *= other->value.values()[i];
            }
            target->accumulate(g);
        }
    });
}

Var scale(const Var& a, double s) {
    Matrix out = a->value;
    for (double& x : out.values()) x *= s;
    return make_node(std::move(out), {a}, [s](Node& self) {
        Matrix g = self.grad;
        for (double& x : g.values()) x *= s;
        acc(self.parents[0], g);
    });
}

Var matmul(const Var& a, const Var& b) {
    if (a->value.cols() != b->value.rows()) {
        throw DimensionError("ad::matmul: a.cols != b.rows");
    }
    const Matrix& av = a->value;
    const Matrix& bv = b->value;
    Matrix out(av.rows(), bv.cols());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        for (std::size_t j = 0; j < bv.cols(); ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < av.cols(); ++t) s += av.at(i, t) * bv.at(t, j);
            out.at(i, j) = s;
        }
    }
    return make_node(std::move(out), {a, b}, [](Node& self) {
        const Matrix& g = self.grad;
        const Matrix& av = self.parents[0]->value;
        const Matrix& bv = self.parents[1]->value;
        if (self.parents[0]->requires_grad) {
            Matrix ga(av.rows(), av.cols());
            for (std::size_t i = 0; i < av.rows(); ++i) {
                for (std::size_t t = 0; t < av.cols(); ++t) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < bv.cols(); ++j) s += g.at(i, j) * bv.at(t, j);
                    ga.at(i, t) = s;
                }
            }
            self.parents[0]->accumulate(ga);
        }
        if (self.parents[1]->requires_grad) {
            Matrix gb(bv.rows(), bv.cols());
            for (std::size_t t = 0; t < bv.rows(); ++t) {
                for (std::size_t j = 0; j < bv.cols(); ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < av.rows(); ++i) s += av.at(i, t) * g.at(i, j);
                    gb.at(t, j) = s;
                }
            }
            self.parents[1]->accumulate(gb);
        }
    });
}

Var transpose(const Var& a) {
    return make_node(a->value.transposed(), {a}, [](Node& self) {
        acc(self.parents[0], self.grad.transposed());
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ParameterError("concat_rows: no parts");
    std::size_t cols = parts[0]->value.cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p->value.cols() != cols) throw DimensionError("concat_rows: column mismatch");
        rows += p->value.rows();
    }
    Matrix out(rows, cols);
    std::size_t r = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p->value.rows(); ++i, ++r) {
            std::copy(p->value.row(i).begin(), p->value.row(i).end(), out.row(r).begin());
        }
    }
    return make_node(std::move(out), parts, [](Node& self) {
        std::size_t r = 0;
        for (const auto& p : self.parents) {
            std::size_t nr = p->value.rows();
            if (p->requires_grad) {
                Matrix g(nr, p->value.cols());
                for (std::size_t i = 0; i < nr; ++i) {
                    std::copy(self.grad.row(r + i).begin(), self.grad.row(r + i).end(),
                              g.row(i).begin());
                }
                p->accumulate(g);
            }
            r += nr;
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ParameterError("concat_cols: no parts");
    std::size_t rows = parts[0]->value.rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p->value.rows() != rows) throw DimensionError("concat_cols: row mismatch");
        cols += p->value.cols();
    }
    Matrix out(rows, cols);
    std::size_t c = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < p->value.cols(); ++j) {
                out.at(i, c + j) = p->value.at(i, j);
            }
        }
        c += p->value.cols();
    }
    return make_node(std::move(out), parts, [](Node& self) {
        std::size_t c = 0;
        for (const auto& p : self.parents) {
            std::size_t nc = p->value.cols();
            if (p->requires_grad) {
                Matrix g(p->value.rows(), nc);
                for (std::size_t i = 0; i < g.rows(); ++i) {
                    for (std::size_t j = 0; j < nc; ++j) {
                        g.at(i, j) = self.grad.at(i, c + j);
                    }
                }
                p->accumulate(g);
            }
            c += nc;
        }
    });
}

Var slice_rows(const Var& a, std::size_t r0, std::size_t n) {
    if (r0 + n > a->value.rows()) throw DimensionError("slice_rows: out of range");
    Matrix out(n, a->value.cols());
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(a->value.row(r0 + i).begin(), a->value.row(r0 + i).end(), out.row(i).begin());
    }
    return make_node(std::move(out), {a}, [r0, n](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g(p->value.rows(), p->value.cols());
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(self.grad.row(i).begin(), self.grad.row(i).end(), g.row(r0 + i).begin());
        }
        p->accumulate(g);
    });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t n) {
    if (c0 + n > a->value.cols()) throw DimensionError("slice_cols: out of range");
    Matrix out(a->value.rows(), n);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = a->value.at(i, c0 + j);
    }
    return make_node(std::move(out), {a}, [c0, n](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g(p->value.rows(), p->value.cols());
        for (std::size_t i = 0; i < self.grad.rows(); ++i) {
            for (std::size_t j = 0; j < n; ++j) g.at(i, c0 + j) = self.grad.at(i, j);
        }
        p->accumulate(g);
    });
}

Var entry(const Var& a, std::size_t r, std::size_t c) {
    if (r >= a->value.rows() || c >= a->value.cols()) {
        throw DimensionError("entry: out of range");
    }
    Matrix out(1, 1);
    out.at(0, 0) = a->value.at(r, c);
    return make_node(std::move(out), {a}, [r, c](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g(p->value.rows(), p->value.cols());
        g.at(r, c) = self.grad.at(0, 0);
        p->accumulate(g);
    });
}

Var row_softmax(const Var& a, double temperature, bool causal) {
    if (!(temperature > 0.0)) throw ParameterError("ad::row_softmax: temperature must be > 0");
    const Matrix& x = a->value;
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::size_t limit = causal ? std::min(r + 1, x.cols()) : x.cols();
        double mx = x.at(r, 0);
        for (std::size_t c = 1; c < limit; ++c) mx = std::max(mx, x.at(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < limit; ++c) {
            double e = std::exp((x.at(r, c) - mx) / temperature);
            out.at(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < limit; ++c) out.at(r, c) /= sum;
        // masked entries stay zero
    }
    return make_node(std::move(out), {a}, [temperature, causal](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        const Matrix& y = self.value;
        const Matrix& gy = self.grad;
        Matrix gx(y.rows(), y.cols());
        for (std::size_t r = 0; r < y.rows(); ++r) {
            std::size_t limit = causal ? std::min(r + 1, y.cols()) : y.cols();
            double dot = 0.0;
            for (std::size_t c = 0; c < limit; ++c) dot += gy.at(r, c) * y.at(r, c);
            for (std::size_t c = 0; c < limit; ++c) {
                gx.at(r, c) = y.at(r, c) * (gy.at(r, c) - dot) / temperature;
            }
        }
        p->accumulate(gx);
    });
}

Var layer_norm(const Var& a, const std::vector<double>& gamma,
               const std::vector<double>& beta, double eps) {
    const Matrix& x = a->value;
    if (gamma.size() != x.cols() || beta.size() != x.cols()) {
        throw DimensionError("layer_norm: affine size mismatch");
    }
    Matrix out(x.rows(), x.cols());
    Matrix xhat(x.rows(), x.cols());
    std::vector<double> inv_std(x.rows());
    std::size_t d = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double mu = 0.0;
        for (std::size_t c = 0; c < d; ++c) mu += x.at(r, c);
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double dv = x.at(r, c) - mu;
            var += dv * dv;
        }
        var /= static_cast<double>(d);
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < d; ++c) {
            xhat.at(r, c) = (x.at(r, c) - mu) * inv_std[r];
            out.at(r, c) = gamma[c] * xhat.at(r, c) + beta[c];
        }
    }
    return make_node(std::move(out), {a},
                     [gamma, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        const Matrix& gy = self.grad;
        std::size_t d = gy.cols();
        Matrix gx(gy.rows(), d);
        for (std::size_t r = 0; r < gy.rows(); ++r) {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double gg = gy.at(r, c) * gamma[c];
                m1 += gg;
                m2 += gg * xhat.at(r, c);
            }
            m1 /= static_cast<double>(d);
            m2 /= static_cast<double>(d);
            for (std::size_t c = 0; c < d; ++c) {
                double gg = gy.at(r, c) * gamma[c];
                gx.at(r, c) = (gg - m1 - xhat.at(r, c) * m2) * inv_std[r];
            }
        }
        p->accumulate(gx);
    });
}

Var gelu(const Var& a) {
    Matrix out = a->value;
    for (double& x : out.values()) {
        x = x * 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    }
    return make_node(std::move(out), {a}, [](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g = self.grad;
        const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = p->value.values()[i];
            double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
            double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
            g.values()[i] *= cdf + x * pdf;
        }
        p->accumulate(g);
    });
}

Var row_l2_normalize(const Var& a) {
    const Matrix& x = a->value;
    Matrix out(x.rows(), x.cols());
    std::vector<double> norms(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double n2 = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) n2 += x.at(r, c) * x.at(r, c);
        double n = std::sqrt(n2);
        if (n == 0.0) throw DegenerateInputError("row_l2_normalize: zero-norm row");
        norms[r] = n;
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c) / n;
    }
    return make_node(std::move(out), {a}, [norms = std::move(norms)](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        const Matrix& y = self.value;
        const Matrix& gy = self.grad;
        Matrix gx(y.rows(), y.cols());
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) dot += gy.at(r, c) * y.at(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c) {
                gx.at(r, c) = (gy.at(r, c) - y.at(r, c) * dot) / norms[r];
            }
        }
        p->accumulate(gx);
    });
}

Var log_floor(const Var& a, double eps) {
    if (!(eps > 0.0)) throw ParameterError("log_floor: eps must be > 0");
    Matrix out = a->value;
    for (double& x : out.values()) x = std::log(std::max(x, eps));
    return make_node(std::move(out), {a}, [eps](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g = self.grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = p->value.values()[i];
            g.values()[i] = x > eps ? g.values()[i] / x : 0.0;
        }
        p->accumulate(g);
    });
}

Var exp_elem(const Var& a) {
    Matrix out = a->value;
    for (double& x : out.values()) x = std::exp(x);
    return make_node(std::move(out), {a}, [](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g = self.grad;
        for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] *= self.value.values()[i];
        p->accumulate(g);
    });
}

Var sum_all(const Var& a) {
    Matrix out(1, 1);
    double s = 0.0;
    for (double x : a->value.values()) s += x;
    out.at(0, 0) = s;
    return make_node(std::move(out), {a}, [](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g(p->value.rows(), p->value.cols());
        for (double& x : g.values()) x = self.grad.at(0, 0);
        p->accumulate(g);
    });
}

Var mean_all(const Var& a) {
    return scale(sum_all(a), 1.0 / static_cast<double>(a->value.size()));
}

Var gather_per_row(const Var& a, const std::vector<std::vector<std::size_t>>& idx) {
    const Matrix& x = a->value;
    if (idx.size() != x.rows()) throw DimensionError("gather_per_row: row count mismatch");
    std::size_t k = idx.empty() ? 0 : idx[0].size();
    Matrix out(x.rows(), k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        if (idx[r].size() != k) throw DimensionError("gather_per_row: ragged index matrix");
        for (std::size_t j = 0; j < k; ++j) {
            if (idx[r][j] >= x.cols()) throw ParameterError("gather_per_row: index out of range");
            out.at(r, j) = x.at(r, idx[r][j]);
        }
    }
    return make_node(std::move(out), {a}, [idx](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        Matrix g(p->value.rows(), p->value.cols());
        for (std::size_t r = 0; r < self.grad.rows(); ++r) {
            for (std::size_t j = 0; j < self.grad.cols(); ++j) {
                g.at(r, idx[r][j]) += self.grad.at(r, j);
            }
        }
        p->accumulate(g);
    });
}

Var row_renormalize(const Var& a) {
    const Matrix& x = a->value;
    Matrix out(x.rows(), x.cols());
    std::vector<double> sums(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) s += x.at(r, c);
        if (s == 0.0) throw DegenerateInputError("row_renormalize: zero-sum row");
        sums[r] = s;
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c) / s;
    }
    return make_node(std::move(out), {a}, [sums = std::move(sums)](Node& self) {
        const Var& p = self.parents[0];
        if (!p->requires_grad) return;
        const Matrix& y = self.value;
        const Matrix& gy = self.grad;
        Matrix gx(y.rows(), y.cols());
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) dot += gy.at(r, c) * y.at(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c) {
                gx.at(r, c) = (gy.at(r, c) - dot) / sums[r];
            }
        }
        p->accumulate(gx);
    });
}

std::vector<GradRecord> backward(const Var& loss) {
    if (loss->value.rows() != 1 || loss->value.cols() != 1) {
        throw ContractError("backward: loss must be scalar");
    }
    if (!loss->requires_grad) return {};
    // iterative post-order over the grad-requiring subgraph
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    if (loss->requires_grad) {
        stack.emplace_back(loss.get(), 0);
        visited.insert(loss.get());
    }
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.contains(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (Node* n : order) n->grad_init = false;
    Matrix seed(1, 1);
    seed.at(0, 0) = 1.0;
    loss->accumulate(seed);
    std::vector<GradRecord> records;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (!n->grad_init) continue;  // unreachable from the seed
        if (!n->param_id.empty()) {
            records.push_back({n->param_id, n->grad});
        }
        if (n->backprop) n->backprop(*n);
    }
    return records;
}

}  // namespace plpp::ad
