#pragma once
// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. A tape of operations is built during the forward pass; backward()
// walks it in reverse creation order (creation order is topological).
// Single-threaded and bit-deterministic: fixed summation order everywhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgsum {

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return a.size(); }

    static Mat zeros_like(const Mat& m) { return Mat(m.rows, m.cols); }
};

// C += op(A) * op(B), with optional transposes.
inline void gemm_acc(Mat& c, const Mat& x, bool tx, const Mat& y, bool ty) {
    const int m = tx ? x.cols : x.rows;
    const int k = tx ? x.rows : x.cols;
    const int k2 = ty ? y.cols : y.rows;
    const int n = ty ? y.rows : y.cols;
    if (k != k2 || c.rows != m || c.cols != n) throw std::logic_error("gemm shape mismatch");
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double xv = tx ? x(p, i) : x(i, p);
            if (xv == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                c(i, j) += xv * (ty ? y(j, p) : y(p, j));
            }
        }
    }
}

inline Mat matmul_values(const Mat& x, bool tx, const Mat& y, bool ty) {
    Mat c(tx ? x.cols : x.rows, ty ? y.rows : y.cols);
    gemm_acc(c, x, tx, y, ty);
    return c;
}

// Per-row neighbor lists for masked softmax attention; an empty row yields an
// all-zero attention row.
using RowMask = std::vector<std::vector<int>>;

class Tape {
public:
    // Leaf value (parameter or constant). Gradients accumulate for all leaves;
    // callers read back only the ones they care about.
    int leaf(Mat value) {
        return push(std::move(value), nullptr);
    }

    const Mat& value(int id) const { return nodes_[id].value; }
    const Mat& grad(int id) const { return nodes_[id].grad; }

    int matmul(int x, int y, bool tx = false, bool ty = false) {
        Mat v = matmul_values(nodes_[x].value, tx, nodes_[y].value, ty);
        return push(std::move(v), [this, x, y, tx, ty](int self) {
            const Mat& g = nodes_[self].grad;
            // d/dX and d/dY for C = op(X) op(Y)
            if (!tx) {
                gemm_acc(nodes_[x].grad, g, false, nodes_[y].value, !ty);
            } else {
                gemm_acc(nodes_[x].grad, nodes_[y].value, ty, g, true);
            }
            if (!ty) {
                gemm_acc(nodes_[y].grad, nodes_[x].value, !tx, g, false);
            } else {
                gemm_acc(nodes_[y].grad, g, true, nodes_[x].value, tx);
            }
        });
    }

    int add(int x, int y) {
        const Mat& a = nodes_[x].value;
        const Mat& b = nodes_[y].value;
        if (a.rows != b.rows || a.cols != b.cols) throw std::logic_error("add shape mismatch");
        Mat v = a;
        for (size_t i = 0; i < v.size(); ++i) v.a[i] += b.a[i];
        return push(std::move(v), [this, x, y](int self) {
            const Mat& g = nodes_[self].grad;
            for (size_t i = 0; i < g.size(); ++i) nodes_[x].grad.a[i] += g.a[i];
            for (size_t i = 0; i < g.size(); ++i) nodes_[y].grad.a[i] += g.a[i];
        });
    }

    // A (n x c) + bias broadcast over rows (bias is 1 x c).
    int add_row_bias(int x, int bias) {
        const Mat& a = nodes_[x].value;
        const Mat& b = nodes_[bias].value;
        if (b.rows != 1 || b.cols != a.cols) throw std::logic_error("bias shape mismatch");
        Mat v = a;
        for (int i = 0; i < v.rows; ++i)
            for (int j = 0; j < v.cols; ++j) v(i, j) += b(0, j);
        return push(std::move(v), [this, x, bias](int self) {
            const Mat& g = nodes_[self].grad;
            Mat& gx = nodes_[x].grad;
            Mat& gb = nodes_[bias].grad;
            for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i];
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) gb(0, j) += g(i, j);
        });
    }

    int relu(int x) {
        Mat v = nodes_[x].value;
        for (auto& e : v.a) e = e > 0.0 ? e : 0.0;
        return push(std::move(v), [this, x](int self) {
            const Mat& g = nodes_[self].grad;
            const Mat& v = nodes_[self].value;
            Mat& gx = nodes_[x].grad;
            for (size_t i = 0; i < g.size(); ++i)
                if (v.a[i] > 0.0) gx.a[i] += g.a[i];
        });
    }

    int sigmoid(int x) {
        Mat v = nodes_[x].value;
        for (auto& e : v.a) e = 1.0 / (1.0 + std::exp(-e));
        return push(std::move(v), [this, x](int self) {
            const Mat& g = nodes_[self].grad;
            const Mat& v = nodes_[self].value;
            Mat& gx = nodes_[x].grad;
            for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i] * v.a[i] * (1.0 - v.a[i]);
        });
    }

    // Elementwise product with a constant mask (inverted dropout).
    int hadamard_const(int x, Mat mask) {
        const Mat& a = nodes_[x].value;
        if (mask.rows != a.rows || mask.cols != a.cols)
            throw std::logic_error("hadamard shape mismatch");
        Mat v = a;
        for (size_t i = 0; i < v.size(); ++i) v.a[i] *= mask.a[i];
        auto m = std::make_shared<Mat>(std::move(mask));
        return push(std::move(v), [this, x, m](int self) {
            const Mat& g = nodes_[self].grad;
            Mat& gx = nodes_[x].grad;
            for (size_t i = 0; i < g.size(); ++i) gx.a[i] += g.a[i] * m->a[i];
        });
    }

    // Concatenate along columns: [n x c1 | n x c2 | ...].
    int concat_cols(const std::vector<int>& xs) {
        if (xs.empty()) throw std::logic_error("concat of nothing");
        const int rows = nodes_[xs[0]].value.rows;
        int cols = 0;
        for (int x : xs) {
            if (nodes_[x].value.rows != rows) throw std::logic_error("concat row mismatch");
            cols += nodes_[x].value.cols;
        }
        Mat v(rows, cols);
        int off = 0;
        for (int x : xs) {
            const Mat& m = nodes_[x].value;
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < m.cols; ++j) v(i, off + j) = m(i, j);
            off += m.cols;
        }
        return push(std::move(v), [this, xs](int self) {
            const Mat& g = nodes_[self].grad;
            int off = 0;
            for (int x : xs) {
                Mat& gx = nodes_[x].grad;
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < gx.cols; ++j) gx(i, j) += g(i, off + j);
                off += gx.cols;
            }
        });
    }

    // Row-wise softmax restricted to each row's neighbor list; rows with no
    // neighbors become all-zero. scores is n x n.
    int masked_softmax_rows(int scores, const RowMask& mask) {
        const Mat& s = nodes_[scores].value;
        if (s.rows != s.cols || static_cast<int>(mask.size()) != s.rows)
            throw std::logic_error("softmax mask mismatch");
        Mat v(s.rows, s.cols);
        for (int i = 0; i < s.rows; ++i) {
            const auto& nbrs = mask[i];
            if (nbrs.empty()) continue;
            double mx = s(i, nbrs[0]);
            for (int j : nbrs) mx = std::max(mx, s(i, j));
            double sum = 0.0;
            for (int j : nbrs) sum += std::exp(s(i, j) - mx);
            for (int j : nbrs) v(i, j) = std::exp(s(i, j) - mx) / sum;
        }
        auto m = std::make_shared<RowMask>(mask);
        return push(std::move(v), [this, scores, m](int self) {
            const Mat& g = nodes_[self].grad;
            const Mat& v = nodes_[self].value;
            Mat& gs = nodes_[scores].grad;
            for (int i = 0; i < g.rows; ++i) {
                const auto& nbrs = (*m)[i];
                if (nbrs.empty()) continue;
                double dot = 0.0;
                for (int j : nbrs) dot += g(i, j) * v(i, j);
                for (int j : nbrs) gs(i, j) += v(i, j) * (g(i, j) - dot);
            }
        });
    }

    // Mean negative log likelihood over the given positive and negative rows
    // of an n x 1 probability column; probabilities clamped to
    // [eps, 1 - eps] with eps = 1e-12 before the log.
    int nll_loss(int probs, std::vector<int> positives, std::vector<int> negatives) {
        static constexpr double kEps = 1e-12;
        const Mat& p = nodes_[probs].value;
        if (p.cols != 1) throw std::logic_error("nll expects a column of probabilities");
        const size_t contributing = positives.size() + negatives.size();
        if (contributing == 0) throw std::logic_error("nll with no contributing nodes");
        double total = 0.0;
        for (int i : positives) total -= std::log(std::clamp(p(i, 0), kEps, 1.0 - kEps));
        for (int i : negatives) total -= std::log(std::clamp(1.0 - p(i, 0), kEps, 1.0 - kEps));
        Mat v(1, 1);
        v(0, 0) = total / static_cast<double>(contributing);
        auto pos = std::make_shared<std::vector<int>>(std::move(positives));
        auto neg = std::make_shared<std::vector<int>>(std::move(negatives));
        return push(std::move(v), [this, probs, pos, neg, contributing](int self) {
            const double g = nodes_[self].grad(0, 0) / static_cast<double>(contributing);
            const Mat& p = nodes_[probs].value;
            Mat& gp = nodes_[probs].grad;
            for (int i : *pos) {
                const double pi = p(i, 0);
                if (pi > kEps && pi < 1.0 - kEps) gp(i, 0) -= g / pi;
            }
            for (int i : *neg) {
                const double qi = 1.0 - p(i, 0);
                if (qi > kEps && qi < 1.0 - kEps) gp(i, 0) += g / qi;
            }
        });
    }

    // Seeds d(node)/d(node) = 1 and accumulates into every node's grad.
    void backward(int node) {
        for (auto& n : nodes_) {
            n.grad = Mat(n.value.rows, n.value.cols);
        }
        if (nodes_[node].value.size() != 1) throw std::logic_error("backward needs a scalar");
        nodes_[node].grad(0, 0) = 1.0;
        for (int i = node; i >= 0; --i) {
            if (nodes_[i].backward) nodes_[i].backward(i);
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void(int)> backward;
    };

    int push(Mat value, std::function<void(int)> backward) {
        nodes_.push_back({std::move(value), Mat(), std::move(backward)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
};

}  // namespace kgsum
