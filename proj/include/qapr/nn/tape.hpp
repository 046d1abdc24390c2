// SPDX-License-Identifier: MIT

/**
 * @file tape.hpp
 * @brief Reverse-mode automatic differentiation over dense matrices.
 *
 * Each operation appends a node holding its value and a backward closure.
 * `backward` seeds the gradient of a 1x1 output and walks the tape in reverse.
 */

#pragma once

#include "qapr/errors.hpp"
#include "qapr/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace qapr::nn {

struct Var {
    int id = -1;
};

/**
 * Mixed attention probabilities: softmax(S) rowwise, times (exp(alpha) * Bt + eps),
 * renormalized per row. Bt must be nonnegative.
 */
[[nodiscard]] inline Mat mix_attention_probs(const Mat& s, double alpha, const Mat& bt, double eps) {
    require_shape(s.same_shape(bt) && s.rows == s.cols, "mix_attention", s, bt);
    const double scale = std::exp(alpha);
    Mat a(s.rows, s.cols);
    for (int i = 0; i < s.rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < s.cols; ++j) {
            mx = std::max(mx, s(i, j));
        }
        double z = 0.0;
        for (int j = 0; j < s.cols; ++j) {
            a(i, j) = std::exp(s(i, j) - mx);
            z += a(i, j);
        }
        double w = 0.0;
        for (int j = 0; j < s.cols; ++j) {
            a(i, j) = (a(i, j) / z) * (scale * bt(i, j) + eps);
            w += a(i, j);
        }
        for (int j = 0; j < s.cols; ++j) {
            a(i, j) /= w;
        }
    }
    return a;
}

/// Row-max normalization to [0,1]; all-zero rows stay zero.
[[nodiscard]] inline Mat row_max_normalize(const Mat& b) {
    Mat out = b;
    for (int i = 0; i < b.rows; ++i) {
        double mx = 0.0;
        for (int j = 0; j < b.cols; ++j) {
            if (b(i, j) < 0.0) {
                throw InvalidShape("attention bias must be nonnegative");
            }
            mx = std::max(mx, b(i, j));
        }
        if (mx > 0.0) {
            for (int j = 0; j < b.cols; ++j) {
                out(i, j) /= mx;
            }
        }
    }
    return out;
}

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete; // backward closures hold `this`
    Tape& operator=(const Tape&) = delete;

    Var leaf(Mat value) { return push(std::move(value), {}); }

    [[nodiscard]] const Mat& value(Var x) const { return nodes_[idx(x)].value; }
    [[nodiscard]] const Mat& grad(Var x) const { return nodes_[idx(x)].grad; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

    /// Seeds d(out)/d(out) = seed and accumulates gradients of every node.
    void backward(Var out, double seed = 1.0) {
        const Mat& o = value(out);
        if (o.rows != 1 || o.cols != 1) {
            throw ShapeMismatch("backward needs a 1x1 output, got " + shape_str(o));
        }
        for (auto& n : nodes_) {
            n.grad = Mat(n.value.rows, n.value.cols);
        }
        nodes_[idx(out)].grad.v[0] = seed;
        for (std::size_t k = idx(out) + 1; k-- > 0;) {
            if (nodes_[k].back) {
                nodes_[k].back();
            }
        }
    }

    Var matmul(Var a, Var b) {
        Mat c = nn::matmul(value(a), value(b));
        return push(std::move(c), [this, a, b, me = next()] {
            const Mat& g = gref(me);
            gemm_nt_acc(g, value(b), gmut(a));
            gemm_tn_acc(value(a), g, gmut(b));
        });
    }

    /// A * B^T
    Var matmul_nt(Var a, Var b) {
        const Mat& va = value(a);
        const Mat& vb = value(b);
        require_shape(va.cols == vb.cols, "matmul_nt", va, vb);
        Mat c(va.rows, vb.rows);
        gemm_nt_acc(va, vb, c);
        return push(std::move(c), [this, a, b, me = next()] {
            const Mat& g = gref(me);
            gemm_acc(g, value(b), gmut(a));
            gemm_tn_acc(g, value(a), gmut(b));
        });
    }

    Var add(Var a, Var b) { return lincomb(a, 1.0, b, 1.0); }
    Var sub(Var a, Var b) { return lincomb(a, 1.0, b, -1.0); }

    Var scale(Var a, double s) {
        Mat c = value(a);
        for (double& x : c.v) {
            x *= s;
        }
        return push(std::move(c), [this, a, s, me = next()] {
            const Mat& g = gref(me);
            Mat& ga = gmut(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga.v[i] += s * g.v[i];
            }
        });
    }

    /// A + 1 b^T with b a 1 x cols row.
    Var add_row(Var a, Var b) {
        const Mat& va = value(a);
        const Mat& vb = value(b);
        require_shape(vb.rows == 1 && vb.cols == va.cols, "add_row", va, vb);
        Mat c = va;
        for (int i = 0; i < c.rows; ++i) {
            for (int j = 0; j < c.cols; ++j) {
                c(i, j) += vb(0, j);
            }
        }
        return push(std::move(c), [this, a, b, me = next()] {
            const Mat& g = gref(me);
            Mat& ga = gmut(a);
            Mat& gb = gmut(b);
            for (int i = 0; i < g.rows; ++i) {
                for (int j = 0; j < g.cols; ++j) {
                    ga(i, j) += g(i, j);
                    gb(0, j) += g(i, j);
                }
            }
        });
    }

    Var relu(Var a) {
        Mat c = value(a);
        for (double& x : c.v) {
            x = x > 0.0 ? x : 0.0;
        }
        return push(std::move(c), [this, a, me = next()] {
            const Mat& g = gref(me);
            const Mat& va = value(a);
            Mat& ga = gmut(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga.v[i] += va.v[i] > 0.0 ? g.v[i] : 0.0;
            }
        });
    }

    Var abs(Var a) {
        Mat c = value(a);
        for (double& x : c.v) {
            x = std::fabs(x);
        }
        return push(std::move(c), [this, a, me = next()] {
            const Mat& g = gref(me);
            const Mat& va = value(a);
            Mat& ga = gmut(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga.v[i] += va.v[i] > 0.0 ? g.v[i] : (va.v[i] < 0.0 ? -g.v[i] : 0.0);
            }
        });
    }

    /// Row-wise layer normalization with gain and bias rows.
    Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5) {
        const Mat& va = value(a);
        require_shape(value(gain).rows == 1 && value(gain).cols == va.cols, "layer_norm", va, value(gain));
        require_shape(value(bias).same_shape(value(gain)), "layer_norm", value(gain), value(bias));
        const int n = va.cols;
        Mat xhat(va.rows, n);
        std::vector<double> inv_std(static_cast<std::size_t>(va.rows));
        for (int i = 0; i < va.rows; ++i) {
            double mean = 0.0;
            for (int j = 0; j < n; ++j) {
                mean += va(i, j);
            }
            mean /= n;
            double var = 0.0;
            for (int j = 0; j < n; ++j) {
                var += (va(i, j) - mean) * (va(i, j) - mean);
            }
            var /= n;
            const double is = 1.0 / std::sqrt(var + eps);
            inv_std[static_cast<std::size_t>(i)] = is;
            for (int j = 0; j < n; ++j) {
                xhat(i, j) = (va(i, j) - mean) * is;
            }
        }
        Mat c(va.rows, n);
        const Mat& g = value(gain);
        const Mat& b = value(bias);
        for (int i = 0; i < va.rows; ++i) {
            for (int j = 0; j < n; ++j) {
                c(i, j) = xhat(i, j) * g(0, j) + b(0, j);
            }
        }
        return push(std::move(c), [this, a, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std),
                                   me = next()] {
            const Mat& gy = gref(me);
            const Mat& gv = value(gain);
            Mat& ga = gmut(a);
            Mat& gg = gmut(gain);
            Mat& gb = gmut(bias);
            const int w = gy.cols;
            for (int i = 0; i < gy.rows; ++i) {
                double sum_dx = 0.0;
                double sum_dx_xhat = 0.0;
                for (int j = 0; j < w; ++j) {
                    const double dxhat = gy(i, j) * gv(0, j);
                    sum_dx += dxhat;
                    sum_dx_xhat += dxhat * xhat(i, j);
                    gg(0, j) += gy(i, j) * xhat(i, j);
                    gb(0, j) += gy(i, j);
                }
                const double is = inv_std[static_cast<std::size_t>(i)];
                for (int j = 0; j < w; ++j) {
                    const double dxhat = gy(i, j) * gv(0, j);
                    ga(i, j) += is * (dxhat - sum_dx / w - xhat(i, j) * sum_dx_xhat / w);
                }
            }
        });
    }

    /**
     * Attention probabilities from scores S, a 1x1 mixing parameter alpha and a
     * constant nonnegative bias Bt. Equivalent to softmax(S + log(exp(alpha) Bt + eps)).
     */
    Var mix_attention(Var s, Var alpha, const Mat& bt, double eps) {
        const double al = value(alpha).v.at(0);
        Mat a = mix_attention_probs(value(s), al, bt, eps);
        return push(std::move(a), [this, s, alpha, bt, eps, me = next()] {
            const Mat& g = gref(me);
            const Mat& p = value(me);
            Mat& gs = gmut(s);
            const double e = std::exp(value(alpha).v[0]);
            double galpha = 0.0;
            for (int i = 0; i < p.rows; ++i) {
                double dot = 0.0;
                for (int j = 0; j < p.cols; ++j) {
                    dot += p(i, j) * g(i, j);
                }
                for (int j = 0; j < p.cols; ++j) {
                    const double ds = p(i, j) * (g(i, j) - dot);
                    gs(i, j) += ds;
                    galpha += ds * e * bt(i, j) / (e * bt(i, j) + eps);
                }
            }
            gmut(alpha).v[0] += galpha;
        });
    }

    /// Rows of A picked by index; -1 yields a zero row.
    Var gather_rows(Var a, std::vector<int> index) {
        const Mat& va = value(a);
        Mat c(static_cast<int>(index.size()), va.cols);
        for (int r = 0; r < c.rows; ++r) {
            const int src = index[static_cast<std::size_t>(r)];
            if (src < -1 || src >= va.rows) {
                throw IndexError("gather_rows index out of range");
            }
            for (int j = 0; src >= 0 && j < va.cols; ++j) {
                c(r, j) = va(src, j);
            }
        }
        return push(std::move(c), [this, a, index = std::move(index), me = next()] {
            const Mat& g = gref(me);
            Mat& ga = gmut(a);
            for (int r = 0; r < g.rows; ++r) {
                const int src = index[static_cast<std::size_t>(r)];
                for (int j = 0; src >= 0 && j < g.cols; ++j) {
                    ga(src, j) += g(r, j);
                }
            }
        });
    }

    /// Column means, 1 x cols.
    Var mean_rows(Var a) {
        const Mat& va = value(a);
        Mat c(1, va.cols);
        for (int i = 0; i < va.rows; ++i) {
            for (int j = 0; j < va.cols; ++j) {
                c(0, j) += va(i, j);
            }
        }
        for (double& x : c.v) {
            x /= va.rows;
        }
        return push(std::move(c), [this, a, me = next()] {
            const Mat& g = gref(me);
            Mat& ga = gmut(a);
            for (int i = 0; i < ga.rows; ++i) {
                for (int j = 0; j < ga.cols; ++j) {
                    ga(i, j) += g(0, j) / ga.rows;
                }
            }
        });
    }

    Var sum(Var a) {
        double s = 0.0;
        for (double x : value(a).v) {
            s += x;
        }
        return push(Mat(1, 1, s), [this, a, me = next()] {
            const double g = gref(me).v[0];
            for (double& x : gmut(a).v) {
                x += g;
            }
        });
    }

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void()> back;
    };

    [[nodiscard]] std::size_t idx(Var x) const {
        if (x.id < 0 || static_cast<std::size_t>(x.id) >= nodes_.size()) {
            throw IndexError("variable not on this tape");
        }
        return static_cast<std::size_t>(x.id);
    }
    [[nodiscard]] Var next() const noexcept { return Var{static_cast<int>(nodes_.size())}; }
    [[nodiscard]] const Mat& gref(Var x) const { return nodes_[idx(x)].grad; }
    [[nodiscard]] Mat& gmut(Var x) { return nodes_[idx(x)].grad; }

    Var push(Mat value, std::function<void()> back) {
        nodes_.push_back(Node{std::move(value), Mat(), std::move(back)});
        return Var{static_cast<int>(nodes_.size() - 1)};
    }

    Var lincomb(Var a, double sa, Var b, double sb) {
        const Mat& va = value(a);
        const Mat& vb = value(b);
        require_shape(va.same_shape(vb), "add", va, vb);
        Mat c(va.rows, va.cols);
        for (std::size_t i = 0; i < c.size(); ++i) {
            c.v[i] = sa * va.v[i] + sb * vb.v[i];
        }
        return push(std::move(c), [this, a, b, sa, sb, me = next()] {
            const Mat& g = gref(me);
            Mat& ga = gmut(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga.v[i] += sa * g.v[i];
            }
            Mat& gb = gmut(b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                gb.v[i] += sb * g.v[i];
            }
        });
    }

    std::vector<Node> nodes_;
};

} // namespace qapr::nn
