// SPDX-License-Identifier: MIT

/**
 * @file encoder.hpp
 * @brief Solution-aware state encoder with policy and value heads.
 *
 * Pipeline for a state (F_hat, X, D):
 *   logical:  Z = W_E, L pre-norm blocks of flow-mixed attention + FFN, final LN
 *   physical: Z = Pi W_proj + b, L layers of Z += ReLU(Dbar (Z W + b))
 *   fusion:   FFN([Z_log, Z_phys]), one block with attention mixed by F_hat * Delta
 *   heads:    edge logit MLP([z_a + z_b, |z_a - z_b|]) per device edge, value MLP(mean rows)
 *
 * All parameters live in one flat tensor list; ParamLayout names them and fixes their order.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/errors.hpp"
#include "qapr/nn/tape.hpp"
#include "qapr/nn/tensor.hpp"
#include "qapr/qap.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace qapr::nn {

struct EncoderConfig {
    int n_logical = 6;
    int d = 16;           ///< hidden width
    int layers = 2;       ///< blocks in each encoder
    int heads = 2;
    int ffn_mult = 2;     ///< FFN hidden width = ffn_mult * d
    int head_hidden = 0;  ///< policy/value MLP width; 0 means d
    double eps = 1e-3;    ///< floor added to the normalized attention bias

    [[nodiscard]] int d_k() const noexcept { return heads > 0 ? d / heads : 0; }
    [[nodiscard]] int hidden() const noexcept { return head_hidden > 0 ? head_hidden : d; }

    void validate() const {
        if (n_logical < 2) {
            throw ConfigError("encoder needs at least 2 logical qubits");
        }
        if (d < 1 || layers < 0 || heads < 1 || ffn_mult < 1 || head_hidden < 0) {
            throw ConfigError("encoder widths must be positive");
        }
        if (d % heads != 0) {
            throw ConfigError("hidden width must be divisible by the head count");
        }
        if (!(eps > 0.0)) {
            throw ConfigError("attention floor eps must be > 0");
        }
    }

    /// Full-size encoder on n qubits: d = 256, 8 heads.
    [[nodiscard]] static EncoderConfig full_scale(int n) {
        EncoderConfig c;
        c.n_logical = n;
        c.d = 256;
        c.heads = 8;
        return c;
    }

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

enum class InitKind : std::uint8_t { Uniform, Ones, Zeros };

struct TensorSpec {
    std::string name;
    int rows = 0;
    int cols = 0;
    InitKind init = InitKind::Uniform;
};

struct AttentionBlockIndex {
    std::size_t ln1_g = 0, ln1_b = 0;
    std::vector<std::size_t> wq, wk, wv, wo, alpha; // one per head
    std::size_t ln2_g = 0, ln2_b = 0;
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

/// Names, shapes and order of every parameter tensor for a config.
class ParamLayout {
public:
    explicit ParamLayout(const EncoderConfig& c) : config_(c) {
        c.validate();
        const int d = c.d;
        const int hid = c.hidden();
        w_e = add("logical.W_E", c.n_logical, d);
        for (int l = 0; l < c.layers; ++l) {
            logical_blocks.push_back(block("logical.block" + std::to_string(l)));
        }
        logical_ln_g = add("logical.ln_final.gain", 1, d, InitKind::Ones);
        logical_ln_b = add("logical.ln_final.bias", 1, d, InitKind::Zeros);

        proj_w = add("physical.W_proj", 2, d);
        proj_b = add("physical.b_proj", 1, d);
        for (int l = 0; l < c.layers; ++l) {
            phys_w.push_back(add("physical.layer" + std::to_string(l) + ".W", d, d));
            phys_b.push_back(add("physical.layer" + std::to_string(l) + ".b", 1, d));
        }

        fuse_w1_log = add("fusion.ffn.W1_logical", d, d);
        fuse_w1_phys = add("fusion.ffn.W1_physical", d, d);
        fuse_b1 = add("fusion.ffn.b1", 1, d);
        fuse_w2 = add("fusion.ffn.W2", d, d);
        fuse_b2 = add("fusion.ffn.b2", 1, d);
        fusion_block = block("fusion.block");

        pol_w_sum = add("policy.W1_sum", d, hid);
        pol_w_diff = add("policy.W1_diff", d, hid);
        pol_b1 = add("policy.b1", 1, hid);
        pol_w2 = add("policy.W2", hid, 1);
        pol_b2 = add("policy.b2", 1, 1);

        val_w1 = add("value.W1", d, hid);
        val_b1 = add("value.b1", 1, hid);
        val_w2 = add("value.W2", hid, 1);
        val_b2 = add("value.b2", 1, 1);
    }

    [[nodiscard]] const EncoderConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<TensorSpec>& specs() const noexcept { return specs_; }
    [[nodiscard]] std::size_t index_of(const std::string& name) const {
        const auto it = by_name_.find(name);
        if (it == by_name_.end()) {
            throw IndexError("no parameter named '" + name + "'");
        }
        return it->second;
    }
    [[nodiscard]] std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (const auto& s : specs_) {
            n += static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
        }
        return n;
    }

    std::size_t w_e = 0;
    std::vector<AttentionBlockIndex> logical_blocks;
    std::size_t logical_ln_g = 0, logical_ln_b = 0;
    std::size_t proj_w = 0, proj_b = 0;
    std::vector<std::size_t> phys_w, phys_b;
    std::size_t fuse_w1_log = 0, fuse_w1_phys = 0, fuse_b1 = 0, fuse_w2 = 0, fuse_b2 = 0;
    AttentionBlockIndex fusion_block;
    std::size_t pol_w_sum = 0, pol_w_diff = 0, pol_b1 = 0, pol_w2 = 0, pol_b2 = 0;
    std::size_t val_w1 = 0, val_b1 = 0, val_w2 = 0, val_b2 = 0;

private:
    std::size_t add(std::string name, int rows, int cols, InitKind init = InitKind::Uniform) {
        by_name_[name] = specs_.size();
        specs_.push_back(TensorSpec{std::move(name), rows, cols, init});
        return specs_.size() - 1;
    }

    AttentionBlockIndex block(const std::string& p) {
        const int d = config_.d;
        const int dk = config_.d_k();
        const int ff = config_.ffn_mult * d;
        AttentionBlockIndex b;
        b.ln1_g = add(p + ".ln1.gain", 1, d, InitKind::Ones);
        b.ln1_b = add(p + ".ln1.bias", 1, d, InitKind::Zeros);
        for (int h = 0; h < config_.heads; ++h) {
            const std::string hp = p + ".head" + std::to_string(h);
            b.wq.push_back(add(hp + ".W_Q", d, dk));
            b.wk.push_back(add(hp + ".W_K", d, dk));
            b.wv.push_back(add(hp + ".W_V", d, dk));
            b.wo.push_back(add(hp + ".W_O", dk, d));
            b.alpha.push_back(add(hp + ".bias_mix", 1, 1, InitKind::Zeros));
        }
        b.ln2_g = add(p + ".ln2.gain", 1, d, InitKind::Ones);
        b.ln2_b = add(p + ".ln2.bias", 1, d, InitKind::Zeros);
        b.w1 = add(p + ".ffn.W1", d, ff);
        b.b1 = add(p + ".ffn.b1", 1, ff);
        b.w2 = add(p + ".ffn.W2", ff, d);
        b.b2 = add(p + ".ffn.b2", 1, d);
        return b;
    }

    EncoderConfig config_;
    std::vector<TensorSpec> specs_;
    std::map<std::string, std::size_t> by_name_;
};

struct EncoderParams {
    std::shared_ptr<const ParamLayout> layout;
    std::vector<Mat> tensors;

    [[nodiscard]] const EncoderConfig& config() const { return layout->config(); }
    [[nodiscard]] Mat& operator[](std::size_t i) { return tensors.at(i); }
    [[nodiscard]] const Mat& operator[](std::size_t i) const { return tensors.at(i); }
    [[nodiscard]] Mat& at(const std::string& name) { return tensors.at(layout->index_of(name)); }
    [[nodiscard]] const Mat& at(const std::string& name) const { return tensors.at(layout->index_of(name)); }

    [[nodiscard]] bool all_finite() const noexcept {
        for (const auto& t : tensors) {
            if (!t.all_finite()) {
                return false;
            }
        }
        return true;
    }

    /// Same layout, every entry zero.
    [[nodiscard]] EncoderParams zeros_like() const {
        EncoderParams z{layout, {}};
        for (const auto& t : tensors) {
            z.tensors.emplace_back(t.rows, t.cols);
        }
        return z;
    }
};

/// Seeded initializer: weights uniform in [-1/sqrt(d), 1/sqrt(d)], LN gains 1, LN biases and bias-mix scalars 0.
[[nodiscard]] inline EncoderParams init_params(const EncoderConfig& cfg, std::uint64_t seed) {
    EncoderParams p{std::make_shared<const ParamLayout>(cfg), {}};
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (const auto& spec : p.layout->specs()) {
        Mat m(spec.rows, spec.cols);
        for (double& x : m.v) {
            x = spec.init == InitKind::Uniform ? u(rng) : (spec.init == InitKind::Ones ? 1.0 : 0.0);
        }
        p.tensors.push_back(std::move(m));
    }
    return p;
}

/// Overwrites every entry (gains and mixing scalars included) with uniform draws in [lo, hi].
inline void randomize(EncoderParams& p, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& t : p.tensors) {
        for (double& x : t.v) {
            x = u(rng);
        }
    }
}

/// Relabels logical qubits: row i of W_E moves to row perm[i].
[[nodiscard]] inline EncoderParams permute_logical(const EncoderParams& p, const std::vector<int>& perm) {
    EncoderParams out = p;
    const Mat& we = p[p.layout->w_e];
    Mat& dst = out[p.layout->w_e];
    for (int i = 0; i < we.rows; ++i) {
        for (int j = 0; j < we.cols; ++j) {
            dst(perm.at(static_cast<std::size_t>(i)), j) = we(i, j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

/// Dense copy of a flow matrix.
[[nodiscard]] inline Mat to_mat(const FlowMatrix& f) {
    const int n = f.size();
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = f(i, j);
        }
    }
    return m;
}

inline void check_flow(const Mat& f) {
    if (f.rows != f.cols) {
        throw ShapeMismatch("flow matrix must be square, got " + shape_str(f));
    }
    for (int i = 0; i < f.rows; ++i) {
        if (f(i, i) != 0.0) {
            throw NonSymmetricFlow("flow matrix has a nonzero diagonal");
        }
        for (int j = 0; j < i; ++j) {
            if (f(i, j) != f(j, i)) {
                throw NonSymmetricFlow("flow matrix is not symmetric at (" + std::to_string(i) + "," +
                                       std::to_string(j) + ")");
            }
            if (f(i, j) < 0.0) {
                throw NonSymmetricFlow("flow matrix has a negative entry");
            }
        }
    }
}

/// Delta: hop distance between the nodes of logical i and j.
[[nodiscard]] inline Mat logical_distances(const Mapping& x, const DistanceMatrix& d) {
    const int n = x.n_logical();
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = d(x.phys(i), x.phys(j));
        }
    }
    return m;
}

/// diag(Delta 1)^{-1/2} Delta diag(Delta 1)^{-1/2}
[[nodiscard]] inline Mat sym_normalize(const Mat& delta) {
    std::vector<double> s(static_cast<std::size_t>(delta.rows));
    for (int i = 0; i < delta.rows; ++i) {
        double r = 0.0;
        for (int j = 0; j < delta.cols; ++j) {
            r += delta(i, j);
        }
        if (!(r > 0.0)) {
            throw SingularNormalization("row " + std::to_string(i) + " of the distance kernel sums to zero");
        }
        s[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(r);
    }
    Mat out(delta.rows, delta.cols);
    for (int i = 0; i < delta.rows; ++i) {
        for (int j = 0; j < delta.cols; ++j) {
            out(i, j) = s[static_cast<std::size_t>(i)] * delta(i, j) * s[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

/// Pi = X phi: device coordinates of each logical qubit.
[[nodiscard]] inline Mat logical_coords(const Mapping& x, const Device& device) {
    Mat pi(x.n_logical(), 2);
    for (int i = 0; i < x.n_logical(); ++i) {
        const Coord& c = device.coords()[static_cast<std::size_t>(x.phys(i))];
        pi(i, 0) = c.x;
        pi(i, 1) = c.y;
    }
    return pi;
}

/// One environment state as seen by the encoder.
struct EncoderInput {
    Mat flow;                   ///< effective flow, N_Q x N_Q
    Mapping mapping;
    const Device* device = nullptr;
    const DistanceMatrix* distances = nullptr;

    void validate(const EncoderConfig& cfg) const {
        if (device == nullptr || distances == nullptr) {
            throw ConfigError("encoder input needs a device and its distance matrix");
        }
        check_flow(flow);
        if (flow.rows != cfg.n_logical || mapping.n_logical() != cfg.n_logical) {
            throw ShapeMismatch("encoder built for " + std::to_string(cfg.n_logical) + " logical qubits, input has " +
                                std::to_string(flow.rows));
        }
        if (mapping.n_physical() != device->n_nodes() || distances->size() != device->n_nodes()) {
            throw ShapeMismatch("mapping, device and distance matrix disagree on the node count");
        }
    }
};

struct PolicyOutput {
    std::vector<double> logits; ///< one per device edge, in device edge order
    double value = 0.0;
};

// ---------------------------------------------------------------------------
// Forward pass on a tape
// ---------------------------------------------------------------------------

/// Parameters bound as leaves of one tape, plus the tape-level building blocks.
class EncoderGraph {
public:
    EncoderGraph(Tape& tape, const EncoderParams& p) : tape_(tape), lay_(*p.layout) {
        for (const auto& t : p.tensors) {
            leaves_.push_back(tape.leaf(t));
        }
    }

    [[nodiscard]] Var param(std::size_t i) const { return leaves_.at(i); }
    [[nodiscard]] const std::vector<Var>& params() const noexcept { return leaves_; }

    /// Pre-norm attention + FFN block with bias-mixed attention.
    Var block(Var z, const AttentionBlockIndex& b, const Mat& bias_norm) {
        const auto& cfg = lay_.config();
        const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(cfg.d_k()));
        const Var zn = tape_.layer_norm(z, param(b.ln1_g), param(b.ln1_b));
        Var mha{};
        for (int h = 0; h < cfg.heads; ++h) {
            const auto hh = static_cast<std::size_t>(h);
            const Var q = tape_.matmul(zn, param(b.wq[hh]));
            const Var k = tape_.matmul(zn, param(b.wk[hh]));
            const Var v = tape_.matmul(zn, param(b.wv[hh]));
            const Var scores = tape_.scale(tape_.matmul_nt(q, k), inv_sqrt_dk);
            const Var att = tape_.mix_attention(scores, param(b.alpha[hh]), bias_norm, cfg.eps);
            // concat-then-project equals the sum of per-head projections through row blocks of W_O
            const Var out = tape_.matmul(tape_.matmul(att, v), param(b.wo[hh]));
            mha = h == 0 ? out : tape_.add(mha, out);
        }
        const Var z1 = tape_.add(z, mha);
        const Var zn2 = tape_.layer_norm(z1, param(b.ln2_g), param(b.ln2_b));
        const Var hidden = tape_.relu(tape_.add_row(tape_.matmul(zn2, param(b.w1)), param(b.b1)));
        const Var ffn = tape_.add_row(tape_.matmul(hidden, param(b.w2)), param(b.b2));
        return tape_.add(z1, ffn);
    }

    Var logical(const Mat& flow) {
        const Mat bias = row_max_normalize(flow);
        Var z = param(lay_.w_e); // one-hot identity times W_E
        for (const auto& b : lay_.logical_blocks) {
            z = block(z, b, bias);
        }
        return tape_.layer_norm(z, param(lay_.logical_ln_g), param(lay_.logical_ln_b));
    }

    Var physical(const Mat& coords, const Mat& delta_bar) {
        const Var dbar = tape_.leaf(delta_bar);
        Var z = tape_.add_row(tape_.matmul(tape_.leaf(coords), param(lay_.proj_w)), param(lay_.proj_b));
        for (std::size_t l = 0; l < lay_.phys_w.size(); ++l) {
            const Var pre = tape_.add_row(tape_.matmul(z, param(lay_.phys_w[l])), param(lay_.phys_b[l]));
            z = tape_.add(z, tape_.relu(tape_.matmul(dbar, pre)));
        }
        return z;
    }

    Var fuse(Var z_log, Var z_phys, const Mat& qap_bias) {
        const Var pre = tape_.add(tape_.matmul(z_log, param(lay_.fuse_w1_log)), tape_.matmul(z_phys, param(lay_.fuse_w1_phys)));
        const Var hidden = tape_.relu(tape_.add_row(pre, param(lay_.fuse_b1)));
        const Var z = tape_.add_row(tape_.matmul(hidden, param(lay_.fuse_w2)), param(lay_.fuse_b2));
        return block(z, lay_.fusion_block, row_max_normalize(qap_bias));
    }

    /// Edge logits (E x 1) from the occupant rows of each edge; -1 marks an empty node.
    Var policy(Var z_fuse, const std::vector<int>& first, const std::vector<int>& second) {
        const Var za = tape_.gather_rows(z_fuse, first);
        const Var zb = tape_.gather_rows(z_fuse, second);
        const Var sum = tape_.add(za, zb);
        const Var diff = tape_.abs(tape_.sub(za, zb));
        const Var pre = tape_.add(tape_.matmul(sum, param(lay_.pol_w_sum)), tape_.matmul(diff, param(lay_.pol_w_diff)));
        const Var hidden = tape_.relu(tape_.add_row(pre, param(lay_.pol_b1)));
        return tape_.add_row(tape_.matmul(hidden, param(lay_.pol_w2)), param(lay_.pol_b2));
    }

    Var value(Var z_fuse) {
        const Var pooled = tape_.mean_rows(z_fuse);
        const Var hidden = tape_.relu(tape_.add_row(tape_.matmul(pooled, param(lay_.val_w1)), param(lay_.val_b1)));
        return tape_.add_row(tape_.matmul(hidden, param(lay_.val_w2)), param(lay_.val_b2));
    }

    struct Outputs {
        Var z_log, z_phys, z_fuse, logits, value;
    };

    Outputs forward(const EncoderInput& in) {
        in.validate(lay_.config());
        const Mat delta = logical_distances(in.mapping, *in.distances);
        Outputs o{};
        o.z_log = logical(in.flow);
        o.z_phys = physical(logical_coords(in.mapping, *in.device), sym_normalize(delta));
        o.z_fuse = fuse(o.z_log, o.z_phys, matmul(in.flow, delta));
        std::vector<int> first;
        std::vector<int> second;
        for (const auto& [u, v] : in.device->edges()) {
            first.push_back(in.mapping.occupant(u));
            second.push_back(in.mapping.occupant(v));
        }
        o.logits = policy(o.z_fuse, first, second);
        o.value = value(o.z_fuse);
        return o;
    }

private:
    Tape& tape_;
    const ParamLayout& lay_;
    std::vector<Var> leaves_;
};

// ---------------------------------------------------------------------------
// Value-level entry points
// ---------------------------------------------------------------------------

[[nodiscard]] inline Mat encode_logical(const Mat& flow, const EncoderParams& p) {
    check_flow(flow);
    if (flow.rows != p.config().n_logical) {
        throw ShapeMismatch("flow is " + shape_str(flow) + ", encoder expects " + std::to_string(p.config().n_logical) +
                            " qubits");
    }
    Tape t;
    EncoderGraph g(t, p);
    return t.value(g.logical(flow));
}

[[nodiscard]] inline Mat encode_logical(const FlowMatrix& flow, const EncoderParams& p) {
    return encode_logical(to_mat(flow), p);
}

[[nodiscard]] inline Mat encode_physical(const Mapping& x, const Device& device, const DistanceMatrix& d,
                                         const EncoderParams& p) {
    if (x.n_logical() != p.config().n_logical || x.n_physical() != device.n_nodes()) {
        throw ShapeMismatch("mapping does not match the encoder or device");
    }
    Tape t;
    EncoderGraph g(t, p);
    return t.value(g.physical(logical_coords(x, device), sym_normalize(logical_distances(x, d))));
}

[[nodiscard]] inline Mat encode_physical(const Mapping& x, const Device& device, const EncoderParams& p) {
    return encode_physical(x, device, distance_matrix(device), p);
}

/// Fusion and heads from precomputed embeddings; d_logical is Delta in logical order.
[[nodiscard]] inline PolicyOutput fuse_and_head(const Mat& z_log, const Mat& z_phys, const Mat& flow,
                                                const Mat& d_logical, const Mapping& x, const Device& device,
                                                const EncoderParams& p) {
    const int n = p.config().n_logical;
    const int d = p.config().d;
    if (z_log.rows != n || z_log.cols != d || !z_phys.same_shape(z_log) || flow.rows != n || flow.cols != n ||
        !d_logical.same_shape(flow) || x.n_logical() != n || x.n_physical() != device.n_nodes()) {
        throw ShapeMismatch("fuse_and_head inputs do not match the encoder configuration");
    }
    check_flow(flow);
    Tape t;
    EncoderGraph g(t, p);
    const Var zf = g.fuse(t.leaf(z_log), t.leaf(z_phys), matmul(flow, d_logical));
    std::vector<int> first;
    std::vector<int> second;
    for (const auto& [u, v] : device.edges()) {
        first.push_back(x.occupant(u));
        second.push_back(x.occupant(v));
    }
    PolicyOutput out;
    out.logits = t.value(g.policy(zf, first, second)).v;
    out.value = t.value(g.value(zf)).v.at(0);
    return out;
}

/// Full forward pass.
[[nodiscard]] inline PolicyOutput evaluate(const EncoderInput& in, const EncoderParams& p) {
    Tape t;
    EncoderGraph g(t, p);
    const auto o = g.forward(in);
    PolicyOutput out;
    out.logits = t.value(o.logits).v;
    out.value = t.value(o.value).v.at(0);
    for (double x : out.logits) {
        if (!std::isfinite(x)) {
            throw NonFinite("policy logit is not finite");
        }
    }
    if (!std::isfinite(out.value)) {
        throw NonFinite("value is not finite");
    }
    return out;
}

/// Fused embedding rows, mostly for inspection and tests.
[[nodiscard]] inline Mat fused_embedding(const EncoderInput& in, const EncoderParams& p) {
    Tape t;
    EncoderGraph g(t, p);
    return t.value(g.forward(in).z_fuse);
}

/// Edge logits for explicit occupant pairs of a fused embedding.
[[nodiscard]] inline std::vector<double> score_pairs(const Mat& z_fuse, const std::vector<std::pair<int, int>>& pairs,
                                                     const EncoderParams& p) {
    Tape t;
    EncoderGraph g(t, p);
    std::vector<int> first;
    std::vector<int> second;
    for (const auto& [a, b] : pairs) {
        first.push_back(a);
        second.push_back(b);
    }
    return t.value(g.policy(t.leaf(z_fuse), first, second)).v;
}

} // namespace qapr::nn
