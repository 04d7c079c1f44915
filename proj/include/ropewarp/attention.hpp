#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ropewarp/error.hpp"
#include "ropewarp/rng.hpp"
#include "ropewarp/rope.hpp"
#include "ropewarp/tensor.hpp"

namespace ropewarp {

// ===== Token-level attention harness =====
//
// A token batch is a real [S, D] tensor with even D; channels 2i and 2i+1
// form the complex pair rotated by phase channel i.

// Rotates every token by its per-cell phases. Norm-preserving.
inline Tensor apply_rope(const Tensor& tokens, const ComplexTensor& rope_flat) {
    if (tokens.rank() != 2 || rope_flat.rank() != 2)
        throw ShapeError("apply_rope expects [S, D] tokens and [S, D/2] phases");
    const std::size_t s = tokens.extent(0);
    const std::size_t d = tokens.extent(1);
    if (d % 2 != 0) throw ShapeError("token dim must be even");
    if (rope_flat.extent(0) != s || rope_flat.extent(1) != d / 2)
        throw ShapeError("phase table shape does not match token batch");
    Tensor out(tokens.shape());
    for (std::size_t m = 0; m < s; ++m) {
        for (std::size_t i = 0; i < d / 2; ++i) {
            const double a = tokens(m, 2 * i);
            const double b = tokens(m, 2 * i + 1);
            const std::complex<double> phi = rope_flat(m, i);
            out(m, 2 * i) = a * phi.real() - b * phi.imag();
            out(m, 2 * i + 1) = a * phi.imag() + b * phi.real();
        }
    }
    return out;
}

// Raw scores: score(m, n) = dot(q_m, k_n) / sqrt(D). No masking, no softmax.
inline Tensor attention_scores(const Tensor& q, const Tensor& k) {
    if (q.rank() != 2 || k.rank() != 2 || q.extent(1) != k.extent(1))
        throw ShapeError("attention_scores expects [S, D] batches with matching D");
    const std::size_t d = q.extent(1);
    Tensor out({q.extent(0), k.extent(0)});
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t m = 0; m < q.extent(0); ++m) {
        for (std::size_t n = 0; n < k.extent(0); ++n) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += q(m, c) * k(n, c);
            out(m, n) = acc * inv_sqrt_d;
        }
    }
    return out;
}

// Row-wise softmax with max subtraction.
inline Tensor softmax_rows(const Tensor& scores) {
    if (scores.rank() != 2) throw ShapeError("softmax_rows expects a matrix");
    Tensor out(scores.shape());
    for (std::size_t m = 0; m < scores.extent(0); ++m) {
        double mx = scores(m, 0);
        for (std::size_t n = 1; n < scores.extent(1); ++n) mx = std::max(mx, scores(m, n));
        double sum = 0.0;
        for (std::size_t n = 0; n < scores.extent(1); ++n) {
            out(m, n) = std::exp(scores(m, n) - mx);
            sum += out(m, n);
        }
        for (std::size_t n = 0; n < scores.extent(1); ++n) out(m, n) /= sum;
    }
    return out;
}

// One-layer stand-in for a velocity predictor: fixed random Q/K/V projections
// drawn uniform in (-1/sqrt(D), 1/sqrt(D)) from the seed, rotary phases on Q
// and K, softmax attention, no output projection.
class ToyVelocityModel {
public:
    ToyVelocityModel(RopeConfig rope_cfg, std::uint64_t seed) : rope_cfg_(rope_cfg), seed_(seed) {
        rope_cfg_.validate();
        const std::size_t d = rope_cfg_.total_dim();
        SplitMix64 rng(seed);
        wq_ = random_matrix(d, rng);
        wk_ = random_matrix(d, rng);
        wv_ = random_matrix(d, rng);
    }

    const RopeConfig& rope_config() const { return rope_cfg_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t dim() const { return rope_cfg_.total_dim(); }
    const Tensor& wq() const { return wq_; }
    const Tensor& wk() const { return wk_; }
    const Tensor& wv() const { return wv_; }

private:
    static Tensor random_matrix(std::size_t d, SplitMix64& rng) {
        Tensor m({d, d});
        const double bound = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = (2.0 * rng.next_double() - 1.0) * bound;
        return m;
    }

    RopeConfig rope_cfg_;
    std::uint64_t seed_;
    Tensor wq_, wk_, wv_;
};

namespace detail {

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0))
        throw ShapeError("matmul operand shapes incompatible");
    Tensor out({a.extent(0), b.extent(1)});
    for (std::size_t i = 0; i < a.extent(0); ++i)
        for (std::size_t k = 0; k < a.extent(1); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.extent(1); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

// Accepts either a [S, D] token matrix or a channel-first [D, S_t, S_h, S_w]
// lattice tensor; returns tokens ordered by s = t*(S_h*S_w) + h*S_w + w.
inline Tensor to_tokens(const Tensor& x, const RopeConfig& cfg) {
    const std::size_t s = cfg.cells();
    const std::size_t d = cfg.total_dim();
    if (x.rank() == 2) {
        if (x.extent(0) != s || x.extent(1) != d)
            throw ShapeError("token matrix shape does not match rope lattice");
        return x;
    }
    if (x.rank() == 4) {
        if (x.extent(0) != d || x.extent(1) != cfg.seq[0] || x.extent(2) != cfg.seq[1] ||
            x.extent(3) != cfg.seq[2])
            throw ShapeError("lattice tensor shape does not match rope config");
        return x.reshaped({d, s}).permuted({1, 0});
    }
    throw ShapeError("toy_forward input must be [S, D] or [D, S_t, S_h, S_w]");
}

inline Tensor from_tokens(const Tensor& tokens, const Tensor& like) {
    if (like.rank() == 2) return tokens;
    return tokens.permuted({1, 0}).reshaped(like.shape());
}

}  // namespace detail

// softmax(scores(rope(Q), rope(K))) * V, output shaped like the input.
inline Tensor toy_forward(const ToyVelocityModel& model, const Tensor& x_t, const RopeGrid& rope) {
    const RopeConfig& cfg = model.rope_config();
    if (rope.config.seq != cfg.seq || rope.config.dims != cfg.dims)
        throw ShapeError("rope grid geometry does not match model config");
    const Tensor tokens = detail::to_tokens(x_t, cfg);
    const ComplexTensor phases = rope.flat();
    const Tensor q = apply_rope(detail::matmul(tokens, model.wq()), phases);
    const Tensor k = apply_rope(detail::matmul(tokens, model.wk()), phases);
    const Tensor v = detail::matmul(tokens, model.wv());
    const Tensor weights = softmax_rows(attention_scores(q, k));
    return detail::from_tokens(detail::matmul(weights, v), x_t);
}

}  // namespace ropewarp
