#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ropewarp/error.hpp"
#include "ropewarp/flow.hpp"
#include "ropewarp/tensor.hpp"

namespace ropewarp {

// ===== Rotary position embeddings on a (t, h, w) lattice =====

struct RopeConfig {
    double theta = 10000.0;
    std::array<std::size_t, 3> dims{16, 24, 24};  // per-axis channel counts D_t, D_h, D_w
    std::array<std::size_t, 3> seq{1, 1, 1};      // lattice extents S_t, S_h, S_w

    std::size_t total_dim() const { return dims[0] + dims[1] + dims[2]; }
    std::size_t cells() const { return seq[0] * seq[1] * seq[2]; }

    void validate() const {
        if (!(theta > 0.0)) throw ValueError("rope theta must be positive");
        for (std::size_t d : dims)
            if (d == 0 || d % 2 != 0) throw ValueError("rope axis dims must be positive and even");
        for (std::size_t s : seq)
            if (s == 0) throw ValueError("rope sequence extents must be positive");
    }
};

// Phase table with one unit-modulus entry per cell and channel pair. Channel
// order along the last axis is [t-block | h-block | w-block]; the flat form
// orders cells by s = t*(S_h*S_w) + h*S_w + w.
struct RopeGrid {
    RopeConfig config;
    ComplexTensor grid;  // [S_t, S_h, S_w, D/2]

    std::size_t channels() const { return config.total_dim() / 2; }
    std::size_t h_block_begin() const { return config.dims[0] / 2; }
    std::size_t w_block_begin() const { return (config.dims[0] + config.dims[1]) / 2; }

    ComplexTensor flat() const { return grid.reshaped({config.cells(), channels()}); }
};

// f[i] = theta^(-2i / D_k) for i = 0 .. D_k/2 - 1; strictly decreasing from 1
// when theta > 1.
inline std::vector<double> freq_spectrum(std::size_t dk, double theta) {
    if (dk == 0 || dk % 2 != 0) throw ValueError("freq_spectrum needs a positive even dim");
    if (!(theta > 0.0)) throw ValueError("freq_spectrum needs a positive theta");
    std::vector<double> f(dk / 2);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::pow(theta, -2.0 * static_cast<double>(i) / static_cast<double>(dk));
    return f;
}

// Entry (m, i) = exp(j * positions[m] * freqs[i]).
inline ComplexTensor rope_1d(std::span<const double> positions, std::span<const double> freqs) {
    ComplexTensor out({positions.size(), freqs.size()});
    for (std::size_t m = 0; m < positions.size(); ++m)
        for (std::size_t i = 0; i < freqs.size(); ++i)
            out(m, i) = std::polar(1.0, positions[m] * freqs[i]);
    return out;
}

// Integer lattice positions on every axis: axis tables are built once with
// rope_1d and broadcast across the other two axes, then concatenated along
// the channel axis.
inline RopeGrid build_default_rope(const RopeConfig& cfg) {
    cfg.validate();
    const auto [st, sh, sw] = cfg.seq;

    std::array<ComplexTensor, 3> tables;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        std::vector<double> pos(cfg.seq[axis]);
        for (std::size_t p = 0; p < pos.size(); ++p) pos[p] = static_cast<double>(p);
        const std::vector<double> f = freq_spectrum(cfg.dims[axis], cfg.theta);
        tables[axis] = rope_1d(pos, f);
    }

    const std::size_t half = cfg.total_dim() / 2;
    ComplexTensor grid({st, sh, sw, half});
    const std::array<std::size_t, 3> block{cfg.dims[0] / 2, cfg.dims[1] / 2, cfg.dims[2] / 2};
    for (std::size_t t = 0; t < st; ++t) {
        for (std::size_t h = 0; h < sh; ++h) {
            for (std::size_t w = 0; w < sw; ++w) {
                const std::array<std::size_t, 3> at{t, h, w};
                std::size_t ch = 0;
                for (std::size_t axis = 0; axis < 3; ++axis)
                    for (std::size_t i = 0; i < block[axis]; ++i)
                        grid(t, h, w, ch++) = tables[axis](at[axis], i);
            }
        }
    }
    return {cfg, std::move(grid)};
}

// Same lattice, but the height-axis position of cell (t, h, w) becomes
// h + h_flow[t, h, w] and the width-axis position becomes w + w_flow[t, h, w].
// The time block is untouched. Entries are evaluated directly per cell.
inline RopeGrid build_motion_rope(const RopeConfig& cfg, const DisplacementGrid& disp) {
    cfg.validate();
    disp.validate();
    const auto [st, sh, sw] = cfg.seq;
    if (disp.h_flow.shape() != std::vector<std::size_t>{st, sh, sw})
        throw ShapeError("displacement grid shape does not match rope sequence extents");

    const std::vector<double> ft = freq_spectrum(cfg.dims[0], cfg.theta);
    const std::vector<double> fh = freq_spectrum(cfg.dims[1], cfg.theta);
    const std::vector<double> fw = freq_spectrum(cfg.dims[2], cfg.theta);

    ComplexTensor grid({st, sh, sw, cfg.total_dim() / 2});
    for (std::size_t t = 0; t < st; ++t) {
        for (std::size_t h = 0; h < sh; ++h) {
            for (std::size_t w = 0; w < sw; ++w) {
                const double hp = static_cast<double>(h) + disp.h_flow(t, h, w);
                const double wp = static_cast<double>(w) + disp.w_flow(t, h, w);
                std::size_t ch = 0;
                for (double f : ft) grid(t, h, w, ch++) = std::polar(1.0, static_cast<double>(t) * f);
                for (double f : fh) grid(t, h, w, ch++) = std::polar(1.0, hp * f);
                for (double f : fw) grid(t, h, w, ch++) = std::polar(1.0, wp * f);
            }
        }
    }
    return {cfg, std::move(grid)};
}

inline DisplacementGrid zero_displacement(const RopeConfig& cfg) {
    const std::vector<std::size_t> shape{cfg.seq[0], cfg.seq[1], cfg.seq[2]};
    return {Tensor(shape), Tensor(shape)};
}

}  // namespace ropewarp
