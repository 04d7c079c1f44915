#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ropewarp/error.hpp"
#include "ropewarp/tensor.hpp"
#include "ropewarp/tnsr.hpp"

namespace ropewarp {

// ===== Optical flow fields =====
//
// u is horizontal displacement (+x right), v is vertical (+y down), both in
// pixels per frame transition. A field holds one frame per stored flow image.

struct FlowField {
    Tensor u;  // [frames, H, W]
    Tensor v;  // [frames, H, W]

    std::size_t frames() const { return u.rank() == 3 ? u.extent(0) : 0; }
    std::size_t height() const { return u.rank() == 3 ? u.extent(1) : 0; }
    std::size_t width() const { return u.rank() == 3 ? u.extent(2) : 0; }

    void validate() const {
        if (u.rank() != 3 || v.rank() != 3 || u.shape() != v.shape())
            throw ShapeError("flow field components must share a [frames, H, W] shape");
    }

    FlowField frame(std::size_t t) const {
        validate();
        if (t >= frames()) throw ShapeError("flow frame index out of range");
        const std::size_t hw = height() * width();
        std::vector<double> fu(u.data().begin() + static_cast<std::ptrdiff_t>(t * hw),
                               u.data().begin() + static_cast<std::ptrdiff_t>((t + 1) * hw));
        std::vector<double> fv(v.data().begin() + static_cast<std::ptrdiff_t>(t * hw),
                               v.data().begin() + static_cast<std::ptrdiff_t>((t + 1) * hw));
        return {Tensor::from_data({1, height(), width()}, std::move(fu)),
                Tensor::from_data({1, height(), width()}, std::move(fv))};
    }
};

// Per-frame flow averaged onto the patch lattice, in patch units.
struct PatchFlow {
    Tensor u;  // [frames, S_h, S_w]
    Tensor v;  // [frames, S_h, S_w]
};

// Cumulative per-cell offsets: h_flow shifts the height axis (fed by v),
// w_flow shifts the width axis (fed by u).
struct DisplacementGrid {
    Tensor h_flow;  // [frames, S_h, S_w]
    Tensor w_flow;  // [frames, S_h, S_w]

    void validate() const {
        if (h_flow.rank() != 3 || w_flow.rank() != 3 || h_flow.shape() != w_flow.shape())
            throw ShapeError("displacement grid components must share a [frames, S_h, S_w] shape");
    }
};

// ===== .flo image I/O =====
//
// Middlebury layout: float32 magic 202021.25 ("PIEH" in LE bytes), int32
// width, int32 height, then height*width interleaved (u, v) float32 pairs in
// row-major order, all little-endian.

namespace detail {

constexpr float kFloMagic = 202021.25f;

inline void put_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

inline void put_f32_le(std::vector<unsigned char>& out, float v) {
    put_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

inline float get_f32_le(const unsigned char* p) {
    return std::bit_cast<float>(get_u32_le(p));
}

}  // namespace detail

inline FlowField flo_read(const std::string& path) {
    const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
    if (bytes.size() < 12) throw TruncatedError("truncated header: " + path);
    if (detail::get_f32_le(bytes.data()) != detail::kFloMagic)
        throw FormatError("bad magic (expected 202021.25): " + path);
    const auto w = static_cast<std::int32_t>(detail::get_u32_le(bytes.data() + 4));
    const auto h = static_cast<std::int32_t>(detail::get_u32_le(bytes.data() + 8));
    if (w <= 0 || h <= 0 || w > 99999 || h > 99999)
        throw FormatError("implausible dimensions " + std::to_string(w) + "x" + std::to_string(h) +
                          ": " + path);
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() < 12 + 8 * n) throw TruncatedError("truncated payload: " + path);
    if (bytes.size() > 12 + 8 * n) throw FormatError("trailing bytes: " + path);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = detail::get_f32_le(bytes.data() + 12 + 8 * i);
        v[i] = detail::get_f32_le(bytes.data() + 12 + 8 * i + 4);
    }
    const auto uh = static_cast<std::size_t>(h);
    const auto uw = static_cast<std::size_t>(w);
    return {Tensor::from_data({1, uh, uw}, std::move(u)),
            Tensor::from_data({1, uh, uw}, std::move(v))};
}

// Writes a single-frame field. Values are narrowed to float32; non-finite
// values are rejected so every written file reads back bit-exactly.
inline void flo_write(const FlowField& f, const std::string& path) {
    f.validate();
    if (f.frames() != 1) throw ShapeError("flo_write takes a single-frame field");
    std::vector<unsigned char> bytes;
    detail::put_f32_le(bytes, detail::kFloMagic);
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(f.width()));
    detail::put_u32_le(bytes, static_cast<std::uint32_t>(f.height()));
    for (std::size_t i = 0; i < f.u.size(); ++i) {
        const double du = f.u[i], dv = f.v[i];
        if (!std::isfinite(du) || !std::isfinite(dv))
            throw ValueError("flow contains non-finite values: " + path);
        detail::put_f32_le(bytes, static_cast<float>(du));
        detail::put_f32_le(bytes, static_cast<float>(dv));
    }
    detail::write_file_bytes(path, bytes);
}

// A directory is the multi-frame container: one .flo per frame, *.flo sorted
// lexicographically by filename.
inline FlowField flo_read_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".flo")
            names.push_back(entry.path().string());
    }
    if (names.empty()) throw IoError("no .flo files in " + dir);
    std::sort(names.begin(), names.end());
    std::vector<double> u, v;
    std::size_t h = 0, w = 0;
    for (std::size_t t = 0; t < names.size(); ++t) {
        FlowField f = flo_read(names[t]);
        if (t == 0) {
            h = f.height();
            w = f.width();
        } else if (f.height() != h || f.width() != w) {
            throw ShapeError("flow frame dimensions differ across " + dir);
        }
        u.insert(u.end(), f.u.data().begin(), f.u.data().end());
        v.insert(v.end(), f.v.data().begin(), f.v.data().end());
    }
    return {Tensor::from_data({names.size(), h, w}, std::move(u)),
            Tensor::from_data({names.size(), h, w}, std::move(v))};
}

inline void flo_write_dir(const FlowField& f, const std::string& dir) {
    namespace fs = std::filesystem;
    f.validate();
    fs::create_directories(dir);
    for (std::size_t t = 0; t < f.frames(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.flo", t);
        flo_write(f.frame(t), (fs::path(dir) / name).string());
    }
}

// Flow stored as one TNSR of shape [2, frames, H, W]: component 0 is u.
inline FlowField flow_from_tnsr(const Tensor& t) {
    if (t.rank() != 4 || t.extent(0) != 2)
        throw ShapeError("flow tensor must have shape [2, frames, H, W]");
    const std::size_t n = t.size() / 2;
    std::vector<double> u(t.data().begin(), t.data().begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> v(t.data().begin() + static_cast<std::ptrdiff_t>(n), t.data().end());
    std::vector<std::size_t> shape{t.extent(1), t.extent(2), t.extent(3)};
    return {Tensor::from_data(shape, std::move(u)), Tensor::from_data(shape, std::move(v))};
}

inline Tensor flow_to_tnsr(const FlowField& f) {
    f.validate();
    std::vector<double> data;
    data.reserve(f.u.size() * 2);
    data.insert(data.end(), f.u.data().begin(), f.u.data().end());
    data.insert(data.end(), f.v.data().begin(), f.v.data().end());
    return Tensor::from_data({2, f.frames(), f.height(), f.width()}, std::move(data));
}

// Reads either a directory of .flo frames or a [2, frames, H, W] TNSR file.
inline FlowField flow_read_any(const std::string& path) {
    if (std::filesystem::is_directory(path)) return flo_read_dir(path);
    return flow_from_tnsr(tnsr_read_real(path));
}

// ===== Synthetic fields =====
//
// Every pattern repeats the same displacement image on all frames. Pixel
// positions are cell centers (x + 0.5, y + 0.5); rotation and zoom are taken
// about the image center (W/2, H/2).
//   constant  params a (u) and b (v)
//   rotation  param omega, radians per frame, positive x->y (clockwise with
//             y pointing down)
//   zoom      param scale, radial factor per frame (1 = no motion)
inline FlowField flow_synth(const std::string& pattern,
                            const std::map<std::string, double>& params, std::size_t frames,
                            std::size_t height, std::size_t width) {
    if (frames == 0 || height == 0 || width == 0)
        throw ValueError("flow_synth requires positive frames, height, width");
    const auto param = [&](const char* name, double fallback) {
        auto it = params.find(name);
        return it == params.end() ? fallback : it->second;
    };
    Tensor u({frames, height, width});
    Tensor v({frames, height, width});
    const double cx = static_cast<double>(width) / 2.0;
    const double cy = static_cast<double>(height) / 2.0;
    double du = 0.0, dv = 0.0;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double px = static_cast<double>(x) + 0.5 - cx;
            const double py = static_cast<double>(y) + 0.5 - cy;
            if (pattern == "constant") {
                du = param("a", 0.0);
                dv = param("b", 0.0);
            } else if (pattern == "rotation") {
                const double w0 = param("omega", 0.0);
                du = std::cos(w0) * px - std::sin(w0) * py - px;
                dv = std::sin(w0) * px + std::cos(w0) * py - py;
            } else if (pattern == "zoom") {
                const double s = param("scale", 1.0);
                du = (s - 1.0) * px;
                dv = (s - 1.0) * py;
            } else {
                throw ValueError("unknown flow pattern: " + pattern);
            }
            for (std::size_t t = 0; t < frames; ++t) {
                u(t, y, x) = du;
                v(t, y, x) = dv;
            }
        }
    }
    return {std::move(u), std::move(v)};
}

// ===== Patch-lattice reduction =====

// Block-mean pooling onto an S_h x S_w lattice, then conversion to patch
// units: v is divided by the patch height H/S_h, u by the patch width W/S_w.
// Pixel counts must divide evenly.
inline PatchFlow downsample_to_grid(const FlowField& f, std::size_t patch_rows,
                                    std::size_t patch_cols) {
    f.validate();
    if (patch_rows == 0 || patch_cols == 0)
        throw ValueError("patch lattice must be non-empty");
    if (f.height() % patch_rows != 0 || f.width() % patch_cols != 0)
        throw ShapeError("frame size " + std::to_string(f.height()) + "x" +
                         std::to_string(f.width()) + " not divisible by lattice " +
                         std::to_string(patch_rows) + "x" + std::to_string(patch_cols));
    const std::size_t bh = f.height() / patch_rows;
    const std::size_t bw = f.width() / patch_cols;
    Tensor up({f.frames(), patch_rows, patch_cols});
    Tensor vp({f.frames(), patch_rows, patch_cols});
    for (std::size_t t = 0; t < f.frames(); ++t) {
        for (std::size_t r = 0; r < patch_rows; ++r) {
            for (std::size_t c = 0; c < patch_cols; ++c) {
                double su = 0.0, sv = 0.0;
                for (std::size_t y = r * bh; y < (r + 1) * bh; ++y) {
                    for (std::size_t x = c * bw; x < (c + 1) * bw; ++x) {
                        su += f.u(t, y, x);
                        sv += f.v(t, y, x);
                    }
                }
                const double inv = 1.0 / static_cast<double>(bh * bw);
                up(t, r, c) = su * inv / static_cast<double>(bw);
                vp(t, r, c) = sv * inv / static_cast<double>(bh);
            }
        }
    }
    return {std::move(up), std::move(vp)};
}

// Exclusive prefix sum over time: frame 0 carries no accumulated motion, and
// flow frame tau (motion from tau to tau+1) lands in every frame after tau.
inline DisplacementGrid accumulate(const PatchFlow& g) {
    if (g.u.rank() != 3 || g.u.shape() != g.v.shape())
        throw ShapeError("patch flow components must share a [frames, S_h, S_w] shape");
    const std::size_t frames = g.u.extent(0);
    const std::size_t cells = g.u.extent(1) * g.u.extent(2);
    Tensor h_flow(g.u.shape());
    Tensor w_flow(g.u.shape());
    for (std::size_t t = 1; t < frames; ++t) {
        for (std::size_t i = 0; i < cells; ++i) {
            w_flow[t * cells + i] = w_flow[(t - 1) * cells + i] + g.u[(t - 1) * cells + i];
            h_flow[t * cells + i] = h_flow[(t - 1) * cells + i] + g.v[(t - 1) * cells + i];
        }
    }
    return {std::move(h_flow), std::move(w_flow)};
}

inline DisplacementGrid displacement_from_flow(const FlowField& f, std::size_t patch_rows,
                                               std::size_t patch_cols) {
    return accumulate(downsample_to_grid(f, patch_rows, patch_cols));
}

}  // namespace ropewarp
