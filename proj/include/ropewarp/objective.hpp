#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "ropewarp/attention.hpp"
#include "ropewarp/error.hpp"
#include "ropewarp/flow.hpp"
#include "ropewarp/rope.hpp"
#include "ropewarp/tensor.hpp"

namespace ropewarp {

// ===== Noise schedule =====

struct Schedule {
    std::vector<double> sigmas;  // strictly decreasing, each in (0, 1]

    std::size_t size() const { return sigmas.size(); }

    void validate() const {
        if (sigmas.empty()) throw ValueError("schedule must be non-empty");
        for (std::size_t i = 0; i < sigmas.size(); ++i) {
            if (!(sigmas[i] > 0.0) || sigmas[i] > 1.0)
                throw ValueError("schedule sigmas must lie in (0, 1]");
            if (i > 0 && !(sigmas[i] < sigmas[i - 1]))
                throw ValueError("schedule sigmas must be strictly decreasing");
        }
    }

    static Schedule linear(std::size_t steps, double first, double last) {
        if (steps == 0) throw ValueError("schedule must be non-empty");
        Schedule s;
        s.sigmas.resize(steps);
        for (std::size_t i = 0; i < steps; ++i) {
            const double a = steps == 1 ? 0.0
                                        : static_cast<double>(i) / static_cast<double>(steps - 1);
            s.sigmas[i] = first + (last - first) * a;
        }
        s.validate();
        return s;
    }

    // 50 linearly spaced sigmas from 1.0 down to 0.02.
    static Schedule linear_default() { return linear(50, 1.0, 0.02); }
};

// ===== Config =====

enum class OptimizerKind { descent, adam };

struct ObjectiveConfig {
    double lambda = 1.0;            // weight of the phase term
    std::size_t opt_steps = 10;     // denoising steps that optimize offsets
    std::size_t inner_steps = 5;    // gradient updates per denoising step
    double learning_rate = 1e-4;
    double fd_epsilon = 1e-4;       // central-difference probe size
    OptimizerKind optimizer = OptimizerKind::descent;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(lambda >= 0.0)) throw ValueError("lambda must be non-negative");
        if (!(learning_rate >= 0.0)) throw ValueError("learning rate must be non-negative");
        if (!(fd_epsilon > 0.0)) throw ValueError("fd epsilon must be positive");
    }
};

// ===== Pointwise pieces =====

// u_t = (x_t - v_ref) / sigma_t.
inline Tensor target_velocity(const Tensor& x_t, const Tensor& v_ref, double sigma_t) {
    detail::require_same_shape(x_t, v_ref, "target_velocity");
    if (!(sigma_t > 0.0)) throw ValueError("sigma_t must be positive");
    return scaled(x_t - v_ref, 1.0 / sigma_t);
}

// Mean squared difference over all elements.
inline double fm_loss(const Tensor& u, const Tensor& v) {
    detail::require_same_shape(u, v, "fm_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        acc += d * d;
    }
    return acc / static_cast<double>(u.size());
}

// ===== Separable 3D DFT =====
//
// Unnormalized forward transform along the three trailing axes; any leading
// axes are independent channels. Tensors of rank below three are treated as
// having leading extents of one.

namespace detail {

inline void dft_axis_naive(std::vector<std::complex<double>>& data, std::size_t outer,
                           std::size_t len, std::size_t inner) {
    if (len == 1) return;
    std::vector<std::complex<double>> twiddle(len * len);
    for (std::size_t k = 0; k < len; ++k)
        for (std::size_t n = 0; n < len; ++n)
            twiddle[k * len + n] = std::polar(
                1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n % len) / static_cast<double>(len));
    std::vector<std::complex<double>> fiber(len);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            for (std::size_t n = 0; n < len; ++n) fiber[n] = data[base + n * inner];
            for (std::size_t k = 0; k < len; ++k) {
                std::complex<double> acc{0.0, 0.0};
                for (std::size_t n = 0; n < len; ++n) acc += fiber[n] * twiddle[k * len + n];
                data[base + k * inner] = acc;
            }
        }
    }
}

inline void dft_axis_radix2(std::vector<std::complex<double>>& data, std::size_t outer,
                            std::size_t len, std::size_t inner) {
    if (len == 1) return;
    std::vector<std::complex<double>> fiber(len);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            for (std::size_t n = 0; n < len; ++n) fiber[n] = data[base + n * inner];
            // Bit-reversal permutation, then iterative butterflies.
            for (std::size_t j = 1, k = 0; j < len; ++j) {
                std::size_t bit = len >> 1;
                for (; k & bit; bit >>= 1) k ^= bit;
                k ^= bit;
                if (j < k) std::swap(fiber[j], fiber[k]);
            }
            for (std::size_t half = 1; half < len; half <<= 1) {
                const double ang = -std::numbers::pi / static_cast<double>(half);
                const std::complex<double> wstep = std::polar(1.0, ang);
                for (std::size_t start = 0; start < len; start += 2 * half) {
                    std::complex<double> w{1.0, 0.0};
                    for (std::size_t j = 0; j < half; ++j) {
                        const std::complex<double> even = fiber[start + j];
                        const std::complex<double> odd = fiber[start + half + j] * w;
                        fiber[start + j] = even + odd;
                        fiber[start + half + j] = even - odd;
                        w *= wstep;
                    }
                }
            }
            for (std::size_t k = 0; k < len; ++k) data[base + k * inner] = fiber[k];
        }
    }
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

enum class DftImpl { naive, radix2 };

inline ComplexTensor dft3(const Tensor& x, DftImpl impl = DftImpl::naive) {
    std::vector<std::size_t> shape = x.shape();
    while (shape.size() < 3) shape.insert(shape.begin(), 1);
    std::vector<std::complex<double>> data(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) data[i] = {x[i], 0.0};

    const std::size_t rank = shape.size();
    std::size_t outer = 1;
    for (std::size_t a = 0; a + 3 < rank; ++a) outer *= shape[a];  // channels
    std::size_t tail[3] = {shape[rank - 3], shape[rank - 2], shape[rank - 1]};
    for (int a = 0; a < 3; ++a) {
        std::size_t ax_outer = outer;
        for (int b = 0; b < a; ++b) ax_outer *= tail[b];
        std::size_t ax_inner = 1;
        for (int b = a + 1; b < 3; ++b) ax_inner *= tail[b];
        if (impl == DftImpl::radix2) {
            if (!detail::is_pow2(tail[a]))
                throw ValueError("radix-2 transform needs power-of-two axis lengths");
            detail::dft_axis_radix2(data, ax_outer, tail[a], ax_inner);
        } else {
            detail::dft_axis_naive(data, ax_outer, tail[a], ax_inner);
        }
    }
    return ComplexTensor::from_data(x.shape().empty() ? std::vector<std::size_t>{} : x.shape(),
                                    std::move(data));
}

// ===== Spectral losses =====

struct SpectralDecomp {
    Tensor magnitude;
    Tensor phase_cos;
    Tensor phase_sin;
};

// Null-bin convention: bins with |X| <= 1e-12 take (cos, sin) = (1, 0).
inline SpectralDecomp spectral_decompose(const ComplexTensor& spectrum) {
    constexpr double kNullBin = 1e-12;
    SpectralDecomp out{Tensor(spectrum.shape()), Tensor(spectrum.shape()), Tensor(spectrum.shape())};
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double mag = std::abs(spectrum[i]);
        out.magnitude[i] = mag;
        if (mag <= kNullBin) {
            out.phase_cos[i] = 1.0;
            out.phase_sin[i] = 0.0;
        } else {
            out.phase_cos[i] = spectrum[i].real() / mag;
            out.phase_sin[i] = spectrum[i].imag() / mag;
        }
    }
    return out;
}

namespace detail {

inline double mean_abs_diff(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

}  // namespace detail

// mean |cos angle F(u) - cos angle F(v)| + mean |sin angle F(u) - sin angle F(v)|.
inline double phase_loss(const Tensor& u, const Tensor& v) {
    detail::require_same_shape(u, v, "phase_loss");
    const SpectralDecomp du = spectral_decompose(dft3(u));
    const SpectralDecomp dv = spectral_decompose(dft3(v));
    return detail::mean_abs_diff(du.phase_cos, dv.phase_cos) +
           detail::mean_abs_diff(du.phase_sin, dv.phase_sin);
}

// mean | |F(u)| - |F(v)| |.
inline double magnitude_loss(const Tensor& u, const Tensor& v) {
    detail::require_same_shape(u, v, "magnitude_loss");
    const SpectralDecomp du = spectral_decompose(dft3(u));
    const SpectralDecomp dv = spectral_decompose(dft3(v));
    return detail::mean_abs_diff(du.magnitude, dv.magnitude);
}

struct ObjectiveBreakdown {
    double fm = 0.0;
    double phase = 0.0;
    double total = 0.0;
};

inline ObjectiveBreakdown objective_breakdown(const Tensor& u, const Tensor& v,
                                              const ObjectiveConfig& cfg) {
    cfg.validate();
    ObjectiveBreakdown b;
    b.fm = fm_loss(u, v);
    b.phase = cfg.lambda == 0.0 ? 0.0 : phase_loss(u, v);
    b.total = cfg.lambda == 0.0 ? b.fm : b.fm + cfg.lambda * b.phase;
    return b;
}

inline double combined_objective(const Tensor& u, const Tensor& v, const ObjectiveConfig& cfg) {
    return objective_breakdown(u, v, cfg).total;
}

// ===== Finite-difference gradients =====

// Central differences on a flat parameter vector: g_i = (f(p + e_i eps) -
// f(p - e_i eps)) / (2 eps). Mutates and restores params in place.
template <typename F>
std::vector<double> numeric_gradient(F&& f, std::vector<double>& params, double eps) {
    if (!(eps > 0.0)) throw ValueError("fd epsilon must be positive");
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        const double hi = f(params);
        params[i] = saved - eps;
        const double lo = f(params);
        params[i] = saved;
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    return grad;
}

namespace detail {

inline std::vector<double> disp_to_flat(const DisplacementGrid& disp) {
    std::vector<double> flat;
    flat.reserve(disp.h_flow.size() * 2);
    flat.insert(flat.end(), disp.h_flow.data().begin(), disp.h_flow.data().end());
    flat.insert(flat.end(), disp.w_flow.data().begin(), disp.w_flow.data().end());
    return flat;
}

inline DisplacementGrid disp_from_flat(const std::vector<double>& flat,
                                       const std::vector<std::size_t>& shape) {
    const std::size_t n = Tensor::count(shape);
    std::vector<double> h(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> w(flat.begin() + static_cast<std::ptrdiff_t>(n), flat.end());
    return {Tensor::from_data(shape, std::move(h)), Tensor::from_data(shape, std::move(w))};
}

}  // namespace detail

// Objective as a function of the offsets alone, with x_t and the target held
// fixed: L(d) = combined(u_t, toy_forward(model, x_t, motion rope at d)).
inline double offset_objective(const ToyVelocityModel& model, const Tensor& x_t, const Tensor& u_t,
                               const DisplacementGrid& disp, const ObjectiveConfig& cfg) {
    const RopeGrid rope = build_motion_rope(model.rope_config(), disp);
    return combined_objective(u_t, toy_forward(model, x_t, rope), cfg);
}

inline DisplacementGrid grad_wrt_offsets(const ToyVelocityModel& model, const Tensor& x_t,
                                         const Tensor& u_t, const DisplacementGrid& disp,
                                         const ObjectiveConfig& cfg) {
    disp.validate();
    std::vector<double> flat = detail::disp_to_flat(disp);
    const std::vector<std::size_t> shape = disp.h_flow.shape();
    auto f = [&](const std::vector<double>& p) {
        return offset_objective(model, x_t, u_t, detail::disp_from_flat(p, shape), cfg);
    };
    std::vector<double> grad = numeric_gradient(f, flat, cfg.fd_epsilon);
    return detail::disp_from_flat(grad, shape);
}

// ===== Offset optimization =====

struct TraceRow {
    std::size_t step = 0;
    std::size_t inner = 0;
    double fm = 0.0;
    double phase = 0.0;
    double total = 0.0;
};

struct OptimizeResult {
    DisplacementGrid offsets;
    std::vector<TraceRow> trace;
    Tensor x_final;
};

// For each of the first opt_steps denoising steps: freeze the target velocity
// u_t = (x_t - v_ref) / sigma_t, run inner_steps descent updates on the
// offsets (loss recorded before each update), then advance the latent by
// x <- x - (sigma_t - sigma_next) * v_pred at the updated offsets.
inline OptimizeResult optimize_offsets(const ToyVelocityModel& model, const Schedule& schedule,
                                       const Tensor& x_init, const Tensor& v_ref,
                                       const DisplacementGrid& disp_init,
                                       const ObjectiveConfig& cfg) {
    schedule.validate();
    cfg.validate();
    disp_init.validate();
    detail::require_same_shape(x_init, v_ref, "optimize_offsets");
    if (cfg.opt_steps > schedule.size())
        throw ValueError("opt_steps exceeds schedule length");

    Tensor x = x_init;
    std::vector<double> params = detail::disp_to_flat(disp_init);
    const std::vector<std::size_t> dshape = disp_init.h_flow.shape();

    std::vector<double> adam_m(params.size(), 0.0);
    std::vector<double> adam_v(params.size(), 0.0);
    std::size_t adam_k = 0;

    OptimizeResult result;
    for (std::size_t step = 0; step < cfg.opt_steps; ++step) {
        const double sigma_t = schedule.sigmas[step];
        const Tensor u_t = target_velocity(x, v_ref, sigma_t);
        for (std::size_t inner = 0; inner < cfg.inner_steps; ++inner) {
            const DisplacementGrid disp = detail::disp_from_flat(params, dshape);
            const RopeGrid rope = build_motion_rope(model.rope_config(), disp);
            const ObjectiveBreakdown b =
                objective_breakdown(u_t, toy_forward(model, x, rope), cfg);
            result.trace.push_back({step, inner, b.fm, b.phase, b.total});

            auto f = [&](const std::vector<double>& p) {
                return offset_objective(model, x, u_t, detail::disp_from_flat(p, dshape), cfg);
            };
            const std::vector<double> grad = numeric_gradient(f, params, cfg.fd_epsilon);
            if (cfg.optimizer == OptimizerKind::adam) {
                ++adam_k;
                const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam_k));
                const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam_k));
                for (std::size_t i = 0; i < params.size(); ++i) {
                    adam_m[i] = cfg.adam_beta1 * adam_m[i] + (1.0 - cfg.adam_beta1) * grad[i];
                    adam_v[i] = cfg.adam_beta2 * adam_v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
                    params[i] -= cfg.learning_rate * (adam_m[i] / c1) /
                                 (std::sqrt(adam_v[i] / c2) + cfg.adam_eps);
                }
            } else {
                for (std::size_t i = 0; i < params.size(); ++i)
                    params[i] -= cfg.learning_rate * grad[i];
            }
        }
        if (step + 1 < schedule.size()) {
            const DisplacementGrid disp = detail::disp_from_flat(params, dshape);
            const RopeGrid rope = build_motion_rope(model.rope_config(), disp);
            const Tensor v_pred = toy_forward(model, x, rope);
            x = x - scaled(v_pred, sigma_t - schedule.sigmas[step + 1]);
        }
    }
    result.offsets = detail::disp_from_flat(params, dshape);
    result.x_final = std::move(x);
    return result;
}

}  // namespace ropewarp
