#pragma once

// Shared helpers for the test binaries: scratch directories, CLI invocation,
// random data, and independent reference implementations (oracles) that
// deliberately avoid the library's own code paths.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numbers>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ropewarp/rng.hpp"
#include "ropewarp/tensor.hpp"
#include "ropewarp/trajectory.hpp"

namespace testsupport {

// Scratch directory, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        namespace fs = std::filesystem;
        path_ = fs::temp_directory_path() / ("ropewarp_" + tag + "_" + std::to_string(counter()++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() { std::filesystem::remove_all(path_); }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

inline std::string cli_path() {
    const char* env = std::getenv("ROPEWARP_CLI");
    return env ? env : "";
}

inline CliResult run_cli(const std::string& args) {
    CliResult r;
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
    const int status = pclose(pipe);
    r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::vector<unsigned char> slurp(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    std::vector<unsigned char> bytes;
    if (!f) return bytes;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0)
        bytes.insert(bytes.end(), buf, buf + got);
    std::fclose(f);
    return bytes;
}

// ===== Random data =====

inline ropewarp::Tensor random_tensor(std::vector<std::size_t> shape, ropewarp::SplitMix64& rng,
                                      double lo = -1.0, double hi = 1.0) {
    ropewarp::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = lo + (hi - lo) * rng.next_double();
    return t;
}

// ===== Oracle: direct triple-sum 3D DFT =====
//
// O(N^2) in the element count; no separable passes, no shared code with the
// library implementation.
inline ropewarp::ComplexTensor direct_dft3(const ropewarp::Tensor& x) {
    std::vector<std::size_t> shape = x.shape();
    while (shape.size() < 3) shape.insert(shape.begin(), 1);
    std::size_t channels = 1;
    for (std::size_t a = 0; a + 3 < shape.size(); ++a) channels *= shape[a];
    const std::size_t st = shape[shape.size() - 3];
    const std::size_t sh = shape[shape.size() - 2];
    const std::size_t sw = shape[shape.size() - 1];
    const std::size_t cell = st * sh * sw;

    std::vector<std::complex<double>> out(x.size());
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t kt = 0; kt < st; ++kt)
            for (std::size_t kh = 0; kh < sh; ++kh)
                for (std::size_t kw = 0; kw < sw; ++kw) {
                    std::complex<double> acc{0.0, 0.0};
                    for (std::size_t nt = 0; nt < st; ++nt)
                        for (std::size_t nh = 0; nh < sh; ++nh)
                            for (std::size_t nw = 0; nw < sw; ++nw) {
                                const double angle =
                                    -2.0 * std::numbers::pi *
                                    (static_cast<double>(kt * nt) / static_cast<double>(st) +
                                     static_cast<double>(kh * nh) / static_cast<double>(sh) +
                                     static_cast<double>(kw * nw) / static_cast<double>(sw));
                                acc += x[c * cell + nt * sh * sw + nh * sw + nw] *
                                       std::polar(1.0, angle);
                            }
                    out[c * cell + kt * sh * sw + kh * sw + kw] = acc;
                }
    }
    return ropewarp::ComplexTensor::from_data(x.shape(), std::move(out));
}

// ===== Oracle: coupling-enumeration Frechet distance =====
//
// Walks every monotone coupling (steps advance one or both indices) and takes
// the min over couplings of the max pointwise distance. Exponential; fine for
// curves of up to ~8 points.
inline double frechet_by_enumeration(const std::vector<ropewarp::Point2>& p,
                                     const std::vector<ropewarp::Point2>& q) {
    struct Walker {
        const std::vector<ropewarp::Point2>& p;
        const std::vector<ropewarp::Point2>& q;
        double best = std::numeric_limits<double>::infinity();
        void walk(std::size_t i, std::size_t j, double cur) {
            cur = std::max(cur, ropewarp::distance(p[i], q[j]));
            if (cur >= best) return;
            if (i + 1 == p.size() && j + 1 == q.size()) {
                best = cur;
                return;
            }
            if (i + 1 < p.size()) walk(i + 1, j, cur);
            if (j + 1 < q.size()) walk(i, j + 1, cur);
            if (i + 1 < p.size() && j + 1 < q.size()) walk(i + 1, j + 1, cur);
        }
    };
    Walker w{p, q};
    w.walk(0, 0, 0.0);
    return w.best;
}

// ===== Synthetic tracker =====
//
// Parametric tracks with scripted occlusion windows, used as ground truth for
// the occlusion-filling and metric tests.
struct ScriptedTrack {
    ropewarp::Point2 start;
    ropewarp::Point2 velocity;                              // per frame
    std::vector<std::pair<std::size_t, std::size_t>> occlusions;  // [begin, end) frames
};

inline ropewarp::TrajectorySet make_tracks(double width, double height, std::size_t frames,
                                           const std::vector<ScriptedTrack>& scripts) {
    ropewarp::TrajectorySet set;
    set.width = width;
    set.height = height;
    for (const ScriptedTrack& s : scripts) {
        ropewarp::Track t;
        for (std::size_t f = 0; f < frames; ++f) {
            t.points.push_back({s.start.x + s.velocity.x * static_cast<double>(f),
                                s.start.y + s.velocity.y * static_cast<double>(f)});
            bool occluded = false;
            for (auto [b, e] : s.occlusions) occluded = occluded || (f >= b && f < e);
            t.visible.push_back(!occluded);
        }
        set.tracks.push_back(std::move(t));
    }
    return set;
}

}  // namespace testsupport
