#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ropewarp/error.hpp"
#include "ropewarp/rng.hpp"
#include "ropewarp/tnsr.hpp"

namespace ropewarp {

// ===== Point tracks =====

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Track {
    std::vector<Point2> points;
    std::vector<bool> visible;  // parallel to points
};

struct TrajectorySet {
    double width = 0.0;   // pixels
    double height = 0.0;  // pixels
    std::vector<Track> tracks;

    std::size_t frames() const { return tracks.empty() ? 0 : tracks.front().points.size(); }

    void validate() const {
        if (!(width > 0.0) || !(height > 0.0))
            throw ValueError("trajectory set needs positive width and height");
        for (const Track& t : tracks) {
            if (t.points.size() != visible_size(t))
                throw ShapeError("track visibility flags do not match point count");
            if (t.points.size() != frames())
                throw ShapeError("tracks must share one frame count");
        }
    }

private:
    static std::size_t visible_size(const Track& t) { return t.visible.size(); }
};

// ===== Trajectory file =====
//
// JSON document: {"width": W, "height": H, "tracks": [{"points": [[x, y],
// ...], "visible": [true, ...]}, ...]}. One file per video.

inline TrajectorySet tracks_from_json(const nlohmann::json& j, const std::string& origin) {
    try {
        TrajectorySet set;
        set.width = j.at("width").get<double>();
        set.height = j.at("height").get<double>();
        for (const auto& jt : j.at("tracks")) {
            Track t;
            for (const auto& jp : jt.at("points"))
                t.points.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
            for (const auto& jv : jt.at("visible")) t.visible.push_back(jv.get<bool>());
            set.tracks.push_back(std::move(t));
        }
        set.validate();
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad trajectory document " + origin + ": " + e.what());
    }
}

inline TrajectorySet read_tracks(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad trajectory document " + path + ": " + e.what());
    }
    return tracks_from_json(j, path);
}

inline nlohmann::json tracks_to_json(const TrajectorySet& set) {
    set.validate();
    nlohmann::json jtracks = nlohmann::json::array();
    for (const Track& t : set.tracks) {
        nlohmann::json jp = nlohmann::json::array();
        for (const Point2& p : t.points) jp.push_back({p.x, p.y});
        nlohmann::json jv = nlohmann::json::array();
        for (bool v : t.visible) jv.push_back(v);
        jtracks.push_back({{"points", jp}, {"visible", jv}});
    }
    return {{"width", set.width}, {"height", set.height}, {"tracks", jtracks}};
}

inline void write_tracks(const TrajectorySet& set, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << tracks_to_json(set).dump(2) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

// ===== Foreground masks =====
//
// Binary PGM (P5), maxval up to 255; nonzero bytes are foreground.

struct Mask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> fg;  // row-major, 1 = foreground

    bool at(std::size_t y, std::size_t x) const { return fg[y * width + x] != 0; }
};

namespace detail {

inline int pgm_next_token(const std::vector<unsigned char>& bytes, std::size_t& off,
                          const std::string& origin) {
    // Skips whitespace and '#' comment lines, then reads one decimal token.
    while (off < bytes.size()) {
        if (std::isspace(bytes[off])) {
            ++off;
        } else if (bytes[off] == '#') {
            while (off < bytes.size() && bytes[off] != '\n') ++off;
        } else {
            break;
        }
    }
    if (off >= bytes.size() || !std::isdigit(bytes[off]))
        throw FormatError("bad header token: " + origin);
    int value = 0;
    while (off < bytes.size() && std::isdigit(bytes[off])) {
        value = value * 10 + (bytes[off] - '0');
        ++off;
    }
    return value;
}

}  // namespace detail

inline Mask read_mask(const std::string& path) {
    const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw FormatError("bad magic (expected P5): " + path);
    std::size_t off = 2;
    const int w = detail::pgm_next_token(bytes, off, path);
    const int h = detail::pgm_next_token(bytes, off, path);
    const int maxval = detail::pgm_next_token(bytes, off, path);
    if (w <= 0 || h <= 0) throw FormatError("implausible dimensions: " + path);
    if (maxval <= 0 || maxval > 255) throw FormatError("unsupported maxval: " + path);
    ++off;  // single whitespace byte after maxval
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() < off + n) throw TruncatedError("truncated payload: " + path);
    Mask m{static_cast<std::size_t>(h), static_cast<std::size_t>(w), {}};
    m.fg.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.fg[i] = bytes[off + i] != 0 ? 1 : 0;
    return m;
}

inline void write_mask(const Mask& m, const std::string& path) {
    if (m.fg.size() != m.height * m.width) throw ShapeError("mask payload does not match dimensions");
    std::vector<unsigned char> bytes;
    const std::string header =
        "P5\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
    bytes.insert(bytes.end(), header.begin(), header.end());
    for (std::uint8_t v : m.fg) bytes.push_back(v ? 255 : 0);
    detail::write_file_bytes(path, bytes);
}

// ===== Query sampling =====

// Uniform without replacement over pixel centers (x + 0.5, y + 0.5). With
// fg_only, n foreground points; otherwise n/2 foreground then n/2 background
// (integer halves). Candidates are enumerated row-major and shuffled by a
// partial Fisher-Yates, so results are reproducible from the seed alone.
inline std::vector<Point2> sample_queries(const Mask& mask, std::size_t n, bool fg_only,
                                          SplitMix64& rng) {
    const auto pick = [&](bool fg, std::size_t count, const char* region) {
        std::vector<Point2> pool;
        for (std::size_t y = 0; y < mask.height; ++y)
            for (std::size_t x = 0; x < mask.width; ++x)
                if (mask.at(y, x) == fg)
                    pool.push_back({static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5});
        if (pool.empty()) throw ValueError(std::string("mask has no ") + region + " pixels");
        if (count > pool.size())
            throw ValueError(std::string("requested more points than ") + region + " pixels (" +
                             std::to_string(count) + " > " + std::to_string(pool.size()) + ")");
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
        return pool;
    };

    if (fg_only) return pick(true, n, "foreground");
    std::vector<Point2> out = pick(true, n / 2, "foreground");
    const std::vector<Point2> bg = pick(false, n / 2, "background");
    out.insert(out.end(), bg.begin(), bg.end());
    return out;
}

// ===== Occlusion filling =====

struct FillResult {
    TrajectorySet filled;
    std::vector<std::size_t> dropped;  // tracks never visible at any frame >= 1
};

// Frame by frame from frame 1 on: every point invisible at frame f takes the
// frame-f position of the visible point whose current position is nearest to
// the invisible point's frame-(f-1) filled position (ties to the lowest
// visible track index). If no point is visible at frame f, every point keeps
// its frame-(f-1) filled position. A frame with no invisible points is left
// untouched.
inline FillResult fill_and_drop(const TrajectorySet& set) {
    set.validate();
    FillResult result{set, {}};
    const std::size_t n = set.tracks.size();
    const std::size_t frames = set.frames();
    auto& tracks = result.filled.tracks;

    for (std::size_t f = 1; f < frames; ++f) {
        std::vector<std::size_t> vis, inv;
        for (std::size_t i = 0; i < n; ++i)
            (tracks[i].visible[f] ? vis : inv).push_back(i);
        if (!inv.empty() && !vis.empty()) {
            for (std::size_t i : inv) {
                const Point2 prev = tracks[i].points[f - 1];
                std::size_t best = vis.front();
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t j : vis) {
                    const double d = distance(prev, tracks[j].points[f]);
                    if (d < best_d) {
                        best_d = d;
                        best = j;
                    }
                }
                tracks[i].points[f] = tracks[best].points[f];
            }
        } else if (vis.empty()) {
            for (std::size_t i = 0; i < n; ++i) tracks[i].points[f] = tracks[i].points[f - 1];
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        bool seen = false;
        for (std::size_t f = 1; f < frames; ++f) seen = seen || tracks[i].visible[f];
        if (!seen) result.dropped.push_back(i);
    }
    return result;
}

// ===== Discrete Frechet distance =====

// Iterative dynamic program over the full coupling table:
// ca(i, j) = max(d(P_i, Q_j), min(ca(i-1, j), ca(i-1, j-1), ca(i, j-1))).
inline double discrete_frechet(std::span<const Point2> p, std::span<const Point2> q) {
    if (p.empty() || q.empty()) throw ValueError("discrete_frechet needs non-empty curves");
    const std::size_t m = p.size(), n = q.size();
    std::vector<double> ca(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = distance(p[i], q[j]);
            double reach;
            if (i == 0 && j == 0) {
                reach = d;
            } else {
                double best = std::numeric_limits<double>::infinity();
                if (i > 0) best = std::min(best, ca[(i - 1) * n + j]);
                if (j > 0) best = std::min(best, ca[i * n + j - 1]);
                if (i > 0 && j > 0) best = std::min(best, ca[(i - 1) * n + j - 1]);
                reach = std::max(d, best);
            }
            ca[i * n + j] = reach;
        }
    }
    return ca[m * n - 1];
}

// ===== Trajectory distance =====

struct FtdReport {
    double value = 0.0;
    std::size_t pairs = 0;
    std::vector<std::size_t> dropped_real;
    std::vector<std::size_t> dropped_fake;
};

// Fill both sets, drop the union of never-reappearing tracks, normalize each
// set by its own frame size (x / W, y / H), then take the root mean square of
// per-pair Frechet distances over the surviving index pairs.
inline FtdReport ftd(const TrajectorySet& real, const TrajectorySet& fake) {
    real.validate();
    fake.validate();
    if (real.tracks.size() != fake.tracks.size())
        throw ShapeError("trajectory sets must contain the same number of tracks");
    if (real.frames() != fake.frames())
        throw ShapeError("trajectory sets must share one frame count");

    FillResult fr = fill_and_drop(real);
    FillResult ff = fill_and_drop(fake);
    std::vector<bool> dead(real.tracks.size(), false);
    for (std::size_t i : fr.dropped) dead[i] = true;
    for (std::size_t i : ff.dropped) dead[i] = true;

    const auto normalized = [](const TrajectorySet& set, const Track& t) {
        std::vector<Point2> out(t.points.size());
        for (std::size_t f = 0; f < t.points.size(); ++f)
            out[f] = {t.points[f].x / set.width, t.points[f].y / set.height};
        return out;
    };

    FtdReport report;
    report.dropped_real = fr.dropped;
    report.dropped_fake = ff.dropped;
    double acc = 0.0;
    for (std::size_t i = 0; i < real.tracks.size(); ++i) {
        if (dead[i]) continue;
        const std::vector<Point2> p = normalized(real, fr.filled.tracks[i]);
        const std::vector<Point2> q = normalized(fake, ff.filled.tracks[i]);
        const double d = discrete_frechet(p, q);
        acc += d * d;
        ++report.pairs;
    }
    if (report.pairs == 0) throw ValueError("no valid trajectory pairs");
    report.value = std::sqrt(acc / static_cast<double>(report.pairs));
    return report;
}

// ===== Motion fidelity (simplified) =====

namespace detail {

// Cosine similarity of per-frame displacements, averaged over transitions.
// Two zero displacements agree (1); exactly one zero disagrees (0).
inline double displacement_similarity(const Track& a, const Track& b) {
    const std::size_t transitions = a.points.size() - 1;
    double acc = 0.0;
    for (std::size_t f = 0; f < transitions; ++f) {
        const double ax = a.points[f + 1].x - a.points[f].x;
        const double ay = a.points[f + 1].y - a.points[f].y;
        const double bx = b.points[f + 1].x - b.points[f].x;
        const double by = b.points[f + 1].y - b.points[f].y;
        const double na = std::hypot(ax, ay);
        const double nb = std::hypot(bx, by);
        if (na == 0.0 && nb == 0.0)
            acc += 1.0;
        else if (na == 0.0 || nb == 0.0)
            acc += 0.0;
        else
            acc += (ax * bx + ay * by) / (na * nb);
    }
    return acc / static_cast<double>(transitions);
}

}  // namespace detail

// For every real track, the best displacement-cosine agreement over fake
// tracks; returns the mean of those best scores. Needs at least two frames.
inline double motion_fidelity(const TrajectorySet& real, const TrajectorySet& fake) {
    real.validate();
    fake.validate();
    if (real.tracks.empty() || fake.tracks.empty())
        throw ValueError("motion_fidelity needs non-empty trajectory sets");
    if (real.frames() < 2 || fake.frames() < 2)
        throw ValueError("motion_fidelity needs at least two frames");
    if (real.frames() != fake.frames())
        throw ShapeError("trajectory sets must share one frame count");

    double acc = 0.0;
    for (const Track& r : real.tracks) {
        double best = -std::numeric_limits<double>::infinity();
        for (const Track& f : fake.tracks)
            best = std::max(best, detail::displacement_similarity(r, f));
        acc += best;
    }
    return acc / static_cast<double>(real.tracks.size());
}

}  // namespace ropewarp
