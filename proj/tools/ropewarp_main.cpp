// Command-line front end. Subcommands:
//   rope build | rope warp | flow synth | flow convert
//   metric frechet | metric ftd | loss eval | sim optimize
// Exit codes: 0 success, 2 usage error, 1 runtime or data error. Every output
// file gets a .manifest.json sidecar; repeated runs with the same arguments
// produce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ropewarp/ropewarp.hpp"

namespace {

using namespace ropewarp;

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string index_list(const std::vector<std::size_t>& ix) {
    std::string out = "[";
    for (std::size_t i = 0; i < ix.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(ix[i]);
    }
    return out + "]";
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    return index_list(shape);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Shared geometry flags for the rope-bearing commands.
struct GeometryArgs {
    std::size_t st = 0, sh = 0, sw = 0;
    std::size_t dt = 16, dh = 24, dw = 24;
    double theta = 10000.0;

    void attach(CLI::App* cmd, bool dim_defaults_small = false) {
        if (dim_defaults_small) {
            dt = dh = dw = 4;
        }
        cmd->add_option("--st", st, "time-axis lattice extent")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--sh", sh, "height-axis lattice extent")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--sw", sw, "width-axis lattice extent")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--dt", dt, "time-axis channel count (even)")->capture_default_str()->check(even_positive());
        cmd->add_option("--dh", dh, "height-axis channel count (even)")->capture_default_str()->check(even_positive());
        cmd->add_option("--dw", dw, "width-axis channel count (even)")->capture_default_str()->check(even_positive());
        cmd->add_option("--theta", theta, "frequency base")->capture_default_str()->check(CLI::PositiveNumber);
    }

    RopeConfig config() const {
        RopeConfig cfg;
        cfg.theta = theta;
        cfg.dims = {dt, dh, dw};
        cfg.seq = {st, sh, sw};
        return cfg;
    }

    nlohmann::json to_json() const {
        return {{"st", st}, {"sh", sh}, {"sw", sw}, {"dt", dt},
                {"dh", dh}, {"dw", dw}, {"theta", theta}};
    }

    static CLI::Validator even_positive() {
        return CLI::Validator(
            [](std::string& value) {
                long long v = 0;
                try {
                    v = std::stoll(value);
                } catch (...) {
                    return std::string("not an integer");
                }
                if (v <= 0 || v % 2 != 0) return std::string("must be positive and even");
                return std::string();
            },
            "EVEN");
    }
};

std::uint64_t checksum_bytes(const std::vector<unsigned char>& bytes) {
    return fnv1a64(bytes.data(), bytes.size());
}

// ===== rope build =====

int cmd_rope_build(const GeometryArgs& geo, const std::string& out) {
    const RopeGrid rope = build_default_rope(geo.config());
    const std::vector<unsigned char> bytes = tnsr_bytes(rope.grid);
    detail::write_file_bytes(out, bytes);

    RunManifest manifest;
    manifest.command = "rope build";
    manifest.parameters = geo.to_json();
    manifest.parameters["out"] = out;
    manifest.write_for(out);

    std::cout << "RESULT shape=" << shape_string(rope.grid.shape())
              << " checksum=" << hex64(checksum_bytes(bytes)) << " out=" << out << "\n";
    return 0;
}

// ===== rope warp =====

int cmd_rope_warp(const GeometryArgs& geo, const std::string& flow_path, const std::string& out,
                  bool check) {
    const FlowField flow = flow_read_any(flow_path);
    if (flow.frames() != geo.st)
        throw ShapeError("flow has " + std::to_string(flow.frames()) +
                         " frames but --st is " + std::to_string(geo.st));
    const RopeConfig cfg = geo.config();
    const DisplacementGrid disp = displacement_from_flow(flow, geo.sh, geo.sw);
    const RopeGrid rope = build_motion_rope(cfg, disp);

    if (check) {
        // Second algebraic route: every height/width entry must equal the
        // default-lattice entry advanced by the cell's offset phase, and the
        // time block must be untouched.
        const RopeGrid base = build_default_rope(cfg);
        const std::vector<double> fh = freq_spectrum(cfg.dims[1], cfg.theta);
        const std::vector<double> fw = freq_spectrum(cfg.dims[2], cfg.theta);
        double max_dev = 0.0;
        for (std::size_t t = 0; t < geo.st; ++t)
            for (std::size_t h = 0; h < geo.sh; ++h)
                for (std::size_t w = 0; w < geo.sw; ++w) {
                    std::size_t ch = 0;
                    for (; ch < rope.h_block_begin(); ++ch)
                        max_dev = std::max(max_dev,
                                           std::abs(rope.grid(t, h, w, ch) - base.grid(t, h, w, ch)));
                    for (std::size_t i = 0; i < fh.size(); ++i, ++ch)
                        max_dev = std::max(
                            max_dev, std::abs(rope.grid(t, h, w, ch) -
                                              base.grid(t, h, w, ch) *
                                                  std::polar(1.0, disp.h_flow(t, h, w) * fh[i])));
                    for (std::size_t i = 0; i < fw.size(); ++i, ++ch)
                        max_dev = std::max(
                            max_dev, std::abs(rope.grid(t, h, w, ch) -
                                              base.grid(t, h, w, ch) *
                                                  std::polar(1.0, disp.w_flow(t, h, w) * fw[i])));
                }
        std::cout << "CHECK phase_law_max_dev=" << fmt9(max_dev) << "\n";
        if (!(max_dev <= 1e-9)) throw ValueError("phase-law self check failed");
    }

    const std::vector<unsigned char> bytes = tnsr_bytes(rope.grid);
    detail::write_file_bytes(out, bytes);

    RunManifest manifest;
    manifest.command = "rope warp";
    manifest.parameters = geo.to_json();
    manifest.parameters["flow"] = flow_path;
    manifest.parameters["check"] = check;
    manifest.parameters["out"] = out;
    manifest.add_input(flow_path);
    manifest.write_for(out);

    std::cout << "RESULT shape=" << shape_string(rope.grid.shape())
              << " checksum=" << hex64(checksum_bytes(bytes)) << " out=" << out << "\n";
    return 0;
}

// ===== flow synth =====

int cmd_flow_synth(const std::string& pattern, double a, double b, double omega, double scale,
                   std::size_t frames, std::size_t height, std::size_t width,
                   const std::string& out) {
    const std::map<std::string, double> params{
        {"a", a}, {"b", b}, {"omega", omega}, {"scale", scale}};
    const FlowField flow = flow_synth(pattern, params, frames, height, width);

    if (ends_with(out, ".tnsr"))
        tnsr_write(out, flow_to_tnsr(flow));
    else
        flo_write_dir(flow, out);

    RunManifest manifest;
    manifest.command = "flow synth";
    manifest.parameters = {{"pattern", pattern}, {"a", a},           {"b", b},
                           {"omega", omega},     {"scale", scale},   {"frames", frames},
                           {"height", height},   {"width", width},   {"out", out}};
    manifest.write_for(out);

    std::cout << "RESULT pattern=" << pattern << " frames=" << frames << " height=" << height
              << " width=" << width << " out=" << out << "\n";
    return 0;
}

// ===== flow convert =====

int cmd_flow_convert(const std::string& in, const std::string& out) {
    const FlowField flow = flow_read_any(in);
    if (ends_with(out, ".tnsr"))
        tnsr_write(out, flow_to_tnsr(flow));
    else if (ends_with(out, ".flo")) {
        if (flow.frames() != 1) throw ShapeError("multi-frame flow needs a directory output");
        flo_write(flow, out);
    } else
        flo_write_dir(flow, out);

    RunManifest manifest;
    manifest.command = "flow convert";
    manifest.parameters = {{"in", in}, {"out", out}};
    manifest.add_input(in);
    manifest.write_for(out);

    std::cout << "RESULT frames=" << flow.frames() << " height=" << flow.height()
              << " width=" << flow.width() << " out=" << out << "\n";
    return 0;
}

// ===== metric frechet =====

int cmd_metric_frechet(const std::string& real_path, const std::string& fake_path,
                       std::size_t index, bool normalize) {
    const TrajectorySet real = read_tracks(real_path);
    const TrajectorySet fake = read_tracks(fake_path);
    if (index >= real.tracks.size() || index >= fake.tracks.size())
        throw ValueError("track index " + std::to_string(index) + " out of range");

    const auto curve = [&](const TrajectorySet& set, const Track& t) {
        std::vector<Point2> out = t.points;
        if (normalize)
            for (Point2& p : out) {
                p.x /= set.width;
                p.y /= set.height;
            }
        return out;
    };
    const std::vector<Point2> p = curve(real, real.tracks[index]);
    const std::vector<Point2> q = curve(fake, fake.tracks[index]);
    std::cout << "RESULT frechet=" << fmt9(discrete_frechet(p, q)) << " index=" << index
              << " normalized=" << (normalize ? 1 : 0) << "\n";
    return 0;
}

// ===== metric ftd =====

int cmd_metric_ftd(const std::string& real_path, const std::string& fake_path,
                   const std::string& mask_path, std::size_t n, std::uint64_t seed, bool fg_only,
                   bool with_mf) {
    TrajectorySet real = read_tracks(real_path);
    TrajectorySet fake = read_tracks(fake_path);

    std::string selected;
    if (!mask_path.empty()) {
        // Query-driven selection: sample seeded query points from the mask,
        // map each to the real track whose first-frame point is nearest
        // (ties to the lowest index), and keep the same indices on both
        // sides. Queries may select the same track more than once.
        const Mask mask = read_mask(mask_path);
        SplitMix64 rng(seed);
        const std::vector<Point2> queries = sample_queries(mask, n, fg_only, rng);
        if (real.tracks.empty()) throw ValueError("real set has no tracks");
        std::vector<std::size_t> picks;
        for (const Point2& query : queries) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < real.tracks.size(); ++i) {
                const double d = distance(query, real.tracks[i].points.front());
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            picks.push_back(best);
        }
        if (fake.tracks.size() != real.tracks.size())
            throw ShapeError("trajectory sets must contain the same number of tracks");
        TrajectorySet real_sel{real.width, real.height, {}};
        TrajectorySet fake_sel{fake.width, fake.height, {}};
        for (std::size_t i : picks) {
            real_sel.tracks.push_back(real.tracks[i]);
            fake_sel.tracks.push_back(fake.tracks[i]);
        }
        selected = index_list(picks);
        real = std::move(real_sel);
        fake = std::move(fake_sel);
    }

    const FtdReport report = ftd(real, fake);
    std::cout << "ftd " << fmt9(report.value) << "\n";
    std::cout << "pairs " << report.pairs << "\n";
    std::cout << "dropped_real " << index_list(report.dropped_real) << "\n";
    std::cout << "dropped_fake " << index_list(report.dropped_fake) << "\n";
    std::ostringstream result;
    result << "RESULT ftd=" << fmt9(report.value) << " pairs=" << report.pairs
           << " dropped_real=" << index_list(report.dropped_real)
           << " dropped_fake=" << index_list(report.dropped_fake);
    if (!selected.empty()) result << " selected=" << selected;
    if (with_mf) {
        const double mf = motion_fidelity(real, fake);
        std::cout << "mf " << fmt9(mf) << "\n";
        result << " mf=" << fmt9(mf);
    }
    std::cout << result.str() << "\n";
    return 0;
}

// ===== loss eval =====

int cmd_loss_eval(const std::string& target_path, const std::string& pred_path, double lambda,
                  const std::string& terms_csv) {
    const Tensor target = tnsr_read_real(target_path);
    const Tensor pred = tnsr_read_real(pred_path);

    std::set<std::string> terms;
    std::stringstream ss(terms_csv);
    for (std::string term; std::getline(ss, term, ',');) {
        if (term != "fm" && term != "phase" && term != "mag")
            throw ValueError("unknown loss term: " + term);
        terms.insert(term);
    }
    if (terms.empty()) throw ValueError("no loss terms requested");

    ObjectiveConfig cfg;
    cfg.lambda = lambda;
    const ObjectiveBreakdown b = objective_breakdown(target, pred, cfg);

    std::ostringstream result;
    result << "RESULT";
    if (terms.count("fm")) {
        std::cout << "fm " << fmt9(b.fm) << "\n";
        result << " fm=" << fmt9(b.fm);
    }
    if (terms.count("phase")) {
        const double p = lambda == 0.0 ? phase_loss(target, pred) : b.phase;
        std::cout << "phase " << fmt9(p) << "\n";
        result << " phase=" << fmt9(p);
    }
    if (terms.count("mag")) {
        const double m = magnitude_loss(target, pred);
        std::cout << "mag " << fmt9(m) << "\n";
        result << " mag=" << fmt9(m);
    }
    std::cout << "combined " << fmt9(b.total) << "\n";
    result << " lambda=" << fmt9(lambda) << " combined=" << fmt9(b.total);
    std::cout << result.str() << "\n";
    return 0;
}

// ===== sim optimize =====

int cmd_sim_optimize(const GeometryArgs& geo, const std::string& flow_path, std::uint64_t seed,
                     std::size_t steps_t, std::size_t steps_s, double lr, double lambda,
                     double scale, bool use_adam, const std::string& out,
                     std::string offsets_out) {
    const FlowField flow = flow_read_any(flow_path);
    if (flow.frames() != geo.st)
        throw ShapeError("flow has " + std::to_string(flow.frames()) +
                         " frames but --st is " + std::to_string(geo.st));
    const RopeConfig cfg = geo.config();
    const DisplacementGrid disp_ref = displacement_from_flow(flow, geo.sh, geo.sw);

    // Self-generated target: the reference velocity is what the model itself
    // predicts under the flow-derived offsets, so those offsets are a known
    // optimum for the first denoising step.
    SplitMix64 root(seed);
    const ToyVelocityModel model(cfg, root.next());
    Tensor x_init({cfg.total_dim(), geo.st, geo.sh, geo.sw});
    for (std::size_t i = 0; i < x_init.size(); ++i)
        x_init[i] = (2.0 * root.next_double() - 1.0) * scale;

    const Schedule schedule = Schedule::linear_default();
    const Tensor v_star = toy_forward(model, x_init, build_motion_rope(cfg, disp_ref));
    const Tensor v_ref = x_init - scaled(v_star, schedule.sigmas.front());

    ObjectiveConfig ocfg;
    ocfg.lambda = lambda;
    ocfg.opt_steps = steps_t;
    ocfg.inner_steps = steps_s;
    ocfg.learning_rate = lr;
    ocfg.optimizer = use_adam ? OptimizerKind::adam : OptimizerKind::descent;

    const OptimizeResult result =
        optimize_offsets(model, schedule, x_init, v_ref, zero_displacement(cfg), ocfg);

    std::ofstream csv(out, std::ios::trunc);
    if (!csv) throw IoError("cannot open for writing: " + out);
    csv << "step,inner_step,fm,phase,total\n";
    for (const TraceRow& row : result.trace)
        csv << row.step << "," << row.inner << "," << fmt9(row.fm) << "," << fmt9(row.phase) << ","
            << fmt9(row.total) << "\n";
    csv.close();
    if (!csv) throw IoError("write failed: " + out);

    if (offsets_out.empty()) {
        std::filesystem::path p(out);
        p.replace_extension(".offsets.tnsr");
        offsets_out = p.string();
    }
    std::vector<double> packed;
    packed.insert(packed.end(), result.offsets.h_flow.data().begin(),
                  result.offsets.h_flow.data().end());
    packed.insert(packed.end(), result.offsets.w_flow.data().begin(),
                  result.offsets.w_flow.data().end());
    tnsr_write(offsets_out,
               Tensor::from_data({2, geo.st, geo.sh, geo.sw}, std::move(packed)));

    RunManifest manifest;
    manifest.command = "sim optimize";
    manifest.parameters = geo.to_json();
    manifest.parameters["flow"] = flow_path;
    manifest.parameters["seed"] = seed;
    manifest.parameters["t"] = steps_t;
    manifest.parameters["s"] = steps_s;
    manifest.parameters["lr"] = lr;
    manifest.parameters["lambda"] = lambda;
    manifest.parameters["scale"] = scale;
    manifest.parameters["adam"] = use_adam;
    manifest.parameters["out"] = out;
    manifest.parameters["offsets_out"] = offsets_out;
    manifest.add_input(flow_path);
    manifest.write_for(out);
    manifest.write_for(offsets_out);

    const double initial = result.trace.empty() ? 0.0 : result.trace.front().total;
    const double final_loss = result.trace.empty() ? 0.0 : result.trace.back().total;
    std::cout << "RESULT initial=" << fmt9(initial) << " final=" << fmt9(final_loss)
              << " ratio=" << fmt9(initial == 0.0 ? 0.0 : final_loss / initial)
              << " rows=" << result.trace.size() << " out=" << out
              << " offsets_out=" << offsets_out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotary-embedding motion toolkit"};
    app.require_subcommand(1);

    // rope
    auto* rope = app.add_subcommand("rope", "build rotary phase tables");
    rope->require_subcommand(1);
    GeometryArgs build_geo;
    std::string build_out;
    auto* rope_build = rope->add_subcommand("build", "integer-lattice phase table");
    build_geo.attach(rope_build);
    rope_build->add_option("--out", build_out, "output .tnsr path")->required();

    GeometryArgs warp_geo;
    std::string warp_flow, warp_out;
    bool warp_check = false;
    auto* rope_warp = rope->add_subcommand("warp", "flow-displaced phase table");
    warp_geo.attach(rope_warp);
    rope_warp->add_option("--flow", warp_flow, "flow input (.flo directory or [2,T,H,W] .tnsr)")
        ->required();
    rope_warp->add_option("--out", warp_out, "output .tnsr path")->required();
    rope_warp->add_flag("--check", warp_check, "verify the phase law before writing");

    // flow
    auto* flow = app.add_subcommand("flow", "synthesize and convert optical flow");
    flow->require_subcommand(1);
    std::string synth_pattern, synth_out;
    double synth_a = 0.0, synth_b = 0.0, synth_omega = 0.0, synth_scale = 1.0;
    std::size_t synth_frames = 0, synth_height = 0, synth_width = 0;
    auto* flow_synth_cmd = flow->add_subcommand("synth", "generate a synthetic flow field");
    flow_synth_cmd->add_option("--pattern", synth_pattern, "constant | rotation | zoom")
        ->required()
        ->check(CLI::IsMember({"constant", "rotation", "zoom"}));
    flow_synth_cmd->add_option("--frames", synth_frames)->required()->check(CLI::PositiveNumber);
    flow_synth_cmd->add_option("--height", synth_height)->required()->check(CLI::PositiveNumber);
    flow_synth_cmd->add_option("--width", synth_width)->required()->check(CLI::PositiveNumber);
    flow_synth_cmd->add_option("--a", synth_a, "constant pattern: horizontal px/frame")->capture_default_str();
    flow_synth_cmd->add_option("--b", synth_b, "constant pattern: vertical px/frame")->capture_default_str();
    flow_synth_cmd->add_option("--omega", synth_omega, "rotation pattern: radians/frame")->capture_default_str();
    flow_synth_cmd->add_option("--scale", synth_scale, "zoom pattern: factor/frame")->capture_default_str();
    flow_synth_cmd->add_option("--out", synth_out, "output directory or .tnsr path")->required();

    std::string convert_in, convert_out;
    auto* flow_convert_cmd = flow->add_subcommand("convert", "convert between .flo and .tnsr forms");
    flow_convert_cmd->add_option("--in", convert_in, "input (.flo file, directory, or .tnsr)")
        ->required();
    flow_convert_cmd->add_option("--out", convert_out, "output (.flo file, directory, or .tnsr)")
        ->required();

    // metric
    auto* metric = app.add_subcommand("metric", "trajectory metrics");
    metric->require_subcommand(1);
    std::string fre_real, fre_fake;
    std::size_t fre_index = 0;
    bool fre_normalize = false;
    auto* metric_frechet = metric->add_subcommand("frechet", "pairwise discrete Frechet distance");
    metric_frechet->add_option("--real", fre_real, "trajectory document")->required();
    metric_frechet->add_option("--fake", fre_fake, "trajectory document")->required();
    metric_frechet->add_option("--index", fre_index, "track index")->capture_default_str();
    metric_frechet->add_flag("--normalize", fre_normalize, "divide x by width, y by height");

    std::string ftd_real, ftd_fake, ftd_mask;
    std::size_t ftd_n = 100;
    std::uint64_t ftd_seed = 0;
    bool ftd_fg_only = false, ftd_mf = false;
    auto* metric_ftd = metric->add_subcommand("ftd", "root-mean-square Frechet over track pairs");
    metric_ftd->add_option("--real", ftd_real, "trajectory document")->required();
    metric_ftd->add_option("--fake", ftd_fake, "trajectory document")->required();
    auto* mask_opt = metric_ftd->add_option("--mask", ftd_mask, "P5 mask for query selection");
    metric_ftd->add_option("--n", ftd_n, "query count")->capture_default_str()->needs(mask_opt);
    metric_ftd->add_option("--seed", ftd_seed, "query sampling seed")->capture_default_str()->needs(mask_opt);
    metric_ftd->add_flag("--fg-only", ftd_fg_only, "sample all queries from the foreground")
        ->needs(mask_opt);
    metric_ftd->add_flag("--mf", ftd_mf, "also report simplified motion fidelity");

    // loss
    auto* loss = app.add_subcommand("loss", "flow-matching objective terms");
    loss->require_subcommand(1);
    std::string loss_target, loss_pred, loss_terms = "fm,phase";
    double loss_lambda = 1.0;
    auto* loss_eval = loss->add_subcommand("eval", "evaluate losses between two tensors");
    loss_eval->add_option("--target", loss_target, "target velocity .tnsr")->required();
    loss_eval->add_option("--pred", loss_pred, "predicted velocity .tnsr")->required();
    loss_eval->add_option("--lambda", loss_lambda, "phase-term weight")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    loss_eval->add_option("--terms", loss_terms, "comma list from fm,phase,mag")->capture_default_str();

    // sim
    auto* sim = app.add_subcommand("sim", "toy optimization runs");
    sim->require_subcommand(1);
    GeometryArgs sim_geo;
    std::string sim_flow, sim_out, sim_offsets_out;
    std::uint64_t sim_seed = 0;
    std::size_t sim_t = 10, sim_s = 5;
    double sim_lr = 1e-4, sim_lambda = 1.0, sim_scale = 2.0;
    bool sim_adam = false;
    auto* sim_optimize = sim->add_subcommand("optimize", "recover flow offsets on the toy model");
    sim_geo.attach(sim_optimize, /*dim_defaults_small=*/true);
    sim_optimize->add_option("--flow", sim_flow, "flow input (.flo directory or [2,T,H,W] .tnsr)")
        ->required();
    sim_optimize->add_option("--seed", sim_seed, "model and latent seed")->capture_default_str();
    sim_optimize->add_option("--t", sim_t, "denoising steps that optimize")->capture_default_str();
    sim_optimize->add_option("--s", sim_s, "gradient updates per step")->capture_default_str();
    sim_optimize->add_option("--lr", sim_lr, "learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
    sim_optimize->add_option("--lambda", sim_lambda, "phase-term weight")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sim_optimize->add_option("--scale", sim_scale, "latent amplitude")->capture_default_str()
        ->check(CLI::PositiveNumber);
    sim_optimize->add_flag("--adam", sim_adam, "use the adaptive optimizer instead of descent");
    sim_optimize->add_option("--out", sim_out, "trace .csv path")->required();
    sim_optimize->add_option("--offsets-out", sim_offsets_out,
                             "final offsets .tnsr path (default: trace path with .offsets.tnsr)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (rope_build->parsed()) return cmd_rope_build(build_geo, build_out);
        if (rope_warp->parsed()) return cmd_rope_warp(warp_geo, warp_flow, warp_out, warp_check);
        if (flow_synth_cmd->parsed())
            return cmd_flow_synth(synth_pattern, synth_a, synth_b, synth_omega, synth_scale,
                                  synth_frames, synth_height, synth_width, synth_out);
        if (flow_convert_cmd->parsed()) return cmd_flow_convert(convert_in, convert_out);
        if (metric_frechet->parsed())
            return cmd_metric_frechet(fre_real, fre_fake, fre_index, fre_normalize);
        if (metric_ftd->parsed())
            return cmd_metric_ftd(ftd_real, ftd_fake, ftd_mask, ftd_n, ftd_seed, ftd_fg_only,
                                  ftd_mf);
        if (loss_eval->parsed())
            return cmd_loss_eval(loss_target, loss_pred, loss_lambda, loss_terms);
        if (sim_optimize->parsed())
            return cmd_sim_optimize(sim_geo, sim_flow, sim_seed, sim_t, sim_s, sim_lr, sim_lambda,
                                    sim_scale, sim_adam, sim_out, sim_offsets_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
