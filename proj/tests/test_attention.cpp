#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ropewarp/attention.hpp"
#include "support.hpp"

using namespace ropewarp;

namespace {

RopeConfig line_config(std::size_t sw) {
    RopeConfig cfg;
    cfg.dims = {4, 4, 4};
    cfg.seq = {1, 1, sw};
    return cfg;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("rotation by unit phases preserves token norms") {
    SplitMix64 rng(11);
    RopeConfig cfg;
    cfg.dims = {4, 8, 4};
    cfg.seq = {2, 2, 3};
    const ComplexTensor phases = build_default_rope(cfg).flat();
    Tensor tokens = testsupport::random_tensor({cfg.cells(), cfg.total_dim()}, rng, -3.0, 3.0);
    const Tensor out = apply_rope(tokens, phases);
    for (std::size_t m = 0; m < tokens.extent(0); ++m) {
        double before = 0.0, after = 0.0;
        for (std::size_t c = 0; c < tokens.extent(1); ++c) {
            before += tokens(m, c) * tokens(m, c);
            after += out(m, c) * out(m, c);
        }
        CHECK(after == Catch::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("all-one phases leave tokens unchanged") {
    SplitMix64 rng(12);
    Tensor tokens = testsupport::random_tensor({3, 6}, rng);
    ComplexTensor phases({3, 3}, std::complex<double>(1.0, 0.0));
    const Tensor out = apply_rope(tokens, phases);
    for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(out[i] == tokens[i]);
}

TEST_CASE("a quarter-turn phase maps (a, b) to (-b, a)") {
    Tensor tokens = Tensor::from_data({1, 2}, {2.0, 3.0});
    ComplexTensor phases({1, 1}, std::complex<double>(0.0, 1.0));
    const Tensor out = apply_rope(tokens, phases);
    CHECK(out(0, 0) == Catch::Approx(-3.0).margin(1e-15));
    CHECK(out(0, 1) == Catch::Approx(2.0).margin(1e-15));
}

TEST_CASE("scores are scaled dot products") {
    SECTION("matching basis tokens score 1/sqrt(D)") {
        Tensor q({1, 4});
        Tensor k({1, 4});
        q(0, 1) = 1.0;
        k(0, 1) = 1.0;
        const Tensor s = attention_scores(q, k);
        CHECK(s(0, 0) == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("zero queries score zero against anything") {
        SplitMix64 rng(13);
        Tensor q({2, 6});
        Tensor k = testsupport::random_tensor({5, 6}, rng);
        const Tensor s = attention_scores(q, k);
        for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == 0.0);
    }
    SECTION("mismatched widths are rejected") {
        CHECK_THROWS_AS(attention_scores(Tensor({2, 4}), Tensor({2, 6})), ShapeError);
    }
}

TEST_CASE("softmax rows are positive and sum to one") {
    SplitMix64 rng(14);
    const Tensor w = softmax_rows(testsupport::random_tensor({4, 7}, rng, -30.0, 30.0));
    for (std::size_t m = 0; m < 4; ++m) {
        double sum = 0.0;
        for (std::size_t n = 0; n < 7; ++n) {
            CHECK(w(m, n) > 0.0);
            sum += w(m, n);
        }
        CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("roped scores depend only on relative positions") {
    // Shifting every cell's position by the same amount leaves the score
    // matrix unchanged, because each pair contributes Re(q k* e^{j(p_m-p_n)f}).
    SplitMix64 rng(15);
    RopeConfig cfg;
    cfg.dims = {4, 6, 4};
    cfg.seq = {2, 2, 2};
    const Tensor tokens = testsupport::random_tensor({cfg.cells(), cfg.total_dim()}, rng);

    DisplacementGrid shift = zero_displacement(cfg);
    for (std::size_t i = 0; i < shift.h_flow.size(); ++i) {
        shift.h_flow[i] = 7.31;
        shift.w_flow[i] = -2.19;
    }
    const ComplexTensor base = build_default_rope(cfg).flat();
    const ComplexTensor moved = build_motion_rope(cfg, shift).flat();

    const Tensor s0 = attention_scores(apply_rope(tokens, base), apply_rope(tokens, base));
    const Tensor s1 = attention_scores(apply_rope(tokens, moved), apply_rope(tokens, moved));
    CHECK(max_abs_diff(s0, s1) <= 1e-9);
}

TEST_CASE("integer column displacement imitates translated cells") {
    // With w_flow = 3 everywhere, the warped table at column w must equal a
    // wider default table at column w + 3, channel for channel.
    const std::size_t sw = 5, k = 3;
    RopeConfig cfg = line_config(sw);
    RopeConfig wide = line_config(sw + k);
    DisplacementGrid disp = zero_displacement(cfg);
    for (std::size_t i = 0; i < disp.w_flow.size(); ++i) disp.w_flow[i] = static_cast<double>(k);

    const RopeGrid warped = build_motion_rope(cfg, disp);
    const RopeGrid ref = build_default_rope(wide);
    for (std::size_t w = 0; w < sw; ++w)
        for (std::size_t c = 0; c < warped.channels(); ++c) {
            CHECK(std::abs(warped.grid(0, 0, w, c) - ref.grid(0, 0, w + k, c)) <= 1e-12);
        }
}

TEST_CASE("toy model weight draws are deterministic in the seed") {
    RopeConfig cfg = line_config(4);
    const ToyVelocityModel a(cfg, 123);
    const ToyVelocityModel b(cfg, 123);
    const ToyVelocityModel c(cfg, 124);
    CHECK(a.wq().data() == b.wq().data());
    CHECK(a.wk().data() == b.wk().data());
    CHECK(a.wv().data() == b.wv().data());
    CHECK(a.wq().data() != c.wq().data());
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.total_dim()));
    for (std::size_t i = 0; i < a.wq().size(); ++i) {
        CHECK(std::abs(a.wq()[i]) <= bound);
        CHECK(std::abs(a.wv()[i]) <= bound);
    }
}

TEST_CASE("toy forward is deterministic and shape preserving") {
    SplitMix64 rng(16);
    RopeConfig cfg;
    cfg.dims = {4, 4, 4};
    cfg.seq = {2, 2, 2};
    const ToyVelocityModel model(cfg, 7);
    const RopeGrid rope = build_default_rope(cfg);
    const Tensor x = testsupport::random_tensor({cfg.cells(), cfg.total_dim()}, rng);
    const Tensor y1 = toy_forward(model, x, rope);
    const Tensor y2 = toy_forward(model, x, rope);
    REQUIRE(y1.shape() == x.shape());
    CHECK(y1.data() == y2.data());
}

TEST_CASE("token matrix and lattice layouts agree") {
    SplitMix64 rng(18);
    RopeConfig cfg;
    cfg.dims = {4, 4, 4};
    cfg.seq = {2, 3, 2};
    const std::size_t d = cfg.total_dim();
    const ToyVelocityModel model(cfg, 21);
    const RopeGrid rope = build_default_rope(cfg);

    const Tensor lattice = testsupport::random_tensor({d, cfg.seq[0], cfg.seq[1], cfg.seq[2]}, rng);
    // Same values rearranged to [S, D] with s = t*(S_h*S_w) + h*S_w + w.
    const Tensor tokens = lattice.reshaped({d, cfg.cells()}).permuted({1, 0});

    const Tensor y_lattice = toy_forward(model, lattice, rope);
    const Tensor y_tokens = toy_forward(model, tokens, rope);
    REQUIRE(y_lattice.shape() == lattice.shape());
    const Tensor y_lattice_as_tokens = y_lattice.reshaped({d, cfg.cells()}).permuted({1, 0});
    CHECK(max_abs_diff(y_lattice_as_tokens, y_tokens) == 0.0);
}

TEST_CASE("toy forward responds to displacement changes") {
    SplitMix64 rng(19);
    RopeConfig cfg;
    cfg.dims = {4, 4, 4};
    cfg.seq = {1, 2, 2};
    const ToyVelocityModel model(cfg, 9);
    const Tensor x = testsupport::random_tensor({cfg.cells(), cfg.total_dim()}, rng);

    DisplacementGrid disp = zero_displacement(cfg);
    disp.w_flow(0, 0, 0) = 0.8;
    const Tensor y0 = toy_forward(model, x, build_default_rope(cfg));
    const Tensor y1 = toy_forward(model, x, build_motion_rope(cfg, disp));
    CHECK(max_abs_diff(y0, y1) > 0.0);
}

TEST_CASE("rope geometry mismatches are rejected") {
    RopeConfig cfg = line_config(4);
    const ToyVelocityModel model(cfg, 1);
    const Tensor x({cfg.cells(), cfg.total_dim()});
    CHECK_THROWS_AS(toy_forward(model, x, build_default_rope(line_config(5))), ShapeError);
    CHECK_THROWS_AS(toy_forward(model, Tensor({3, 3}), build_default_rope(cfg)), ShapeError);
}
