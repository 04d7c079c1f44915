#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "ropewarp/flow.hpp"
#include "support.hpp"

using namespace ropewarp;

TEST_CASE("flo header layout is pinned") {
    testsupport::ScratchDir dir("flo_header");
    // 2 rows x 3 columns: 12-byte header + 2*3*2*4 = 48-byte payload.
    Tensor u({1, 2, 3});
    Tensor v({1, 2, 3});
    u(0, 0, 0) = 1.5;
    v(0, 1, 2) = -2.0;
    const std::string path = dir.file("f.flo");
    flo_write({u, v}, path);
    const std::vector<unsigned char> bytes = testsupport::slurp(path);
    REQUIRE(bytes.size() == 60);
    float magic = 0.0f;
    std::memcpy(&magic, bytes.data(), 4);
    CHECK(magic == 202021.25f);
    CHECK(std::memcmp(bytes.data(), "PIEH", 4) == 0);
    std::int32_t w = 0, h = 0;
    std::memcpy(&w, bytes.data() + 4, 4);
    std::memcpy(&h, bytes.data() + 8, 4);
    CHECK(w == 3);
    CHECK(h == 2);
    // (u, v) interleaved per pixel, row-major: pixel (0,0) first.
    float first_u = 0.0f;
    std::memcpy(&first_u, bytes.data() + 12, 4);
    CHECK(first_u == 1.5f);
}

TEST_CASE("flo round trip is bit-exact for arbitrary finite float32 payloads") {
    testsupport::ScratchDir dir("flo_roundtrip");
    SplitMix64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t h = 1 + rng.next_below(5);
        const std::size_t w = 1 + rng.next_below(5);
        Tensor u({1, h, w});
        Tensor v({1, h, w});
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = static_cast<float>((rng.next_double() - 0.5) * 1e4);
            v[i] = static_cast<float>((rng.next_double() - 0.5) * 1e-3);
        }
        const std::string path = dir.file("t.flo");
        flo_write({u, v}, path);
        const std::vector<unsigned char> first = testsupport::slurp(path);
        const FlowField back = flo_read(path);
        REQUIRE(back.height() == h);
        REQUIRE(back.width() == w);
        for (std::size_t i = 0; i < u.size(); ++i) {
            REQUIRE(back.u[i] == u[i]);
            REQUIRE(back.v[i] == v[i]);
        }
        flo_write(back, path);
        REQUIRE(testsupport::slurp(path) == first);
    }
}

TEST_CASE("flo read rejects malformed files") {
    testsupport::ScratchDir dir("flo_bad");
    Tensor u({1, 2, 2}), v({1, 2, 2});
    const std::string path = dir.file("good.flo");
    flo_write({u, v}, path);
    std::vector<unsigned char> good = testsupport::slurp(path);

    const auto write_raw = [&](const std::vector<unsigned char>& bytes) {
        const std::string p = dir.file("bad.flo");
        detail::write_file_bytes(p, bytes);
        return p;
    };

    SECTION("zero magic") {
        std::vector<unsigned char> bad = good;
        bad[0] = bad[1] = bad[2] = bad[3] = 0;  // float 0.0
        CHECK_THROWS_AS(flo_read(write_raw(bad)), FormatError);
    }
    SECTION("truncated payload") {
        std::vector<unsigned char> bad = good;
        bad.resize(bad.size() - 3);
        CHECK_THROWS_AS(flo_read(write_raw(bad)), TruncatedError);
    }
    SECTION("truncated header") {
        std::vector<unsigned char> bad(good.begin(), good.begin() + 8);
        CHECK_THROWS_AS(flo_read(write_raw(bad)), TruncatedError);
    }
    SECTION("missing file") { CHECK_THROWS_AS(flo_read(dir.file("absent.flo")), IoError); }
}

TEST_CASE("flo write rejects non-finite values") {
    testsupport::ScratchDir dir("flo_nan");
    Tensor u({1, 1, 1}), v({1, 1, 1});
    u[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(flo_write({u, v}, dir.file("nan.flo")), ValueError);
}

TEST_CASE("flow directory reads frames in filename order") {
    testsupport::ScratchDir dir("flo_dir");
    for (int t = 0; t < 3; ++t) {
        Tensor u({1, 2, 2}, static_cast<double>(t));
        Tensor v({1, 2, 2}, static_cast<double>(-t));
        char name[16];
        std::snprintf(name, sizeof(name), "f_%02d.flo", t);
        flo_write({u, v}, dir.file(name));
    }
    const FlowField all = flo_read_dir(dir.path().string());
    REQUIRE(all.frames() == 3);
    CHECK(all.u(0, 0, 0) == 0.0);
    CHECK(all.u(2, 1, 1) == 2.0);
    CHECK(all.v(1, 0, 1) == -1.0);
}

TEST_CASE("flow tnsr container holds [2, frames, H, W]") {
    SplitMix64 rng(5);
    FlowField f = flow_synth("constant", {{"a", 2.0}, {"b", -1.0}}, 3, 4, 6);
    const Tensor packed = flow_to_tnsr(f);
    REQUIRE(packed.shape() == std::vector<std::size_t>{2, 3, 4, 6});
    const FlowField back = flow_from_tnsr(packed);
    CHECK(back.u.data() == f.u.data());
    CHECK(back.v.data() == f.v.data());
    CHECK_THROWS_AS(flow_from_tnsr(Tensor({3, 1, 2, 2})), ShapeError);
}

TEST_CASE("synthetic patterns") {
    SECTION("constant fills every pixel and frame") {
        const FlowField f = flow_synth("constant", {{"a", 0.5}, {"b", 2.0}}, 2, 3, 3);
        for (std::size_t i = 0; i < f.u.size(); ++i) {
            CHECK(f.u[i] == 0.5);
            CHECK(f.v[i] == 2.0);
        }
    }
    SECTION("zero-angle rotation is zero flow") {
        const FlowField f = flow_synth("rotation", {{"omega", 0.0}}, 1, 4, 4);
        for (std::size_t i = 0; i < f.u.size(); ++i) {
            CHECK(f.u[i] == 0.0);
            CHECK(f.v[i] == 0.0);
        }
    }
    SECTION("unit zoom is zero flow") {
        const FlowField f = flow_synth("zoom", {{"scale", 1.0}}, 1, 4, 4);
        for (std::size_t i = 0; i < f.u.size(); ++i) {
            CHECK(f.u[i] == 0.0);
            CHECK(f.v[i] == 0.0);
        }
    }
    SECTION("zoom points away from the center") {
        const FlowField f = flow_synth("zoom", {{"scale", 2.0}}, 1, 4, 4);
        CHECK(f.u(0, 0, 0) < 0.0);  // left of center moves further left
        CHECK(f.u(0, 0, 3) > 0.0);
        CHECK(f.v(0, 0, 0) < 0.0);
        CHECK(f.v(0, 3, 0) > 0.0);
    }
    SECTION("unknown pattern") {
        CHECK_THROWS_AS(flow_synth("swirl", {}, 1, 2, 2), ValueError);
    }
}

TEST_CASE("downsample block means convert to patch units") {
    SECTION("constant 4 px over patch width 4 becomes 1 patch") {
        // 1 frame, 4x8 pixels onto a 1x2 lattice: patch width 4, height 4.
        FlowField f = flow_synth("constant", {{"a", 4.0}, {"b", 0.0}}, 1, 4, 8);
        const PatchFlow g = downsample_to_grid(f, 1, 2);
        REQUIRE(g.u.shape() == std::vector<std::size_t>{1, 1, 2});
        CHECK(g.u(0, 0, 0) == 1.0);
        CHECK(g.u(0, 0, 1) == 1.0);
        CHECK(g.v(0, 0, 0) == 0.0);
    }
    SECTION("2x2 block {0,0,0,8} pools to mean 2 then 1 patch unit") {
        Tensor u = Tensor::from_data({1, 2, 2}, {0, 0, 0, 8});
        Tensor v({1, 2, 2});
        const PatchFlow g = downsample_to_grid({u, v}, 1, 1);
        CHECK(g.u(0, 0, 0) == 1.0);  // mean 2, patch width 2
    }
    SECTION("vertical component scales by patch height") {
        Tensor u({1, 6, 2});
        Tensor v({1, 6, 2}, 3.0);
        const PatchFlow g = downsample_to_grid({u, v}, 2, 1);  // patch 3 px tall, 2 px wide
        CHECK(g.v(0, 0, 0) == 1.0);
        CHECK(g.v(0, 1, 0) == 1.0);
    }
    SECTION("non-divisible sizes are rejected") {
        FlowField f = flow_synth("constant", {}, 1, 4, 6);
        CHECK_THROWS_AS(downsample_to_grid(f, 3, 2), ShapeError);
        CHECK_THROWS_AS(downsample_to_grid(f, 2, 4), ShapeError);
    }
}

TEST_CASE("downsample is linear in the flow") {
    SplitMix64 rng(99);
    const auto rand_field = [&](double amp) {
        Tensor u({2, 4, 4});
        Tensor v({2, 4, 4});
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = amp * (rng.next_double() - 0.5);
            v[i] = amp * (rng.next_double() - 0.5);
        }
        return FlowField{std::move(u), std::move(v)};
    };
    const FlowField a = rand_field(3.0);
    const FlowField b = rand_field(7.0);
    FlowField sum{a.u + b.u, a.v + b.v};
    const PatchFlow ga = downsample_to_grid(a, 2, 2);
    const PatchFlow gb = downsample_to_grid(b, 2, 2);
    const PatchFlow gs = downsample_to_grid(sum, 2, 2);
    for (std::size_t i = 0; i < gs.u.size(); ++i) {
        CHECK(gs.u[i] == Catch::Approx(ga.u[i] + gb.u[i]).margin(1e-12));
        CHECK(gs.v[i] == Catch::Approx(ga.v[i] + gb.v[i]).margin(1e-12));
    }
}

TEST_CASE("accumulate is an exclusive prefix sum over time") {
    SECTION("constant unit flow gives staircase offsets") {
        // u_patch = 1 per frame, 4 frames: w_flow frames are 0, 1, 2, 3.
        Tensor u({4, 1, 1}, 1.0);
        Tensor v({4, 1, 1});
        const DisplacementGrid d = accumulate({u, v});
        for (std::size_t t = 0; t < 4; ++t) {
            CHECK(d.w_flow(t, 0, 0) == static_cast<double>(t));
            CHECK(d.h_flow(t, 0, 0) == 0.0);
        }
    }
    SECTION("single frame accumulates to zero") {
        Tensor u({1, 2, 2}, 5.0);
        Tensor v({1, 2, 2}, -5.0);
        const DisplacementGrid d = accumulate({u, v});
        for (std::size_t i = 0; i < d.h_flow.size(); ++i) {
            CHECK(d.h_flow[i] == 0.0);
            CHECK(d.w_flow[i] == 0.0);
        }
    }
    SECTION("horizontal u feeds w_flow, vertical v feeds h_flow") {
        Tensor u({2, 1, 1}, 2.5);
        Tensor v({2, 1, 1}, -1.5);
        const DisplacementGrid d = accumulate({u, v});
        CHECK(d.w_flow(1, 0, 0) == 2.5);
        CHECK(d.h_flow(1, 0, 0) == -1.5);
    }
}
