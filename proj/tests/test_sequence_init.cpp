#include "doctest.h"
#include "ssdm/gaussian_prior.hpp"
#include "ssdm/sequence_init.hpp"

using namespace ssdm;

namespace {

SequenceLayout three_span_layout(int m, int t, int interp) {
    return SequenceLayout({motion_span(m, 0), transition_span(t), motion_span(m, 1)},
                          interp);
}

// Sequence whose spans are flat plateaus at distinct values: motion 0 at 0,
// transition at 5, motion 1 at 10. Perfect for checking blends exactly.
MotionSequence plateau_sequence(int D = 3) {
    MotionSequence seq;
    seq.fps = 20;
    seq.layout = three_span_layout(5, 5, 2);
    seq.frames.resize(15, D);
    seq.frames.topRows(5).setConstant(0.0);
    seq.frames.middleRows(5, 5).setConstant(5.0);
    seq.frames.bottomRows(5).setConstant(10.0);
    return seq;
}

}  // namespace

TEST_CASE("initial sequence fills motion spans from the prior and transitions with noise") {
    const int D = 8;
    const NoiseSchedule s = make_schedule(200);
    const GaussianDenoiser den(GaussianPrior::isotropic(D, 2.0, 0.01), s);
    const SequenceLayout layout = three_span_layout(60, 60, 3);

    Rng rng(11);
    const MotionSequence seq = init_sequence(layout, den, s, 2.5, 20, rng);
    REQUIRE(seq.length() == 180);
    REQUIRE(seq.frames.cols() == D);
    CHECK(seq.fps == 20);
    CHECK(seq.layout.total_length() == 180);

    // motion spans concentrate near the prior mean, transitions near 0
    const double m0 = seq.frames.topRows(60).mean();
    const double tr = seq.frames.middleRows(60, 60).mean();
    const double m1 = seq.frames.bottomRows(60).mean();
    CHECK(std::abs(m0 - 2.0) < 0.1);
    CHECK(std::abs(m1 - 2.0) < 0.1);
    CHECK(std::abs(tr) < 0.25);

    // prior samples carry spread ~ sqrt(var); transitions are unit normal
    const double m_sd = std::sqrt(
        (seq.frames.topRows(60).array() - m0).square().mean());
    const double t_sd = std::sqrt(
        (seq.frames.middleRows(60, 60).array() - tr).square().mean());
    CHECK(m_sd < 0.3);
    CHECK(t_sd > 0.7);
}

TEST_CASE("initialization is seed-deterministic") {
    const int D = 4;
    const NoiseSchedule s = make_schedule(50);
    const GaussianDenoiser den(GaussianPrior::isotropic(D, 0.5, 0.25), s);
    const SequenceLayout layout = three_span_layout(10, 6, 2);

    Rng r1(33), r2(33), r3(34);
    const MotionSequence a = init_sequence(layout, den, s, 2.5, 20, r1);
    const MotionSequence b = init_sequence(layout, den, s, 2.5, 20, r2);
    const MotionSequence c = init_sequence(layout, den, s, 2.5, 20, r3);
    CHECK((a.frames - b.frames).norm() == 0.0);
    CHECK((a.frames - c.frames).norm() != 0.0);
}

TEST_CASE("initialization rejects motion spans beyond the model window") {
    struct TinyWindow : GaussianDenoiser {
        using GaussianDenoiser::GaussianDenoiser;
        int max_window() const override { return 8; }
    };
    const NoiseSchedule s = make_schedule(20);
    const TinyWindow den(GaussianPrior::isotropic(2, 0.0, 1.0), s);
    Rng rng(1);
    CHECK_THROWS_AS(
        init_sequence(three_span_layout(9, 4, 2), den, s, 1.0, 20, rng), Error);
    CHECK_NOTHROW(
        init_sequence(three_span_layout(8, 40, 2), den, s, 1.0, 20, rng));
}

TEST_CASE("boundary interpolation produces the exact linear blend") {
    const MotionSequence seq = plateau_sequence();
    const MotionSequence out = interpolate_boundaries(seq);
    REQUIRE(out.length() == 15);

    // boundary 5, width 2: frames 3..6 blend frame 2 (value 0) into frame 7
    // (value 5) with weights k/5
    for (int k = 0; k < 4; ++k) {
        const double lam = (k + 1) / 5.0;
        CHECK(out.frames(3 + k, 0) == lam * 5.0);
        CHECK(out.frames(3 + k, 2) == lam * 5.0);
    }
    // boundary 10: frames 8..11 blend 5 -> 10
    for (int k = 0; k < 4; ++k) {
        const double lam = (k + 1) / 5.0;
        CHECK(out.frames(8 + k, 0) == doctest::Approx(5.0 + lam * 5.0).epsilon(1e-15));
    }
    // untouched frames are bit-identical
    for (int f : {0, 1, 2, 7, 12, 13, 14})
        CHECK((out.frames.row(f) - seq.frames.row(f)).norm() == 0.0);
}

TEST_CASE("boundary interpolation is idempotent") {
    const MotionSequence once = interpolate_boundaries(plateau_sequence());
    const MotionSequence twice = interpolate_boundaries(once);
    CHECK((twice.frames - once.frames).norm() == 0.0);
}

TEST_CASE("boundary interpolation with zero width copies the input") {
    MotionSequence seq = plateau_sequence();
    seq.layout = three_span_layout(5, 5, 0);
    const MotionSequence out = interpolate_boundaries(seq);
    CHECK((out.frames - seq.frames).norm() == 0.0);
}

TEST_CASE("boundary interpolation rejects widths without anchor frames") {
    // width equals the first span length: no untouched frame before the seam
    MotionSequence seq;
    seq.fps = 20;
    seq.layout = SequenceLayout(
        {motion_span(3, 0), transition_span(8), motion_span(8, 1)}, 3);
    seq.frames = Mat::Zero(19, 2);
    CHECK_THROWS_AS(interpolate_boundaries(seq), Error);

    // middle span too short for two adjacent blends
    MotionSequence mid;
    mid.fps = 20;
    mid.layout = SequenceLayout(
        {motion_span(8, 0), transition_span(5), motion_span(8, 1)}, 3);
    mid.frames = Mat::Zero(21, 2);
    CHECK_THROWS_AS(interpolate_boundaries(mid), Error);
}

TEST_CASE("gradient mask assigns per-span scales") {
    const SequenceLayout layout = three_span_layout(2, 2, 1);
    const GradientMask m = build_gradient_mask(layout, 0.1, 0.8);
    REQUIRE(m.length() == 6);
    Vec expect(6);
    expect << 0.1, 0.1, 0.8, 0.8, 0.1, 0.1;
    CHECK((m.scale - expect).norm() == 0.0);

    CHECK_THROWS_AS(build_gradient_mask(layout, -0.1, 0.8), Error);
    CHECK_THROWS_AS(build_gradient_mask(layout, 0.1, -0.8), Error);
}
