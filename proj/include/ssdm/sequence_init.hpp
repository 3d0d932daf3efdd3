#pragma once

#include "ssdm/motion.hpp"
#include "ssdm/sampler.hpp"

namespace ssdm {

// Stage-one construction of the long sequence: every motion span is sampled
// independently from the prior under its own label, every transition span is
// filled with i.i.d. standard normal frames (in the denoiser's native space).
inline MotionSequence init_sequence(const SequenceLayout& layout, const Denoiser& den,
                                    const NoiseSchedule& schedule, double init_guidance,
                                    int fps, Rng& rng) {
    const int D = den.dim();
    MotionSequence seq;
    seq.fps = fps;
    seq.layout = layout;
    seq.frames.resize(layout.total_length(), D);
    int at = 0;
    for (const auto& span : layout.spans()) {
        if (span.kind == SpanKind::motion) {
            require(span.length <= den.max_window(), Errc::invalid_argument,
                    strfmt("motion span of %d frames exceeds denoiser max window %d",
                           span.length, den.max_window()));
            seq.frames.middleRows(at, span.length) = ddpm_sample(
                den, schedule, ConditionLabel::of(span.condition), span.length,
                init_guidance, rng);
        } else {
            seq.frames.middleRows(at, span.length) = normal_matrix(rng, span.length, D);
        }
        at += span.length;
    }
    seq.validate();
    return seq;
}

// Linear cross-fade at every motion <-> transition seam. With width n, the
// 2n frames centered on boundary b (frames b-n .. b+n-1) are rebuilt as the
// exact linear blend of the nearest untouched frames on either side:
//   frame(b-n+k) = (1 - l_k) A + l_k B,  l_k = (k+1) / (2n+1)
//   A = frame(b-n-1), B = frame(b+n)
// so A, the blended window, and B form one arithmetic progression. Reapplying
// reproduces the same frames (A and B are never modified), and all frames
// outside the blend windows are copied bit-for-bit.
inline MotionSequence interpolate_boundaries(const MotionSequence& seq) {
    seq.validate();
    const int n = seq.layout.interp_width();
    MotionSequence out = seq;
    if (n == 0) return out;

    const auto bounds = seq.layout.boundaries();
    const int T = seq.length();
    for (size_t i = 0; i < bounds.size(); ++i) {
        const int b = bounds[i];
        require(b - n - 1 >= 0, Errc::invalid_argument,
                strfmt("interp width %d too large: no untouched frame before boundary %d", n, b));
        require(b + n <= T - 1, Errc::invalid_argument,
                strfmt("interp width %d too large: no untouched frame after boundary %d", n, b));
        if (i + 1 < bounds.size())
            require(bounds[i + 1] - b >= 2 * n + 1, Errc::invalid_argument,
                    strfmt("interp width %d too large for the %d-frame span between "
                           "boundaries %d and %d", n, bounds[i + 1] - b, b, bounds[i + 1]));
    }

    for (const int b : bounds) {
        const Vec a = seq.frames.row(b - n - 1);
        const Vec bb = seq.frames.row(b + n);
        for (int k = 0; k < 2 * n; ++k) {
            const double lam = static_cast<double>(k + 1) / (2 * n + 1);
            out.frames.row(b - n + k) = (1.0 - lam) * a + lam * bb;
        }
    }
    return out;
}

// Per-frame multiplicative gradient scales: mask_l on motion frames (sampled
// content to be preserved), mask_h on transition frames (free content to be
// reshaped).
struct GradientMask {
    Vec scale;  // length T

    int length() const { return static_cast<int>(scale.size()); }
};

inline GradientMask build_gradient_mask(const SequenceLayout& layout, double mask_l,
                                        double mask_h) {
    require(mask_l >= 0.0 && mask_h >= 0.0, Errc::invalid_argument,
            strfmt("mask scales must be non-negative, got %g / %g", mask_l, mask_h));
    GradientMask m;
    m.scale.resize(layout.total_length());
    int at = 0;
    for (const auto& span : layout.spans()) {
        m.scale.segment(at, span.length).setConstant(
            span.kind == SpanKind::motion ? mask_l : mask_h);
        at += span.length;
    }
    return m;
}

}  // namespace ssdm
