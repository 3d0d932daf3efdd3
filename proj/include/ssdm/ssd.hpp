#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "ssdm/adamw.hpp"
#include "ssdm/denoiser.hpp"
#include "ssdm/log.hpp"
#include "ssdm/losses.hpp"
#include "ssdm/sequence_init.hpp"
#include "ssdm/window.hpp"

namespace ssdm {

// How the per-frame mask enters the parameter update: scaling the gradient
// before the moment update (default), or scaling the computed update (a
// per-frame learning rate, immune to Adam's gradient-scale normalization).
enum class MaskMode { gradient, update };

struct SSDConfig {
    int window = 120;
    int stride = 30;
    int iterations = 20000;

    double lr = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;

    int t_min = 20;
    int t_max = 980;
    double guidance = 7.5;
    // When set, the prediction ignores the window's label entirely (plain
    // unconditional score) instead of the default guided prediction.
    bool force_unconditional = false;

    double lambda_pos = 0.0;
    double lambda_foot = 0.0;
    double lambda_vel = 0.0;

    double mask_l = 0.1;
    double mask_h = 0.8;
    MaskMode mask_mode = MaskMode::gradient;

    // Skeleton enables FK-based geometric losses; without one, pos compares
    // frame vectors directly and foot loss is unavailable.
    std::optional<Skeleton> skeleton;
    double foot_height_eps = 0.05;
    double foot_vel_eps = 0.01;

    void validate(const NoiseSchedule& schedule) const {
        WindowSpec{window, stride}.validate();
        require(iterations >= 0, Errc::invalid_argument,
                strfmt("iteration count %d is negative", iterations));
        require(t_min >= 0 && t_max < schedule.num_steps && t_min <= t_max,
                Errc::invalid_argument,
                strfmt("timestep range [%d, %d] invalid for a %d-step schedule",
                       t_min, t_max, schedule.num_steps));
        require(lambda_pos >= 0 && lambda_foot >= 0 && lambda_vel >= 0,
                Errc::invalid_argument, "loss weights must be non-negative");
        require(lambda_foot == 0.0 || skeleton.has_value(), Errc::invalid_argument,
                "foot loss requires a skeleton");
        if (skeleton) skeleton->validate();
    }
};

// Everything produced by one gradient evaluation.
struct SsdStep {
    Mat grad;  // W x D, d(total loss)/d(window frames)
    LossBreakdown losses;
    int t = 0;
    Mat eps;
};

namespace detail {

// d(pos_loss)/d(x0 window) for the FK path. Frames reach FK in raw feature
// space (native * std + mean), so each row gradient picks up a factor std.
inline Mat pos_grad_fk(const Mat& x_hat0_native, const Mat& x0_native, const Skeleton& skel,
                       const FeatureStats& stats) {
    const int W = static_cast<int>(x0_native.rows());
    const Mat raw_hat = stats.to_raw(x_hat0_native);
    const Mat raw = stats.to_raw(x0_native);
    Mat grad(W, x0_native.cols());
    for (int i = 0; i < W; ++i) {
        const JointPositions ph = fk_row(skel, raw_hat.row(i).transpose());
        const JointPositions p = fk_row(skel, raw.row(i).transpose());
        const JointPositions dpos = (2.0 / W) * (p - ph);
        const Vec g_raw = fk_backward_row(skel, raw.row(i).transpose(), dpos);
        grad.row(i) = (g_raw.array() * stats.std.array()).transpose();
    }
    return grad;
}

}  // namespace detail

// One stochastic gradient of the segment-wise distillation loss with respect
// to the window's frames. The prediction is treated as a constant (no
// backprop through the denoiser), so:
//   - align contributes wt * 2/(W*D) * (x0 - x_hat0), wt = 1 - alpha_bar(t);
//   - pos contributes its exact gradient through the x0 side (FK or identity);
//   - foot depends only on the prediction and contributes zero;
//   - vel contributes the difference-operator adjoint of its residual.
inline SsdStep ssd_gradient(const Mat& window, ConditionLabel cond, const Denoiser& den,
                            const NoiseSchedule& schedule, const SSDConfig& cfg, Rng& rng) {
    cfg.validate(schedule);
    const int W = static_cast<int>(window.rows());
    const int D = static_cast<int>(window.cols());
    require(W >= 2, Errc::invalid_argument, "ssd_gradient needs a window of >= 2 frames");
    require(D == den.dim(), Errc::dimension_mismatch,
            strfmt("window D=%d but denoiser D=%d", D, den.dim()));

    SsdStep step;
    step.t = static_cast<int>(uniform_int(rng, cfg.t_min, cfg.t_max));
    step.eps = normal_matrix(rng, W, D);
    const Mat x_t = forward_diffuse(window, step.t, step.eps, schedule);
    const Mat x_hat0 =
        cfg.force_unconditional
            ? den.predict(x_t, step.t, ConditionLabel::unconditional())
            : guided_predict(den, x_t, step.t, cond, cfg.guidance);

    const double wt = 1.0 - schedule.alpha_bar_at(step.t);
    const FeatureStats stats = den.stats();

    step.losses.align = align_loss(x_hat0, window, wt);
    step.grad = (wt * 2.0 / (W * D)) * (window - x_hat0);

    if (cfg.lambda_pos > 0.0) {
        if (cfg.skeleton) {
            const Mat raw_hat = stats.to_raw(x_hat0);
            const Mat raw = stats.to_raw(window);
            step.losses.pos = pos_loss(raw_hat, raw, &*cfg.skeleton);
            step.grad += cfg.lambda_pos *
                         detail::pos_grad_fk(x_hat0, window, *cfg.skeleton, stats);
        } else {
            step.losses.pos = pos_loss(x_hat0, window, nullptr);
            step.grad += cfg.lambda_pos * (2.0 / W) * (window - x_hat0);
        }
    }

    if (cfg.lambda_foot > 0.0) {
        const Mat raw = stats.to_raw(window);
        const FootContactMask contacts = compute_foot_contacts(
            *cfg.skeleton, raw, cfg.foot_height_eps, cfg.foot_vel_eps);
        step.losses.foot = foot_loss(stats.to_raw(x_hat0), contacts, *cfg.skeleton);
        // No gradient: the term involves only the (frozen) prediction.
    }

    if (cfg.lambda_vel > 0.0) {
        step.losses.vel = vel_loss(x_hat0, window);
        const Mat r = finite_difference(window, 1) - finite_difference(x_hat0, 1);
        Mat g = Mat::Zero(W, D);
        g.topRows(W - 1) -= r;
        g.bottomRows(W - 1) += r;
        step.grad += (cfg.lambda_vel * 2.0 / (W - 1)) * g;
    }

    step.losses.total = step.losses.align + cfg.lambda_pos * step.losses.pos +
                        cfg.lambda_foot * step.losses.foot + cfg.lambda_vel * step.losses.vel;
    return step;
}

// Scatter one window gradient into the full sequence and take one AdamW step
// over all T*D parameters. In gradient mode the mask scales the gradient
// before it reaches the moments; in update mode the moments see the raw
// gradient and the mask scales the applied step instead.
inline void apply_update(MotionSequence& seq, int start, const Mat& grad,
                         const GradientMask& mask, AdamW& opt, const SSDConfig& cfg) {
    const int T = seq.length();
    const int D = seq.dim();
    const int W = static_cast<int>(grad.rows());
    require(grad.cols() == D, Errc::dimension_mismatch,
            strfmt("gradient D=%ld but sequence D=%d", static_cast<long>(grad.cols()), D));
    require(start >= 0 && start + W <= T, Errc::invalid_argument,
            strfmt("window [%d, %d) outside sequence of %d frames", start, start + W, T));
    require(mask.length() == T, Errc::dimension_mismatch,
            strfmt("mask covers %d frames, sequence has %d", mask.length(), T));

    Mat full = Mat::Zero(T, D);
    if (cfg.mask_mode == MaskMode::gradient) {
        full.middleRows(start, W) =
            grad.array().colwise() * mask.scale.segment(start, W).array();
    } else {
        full.middleRows(start, W) = grad;
    }

    Eigen::Map<Vec> theta(seq.frames.data(), static_cast<Eigen::Index>(T) * D);
    Eigen::Map<const Vec> gflat(full.data(), static_cast<Eigen::Index>(T) * D);
    if (cfg.mask_mode == MaskMode::update) {
        // Column-major flat view of the frames, so the per-frame scale is
        // replicated across columns before flattening.
        const Mat scale_mat = mask.scale.replicate(1, D);
        const Vec scale_flat =
            Eigen::Map<const Vec>(scale_mat.data(), static_cast<Eigen::Index>(T) * D);
        opt.step(theta, gflat, &scale_flat);
    } else {
        opt.step(theta, gflat);
    }
}

struct LossRecord {
    int iter = 0;
    int t = 0;
    LossBreakdown losses;
};

struct OptimizeResult {
    MotionSequence seq;
    std::vector<LossRecord> history;  // every 10th iteration (1, 11, 21, ...)
};

using OptimizeObserver =
    std::function<void(int iter, const MotionSequence& seq, const SsdStep& step)>;

namespace detail {

inline AdamWParams adamw_params(const SSDConfig& cfg) {
    AdamWParams p;
    p.lr = cfg.lr;
    p.beta1 = cfg.beta1;
    p.beta2 = cfg.beta2;
    p.eps = cfg.adam_eps;
    p.weight_decay = cfg.weight_decay;
    return p;
}

inline OptimizeResult optimize_loop(MotionSequence seq, const Denoiser& den,
                                    const NoiseSchedule& schedule, const SSDConfig& cfg,
                                    const GradientMask& mask, Rng& rng,
                                    const OptimizeObserver& observer) {
    seq.validate();
    cfg.validate(schedule);
    require(seq.dim() == den.dim(), Errc::dimension_mismatch,
            strfmt("sequence D=%d but denoiser D=%d", seq.dim(), den.dim()));
    require(cfg.window <= den.max_window(), Errc::invalid_argument,
            strfmt("window %d exceeds denoiser max window %d", cfg.window, den.max_window()));

    const WindowSpec spec{cfg.window, cfg.stride};
    const auto starts = window_starts(seq.length(), spec);
    if (const auto uncov = uncovered_frames(seq.length(), spec); !uncov.empty())
        log_warn(strfmt("stride %d > window %d: %zu frames are never sampled",
                        cfg.stride, cfg.window, uncov.size()));

    AdamW opt(static_cast<Eigen::Index>(seq.length()) * seq.dim(), adamw_params(cfg));

    OptimizeResult out;
    out.history.reserve(static_cast<size_t>(cfg.iterations + 9) / 10);
    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        const int start =
            starts[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(starts.size()) - 1))];
        const WindowSample sample = extract(seq, start, spec, rng);
        const SsdStep step = ssd_gradient(sample.frames, sample.condition, den, schedule,
                                          cfg, rng);
        if (!std::isfinite(step.losses.total))
            throw Error(Errc::nan_loss,
                        strfmt("non-finite loss at iteration %d (t=%d)", iter, step.t));
        apply_update(seq, start, step.grad, mask, opt, cfg);
        if ((iter - 1) % 10 == 0) out.history.push_back({iter, step.t, step.losses});
        if (observer) observer(iter, seq, step);
    }
    out.seq = std::move(seq);
    return out;
}

}  // namespace detail

// Segment-wise score-distillation refinement of a long sequence against a
// frozen short-motion prior. Each iteration samples one window start, draws
// one timestep and noise realization, and applies one masked AdamW step.
inline OptimizeResult optimize(MotionSequence seq, const Denoiser& den,
                               const NoiseSchedule& schedule, const SSDConfig& cfg, Rng& rng,
                               const OptimizeObserver& observer = {}) {
    const GradientMask mask = build_gradient_mask(seq.layout, cfg.mask_l, cfg.mask_h);
    return detail::optimize_loop(std::move(seq), den, schedule, cfg, mask, rng, observer);
}

// Single-prompt variant: one motion span covering the whole sequence,
// initialized as pure noise (no per-segment sampling stage) and optimized
// under the transition mask scale everywhere.
inline OptimizeResult optimize_single_prompt(int length, ConditionLabel cond,
                                             const Denoiser& den,
                                             const NoiseSchedule& schedule,
                                             const SSDConfig& cfg, int fps, Rng& rng,
                                             const OptimizeObserver& observer = {}) {
    require(!cond.is_unconditional(), Errc::invalid_argument,
            "single-prompt mode needs a condition label");
    MotionSequence seq;
    seq.fps = fps;
    seq.layout = SequenceLayout({motion_span(length, cond.id)}, 0);
    seq.frames = normal_matrix(rng, length, den.dim());
    GradientMask mask;
    mask.scale = Vec::Constant(length, cfg.mask_h);
    return detail::optimize_loop(std::move(seq), den, schedule, cfg, mask, rng, observer);
}

// The defaults the single-prompt pipeline runs with: stronger guidance,
// faster learning rate.
inline SSDConfig single_prompt_config(SSDConfig base) {
    base.guidance = 10.0;
    base.lr = 0.005;
    return base;
}

}  // namespace ssdm
