#pragma once

#include <string>
#include <vector>

#include "ssdm/denoiser.hpp"
#include "ssdm/motion.hpp"
#include "ssdm/schedule.hpp"
#include "ssdm/window.hpp"

namespace ssdm {

struct TransitionMetrics {
    int span = 0;    // span index within the layout
    int start = 0;   // first frame of the transition
    int length = 0;  // frames in the transition
    double peak_jerk = 0.0;
    double area_under_jerk = 0.0;
    double boundary_velocity_gap = 0.0;
};

struct TransitionReport {
    std::vector<TransitionMetrics> transitions;
    double mean_peak_jerk = 0.0;
    double mean_area_under_jerk = 0.0;
    double mean_boundary_velocity_gap = 0.0;
};

// Velocity discontinuity at every span boundary b: one-frame velocity into b
// versus out of b, |‖x[b+1]−x[b]‖ − ‖x[b]−x[b−1]‖|, in layout order.
inline std::vector<double> boundary_velocity_gap(const MotionSequence& seq) {
    seq.validate();
    const auto bounds = seq.layout.boundaries();
    require(!bounds.empty(), Errc::invalid_argument, "sequence has no span boundaries");
    std::vector<double> gaps;
    gaps.reserve(bounds.size());
    for (int b : bounds) {
        require(b >= 1 && b + 1 < seq.length(), Errc::invalid_argument,
                strfmt("boundary at frame %d needs a frame on both sides", b));
        const double before = (seq.frames.row(b) - seq.frames.row(b - 1)).norm();
        const double after = (seq.frames.row(b + 1) - seq.frames.row(b)).norm();
        gaps.push_back(std::abs(after - before));
    }
    return gaps;
}

// Smoothness accounting for every transition span. Jerk is the third
// finite difference of the raw frames; each transition is padded by the
// layout's blend width on both sides, and every jerk row whose 4-frame
// support touches the padded range is counted, so seams right at the span
// edges are never missed. Per-transition boundary_velocity_gap is the mean
// of the gaps at its entry and exit boundaries.
inline TransitionReport transition_report(const MotionSequence& seq) {
    seq.validate();
    const int T = seq.length();
    require(T >= 4, Errc::invalid_argument, "need >= 4 frames for jerk metrics");
    int n_transitions = 0;
    for (const auto& s : seq.layout.spans())
        if (s.kind == SpanKind::transition) ++n_transitions;
    require(n_transitions >= 1, Errc::invalid_argument, "sequence has no transitions");

    const Mat jerk = finite_difference(seq.frames, 3);  // rows: T-3, row j spans frames j..j+3
    const Vec jerk_norm = jerk.rowwise().norm();
    const int n = seq.layout.interp_width();

    TransitionReport rep;
    const auto& spans = seq.layout.spans();
    for (int i = 0; i < static_cast<int>(spans.size()); ++i) {
        if (spans[i].kind != SpanKind::transition) continue;
        TransitionMetrics m;
        m.span = i;
        m.start = seq.layout.span_start(i);
        m.length = spans[i].length;
        const int lo = std::max(0, m.start - n);
        const int hi = std::min(T, m.start + m.length + n);
        const int j_lo = std::max(0, lo - 3);
        const int j_hi = std::min(T - 4, hi - 1);  // inclusive
        for (int j = j_lo; j <= j_hi; ++j) {
            m.peak_jerk = std::max(m.peak_jerk, jerk_norm[j]);
            m.area_under_jerk += jerk_norm[j];
        }
        m.area_under_jerk /= seq.fps;

        const double entry = std::abs(
            (seq.frames.row(m.start + 1) - seq.frames.row(m.start)).norm() -
            (seq.frames.row(m.start) - seq.frames.row(m.start - 1)).norm());
        const int exit_frame = m.start + m.length;
        require(exit_frame + 1 < T, Errc::invalid_argument,
                "transition ends too close to the sequence end for a velocity gap");
        const double exit = std::abs(
            (seq.frames.row(exit_frame + 1) - seq.frames.row(exit_frame)).norm() -
            (seq.frames.row(exit_frame) - seq.frames.row(exit_frame - 1)).norm());
        m.boundary_velocity_gap = 0.5 * (entry + exit);

        rep.transitions.push_back(m);
    }

    for (const auto& m : rep.transitions) {
        rep.mean_peak_jerk += m.peak_jerk;
        rep.mean_area_under_jerk += m.area_under_jerk;
        rep.mean_boundary_velocity_gap += m.boundary_velocity_gap;
    }
    const double k = static_cast<double>(rep.transitions.size());
    rep.mean_peak_jerk /= k;
    rep.mean_area_under_jerk /= k;
    rep.mean_boundary_velocity_gap /= k;
    return rep;
}

// Hand-crafted per-sequence feature vector: mean speed, speed variance,
// mean jerk norm, then per-coordinate means. Cheap stand-in for learned
// embeddings; not comparable to any published feature metric.
inline Vec sequence_features(const Mat& frames) {
    require(frames.rows() >= 4, Errc::invalid_argument,
            "need >= 4 frames for sequence features");
    const Vec speeds = finite_difference(frames, 1).rowwise().norm();
    const double mean_speed = speeds.mean();
    const double var_speed = (speeds.array() - mean_speed).square().mean();
    const double mean_jerk = finite_difference(frames, 3).rowwise().norm().mean();

    Vec f(3 + frames.cols());
    f[0] = mean_speed;
    f[1] = var_speed;
    f[2] = mean_jerk;
    f.tail(frames.cols()) = frames.colwise().mean().transpose();
    return f;
}

// Squared 2-Wasserstein distance between diagonal Gaussian fits of the two
// feature sets: ‖μ_a−μ_b‖² + Σ_d (√σ_a,d − √σ_b,d)². Symmetric, zero on
// identical sets.
inline double gaussian_feature_distance(const std::vector<Mat>& set_a,
                                        const std::vector<Mat>& set_b) {
    require(set_a.size() >= 2 && set_b.size() >= 2, Errc::invalid_argument,
            strfmt("feature distance needs >= 2 sequences per set (got %zu and %zu)",
                   set_a.size(), set_b.size()));
    auto fit = [](const std::vector<Mat>& set, Eigen::Index* fdim) {
        Mat feats(static_cast<Eigen::Index>(set.size()), 0);
        for (size_t i = 0; i < set.size(); ++i) {
            const Vec f = sequence_features(set[i]);
            if (i == 0) feats.resize(static_cast<Eigen::Index>(set.size()), f.size());
            require(f.size() == feats.cols(), Errc::dimension_mismatch,
                    "sequences in a feature set must share their dimension");
            feats.row(static_cast<Eigen::Index>(i)) = f.transpose();
        }
        *fdim = feats.cols();
        Vec mu = feats.colwise().mean().transpose();
        Vec var = (feats.rowwise() - mu.transpose()).array().square().colwise().mean().matrix().transpose();
        return std::make_pair(mu, var);
    };
    Eigen::Index da = 0, db = 0;
    const auto [mu_a, var_a] = fit(set_a, &da);
    const auto [mu_b, var_b] = fit(set_b, &db);
    require(da == db, Errc::dimension_mismatch, "feature sets must share their dimension");
    const double mean_term = (mu_a - mu_b).squaredNorm();
    const double var_term =
        (var_a.array().sqrt() - var_b.array().sqrt()).square().sum();
    return mean_term + var_term;
}

// How much adjacent windows disagree about the clean signal on their shared
// frames: corrupt the whole sequence once with probe noise fixed per
// absolute frame index, run the unconditional predictor on every window at
// one probe step, and average the per-entry squared prediction difference
// over each adjacent pair's shared region.
inline double overlap_consistency(const MotionSequence& seq, const Denoiser& den,
                                  const NoiseSchedule& schedule, const WindowSpec& spec,
                                  int probe_t, uint64_t probe_seed) {
    seq.validate();
    spec.validate();
    require(spec.stride < spec.window, Errc::invalid_argument,
            "overlap consistency needs stride < window");
    require(probe_t >= 0 && probe_t < schedule.num_steps, Errc::invalid_argument,
            "probe step out of schedule range");
    require(seq.dim() == den.dim(), Errc::dimension_mismatch,
            "sequence dimension does not match the denoiser");
    require(spec.window <= den.max_window(), Errc::invalid_argument,
            "window exceeds the denoiser's range");

    const auto starts = window_starts(seq.length(), spec);
    require(starts.size() >= 2, Errc::invalid_argument,
            "need >= 2 windows for overlap consistency");

    Rng probe(probe_seed);
    const Mat noise = normal_matrix(probe, seq.length(), seq.dim());

    std::vector<Mat> preds;
    preds.reserve(starts.size());
    for (int s : starts) {
        const Mat x_t = forward_diffuse(seq.frames.middleRows(s, spec.window), probe_t,
                                        noise.middleRows(s, spec.window), schedule);
        preds.push_back(den.predict(x_t, probe_t, ConditionLabel::unconditional()));
    }

    double total = 0.0;
    int pairs = 0;
    for (size_t i = 0; i + 1 < starts.size(); ++i) {
        const int o_lo = starts[i + 1];
        const int o_hi = starts[i] + spec.window;
        if (o_lo >= o_hi) continue;
        const int len = o_hi - o_lo;
        const Mat diff = preds[i].middleRows(o_lo - starts[i], len) -
                         preds[i + 1].middleRows(0, len);
        total += diff.squaredNorm() / (static_cast<double>(len) * seq.dim());
        ++pairs;
    }
    require(pairs >= 1, Errc::invalid_argument, "no overlapping window pairs");
    return total / pairs;
}

inline std::string report_to_csv(const TransitionReport& rep) {
    std::string out = "transition,start,length,peak_jerk,area_under_jerk,boundary_velocity_gap\n";
    for (size_t i = 0; i < rep.transitions.size(); ++i) {
        const auto& m = rep.transitions[i];
        out += strfmt("%zu,%d,%d,%.17g,%.17g,%.17g\n", i, m.start, m.length, m.peak_jerk,
                      m.area_under_jerk, m.boundary_velocity_gap);
    }
    out += strfmt("mean,,,%.17g,%.17g,%.17g\n", rep.mean_peak_jerk, rep.mean_area_under_jerk,
                  rep.mean_boundary_velocity_gap);
    return out;
}

inline std::string report_to_table(const TransitionReport& rep) {
    std::string out = strfmt("%-10s %8s %8s %14s %14s %14s\n", "transition", "start", "length",
                             "peak_jerk", "auj", "vel_gap");
    for (size_t i = 0; i < rep.transitions.size(); ++i) {
        const auto& m = rep.transitions[i];
        out += strfmt("%-10zu %8d %8d %14.6g %14.6g %14.6g\n", i, m.start, m.length,
                      m.peak_jerk, m.area_under_jerk, m.boundary_velocity_gap);
    }
    out += strfmt("%-10s %8s %8s %14.6g %14.6g %14.6g\n", "mean", "", "", rep.mean_peak_jerk,
                  rep.mean_area_under_jerk, rep.mean_boundary_velocity_gap);
    return out;
}

}  // namespace ssdm
