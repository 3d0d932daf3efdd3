#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ssdm/motion.hpp"
#include "ssdm/rng.hpp"

namespace ssdm {

// Half-open frame range [begin, end) during which one foot is planted.
struct StanceInterval {
    int foot = 0;  // index into skeleton.foot_joints
    int begin = 0;
    int end = 0;
};

struct GeneratedMotion {
    Mat frames;  // length x D
    std::vector<StanceInterval> stance;
};

// Synthetic labeled motion family over the test biped. Every generator knows
// its own ground-truth foot plants in closed form: poses are designed with a
// wide margin around the default contact thresholds (feet either exactly
// still on the ground or clearly lifted/moving), so the emitted intervals are
// exact, not measured.
class MotionGenerator {
public:
    virtual ~MotionGenerator() = default;
    virtual GeneratedMotion generate(int length, Rng& rng) const = 0;
    virtual int label() const = 0;
    virtual std::string name() const = 0;
};

namespace detail {

// Per-sample constant pose offsets: every channel gets a small random shift
// so no dataset coordinate is degenerate, while within-sample dynamics (and
// thus contact ground truth) are untouched. The root-height and leg-rotation
// sigmas are kept small enough that foot heights stay well inside the margin
// analysis of each generator.
struct PoseJitter {
    Vec offset;

    static PoseJitter draw(const Skeleton& skel, Rng& rng) {
        PoseJitter j;
        j.offset = Vec::Zero(skel.pose_dim());
        j.offset[0] = 0.03 * normal(rng);   // root x
        j.offset[1] = 0.008 * normal(rng);  // root y (foot height shift)
        j.offset[2] = 0.03 * normal(rng);   // root z
        for (int c = 3; c < skel.pose_dim(); ++c) j.offset[c] = 0.02 * normal(rng);
        return j;
    }
};

// Build stance intervals from per-frame "low" and "still" predicates using
// the same composition rule as the contact detector: contact(t) = low(t) &&
// still(t), with the final frame reusing the previous frame's stillness.
inline std::vector<StanceInterval> intervals_from_predicates(
    const std::vector<std::vector<bool>>& low, const std::vector<std::vector<bool>>& still) {
    std::vector<StanceInterval> out;
    const int F = static_cast<int>(low.size());
    for (int f = 0; f < F; ++f) {
        const int T = static_cast<int>(low[f].size());
        int run_begin = -1;
        for (int t = 0; t < T; ++t) {
            const bool s = (t + 1 < T) ? still[f][t] : (T >= 2 ? still[f][T - 2] : false);
            const bool c = low[f][t] && s;
            if (c && run_begin < 0) run_begin = t;
            if (!c && run_begin >= 0) {
                out.push_back({f, run_begin, t});
                run_begin = -1;
            }
        }
        if (run_begin >= 0) out.push_back({f, run_begin, T});
    }
    return out;
}

}  // namespace detail

// Hop-glide gait: each 20-frame period spends 10 frames advancing (root
// rises on a half-sine and translates forward, the arm swings) and 10 frames
// frozen in the planted pose. During the glide the feet ride the root well
// above the height threshold; during the plant the frames are bit-identical,
// so both feet are exactly still at ground height.
class WalkGenerator : public MotionGenerator {
public:
    explicit WalkGenerator(Skeleton skel) : skel_(std::move(skel)) {}

    int label() const override { return 0; }
    std::string name() const override { return "walk"; }

    GeneratedMotion generate(int length, Rng& rng) const override {
        require(length >= 2, Errc::invalid_argument, "generator needs length >= 2");
        const auto jit = detail::PoseJitter::draw(skel_, rng);
        const double stride = 0.5 * (1.0 + 0.2 * (2.0 * uniform01(rng) - 1.0));
        const double hop = 0.30;          // fixed: keeps swing feet >= ~0.09 above ground
        const double arm = 0.6 + 0.2 * uniform01(rng);
        const int P = 20, S = 10;         // period / swing length

        GeneratedMotion g;
        g.frames.resize(length, skel_.pose_dim());
        std::vector<std::vector<bool>> low(2, std::vector<bool>(length));
        std::vector<std::vector<bool>> still(2, std::vector<bool>(length));
        for (int t = 0; t < length; ++t) {
            const int k = t / P;
            const int u = t % P;
            Vec row = Vec::Zero(skel_.pose_dim());
            if (u < S) {
                const double ph = static_cast<double>(u) / S;
                // smoothstep keeps the forward speed continuous at both ends
                const double gph = ph * ph * (3.0 - 2.0 * ph);
                row[1] = 0.5 + hop * std::sin(M_PI * ph);
                row[2] = (k + gph) * stride;
                row[3 + 3 * 1 + 2] = arm * std::sin(M_PI * ph);  // shoulder z swing
            } else {
                row[1] = 0.5;
                row[2] = (k + 1.0) * stride;
            }
            g.frames.row(t) = (row + jit.offset).transpose();
            // Feet hang 0.5 below the root with identity leg rotations, so
            // foot height tracks the hop exactly (jitter shifts it by well
            // under the 0.05 threshold). Lift at u = 0 is exactly zero --
            // the foot grazes the ground but is still traveling.
            const bool is_low = (u == 0 || u >= S);
            // Planted frames are bit-identical, and the first frame of the
            // next period reproduces the planted pose (lift 0, swing 0, the
            // root already advanced), so the whole plant is exactly still.
            const bool is_still = (u >= S);
            for (int f = 0; f < 2; ++f) {
                low[f][t] = is_low;
                still[f][t] = is_still;
            }
        }
        g.stance = detail::intervals_from_predicates(low, still);
        return g;
    }

private:
    Skeleton skel_;
};

// Standing arm wave: the body is static, the shoulder and hand oscillate.
// Feet never move, so both are planted for the whole clip.
class WaveGenerator : public MotionGenerator {
public:
    explicit WaveGenerator(Skeleton skel) : skel_(std::move(skel)) {}

    int label() const override { return 1; }
    std::string name() const override { return "wave"; }

    GeneratedMotion generate(int length, Rng& rng) const override {
        require(length >= 2, Errc::invalid_argument, "generator needs length >= 2");
        const auto jit = detail::PoseJitter::draw(skel_, rng);
        const double amp = 0.8 * (1.0 + 0.25 * (2.0 * uniform01(rng) - 1.0));
        const double phase = 2.0 * M_PI * uniform01(rng);
        const int P = 24;

        GeneratedMotion g;
        g.frames.resize(length, skel_.pose_dim());
        for (int t = 0; t < length; ++t) {
            Vec row = Vec::Zero(skel_.pose_dim());
            row[1] = 0.5;
            const double w = 2.0 * M_PI * t / P + phase;
            row[3 + 3 * 1 + 2] = amp * std::sin(w);        // shoulder z
            row[3 + 3 * 2 + 0] = 0.5 * amp * std::cos(w);  // hand x (leaf joint)
            g.frames.row(t) = (row + jit.offset).transpose();
        }
        std::vector<std::vector<bool>> low(2, std::vector<bool>(length, true));
        std::vector<std::vector<bool>> still(2, std::vector<bool>(length, true));
        g.stance = detail::intervals_from_predicates(low, still);
        return g;
    }

private:
    Skeleton skel_;
};

// Slow in-place turn: the root yaw sweeps sinusoidally. Yaw preserves all
// heights, and at ~0.03 rad/frame peak the feet (0.09 m off-axis) sweep only
// ~0.003 m/frame, far below the stillness threshold: planted throughout.
class TurnGenerator : public MotionGenerator {
public:
    explicit TurnGenerator(Skeleton skel) : skel_(std::move(skel)) {}

    int label() const override { return 2; }
    std::string name() const override { return "turn"; }

    GeneratedMotion generate(int length, Rng& rng) const override {
        require(length >= 2, Errc::invalid_argument, "generator needs length >= 2");
        const auto jit = detail::PoseJitter::draw(skel_, rng);
        const double amp = 0.35 * (1.0 + 0.2 * (2.0 * uniform01(rng) - 1.0));
        const int P = 80;

        GeneratedMotion g;
        g.frames.resize(length, skel_.pose_dim());
        for (int t = 0; t < length; ++t) {
            Vec row = Vec::Zero(skel_.pose_dim());
            row[1] = 0.5;
            row[3 + 1] = amp * std::sin(2.0 * M_PI * t / P);  // root yaw (y component)
            g.frames.row(t) = (row + jit.offset).transpose();
        }
        std::vector<std::vector<bool>> low(2, std::vector<bool>(length, true));
        std::vector<std::vector<bool>> still(2, std::vector<bool>(length, true));
        g.stance = detail::intervals_from_predicates(low, still);
        return g;
    }

private:
    Skeleton skel_;
};

// Slow crouch pulse: the root dips on a raised cosine while the hips sway
// about z. The feet sink slightly below the ground plane (still "low") and
// sweep under 0.007 m/frame: planted throughout.
class CrouchGenerator : public MotionGenerator {
public:
    explicit CrouchGenerator(Skeleton skel) : skel_(std::move(skel)) {}

    int label() const override { return 3; }
    std::string name() const override { return "crouch"; }

    GeneratedMotion generate(int length, Rng& rng) const override {
        require(length >= 2, Errc::invalid_argument, "generator needs length >= 2");
        const auto jit = detail::PoseJitter::draw(skel_, rng);
        const double dip = 0.06 * (1.0 + 0.2 * (2.0 * uniform01(rng) - 1.0));
        const double sway = 0.15 * (1.0 + 0.2 * (2.0 * uniform01(rng) - 1.0));
        const int P = 80;

        GeneratedMotion g;
        g.frames.resize(length, skel_.pose_dim());
        for (int t = 0; t < length; ++t) {
            Vec row = Vec::Zero(skel_.pose_dim());
            const double w = 2.0 * M_PI * t / P;
            row[1] = 0.5 - dip * 0.5 * (1.0 - std::cos(w));
            row[3 + 3 * 3 + 2] = sway * std::sin(w);   // left hip z
            row[3 + 3 * 5 + 2] = -sway * std::sin(w);  // right hip z
            g.frames.row(t) = (row + jit.offset).transpose();
        }
        std::vector<std::vector<bool>> low(2, std::vector<bool>(length, true));
        std::vector<std::vector<bool>> still(2, std::vector<bool>(length, true));
        g.stance = detail::intervals_from_predicates(low, still);
        return g;
    }

private:
    Skeleton skel_;
};

// The four labeled families used by tests and the training CLI.
inline std::vector<std::unique_ptr<MotionGenerator>> standard_generators(
    const Skeleton& skel) {
    std::vector<std::unique_ptr<MotionGenerator>> v;
    v.push_back(std::make_unique<WalkGenerator>(skel));
    v.push_back(std::make_unique<WaveGenerator>(skel));
    v.push_back(std::make_unique<TurnGenerator>(skel));
    v.push_back(std::make_unique<CrouchGenerator>(skel));
    return v;
}

}  // namespace ssdm
