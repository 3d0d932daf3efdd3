#pragma once

#include "ssdm/motion.hpp"

namespace ssdm {

// Per-term loss values for one optimization step. The geometric terms are
// stored unweighted; total folds in the configured weights.
struct LossBreakdown {
    double align = 0.0;
    double pos = 0.0;
    double foot = 0.0;
    double vel = 0.0;
    double total = 0.0;
};

namespace detail {

inline void check_same_shape(const Mat& a, const Mat& b, const char* what) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), Errc::dimension_mismatch,
            strfmt("%s: shapes %ldx%ld vs %ldx%ld differ", what,
                   static_cast<long>(a.rows()), static_cast<long>(a.cols()),
                   static_cast<long>(b.rows()), static_cast<long>(b.cols())));
}

}  // namespace detail

// Weighted mean-square mismatch between prediction and current content,
// averaged over all W*D entries.
inline double align_loss(const Mat& x_hat0, const Mat& x0, double wt) {
    detail::check_same_shape(x_hat0, x0, "align_loss");
    require(wt >= 0.0, Errc::invalid_argument, strfmt("align weight %g is negative", wt));
    return wt * (x_hat0 - x0).array().square().mean();
}

// Mean (over frames) squared distance between predicted and current joint
// positions. With a skeleton the frames are decoded and run through FK; with
// none (skel == nullptr) the frame vectors themselves act as positions.
inline double pos_loss(const Mat& x_hat0, const Mat& x0, const Skeleton* skel) {
    detail::check_same_shape(x_hat0, x0, "pos_loss");
    const int W = static_cast<int>(x0.rows());
    require(W >= 1, Errc::invalid_argument, "pos_loss needs at least one frame");
    if (!skel) return (x_hat0 - x0).array().square().rowwise().sum().mean();
    double acc = 0.0;
    for (int i = 0; i < W; ++i) {
        const JointPositions ph = fk_row(*skel, x_hat0.row(i).transpose());
        const JointPositions p = fk_row(*skel, x0.row(i).transpose());
        acc += (ph - p).array().square().sum();
    }
    return acc / W;
}

// Mean squared in-contact foot sweep of the *predicted* frames: for each
// consecutive pair, the world displacement of every foot flagged as planted
// at the earlier frame. contacts gates per (frame, foot); its frame count
// must match the window.
inline double foot_loss(const Mat& x_hat0, const FootContactMask& contacts,
                        const Skeleton& skel) {
    const int W = static_cast<int>(x_hat0.rows());
    require(W >= 2, Errc::invalid_argument, "foot_loss needs at least two frames");
    require(contacts.length() == W, Errc::dimension_mismatch,
            strfmt("foot_loss: %d contact rows for %d frames", contacts.length(), W));
    require(contacts.feet() == static_cast<int>(skel.foot_joints.size()),
            Errc::dimension_mismatch,
            strfmt("foot_loss: %d contact columns for %zu foot joints",
                   contacts.feet(), skel.foot_joints.size()));
    const int F = contacts.feet();
    double acc = 0.0;
    JointPositions prev = fk_row(skel, x_hat0.row(0).transpose());
    for (int i = 0; i + 1 < W; ++i) {
        const JointPositions next = fk_row(skel, x_hat0.row(i + 1).transpose());
        for (int f = 0; f < F; ++f)
            if (contacts.contact(i, f))
                acc += (next.row(skel.foot_joints[f]) - prev.row(skel.foot_joints[f]))
                           .squaredNorm();
        prev = next;
    }
    return acc / (W - 1);
}

// Mean squared mismatch of frame-to-frame velocities, over the W-1
// consecutive differences.
inline double vel_loss(const Mat& x_hat0, const Mat& x0) {
    detail::check_same_shape(x_hat0, x0, "vel_loss");
    require(x0.rows() >= 2, Errc::invalid_argument, "vel_loss needs at least two frames");
    const Mat dh = finite_difference(x_hat0, 1);
    const Mat d = finite_difference(x0, 1);
    return (dh - d).array().square().rowwise().sum().sum() / (x0.rows() - 1);
}

}  // namespace ssdm
