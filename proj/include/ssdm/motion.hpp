#pragma once

#include <vector>

#include "ssdm/common.hpp"
#include "ssdm/layout.hpp"
#include "ssdm/skeleton.hpp"

namespace ssdm {

// A long sequence under construction/optimization: T x D frame matrix plus
// the layout that says which frames belong to motions vs transitions.
struct MotionSequence {
    Mat frames;  // T x D, one frame per row
    int fps = 20;
    SequenceLayout layout;

    int length() const { return static_cast<int>(frames.rows()); }
    int dim() const { return static_cast<int>(frames.cols()); }

    void validate() const {
        require(fps > 0, Errc::invalid_argument, strfmt("fps %d must be positive", fps));
        require(length() == layout.total_length(), Errc::invalid_argument,
                strfmt("sequence has %d frames but layout describes %d",
                       length(), layout.total_length()));
        require(frames.allFinite(), Errc::invalid_argument, "sequence frames are not finite");
    }
};

// Repeated forward differences along time: order 1 = velocity, 2 =
// acceleration, 3 = jerk. Output has T - order rows.
inline Mat finite_difference(const Mat& frames, int order) {
    require(order >= 1 && order <= 3, Errc::invalid_argument,
            strfmt("finite_difference order %d not in [1, 3]", order));
    require(frames.rows() > order, Errc::invalid_argument,
            strfmt("finite_difference: %ld frames too few for order %d",
                   static_cast<long>(frames.rows()), order));
    Mat d = frames;
    for (int k = 0; k < order; ++k)
        d = (d.bottomRows(d.rows() - 1) - d.topRows(d.rows() - 1)).eval();
    return d;
}

// Per-frame, per-foot binary contact flags.
struct FootContactMask {
    Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> contact;  // T x feet

    int length() const { return static_cast<int>(contact.rows()); }
    int feet() const { return static_cast<int>(contact.cols()); }
};

// A foot is in contact when it is near the ground (world y below height_eps)
// and nearly still (displacement to the next frame below vel_eps). The last
// frame has no next frame, so it reuses the second-to-last frame's stillness
// verdict.
inline FootContactMask compute_foot_contacts(const Skeleton& skel, const Mat& frames,
                                             double height_eps = 0.05,
                                             double vel_eps = 0.01) {
    skel.validate();
    require(!skel.foot_joints.empty(), Errc::invalid_argument,
            "skeleton declares no foot joints");
    require(frames.rows() >= 2, Errc::invalid_argument,
            "foot contacts need at least 2 frames");
    require(height_eps > 0 && vel_eps > 0, Errc::invalid_argument,
            "contact thresholds must be positive");

    const int T = static_cast<int>(frames.rows());
    const int F = static_cast<int>(skel.foot_joints.size());

    // Foot world positions per frame.
    std::vector<Mat> foot_pos(T);  // each F x 3
    for (int t = 0; t < T; ++t) {
        const JointPositions p = fk_row(skel, frames.row(t).transpose());
        Mat fp(F, 3);
        for (int f = 0; f < F; ++f) fp.row(f) = p.row(skel.foot_joints[f]);
        foot_pos[t] = fp;
    }

    FootContactMask mask;
    mask.contact.resize(T, F);
    for (int f = 0; f < F; ++f) {
        bool last_still = false;
        for (int t = 0; t < T; ++t) {
            const bool low = foot_pos[t](f, 1) < height_eps;
            bool still;
            if (t + 1 < T) {
                still = (foot_pos[t + 1].row(f) - foot_pos[t].row(f)).norm() < vel_eps;
                last_still = still;
            } else {
                still = last_still;
            }
            mask.contact(t, f) = (low && still) ? 1 : 0;
        }
    }
    return mask;
}

}  // namespace ssdm
