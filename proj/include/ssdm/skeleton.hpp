#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "ssdm/common.hpp"

namespace ssdm {

// Kinematic tree. parent[0] == -1 marks the root; every other joint's parent
// has a smaller index, so one forward sweep resolves the chain. offset[j] is
// the bone vector from parent to joint j in the parent's frame (offset[0] is
// unused: joint 0 sits at the root position).
struct Skeleton {
    int joint_count = 0;
    std::vector<int> parent;
    std::vector<Vec3> offset;
    std::vector<int> foot_joints;

    int pose_dim() const { return 3 + 3 * joint_count; }

    void validate() const {
        require(joint_count >= 1, Errc::invalid_argument, "skeleton needs at least one joint");
        require(static_cast<int>(parent.size()) == joint_count, Errc::invalid_argument,
                strfmt("skeleton: %zu parent entries for %d joints", parent.size(), joint_count));
        require(static_cast<int>(offset.size()) == joint_count, Errc::invalid_argument,
                strfmt("skeleton: %zu offsets for %d joints", offset.size(), joint_count));
        require(parent[0] == -1, Errc::invalid_argument, "joint 0 must be the root (parent -1)");
        for (int j = 1; j < joint_count; ++j)
            require(parent[j] >= 0 && parent[j] < j, Errc::invalid_argument,
                    strfmt("joint %d has invalid parent %d (must precede the joint)", j, parent[j]));
        for (int f : foot_joints)
            require(f >= 0 && f < joint_count, Errc::invalid_argument,
                    strfmt("foot joint %d out of range", f));
        for (const auto& o : offset)
            require(o.allFinite(), Errc::invalid_argument, "skeleton offset is not finite");
    }
};

namespace detail {

inline Mat3 skew(const Vec3& v) {
    Mat3 k;
    k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return k;
}

// Rodrigues coefficients: R = I + a*K + b*K^2 with K = skew(w), theta = |w|.
// a = sin(theta)/theta, b = (1-cos(theta))/theta^2 written as 2*sin^2(t/2)/t^2
// to dodge cancellation; the series kicks in below 1e-6 to remove the 0/0.
inline void rot_coeffs(double theta, double& a, double& b) {
    if (theta < 1e-6) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    } else {
        const double s = std::sin(0.5 * theta);
        a = std::sin(theta) / theta;
        b = 2.0 * s * s / (theta * theta);
    }
}

// d(a)/dtheta / theta and d(b)/dtheta / theta. Both closed forms lose digits
// to cancellation for small angles, so the series takes over below 1e-3.
inline void rot_dcoeffs(double theta, double& da_over_t, double& db_over_t) {
    if (theta < 1e-3) {
        const double t2 = theta * theta;
        da_over_t = -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0;
        db_over_t = -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0;
    } else {
        const double s = std::sin(theta);
        const double sh = std::sin(0.5 * theta);
        const double t2 = theta * theta;
        da_over_t = (theta * std::cos(theta) - s) / (t2 * theta);
        db_over_t = (theta * s - 4.0 * sh * sh) / (t2 * t2);
    }
}

}  // namespace detail

// Axis-angle rotation vector -> rotation matrix.
inline Mat3 rodrigues(const Vec3& w) {
    const double theta = w.norm();
    double a, b;
    detail::rot_coeffs(theta, a, b);
    const Mat3 k = detail::skew(w);
    return Mat3::Identity() + a * k + b * (k * k);
}

// Partial derivatives of rodrigues(w) with respect to each component of w.
inline std::array<Mat3, 3> rodrigues_jacobian(const Vec3& w) {
    const double theta = w.norm();
    double a, b, da_t, db_t;
    detail::rot_coeffs(theta, a, b);
    detail::rot_dcoeffs(theta, da_t, db_t);
    const Mat3 k = detail::skew(w);
    const Mat3 k2 = k * k;
    std::array<Mat3, 3> out;
    for (int i = 0; i < 3; ++i) {
        const Mat3 ei = detail::skew(Vec3::Unit(i));
        out[i] = (da_t * w[i]) * k + a * ei + (db_t * w[i]) * k2 + b * (ei * k + k * ei);
    }
    return out;
}

// One frame of articulated pose: root position plus one rotation vector per
// joint. Rotation vectors are canonicalized to norm < 2*pi on construction
// (same rotation, shortest representative).
struct PoseVector {
    Vec3 root_position = Vec3::Zero();
    std::vector<Vec3> rotations;

    PoseVector() = default;

    PoseVector(const Vec3& root, std::vector<Vec3> rots)
        : root_position(root), rotations(std::move(rots)) {
        require(root_position.allFinite(), Errc::invalid_argument,
                "pose root position is not finite");
        for (auto& w : rotations) {
            require(w.allFinite(), Errc::invalid_argument, "pose rotation is not finite");
            const double theta = w.norm();
            if (theta >= 2.0 * M_PI) {
                const double reduced = std::fmod(theta, 2.0 * M_PI);
                w *= (theta > 0.0) ? reduced / theta : 0.0;
            }
        }
    }

    // Row layout: [root(3), rotation_0(3), ..., rotation_{J-1}(3)].
    static PoseVector from_row(const Eigen::Ref<const Vec>& row, int joint_count) {
        const int expected = 3 + 3 * joint_count;
        require(static_cast<int>(row.size()) == expected, Errc::dimension_mismatch,
                strfmt("pose decode: expected D=%d for %d joints, got D=%ld",
                       expected, joint_count, static_cast<long>(row.size())));
        std::vector<Vec3> rots(joint_count);
        for (int j = 0; j < joint_count; ++j) rots[j] = row.segment<3>(3 + 3 * j);
        return PoseVector(row.head<3>(), std::move(rots));
    }

    Vec to_row() const {
        Vec row(3 + 3 * static_cast<int>(rotations.size()));
        row.head<3>() = root_position;
        for (size_t j = 0; j < rotations.size(); ++j) row.segment<3>(3 + 3 * j) = rotations[j];
        return row;
    }
};

using JointPositions = Eigen::Matrix<double, Eigen::Dynamic, 3>;

namespace detail {

// Forward kinematics over raw rotation vectors (no canonicalization, so the
// map stays smooth in the inputs and matches the analytic backward pass).
inline JointPositions fk_impl(const Skeleton& skel, const Vec3& root, const Vec3* rots,
                              std::vector<Mat3>* global_rots = nullptr) {
    JointPositions pos(skel.joint_count, 3);
    std::vector<Mat3> rg(skel.joint_count);
    pos.row(0) = root.transpose();
    rg[0] = rodrigues(rots[0]);
    for (int j = 1; j < skel.joint_count; ++j) {
        const int p = skel.parent[j];
        pos.row(j) = pos.row(p) + (rg[p] * skel.offset[j]).transpose();
        rg[j] = rg[p] * rodrigues(rots[j]);
    }
    if (global_rots) *global_rots = std::move(rg);
    return pos;
}

}  // namespace detail

// World-space joint positions for one pose. Child position = parent position
// + parent global rotation applied to the child's offset.
inline JointPositions fk(const Skeleton& skel, const PoseVector& pose) {
    skel.validate();
    require(static_cast<int>(pose.rotations.size()) == skel.joint_count, Errc::dimension_mismatch,
            strfmt("fk: pose has %zu rotations, skeleton has %d joints",
                   pose.rotations.size(), skel.joint_count));
    return detail::fk_impl(skel, pose.root_position, pose.rotations.data());
}

// FK straight from a frame row (root + rotation vectors), skipping pose
// canonicalization; this is the path the losses use.
inline JointPositions fk_row(const Skeleton& skel, const Eigen::Ref<const Vec>& row) {
    require(static_cast<int>(row.size()) == skel.pose_dim(), Errc::dimension_mismatch,
            strfmt("fk: expected D=%d for %d joints, got D=%ld",
                   skel.pose_dim(), skel.joint_count, static_cast<long>(row.size())));
    std::vector<Vec3> rots(skel.joint_count);
    for (int j = 0; j < skel.joint_count; ++j) rots[j] = row.segment<3>(3 + 3 * j);
    return detail::fk_impl(skel, row.head<3>(), rots.data());
}

// Pullback of FK: given dL/d(joint positions), return dL/d(frame row).
// Adjoints flow leaf-to-root; each joint contributes to its parent's position
// adjoint and global-rotation adjoint, and its own rotation-vector gradient
// comes from contracting the local-rotation adjoint with the Rodrigues
// derivative.
inline Vec fk_backward_row(const Skeleton& skel, const Eigen::Ref<const Vec>& row,
                           const JointPositions& dpos) {
    require(static_cast<int>(row.size()) == skel.pose_dim(), Errc::dimension_mismatch,
            strfmt("fk_backward: expected D=%d, got D=%ld",
                   skel.pose_dim(), static_cast<long>(row.size())));
    require(dpos.rows() == skel.joint_count, Errc::dimension_mismatch,
            strfmt("fk_backward: %ld position gradients for %d joints",
                   static_cast<long>(dpos.rows()), skel.joint_count));

    const int J = skel.joint_count;
    std::vector<Vec3> rots(J);
    for (int j = 0; j < J; ++j) rots[j] = row.segment<3>(3 + 3 * j);

    std::vector<Mat3> rglob;
    detail::fk_impl(skel, row.head<3>(), rots.data(), &rglob);

    std::vector<Vec3> gp(J);
    for (int j = 0; j < J; ++j) gp[j] = dpos.row(j).transpose();
    std::vector<Mat3> grot(J, Mat3::Zero());

    Vec grad = Vec::Zero(skel.pose_dim());
    for (int j = J - 1; j >= 1; --j) {
        const int p = skel.parent[j];
        const Mat3 rloc = rodrigues(rots[j]);
        gp[p] += gp[j];
        grot[p] += gp[j] * skel.offset[j].transpose();  // p_j = p_p + Rglob_p * off_j
        grot[p] += grot[j] * rloc.transpose();          // Rglob_j = Rglob_p * Rloc_j
        const Mat3 rbar = rglob[p].transpose() * grot[j];
        const auto dr = rodrigues_jacobian(rots[j]);
        for (int i = 0; i < 3; ++i) grad[3 + 3 * j + i] = (rbar.array() * dr[i].array()).sum();
    }
    {   // root joint: Rglob_0 = Rloc_0, so its adjoint is grot[0] directly
        const auto dr = rodrigues_jacobian(rots[0]);
        for (int i = 0; i < 3; ++i) grad[3 + i] = (grot[0].array() * dr[i].array()).sum();
    }
    grad.head<3>() = gp[0];
    return grad;
}

// Small test biped: pelvis, one arm chain, two legs. Feet rest exactly on the
// ground plane (y = 0) when the root stands at y = 0.5 with identity rotations.
inline Skeleton biped_skeleton() {
    Skeleton s;
    s.joint_count = 7;
    s.parent = {-1, 0, 1, 0, 3, 0, 5};
    s.offset = {Vec3(0, 0, 0),        Vec3(0, 0.35, 0),    Vec3(0.3, 0, 0),
                Vec3(-0.09, -0.05, 0), Vec3(0, -0.45, 0),   Vec3(0.09, -0.05, 0),
                Vec3(0, -0.45, 0)};
    s.foot_joints = {4, 6};
    s.validate();
    return s;
}

// Plain text skeleton file:
//   SSDSKEL v1
//   joints N
//   parent p0 ... pN-1
//   offset x y z              (N lines)
//   feet f0 f1 ...            (may list none)
inline Skeleton read_skeleton(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::io, "cannot open skeleton file: " + path);
    std::string line;
    auto next_line = [&](const char* what) {
        require(static_cast<bool>(std::getline(in, line)), Errc::io,
                strfmt("skeleton file truncated before %s: %s", what, path.c_str()));
        return line;
    };
    require(next_line("header") == "SSDSKEL v1", Errc::io,
            "bad skeleton header (want 'SSDSKEL v1'): " + path);

    Skeleton s;
    {
        std::istringstream ls(next_line("joint count"));
        std::string key;
        require(static_cast<bool>(ls >> key >> s.joint_count) && key == "joints", Errc::io,
                "bad 'joints' line in " + path);
    }
    {
        std::istringstream ls(next_line("parents"));
        std::string key;
        require(static_cast<bool>(ls >> key) && key == "parent", Errc::io,
                "bad 'parent' line in " + path);
        s.parent.resize(s.joint_count);
        for (int j = 0; j < s.joint_count; ++j)
            require(static_cast<bool>(ls >> s.parent[j]), Errc::io,
                    "missing parent entries in " + path);
    }
    s.offset.resize(s.joint_count);
    for (int j = 0; j < s.joint_count; ++j) {
        std::istringstream ls(next_line("offsets"));
        std::string key;
        require(static_cast<bool>(ls >> key >> s.offset[j].x() >> s.offset[j].y() >>
                                  s.offset[j].z()) && key == "offset",
                Errc::io, "bad 'offset' line in " + path);
    }
    {
        std::istringstream ls(next_line("feet"));
        std::string key;
        require(static_cast<bool>(ls >> key) && key == "feet", Errc::io,
                "bad 'feet' line in " + path);
        int f;
        while (ls >> f) s.foot_joints.push_back(f);
    }
    s.validate();
    return s;
}

inline void write_skeleton(const Skeleton& skel, const std::string& path) {
    skel.validate();
    std::ofstream out(path);
    require(out.good(), Errc::io, "cannot write skeleton file: " + path);
    out << "SSDSKEL v1\n";
    out << "joints " << skel.joint_count << "\n";
    out << "parent";
    for (int p : skel.parent) out << ' ' << p;
    out << "\n";
    char buf[128];
    for (const auto& o : skel.offset) {
        std::snprintf(buf, sizeof(buf), "offset %.17g %.17g %.17g\n", o.x(), o.y(), o.z());
        out << buf;
    }
    out << "feet";
    for (int f : skel.foot_joints) out << ' ' << f;
    out << "\n";
    require(out.good(), Errc::io, "failed writing skeleton file: " + path);
}

}  // namespace ssdm
