#pragma once

#include <Eigen/Dense>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace ssdm {

using Mat = Eigen::MatrixXd;   // frames are rows: T x D
using Vec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Error categories; the CLI maps these onto process exit codes.
enum class Errc {
    invalid_argument,
    dimension_mismatch,
    io,
    config,
    denoiser_load,
    training_divergence,
    nan_loss,
};

class Error : public std::runtime_error {
public:
    Error(Errc c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    Errc code;
};

// printf-style formatting into std::string (gcc 11 lacks <format>).
inline std::string strfmt(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    char buf[1024];
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    return std::string(buf);
}

inline void require(bool ok, Errc c, const std::string& msg) {
    if (!ok) throw Error(c, msg);
}

// Per-coordinate affine map between a denoiser's native (normalized) space
// and raw feature space: raw = norm * std + mean.
struct FeatureStats {
    Vec mean;
    Vec std;

    static FeatureStats identity(int dim) {
        FeatureStats s;
        s.mean = Vec::Zero(dim);
        s.std = Vec::Ones(dim);
        return s;
    }
    bool is_identity() const {
        return mean.isZero(0.0) && (std.array() == 1.0).all();
    }
    Mat to_raw(const Mat& x) const {
        return (x.array().rowwise() * std.transpose().array()).rowwise() +
               mean.transpose().array();
    }
    Mat to_normalized(const Mat& x) const {
        return (x.array().rowwise() - mean.transpose().array()).rowwise() /
               std.transpose().array();
    }
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace ssdm
