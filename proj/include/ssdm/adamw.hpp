#pragma once

#include <cmath>

#include "ssdm/common.hpp"

namespace ssdm {

struct AdamWParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

// AdamW with decoupled weight decay over one flat parameter vector. Moments
// persist across steps; sparse callers simply pass zeros for coordinates that
// received no gradient, which leaves the standard decay of m and v intact.
class AdamW {
public:
    AdamW(Eigen::Index n, AdamWParams params) : p_(params) {
        require(n >= 1, Errc::invalid_argument, "AdamW needs at least one parameter");
        require(p_.lr > 0 && p_.eps > 0, Errc::invalid_argument,
                "AdamW lr and eps must be positive");
        require(p_.beta1 >= 0 && p_.beta1 < 1 && p_.beta2 >= 0 && p_.beta2 < 1,
                Errc::invalid_argument, "AdamW betas must lie in [0, 1)");
        m_ = Vec::Zero(n);
        v_ = Vec::Zero(n);
    }

    // One update. If update_scale is given (same length as theta), the
    // computed step is multiplied per-coordinate before being applied; the
    // moments always see the gradient as passed in.
    void step(Eigen::Ref<Vec> theta, const Eigen::Ref<const Vec>& grad,
              const Vec* update_scale = nullptr) {
        require(theta.size() == m_.size() && grad.size() == m_.size(), Errc::dimension_mismatch,
                strfmt("AdamW sized for %ld parameters, got theta %ld / grad %ld",
                       static_cast<long>(m_.size()), static_cast<long>(theta.size()),
                       static_cast<long>(grad.size())));
        ++step_;
        m_ = p_.beta1 * m_ + (1.0 - p_.beta1) * grad;
        v_ = p_.beta2 * v_.array().matrix() + (1.0 - p_.beta2) * grad.array().square().matrix();
        const double bc1 = 1.0 - std::pow(p_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(p_.beta2, static_cast<double>(step_));
        Vec update = p_.lr * ((m_ / bc1).array() / ((v_ / bc2).array().sqrt() + p_.eps) +
                              p_.weight_decay * theta.array())
                               .matrix();
        if (update_scale) {
            require(update_scale->size() == theta.size(), Errc::dimension_mismatch,
                    "AdamW update scale has wrong length");
            update.array() *= update_scale->array();
        }
        theta -= update;
    }

    long step_count() const { return step_; }
    const Vec& first_moment() const { return m_; }
    const Vec& second_moment() const { return v_; }

private:
    AdamWParams p_;
    Vec m_, v_;
    long step_ = 0;
};

}  // namespace ssdm
