#pragma once

#include "ssdm/common.hpp"
#include "ssdm/denoiser.hpp"
#include "ssdm/schedule.hpp"

namespace ssdm {

// Diagonal Gaussian over single frames: x0 ~ N(mean, diag(var)). Used as an
// exactly solvable stand-in for a learned prior.
struct GaussianPrior {
    Vec mean;
    Vec var;

    void validate() const {
        require(mean.size() == var.size(), Errc::dimension_mismatch,
                strfmt("prior mean has %ld dims, var has %ld",
                       static_cast<long>(mean.size()), static_cast<long>(var.size())));
        require(mean.size() >= 1, Errc::invalid_argument, "prior must have dimension >= 1");
        require(mean.allFinite() && var.allFinite(), Errc::invalid_argument,
                "prior parameters are not finite");
        require((var.array() >= 0.0).all(), Errc::invalid_argument,
                "prior variances must be non-negative");
    }

    static GaussianPrior isotropic(int dim, double mean_value, double var_value) {
        GaussianPrior p;
        p.mean = Vec::Constant(dim, mean_value);
        p.var = Vec::Constant(dim, var_value);
        p.validate();
        return p;
    }
};

// Exact minimum-mean-square-error denoiser for the Gaussian prior. With
// x_t = sqrt(abar) x0 + sqrt(1-abar) eps and x0 ~ N(mu, S) per coordinate:
//   E[x0 | x_t] = mu + sqrt(abar) S / (abar S + 1 - abar) * (x_t - sqrt(abar) mu)
// which is affine in x_t with per-coordinate slope sqrt(abar) S / (abar S + 1 - abar).
inline Mat gaussian_posterior_mean(const GaussianPrior& prior, const Mat& x_t, int t,
                                   const NoiseSchedule& schedule) {
    prior.validate();
    require(x_t.cols() == prior.mean.size(), Errc::dimension_mismatch,
            strfmt("posterior mean: window D=%ld but prior D=%ld",
                   static_cast<long>(x_t.cols()), static_cast<long>(prior.mean.size())));
    const double abar = schedule.alpha_bar_at(t);
    const double sa = std::sqrt(abar);
    const Eigen::ArrayXd gain =
        sa * prior.var.array() / (abar * prior.var.array() + (1.0 - abar));
    Mat out(x_t.rows(), x_t.cols());
    out = ((x_t.array().rowwise() - sa * prior.mean.transpose().array()).rowwise() *
           gain.transpose()).rowwise() +
          prior.mean.transpose().array();
    return out;
}

// Denoiser wrapper around the analytic posterior mean. Label-independent:
// any condition id is accepted and ignored, so guidance has no effect.
class GaussianDenoiser : public Denoiser {
public:
    GaussianDenoiser(GaussianPrior prior, NoiseSchedule schedule)
        : prior_(std::move(prior)), schedule_(std::move(schedule)) {
        prior_.validate();
    }

    Mat predict(const Mat& x_t, int t, ConditionLabel cond) const override {
        check_window(x_t, cond);
        return gaussian_posterior_mean(prior_, x_t, t, schedule_);
    }
    int max_window() const override { return std::numeric_limits<int>::max(); }
    int dim() const override { return static_cast<int>(prior_.mean.size()); }
    int conditions() const override { return std::numeric_limits<int>::max(); }

    const GaussianPrior& prior() const { return prior_; }

private:
    GaussianPrior prior_;
    NoiseSchedule schedule_;
};

}  // namespace ssdm
