#pragma once

#include <cmath>
#include <vector>

#include "ssdm/common.hpp"

namespace ssdm {

// Variance-preserving diffusion schedule: per-step noise rates beta[t] and
// the cumulative signal fractions alpha_bar[t] = prod_{s<=t} (1 - beta[s]).
struct NoiseSchedule {
    int num_steps = 0;
    std::vector<double> beta;
    std::vector<double> alpha_bar;

    static NoiseSchedule from_betas(std::vector<double> betas) {
        NoiseSchedule s;
        s.num_steps = static_cast<int>(betas.size());
        require(s.num_steps >= 2, Errc::invalid_argument,
                strfmt("schedule needs at least 2 steps, got %d", s.num_steps));
        s.beta = std::move(betas);
        s.alpha_bar.resize(s.num_steps);
        double prod = 1.0;
        for (int t = 0; t < s.num_steps; ++t) {
            require(s.beta[t] > 0.0 && s.beta[t] < 1.0, Errc::invalid_argument,
                    strfmt("beta[%d] = %g outside (0, 1)", t, s.beta[t]));
            prod *= 1.0 - s.beta[t];
            s.alpha_bar[t] = prod;
        }
        return s;
    }

    double sqrt_alpha_bar(int t) const { return std::sqrt(alpha_bar_at(t)); }
    double sqrt_one_minus_alpha_bar(int t) const { return std::sqrt(1.0 - alpha_bar_at(t)); }

    double alpha_bar_at(int t) const {
        require(t >= 0 && t < num_steps, Errc::invalid_argument,
                strfmt("timestep %d outside [0, %d)", t, num_steps));
        return alpha_bar[t];
    }
};

// Linear beta ramp from beta_start to beta_end over num_steps steps.
inline NoiseSchedule make_schedule(int num_steps, double beta_start = 1e-4,
                                   double beta_end = 0.02) {
    require(num_steps >= 2, Errc::invalid_argument,
            strfmt("schedule needs at least 2 steps, got %d", num_steps));
    require(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end,
            Errc::invalid_argument,
            strfmt("invalid beta range [%g, %g]", beta_start, beta_end));
    std::vector<double> betas(num_steps);
    for (int t = 0; t < num_steps; ++t)
        betas[t] = beta_start + (beta_end - beta_start) * t / (num_steps - 1);
    return NoiseSchedule::from_betas(std::move(betas));
}

// Closed-form forward noising: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
inline Mat forward_diffuse(const Mat& x0, int t, const Mat& eps,
                           const NoiseSchedule& schedule) {
    require(eps.rows() == x0.rows() && eps.cols() == x0.cols(), Errc::dimension_mismatch,
            strfmt("forward_diffuse: eps is %ldx%ld but x0 is %ldx%ld",
                   static_cast<long>(eps.rows()), static_cast<long>(eps.cols()),
                   static_cast<long>(x0.rows()), static_cast<long>(x0.cols())));
    return schedule.sqrt_alpha_bar(t) * x0 + schedule.sqrt_one_minus_alpha_bar(t) * eps;
}

}  // namespace ssdm
