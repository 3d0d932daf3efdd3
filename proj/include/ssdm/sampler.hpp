#pragma once

#include "ssdm/denoiser.hpp"
#include "ssdm/rng.hpp"
#include "ssdm/schedule.hpp"

namespace ssdm {

// Ancestral sampling with a clean-signal-predicting model. Starting from
// x_T ~ N(0, I), each step forms the exact posterior q(x_{t-1} | x_t, x_hat0)
// of the forward process around the guided prediction:
//   mean = sqrt(abar_{t-1}) beta_t / (1 - abar_t) * x_hat0
//        + sqrt(1 - beta_t) (1 - abar_{t-1}) / (1 - abar_t) * x_t
//   var  = (1 - abar_{t-1}) / (1 - abar_t) * beta_t
// with abar_{-1} = 1, which makes the final step collapse onto x_hat0.
inline Mat ddpm_sample(const Denoiser& den, const NoiseSchedule& schedule,
                       ConditionLabel cond, int length, double guidance, Rng& rng) {
    require(length >= 1, Errc::invalid_argument,
            strfmt("sample length %d must be positive", length));
    require(length <= den.max_window(), Errc::invalid_argument,
            strfmt("sample length %d exceeds denoiser max window %d",
                   length, den.max_window()));

    const int D = den.dim();
    Mat x = normal_matrix(rng, length, D);
    for (int t = schedule.num_steps - 1; t >= 0; --t) {
        const Mat x0 = guided_predict(den, x, t, cond, guidance);
        const double abar = schedule.alpha_bar[t];
        const double abar_prev = (t > 0) ? schedule.alpha_bar[t - 1] : 1.0;
        const double beta = schedule.beta[t];
        const double c0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
        const double ct = std::sqrt(1.0 - beta) * (1.0 - abar_prev) / (1.0 - abar);
        x = c0 * x0 + ct * x;
        if (t > 0) {
            const double var = (1.0 - abar_prev) / (1.0 - abar) * beta;
            x += std::sqrt(var) * normal_matrix(rng, length, D);
        }
    }
    return x;
}

}  // namespace ssdm
