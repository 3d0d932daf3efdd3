#pragma once

#include <limits>

#include "ssdm/common.hpp"
#include "ssdm/schedule.hpp"

namespace ssdm {

// A prompt label, or the unconditional sentinel.
struct ConditionLabel {
    int id = -1;

    static ConditionLabel unconditional() { return ConditionLabel{-1}; }
    static ConditionLabel of(int id) {
        require(id >= 0, Errc::invalid_argument, strfmt("condition id %d is negative", id));
        return ConditionLabel{id};
    }
    bool is_unconditional() const { return id < 0; }
    bool operator==(const ConditionLabel& o) const { return id == o.id; }
};

// Short-motion diffusion prior. predict() maps a noised window x_t at
// timestep t (and an optional label) to the model's clean-window estimate
// x_hat0. Implementations must be const-reentrant. Windows live in the
// denoiser's native feature space; stats() describes the affine map back to
// raw features (identity unless the model was trained on normalized data).
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual Mat predict(const Mat& x_t, int t, ConditionLabel cond) const = 0;
    virtual int max_window() const = 0;
    virtual int dim() const = 0;
    virtual int conditions() const = 0;
    virtual FeatureStats stats() const { return FeatureStats::identity(dim()); }

protected:
    void check_window(const Mat& x_t, ConditionLabel cond) const {
        require(x_t.cols() == dim(), Errc::dimension_mismatch,
                strfmt("denoiser expects D=%d, got D=%ld", dim(),
                       static_cast<long>(x_t.cols())));
        require(x_t.rows() >= 1 && x_t.rows() <= max_window(), Errc::invalid_argument,
                strfmt("window of %ld frames outside [1, %d]",
                       static_cast<long>(x_t.rows()), max_window()));
        if (!cond.is_unconditional())
            require(cond.id < conditions(), Errc::invalid_argument,
                    strfmt("condition id %d out of range (%d labels)", cond.id, conditions()));
    }
};

// Classifier-free guidance in clean-signal space:
//   x_hat0 = uncond + s * (cond - uncond).
// Collapses to a single predict() call when it must: unconditional input,
// s = 0 (pure unconditional) or s = 1 (pure conditional).
inline Mat guided_predict(const Denoiser& den, const Mat& x_t, int t, ConditionLabel cond,
                          double s) {
    if (!cond.is_unconditional())
        require(cond.id < den.conditions(), Errc::invalid_argument,
                strfmt("condition id %d out of range (%d labels)", cond.id, den.conditions()));
    if (cond.is_unconditional() || s == 0.0)
        return den.predict(x_t, t, ConditionLabel::unconditional());
    if (s == 1.0) return den.predict(x_t, t, cond);
    const Mat uncond = den.predict(x_t, t, ConditionLabel::unconditional());
    const Mat condp = den.predict(x_t, t, cond);
    return uncond + s * (condp - uncond);
}

}  // namespace ssdm
