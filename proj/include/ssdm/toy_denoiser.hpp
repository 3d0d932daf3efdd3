#pragma once

#include <cmath>
#include <vector>

#include "ssdm/denoiser.hpp"
#include "ssdm/rng.hpp"

namespace ssdm {

struct ToyDenoiserConfig {
    int dim = 0;
    int max_window = 0;
    int conditions = 0;
    int time_embed = 32;
    int cond_embed = 16;
    int width = 256;
    int hidden_layers = 3;

    void validate() const {
        require(dim >= 1, Errc::invalid_argument, "denoiser dim must be >= 1");
        require(max_window >= 1, Errc::invalid_argument, "denoiser window must be >= 1");
        require(conditions >= 1, Errc::invalid_argument, "denoiser needs >= 1 condition");
        require(time_embed >= 2 && time_embed % 2 == 0, Errc::invalid_argument,
                "time embedding size must be even and >= 2");
        require(cond_embed >= 1, Errc::invalid_argument, "condition embedding size must be >= 1");
        require(width >= 1, Errc::invalid_argument, "hidden width must be >= 1");
        require(hidden_layers >= 1, Errc::invalid_argument, "need >= 1 hidden layer");
    }

    int input_size() const { return max_window * dim + time_embed + cond_embed; }
    int output_size() const { return max_window * dim; }
};

namespace detail {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

}  // namespace detail

// Small fully connected clean-signal predictor over flattened windows:
// input = [frames (frame-major), sinusoidal step embedding, condition
// embedding], a SiLU MLP, output = predicted clean frames. Windows shorter
// than max_window are edge-padded on the way in and cropped on the way out.
// Parameters live in one flat vector so the trainer and checkpoint code can
// treat the network as a single point in R^n.
class ToyDenoiser : public Denoiser {
public:
    ToyDenoiser() = default;

    explicit ToyDenoiser(ToyDenoiserConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        build_layout();
        params_ = Vec::Zero(param_count_);
        stats_ = FeatureStats::identity(cfg_.dim);
    }

    // He-style uniform init for the weights, zero biases, small normal
    // condition embeddings.
    void init_params(Rng& rng) {
        for (int l = 0; l < layer_count(); ++l) {
            auto W = weight(l);
            const double bound = std::sqrt(6.0 / (W.cols() + W.rows()));
            for (Eigen::Index j = 0; j < W.cols(); ++j)
                for (Eigen::Index i = 0; i < W.rows(); ++i)
                    W(i, j) = bound * (2.0 * uniform01(rng) - 1.0);
            bias(l).setZero();
        }
        auto E = cond_table();
        for (Eigen::Index j = 0; j < E.cols(); ++j)
            for (Eigen::Index i = 0; i < E.rows(); ++i) E(i, j) = 0.02 * normal(rng);
    }

    const ToyDenoiserConfig& config() const { return cfg_; }
    Eigen::Index parameter_count() const { return param_count_; }
    Vec& params() { return params_; }
    const Vec& params() const { return params_; }

    void set_stats(FeatureStats stats) {
        require(stats.mean.size() == cfg_.dim && stats.std.size() == cfg_.dim,
                Errc::dimension_mismatch, "stats dimension mismatch");
        stats_ = std::move(stats);
    }

    // --- Denoiser interface ---

    int max_window() const override { return cfg_.max_window; }
    int dim() const override { return cfg_.dim; }
    int conditions() const override { return cfg_.conditions; }
    FeatureStats stats() const override { return stats_; }

    Mat predict(const Mat& x_t, int t, ConditionLabel cond) const override {
        check_window(x_t, cond);
        require(t >= 0, Errc::invalid_argument, "negative diffusion step");
        const int W = static_cast<int>(x_t.rows());
        Mat z0(cfg_.input_size(), 1);
        z0.col(0) = assemble_input(x_t, t, cond_index(cond));
        Mat out = forward(z0, nullptr);
        Mat pred(W, cfg_.dim);
        for (int f = 0; f < W; ++f)
            pred.row(f) = out.col(0).segment(f * cfg_.dim, cfg_.dim).transpose();
        return pred;
    }

    // --- training support ---

    // Index of a label's embedding row; the last row is the unconditional one.
    int cond_index(ConditionLabel cond) const {
        return cond.is_unconditional() ? cfg_.conditions : cond.id;
    }

    // Flattened network input for one full-length window.
    Vec assemble_input(const Mat& x_t, int t, int cond_row) const {
        const int W = static_cast<int>(x_t.rows());
        Vec z = Vec::Zero(cfg_.input_size());
        for (int f = 0; f < cfg_.max_window; ++f) {
            const int src = f < W ? f : W - 1;  // edge padding
            z.segment(f * cfg_.dim, cfg_.dim) = x_t.row(src).transpose();
        }
        z.segment(cfg_.max_window * cfg_.dim, cfg_.time_embed) = time_embedding(t);
        z.segment(cfg_.max_window * cfg_.dim + cfg_.time_embed, cfg_.cond_embed) =
            cond_table_const().row(cond_row).transpose();
        return z;
    }

    Vec time_embedding(int t) const {
        Vec e(cfg_.time_embed);
        const int half = cfg_.time_embed / 2;
        for (int i = 0; i < half; ++i) {
            const double freq = std::pow(10000.0, -2.0 * i / cfg_.time_embed);
            e[2 * i] = std::sin(t * freq);
            e[2 * i + 1] = std::cos(t * freq);
        }
        return e;
    }

    struct ForwardCache {
        Mat z0;                  // input_size x B
        std::vector<Mat> pre;    // pre-activations per hidden layer
        std::vector<Mat> post;   // activations per hidden layer
    };

    // Batched forward over columns; fills the cache when given one.
    Mat forward(const Mat& z0, ForwardCache* cache) const {
        require(z0.rows() == cfg_.input_size(), Errc::dimension_mismatch,
                "network input size mismatch");
        if (cache) {
            cache->z0 = z0;
            cache->pre.clear();
            cache->post.clear();
        }
        Mat cur = z0;
        for (int l = 0; l < cfg_.hidden_layers; ++l) {
            Mat a = (weight_const(l) * cur).colwise() + bias_const(l);
            Mat h = a.unaryExpr([](double v) { return detail::silu(v); });
            if (cache) {
                cache->pre.push_back(a);
                cache->post.push_back(h);
            }
            cur = std::move(h);
        }
        const int L = cfg_.hidden_layers;
        return (weight_const(L) * cur).colwise() + bias_const(L);
    }

    // Backward pass for d(loss)/d(out); labels give each column's embedding
    // row. Returns the flat parameter gradient.
    Vec backward(const ForwardCache& cache, const Mat& dout,
                 const std::vector<int>& labels) const {
        require(dout.cols() == cache.z0.cols(), Errc::dimension_mismatch,
                "backward batch mismatch");
        require(static_cast<Eigen::Index>(labels.size()) == cache.z0.cols(),
                Errc::dimension_mismatch, "backward label count mismatch");
        Vec grad = Vec::Zero(param_count_);
        const int L = cfg_.hidden_layers;

        Mat dcur = dout;
        for (int l = L; l >= 0; --l) {
            const Mat& below = (l == 0) ? cache.z0 : cache.post[l - 1];
            grad_weight(grad, l) = dcur * below.transpose();
            grad_bias(grad, l) = dcur.rowwise().sum();
            if (l == 0) {
                dcur = weight_const(0).transpose() * dcur;  // now d/d(z0)
            } else {
                const Mat da = weight_const(l).transpose() * dcur;
                dcur = (da.array() *
                        cache.pre[l - 1]
                            .unaryExpr([](double v) { return detail::silu_grad(v); })
                            .array())
                           .matrix();
            }
        }

        // Scatter the input gradient's embedding slice into the table rows.
        const int off = cfg_.max_window * cfg_.dim + cfg_.time_embed;
        auto table_grad = Eigen::Map<Mat>(grad.data() + embed_offset_, cfg_.conditions + 1,
                                          cfg_.cond_embed);
        for (Eigen::Index b = 0; b < dcur.cols(); ++b)
            table_grad.row(labels[b]) += dcur.col(b).segment(off, cfg_.cond_embed).transpose();
        return grad;
    }

    int layer_count() const { return cfg_.hidden_layers + 1; }

    Eigen::Map<Mat> weight(int l) { return {params_.data() + w_off_[l], w_rows_[l], w_cols_[l]}; }
    Eigen::Map<Vec> bias(int l) { return {params_.data() + b_off_[l], w_rows_[l]}; }
    Eigen::Map<Mat> cond_table() {
        return {params_.data() + embed_offset_, cfg_.conditions + 1, cfg_.cond_embed};
    }
    Eigen::Map<const Mat> weight_const(int l) const {
        return {params_.data() + w_off_[l], w_rows_[l], w_cols_[l]};
    }
    Eigen::Map<const Vec> bias_const(int l) const {
        return {params_.data() + b_off_[l], w_rows_[l]};
    }
    Eigen::Map<const Mat> cond_table_const() const {
        return {params_.data() + embed_offset_, cfg_.conditions + 1, cfg_.cond_embed};
    }

private:
    void build_layout() {
        w_off_.clear();
        b_off_.clear();
        w_rows_.clear();
        w_cols_.clear();
        Eigen::Index off = 0;
        for (int l = 0; l < layer_count(); ++l) {
            const Eigen::Index rows = (l == cfg_.hidden_layers) ? cfg_.output_size() : cfg_.width;
            const Eigen::Index cols = (l == 0) ? cfg_.input_size() : cfg_.width;
            w_off_.push_back(off);
            w_rows_.push_back(rows);
            w_cols_.push_back(cols);
            off += rows * cols;
            b_off_.push_back(off);
            off += rows;
        }
        embed_offset_ = off;
        off += static_cast<Eigen::Index>(cfg_.conditions + 1) * cfg_.cond_embed;
        param_count_ = off;
    }

    // Gradient views parallel the parameter views.
    Eigen::Map<Mat> grad_weight(Vec& g, int l) const {
        return {g.data() + w_off_[l], w_rows_[l], w_cols_[l]};
    }
    Eigen::Map<Vec> grad_bias(Vec& g, int l) const { return {g.data() + b_off_[l], w_rows_[l]}; }

    ToyDenoiserConfig cfg_;
    Vec params_;
    FeatureStats stats_;
    std::vector<Eigen::Index> w_off_, b_off_, w_rows_, w_cols_;
    Eigen::Index embed_offset_ = 0;
    Eigen::Index param_count_ = 0;
};

}  // namespace ssdm
