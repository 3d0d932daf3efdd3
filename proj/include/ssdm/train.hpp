#pragma once

#include <vector>

#include "ssdm/adamw.hpp"
#include "ssdm/dataset.hpp"
#include "ssdm/schedule.hpp"
#include "ssdm/toy_denoiser.hpp"

namespace ssdm {

struct TrainOptions {
    int epochs = 40;
    int batch = 32;
    double lr = 1e-3;
    double cond_dropout = 0.1;  // chance of training an item with no label
    int width = 256;
    int hidden_layers = 3;
    int time_embed = 32;
    int cond_embed = 16;

    void validate() const {
        require(epochs >= 0, Errc::invalid_argument, "epochs must be >= 0");
        require(batch >= 1, Errc::invalid_argument, "batch size must be >= 1");
        require(lr > 0.0, Errc::invalid_argument, "learning rate must be positive");
        require(cond_dropout >= 0.0 && cond_dropout <= 1.0, Errc::invalid_argument,
                "condition dropout must be in [0, 1]");
    }
};

struct TrainResult {
    ToyDenoiser net;
    std::vector<double> step_loss;               // one entry per optimizer step
    std::vector<double> epoch_loss;              // mean step loss per epoch
    std::vector<double> unconditional_fraction;  // per epoch: share trained label-free
};

// Denoising regression on the toy dataset: corrupt each window to a random
// step, train the network to recover the clean window, dropping the label
// with probability cond_dropout so the unconditional branch is learned too.
// Per item the draws are: step t, noise, then the dropout coin.
inline TrainResult train_denoiser(const ToyDataset& ds, const NoiseSchedule& schedule,
                                  const TrainOptions& opt, Rng& rng) {
    opt.validate();
    require(!ds.items.empty(), Errc::invalid_argument, "cannot train on an empty dataset");

    ToyDenoiserConfig cfg;
    cfg.dim = ds.dim;
    cfg.max_window = ds.window;
    cfg.conditions = ds.labels;
    cfg.width = opt.width;
    cfg.hidden_layers = opt.hidden_layers;
    cfg.time_embed = opt.time_embed;
    cfg.cond_embed = opt.cond_embed;

    TrainResult res;
    res.net = ToyDenoiser(cfg);
    res.net.init_params(rng);
    res.net.set_stats(ds.stats);

    AdamWParams ap;
    ap.lr = opt.lr;
    AdamW adam(res.net.parameter_count(), ap);

    const int n_items = static_cast<int>(ds.items.size());
    const Eigen::Index n_out = cfg.output_size();
    std::vector<int> order(n_items);
    for (int i = 0; i < n_items; ++i) order[i] = i;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        shuffle(rng, order);
        double epoch_sum = 0.0;
        int epoch_steps = 0;
        int dropped = 0;

        for (int base = 0; base < n_items; base += opt.batch) {
            const int B = std::min(opt.batch, n_items - base);
            Mat z0(cfg.input_size(), B);
            Mat target(n_out, B);
            std::vector<int> rows(B);
            for (int b = 0; b < B; ++b) {
                const DatasetItem& item = ds.items[order[base + b]];
                const int t = uniform_int(rng, 0, schedule.num_steps - 1);
                const Mat eps = normal_matrix(rng, ds.window, ds.dim);
                const Mat x_t = forward_diffuse(item.window, t, eps, schedule);
                const bool drop = uniform01(rng) < opt.cond_dropout;
                if (drop) ++dropped;
                rows[b] = res.net.cond_index(drop ? ConditionLabel::unconditional()
                                                  : ConditionLabel::of(item.label));
                z0.col(b) = res.net.assemble_input(x_t, t, rows[b]);
                for (int f = 0; f < ds.window; ++f)
                    target.col(b).segment(f * ds.dim, ds.dim) = item.window.row(f).transpose();
            }

            ToyDenoiser::ForwardCache cache;
            const Mat out = res.net.forward(z0, &cache);
            const Mat diff = out - target;
            const double denom = static_cast<double>(B) * static_cast<double>(n_out);
            const double loss = diff.squaredNorm() / denom;
            if (!std::isfinite(loss) || loss > 1e8)
                throw Error(Errc::training_divergence,
                            strfmt("training diverged at step %d (loss %g)",
                                   static_cast<int>(res.step_loss.size()) + 1, loss));

            const Mat dout = (2.0 / denom) * diff;
            const Vec grad = res.net.backward(cache, dout, rows);
            adam.step(res.net.params(), grad);

            res.step_loss.push_back(loss);
            epoch_sum += loss;
            ++epoch_steps;
        }

        res.epoch_loss.push_back(epoch_steps ? epoch_sum / epoch_steps : 0.0);
        res.unconditional_fraction.push_back(static_cast<double>(dropped) / n_items);
    }
    return res;
}

}  // namespace ssdm
