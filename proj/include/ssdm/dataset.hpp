#pragma once

#include <vector>

#include "ssdm/generators.hpp"

namespace ssdm {

struct DatasetItem {
    Mat window;  // W x D, normalized
    int label = 0;
};

struct ToyDataset {
    std::vector<DatasetItem> items;
    FeatureStats stats;  // raw -> normalized mapping used on the items
    int window = 0;
    int dim = 0;
    int labels = 0;
};

// Draw samples_per_label windows from each generator (labels 0..G-1 in
// order), compute pooled per-coordinate mean/std over every frame, and store
// the normalized windows. Coordinates that happen to be constant across the
// pool keep std 1 so normalization stays invertible.
inline ToyDataset generate_dataset(const std::vector<const MotionGenerator*>& gens,
                                   int samples_per_label, int window, Rng& rng) {
    require(!gens.empty(), Errc::invalid_argument, "dataset needs at least one generator");
    require(samples_per_label >= 1, Errc::invalid_argument,
            "dataset needs at least one sample per label");
    require(window >= 2, Errc::invalid_argument, "dataset window must be >= 2");

    ToyDataset ds;
    ds.window = window;
    ds.labels = static_cast<int>(gens.size());
    for (int g = 0; g < ds.labels; ++g) {
        require(gens[g] != nullptr, Errc::invalid_argument, "null generator");
        require(gens[g]->label() == g, Errc::invalid_argument,
                strfmt("generator %d reports label %d", g, gens[g]->label()));
        for (int s = 0; s < samples_per_label; ++s) {
            GeneratedMotion m = gens[g]->generate(window, rng);
            require(static_cast<int>(m.frames.rows()) == window, Errc::invalid_argument,
                    "generator returned wrong length");
            ds.items.push_back({std::move(m.frames), g});
        }
    }
    ds.dim = static_cast<int>(ds.items.front().window.cols());

    const double n = static_cast<double>(ds.items.size()) * window;
    Vec mean = Vec::Zero(ds.dim);
    for (const auto& it : ds.items) mean += it.window.colwise().sum().transpose();
    mean /= n;
    Vec var = Vec::Zero(ds.dim);
    for (const auto& it : ds.items)
        var += (it.window.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
    var /= n;

    ds.stats.mean = mean;
    ds.stats.std = var.array().sqrt().max(0.0).matrix();
    for (int c = 0; c < ds.dim; ++c)
        if (ds.stats.std[c] < 1e-12) ds.stats.std[c] = 1.0;

    for (auto& it : ds.items) it.window = ds.stats.to_normalized(it.window);
    return ds;
}

inline std::vector<const MotionGenerator*> generator_pointers(
    const std::vector<std::unique_ptr<MotionGenerator>>& gens) {
    std::vector<const MotionGenerator*> p;
    p.reserve(gens.size());
    for (const auto& g : gens) p.push_back(g.get());
    return p;
}

}  // namespace ssdm
