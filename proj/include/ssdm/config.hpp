#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ssdm/checkpoint.hpp"
#include "ssdm/gaussian_prior.hpp"
#include "ssdm/skeleton.hpp"
#include "ssdm/ssd.hpp"

namespace ssdm {

// Everything a pipeline run needs, read from a flat key=value file. The
// "span" key repeats (one line per span, in order); every other key appears
// at most once. Profiles preset the geometric loss weights: "plain" turns
// them off, "geo" sets all three to 0.1; explicit lambda_* keys win.
struct RunConfig {
    uint64_t seed = 0;
    std::string profile = "plain";
    int fps = 20;
    int dim = 0;  // feature dimension; required for gaussian denoisers

    int schedule_steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;

    SSDConfig ssd;
    double init_guidance = 2.5;
    int interp_width = 3;
    std::vector<Span> spans;

    std::string skeleton_path;
    std::string denoiser_spec;  // "gaussian:<mean>,<variance>" or a checkpoint path

    int train_epochs = 30;
    int train_batch = 32;
    double train_lr = 1e-3;
    int train_samples = 25;  // windows generated per label
    double cond_dropout = 0.1;
    int net_width = 256;
    int net_hidden = 3;
    int time_embed = 32;
    int cond_embed = 16;

    NoiseSchedule make_schedule_from_config() const {
        return make_schedule(schedule_steps, beta_start, beta_end);
    }

    SequenceLayout make_layout() const {
        try {
            return SequenceLayout(spans, interp_width);
        } catch (const Error& e) {
            throw Error(Errc::config, std::string("invalid layout in config: ") + e.what());
        }
    }
};

namespace detail {

inline std::string cfg_trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double cfg_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    require(end && *end == '\0' && end != v.c_str() && std::isfinite(x), Errc::config,
            "bad numeric value for '" + key + "': " + v);
    return x;
}

inline long cfg_long(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    require(end && *end == '\0' && end != v.c_str(), Errc::config,
            "bad integer value for '" + key + "': " + v);
    return x;
}

inline uint64_t cfg_u64(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    require(end && *end == '\0' && end != v.c_str(), Errc::config,
            "bad seed value for '" + key + "': " + v);
    return static_cast<uint64_t>(x);
}

// "motion <len> <cond>" or "transition <len>"
inline Span cfg_span(const std::string& v) {
    std::vector<std::string> tok;
    size_t pos = 0;
    while (pos < v.size()) {
        size_t sp = v.find(' ', pos);
        if (sp == std::string::npos) sp = v.size();
        if (sp > pos) tok.push_back(v.substr(pos, sp - pos));
        pos = sp + 1;
    }
    require(!tok.empty(), Errc::config, "empty span value");
    if (tok[0] == "motion") {
        require(tok.size() == 3, Errc::config, "motion span needs: motion <length> <condition>");
        return motion_span(static_cast<int>(cfg_long(tok[1], "span length")),
                           static_cast<int>(cfg_long(tok[2], "span condition")));
    }
    if (tok[0] == "transition") {
        require(tok.size() == 2, Errc::config, "transition span needs: transition <length>");
        return transition_span(static_cast<int>(cfg_long(tok[1], "span length")));
    }
    throw Error(Errc::config, "unknown span kind '" + tok[0] + "'");
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), Errc::config, "cannot open config file: " + path);

    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::cfg_trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        require(eq != std::string::npos, Errc::config,
                strfmt("missing '=' on line %d of %s", lineno, path.c_str()));
        const std::string key = detail::cfg_trim(line.substr(0, eq));
        const std::string val = detail::cfg_trim(line.substr(eq + 1));
        require(!key.empty() && !val.empty(), Errc::config,
                strfmt("empty key or value on line %d of %s", lineno, path.c_str()));
        if (key == "span") {
            cfg.spans.push_back(detail::cfg_span(val));
            continue;
        }
        require(!kv.count(key), Errc::config,
                strfmt("duplicate key '%s' on line %d of %s", key.c_str(), lineno,
                       path.c_str()));
        kv[key] = val;
    }

    auto take = [&kv](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };

    if (const auto* v = take("profile")) {
        require(*v == "plain" || *v == "geo", Errc::config,
                "profile must be 'plain' or 'geo', got: " + *v);
        cfg.profile = *v;
    }
    if (const auto* v = take("seed")) cfg.seed = detail::cfg_u64(*v, "seed");
    if (const auto* v = take("fps")) cfg.fps = static_cast<int>(detail::cfg_long(*v, "fps"));
    if (const auto* v = take("dim")) cfg.dim = static_cast<int>(detail::cfg_long(*v, "dim"));

    if (const auto* v = take("schedule_steps"))
        cfg.schedule_steps = static_cast<int>(detail::cfg_long(*v, "schedule_steps"));
    if (const auto* v = take("beta_start")) cfg.beta_start = detail::cfg_double(*v, "beta_start");
    if (const auto* v = take("beta_end")) cfg.beta_end = detail::cfg_double(*v, "beta_end");

    if (const auto* v = take("window"))
        cfg.ssd.window = static_cast<int>(detail::cfg_long(*v, "window"));
    if (const auto* v = take("stride"))
        cfg.ssd.stride = static_cast<int>(detail::cfg_long(*v, "stride"));
    if (const auto* v = take("iterations"))
        cfg.ssd.iterations = static_cast<int>(detail::cfg_long(*v, "iterations"));
    if (const auto* v = take("lr")) cfg.ssd.lr = detail::cfg_double(*v, "lr");
    if (const auto* v = take("adam_beta1")) cfg.ssd.beta1 = detail::cfg_double(*v, "adam_beta1");
    if (const auto* v = take("adam_beta2")) cfg.ssd.beta2 = detail::cfg_double(*v, "adam_beta2");
    if (const auto* v = take("adam_eps")) cfg.ssd.adam_eps = detail::cfg_double(*v, "adam_eps");
    if (const auto* v = take("weight_decay"))
        cfg.ssd.weight_decay = detail::cfg_double(*v, "weight_decay");
    if (const auto* v = take("t_min"))
        cfg.ssd.t_min = static_cast<int>(detail::cfg_long(*v, "t_min"));
    if (const auto* v = take("t_max"))
        cfg.ssd.t_max = static_cast<int>(detail::cfg_long(*v, "t_max"));
    if (const auto* v = take("guidance")) cfg.ssd.guidance = detail::cfg_double(*v, "guidance");
    if (const auto* v = take("init_guidance"))
        cfg.init_guidance = detail::cfg_double(*v, "init_guidance");
    if (const auto* v = take("mask_low")) cfg.ssd.mask_l = detail::cfg_double(*v, "mask_low");
    if (const auto* v = take("mask_high")) cfg.ssd.mask_h = detail::cfg_double(*v, "mask_high");
    if (const auto* v = take("mask_mode")) {
        require(*v == "gradient" || *v == "update", Errc::config,
                "mask_mode must be 'gradient' or 'update', got: " + *v);
        cfg.ssd.mask_mode = (*v == "gradient") ? MaskMode::gradient : MaskMode::update;
    }
    if (const auto* v = take("foot_height_eps"))
        cfg.ssd.foot_height_eps = detail::cfg_double(*v, "foot_height_eps");
    if (const auto* v = take("foot_vel_eps"))
        cfg.ssd.foot_vel_eps = detail::cfg_double(*v, "foot_vel_eps");

    const double profile_lambda = (cfg.profile == "geo") ? 0.1 : 0.0;
    cfg.ssd.lambda_pos = cfg.ssd.lambda_foot = cfg.ssd.lambda_vel = profile_lambda;
    if (const auto* v = take("lambda_pos")) cfg.ssd.lambda_pos = detail::cfg_double(*v, "lambda_pos");
    if (const auto* v = take("lambda_foot"))
        cfg.ssd.lambda_foot = detail::cfg_double(*v, "lambda_foot");
    if (const auto* v = take("lambda_vel")) cfg.ssd.lambda_vel = detail::cfg_double(*v, "lambda_vel");

    if (const auto* v = take("interp_width"))
        cfg.interp_width = static_cast<int>(detail::cfg_long(*v, "interp_width"));
    if (const auto* v = take("skeleton")) cfg.skeleton_path = *v;
    if (const auto* v = take("denoiser")) cfg.denoiser_spec = *v;

    if (const auto* v = take("train_epochs"))
        cfg.train_epochs = static_cast<int>(detail::cfg_long(*v, "train_epochs"));
    if (const auto* v = take("train_batch"))
        cfg.train_batch = static_cast<int>(detail::cfg_long(*v, "train_batch"));
    if (const auto* v = take("train_lr")) cfg.train_lr = detail::cfg_double(*v, "train_lr");
    if (const auto* v = take("train_samples"))
        cfg.train_samples = static_cast<int>(detail::cfg_long(*v, "train_samples"));
    if (const auto* v = take("cond_dropout"))
        cfg.cond_dropout = detail::cfg_double(*v, "cond_dropout");
    if (const auto* v = take("net_width"))
        cfg.net_width = static_cast<int>(detail::cfg_long(*v, "net_width"));
    if (const auto* v = take("net_hidden"))
        cfg.net_hidden = static_cast<int>(detail::cfg_long(*v, "net_hidden"));
    if (const auto* v = take("time_embed"))
        cfg.time_embed = static_cast<int>(detail::cfg_long(*v, "time_embed"));
    if (const auto* v = take("cond_embed"))
        cfg.cond_embed = static_cast<int>(detail::cfg_long(*v, "cond_embed"));

    static const char* known[] = {
        "profile",       "seed",         "fps",           "dim",         "schedule_steps",
        "beta_start",    "beta_end",     "window",        "stride",      "iterations",
        "lr",            "adam_beta1",   "adam_beta2",    "adam_eps",    "weight_decay",
        "t_min",         "t_max",        "guidance",      "init_guidance", "mask_low",
        "mask_high",     "mask_mode",    "foot_height_eps", "foot_vel_eps", "lambda_pos",
        "lambda_foot",   "lambda_vel",   "interp_width",  "skeleton",    "denoiser",
        "train_epochs",  "train_batch",  "train_lr",      "train_samples", "cond_dropout",
        "net_width",     "net_hidden",   "time_embed",    "cond_embed"};
    for (const auto& [key, val] : kv) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        require(ok, Errc::config, "unknown config key '" + key + "' in " + path);
    }

    if (!cfg.skeleton_path.empty())
        require(std::filesystem::exists(cfg.skeleton_path), Errc::config,
                "skeleton file does not exist: " + cfg.skeleton_path);
    if (!cfg.denoiser_spec.empty() && cfg.denoiser_spec.rfind("gaussian:", 0) != 0)
        require(std::filesystem::exists(cfg.denoiser_spec), Errc::config,
                "denoiser checkpoint does not exist: " + cfg.denoiser_spec);
    return cfg;
}

// Instantiate the prior named by the config: either the closed-form
// isotropic Gaussian ("gaussian:<mean>,<variance>", which needs dim) or a
// trained network loaded from a checkpoint.
inline std::unique_ptr<Denoiser> make_denoiser(const RunConfig& cfg,
                                               const NoiseSchedule& schedule) {
    require(!cfg.denoiser_spec.empty(), Errc::config, "config has no 'denoiser' entry");
    if (cfg.denoiser_spec.rfind("gaussian:", 0) == 0) {
        const std::string body = cfg.denoiser_spec.substr(9);
        const size_t comma = body.find(',');
        require(comma != std::string::npos, Errc::config,
                "gaussian denoiser needs 'gaussian:<mean>,<variance>'");
        const double mu = detail::cfg_double(body.substr(0, comma), "gaussian mean");
        const double var = detail::cfg_double(body.substr(comma + 1), "gaussian variance");
        require(cfg.dim >= 1, Errc::config, "gaussian denoiser needs a 'dim' config entry");
        require(var >= 0.0, Errc::config, "gaussian variance must be >= 0");
        return std::make_unique<GaussianDenoiser>(GaussianPrior::isotropic(cfg.dim, mu, var),
                                                  schedule);
    }
    auto net = std::make_unique<ToyDenoiser>(load_checkpoint(cfg.denoiser_spec));
    if (cfg.dim > 0)
        require(net->dim() == cfg.dim, Errc::config,
                strfmt("checkpoint dimension %d does not match config dim %d", net->dim(),
                       cfg.dim));
    return net;
}

}  // namespace ssdm
