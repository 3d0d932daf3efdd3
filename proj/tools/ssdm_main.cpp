// Command-line front end: train the toy prior, initialize long sequences,
// refine them against a denoiser, and score the results.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssdm/ssdm.hpp"

namespace {

using namespace ssdm;

int exit_code_for(Errc c) {
    switch (c) {
        case Errc::training_divergence: return 3;
        case Errc::denoiser_load: return 4;
        case Errc::nan_loss: return 5;
        default: return 2;  // config, io, validation
    }
}

// Paths making up a sequence set: a motion file itself, or every regular
// file in a directory (sorted by name for determinism).
std::vector<std::string> collect_paths(const std::string& p) {
    namespace fs = std::filesystem;
    require(fs::exists(p), Errc::io, "input path does not exist: " + p);
    if (fs::is_directory(p)) {
        std::vector<std::string> out;
        for (const auto& e : fs::directory_iterator(p))
            if (e.is_regular_file()) out.push_back(e.path().string());
        std::sort(out.begin(), out.end());
        require(!out.empty(), Errc::io, "directory has no files: " + p);
        return out;
    }
    return {p};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), Errc::io, "cannot open for writing: " + path);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    require(os.good(), Errc::io, "write failed: " + path);
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
    std::string csv = "iter,t,align,pos,foot,vel,total\n";
    for (const auto& r : history)
        csv += strfmt("%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.t, r.losses.align,
                      r.losses.pos, r.losses.foot, r.losses.vel, r.losses.total);
    return csv;
}

void print_final_losses(const std::vector<LossRecord>& history, const LossBreakdown* last) {
    const LossBreakdown* b = last;
    if (!b && !history.empty()) b = &history.back().losses;
    if (!b) return;
    std::printf("final losses: align=%.6g pos=%.6g foot=%.6g vel=%.6g total=%.6g\n", b->align,
                b->pos, b->foot, b->vel, b->total);
}

int run_train_prior(const std::string& config_path, const std::string& out_path,
                    uint64_t* seed_override) {
    RunConfig cfg = parse_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const NoiseSchedule schedule = cfg.make_schedule_from_config();

    const Skeleton skel = biped_skeleton();
    const auto gens = standard_generators(skel);
    Rng rng(cfg.seed);
    log_info(strfmt("generating dataset: %d samples x %zu labels, window %d",
                    cfg.train_samples, gens.size(), cfg.ssd.window));
    const ToyDataset ds =
        generate_dataset(generator_pointers(gens), cfg.train_samples, cfg.ssd.window, rng);

    TrainOptions opt;
    opt.epochs = cfg.train_epochs;
    opt.batch = cfg.train_batch;
    opt.lr = cfg.train_lr;
    opt.cond_dropout = cfg.cond_dropout;
    opt.width = cfg.net_width;
    opt.hidden_layers = cfg.net_hidden;
    opt.time_embed = cfg.time_embed;
    opt.cond_embed = cfg.cond_embed;

    log_info(strfmt("training prior: %d epochs, batch %d, lr %g", opt.epochs, opt.batch,
                    opt.lr));
    TrainResult res = train_denoiser(ds, schedule, opt, rng);
    save_checkpoint(res.net, out_path);
    std::printf("final loss %.17g\n", res.step_loss.empty() ? 0.0 : res.step_loss.back());
    std::printf("checkpoint written to %s (%lld parameters)\n", out_path.c_str(),
                static_cast<long long>(res.net.parameter_count()));
    return 0;
}

int run_init(const std::string& config_path, const std::string& out_path,
             uint64_t* seed_override) {
    RunConfig cfg = parse_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const NoiseSchedule schedule = cfg.make_schedule_from_config();
    const SequenceLayout layout = cfg.make_layout();
    const auto den = make_denoiser(cfg, schedule);

    Rng rng(cfg.seed);
    MotionSequence seq = init_sequence(layout, *den, schedule, cfg.init_guidance, cfg.fps, rng);
    seq = interpolate_boundaries(seq);
    seq.frames = den->stats().to_raw(seq.frames);

    int joints = 0;
    if (!cfg.skeleton_path.empty()) joints = read_skeleton(cfg.skeleton_path).joint_count;
    write_motion(seq, out_path, joints);
    std::printf("initialized %d frames over %zu spans -> %s\n", seq.length(),
                layout.spans().size(), out_path.c_str());
    return 0;
}

int run_optimize(const std::string& config_path, const std::string& in_path,
                 const std::string& out_path, const std::string& loss_csv_path,
                 uint64_t* seed_override) {
    RunConfig cfg = parse_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const NoiseSchedule schedule = cfg.make_schedule_from_config();
    const auto den = make_denoiser(cfg, schedule);
    if (!cfg.skeleton_path.empty()) cfg.ssd.skeleton = read_skeleton(cfg.skeleton_path);

    MotionFileData mf = read_motion(in_path);
    require(mf.seq.dim() == den->dim(), Errc::config,
            strfmt("motion dimension %d does not match the denoiser (%d)", mf.seq.dim(),
                   den->dim()));
    mf.seq.frames = den->stats().to_normalized(mf.seq.frames);

    Rng rng(cfg.seed);
    LossBreakdown last{};
    bool have_last = false;
    OptimizeResult result = optimize(std::move(mf.seq), *den, schedule, cfg.ssd, rng,
                                     [&](int, const MotionSequence&, const SsdStep& step) {
                                         last = step.losses;
                                         have_last = true;
                                     });

    result.seq.frames = den->stats().to_raw(result.seq.frames);
    write_motion(result.seq, out_path, mf.joints);
    if (!loss_csv_path.empty()) write_text_file(loss_csv_path, loss_history_csv(result.history));
    print_final_losses(result.history, have_last ? &last : nullptr);
    std::printf("optimized %d iterations -> %s\n", cfg.ssd.iterations, out_path.c_str());
    return 0;
}

int run_metrics(const std::string& in_path, const std::string& ref_path,
                const std::string& out_path) {
    const auto in_files = collect_paths(in_path);
    std::string csv = "file,transition,start,length,peak_jerk,area_under_jerk,boundary_velocity_gap\n";
    std::vector<Mat> in_frames;
    for (const auto& f : in_files) {
        const MotionFileData mf = read_motion(f);
        in_frames.push_back(mf.seq.frames);
        bool has_transition = false;
        for (const auto& s : mf.seq.layout.spans())
            if (s.kind == SpanKind::transition) has_transition = true;
        if (!has_transition) {
            log_warn("no transitions in " + f + "; skipping its smoothness rows");
            continue;
        }
        const TransitionReport rep = transition_report(mf.seq);
        std::printf("%s\n%s", f.c_str(), report_to_table(rep).c_str());
        for (size_t i = 0; i < rep.transitions.size(); ++i) {
            const auto& m = rep.transitions[i];
            csv += strfmt("%s,%zu,%d,%d,%.17g,%.17g,%.17g\n", f.c_str(), i, m.start, m.length,
                          m.peak_jerk, m.area_under_jerk, m.boundary_velocity_gap);
        }
        csv += strfmt("%s,mean,,,%.17g,%.17g,%.17g\n", f.c_str(), rep.mean_peak_jerk,
                      rep.mean_area_under_jerk, rep.mean_boundary_velocity_gap);
    }

    if (!ref_path.empty()) {
        std::vector<Mat> ref_frames;
        for (const auto& f : collect_paths(ref_path)) ref_frames.push_back(read_motion(f).seq.frames);
        const double d = gaussian_feature_distance(in_frames, ref_frames);
        csv += strfmt("ALL,feature_distance,,,,,%.17g\n", d);
        std::printf("feature distance: %.17g\n", d);
    }
    write_text_file(out_path, csv);
    return 0;
}

int run_single_prompt(const std::string& config_path, int condition, int frames,
                      const std::string& out_path, const std::string& loss_csv_path,
                      uint64_t* seed_override, double* guidance_override,
                      double* lr_override) {
    RunConfig cfg = parse_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const NoiseSchedule schedule = cfg.make_schedule_from_config();
    const auto den = make_denoiser(cfg, schedule);
    if (!cfg.skeleton_path.empty()) cfg.ssd.skeleton = read_skeleton(cfg.skeleton_path);

    SSDConfig scfg = single_prompt_config(cfg.ssd);
    if (guidance_override) scfg.guidance = *guidance_override;
    if (lr_override) scfg.lr = *lr_override;

    Rng rng(cfg.seed);
    LossBreakdown last{};
    bool have_last = false;
    OptimizeResult result = optimize_single_prompt(
        frames, ConditionLabel::of(condition), *den, schedule, scfg, cfg.fps, rng,
        [&](int, const MotionSequence&, const SsdStep& step) {
            last = step.losses;
            have_last = true;
        });

    result.seq.frames = den->stats().to_raw(result.seq.frames);
    int joints = 0;
    if (!cfg.skeleton_path.empty()) joints = cfg.ssd.skeleton->joint_count;
    write_motion(result.seq, out_path, joints);
    if (!loss_csv_path.empty()) write_text_file(loss_csv_path, loss_history_csv(result.history));
    print_final_losses(result.history, have_last ? &last : nullptr);
    std::printf("single-prompt sequence of %d frames -> %s\n", result.seq.length(),
                out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-motion synthesis by segment-wise score distillation"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, loss_csv_path, ref_path;
    uint64_t seed = 0;
    int condition = 0, frames = 520;
    double guidance = 0.0, lr = 0.0;

    auto* train = app.add_subcommand("train-prior", "train the toy denoiser");
    train->add_option("--config", config_path, "run configuration")->required();
    train->add_option("--out", out_path, "checkpoint output path")->required();
    auto* train_seed = train->add_option("--seed", seed, "override the config seed");

    auto* init = app.add_subcommand("init", "initialize a long sequence");
    init->add_option("--config", config_path, "run configuration")->required();
    init->add_option("--out", out_path, "motion file output path")->required();
    auto* init_seed = init->add_option("--seed", seed, "override the config seed");

    auto* opt = app.add_subcommand("optimize", "refine a sequence against the prior");
    opt->add_option("--config", config_path, "run configuration")->required();
    opt->add_option("--in", in_path, "input motion file")->required();
    opt->add_option("--out", out_path, "motion file output path")->required();
    opt->add_option("--loss-csv", loss_csv_path, "loss curve output path");
    auto* opt_seed = opt->add_option("--seed", seed, "override the config seed");

    auto* met = app.add_subcommand("metrics", "score sequences");
    met->add_option("--in", in_path, "motion file or directory")->required();
    met->add_option("--ref-set", ref_path, "reference motion file or directory");
    met->add_option("--out", out_path, "csv output path")->required();

    auto* single = app.add_subcommand("single-prompt", "long single-label sequence");
    single->add_option("--config", config_path, "run configuration")->required();
    single->add_option("--condition", condition, "label to generate")->required();
    single->add_option("--frames", frames, "output length in frames");
    single->add_option("--out", out_path, "motion file output path")->required();
    single->add_option("--loss-csv", loss_csv_path, "loss curve output path");
    auto* single_seed = single->add_option("--seed", seed, "override the config seed");
    auto* single_guidance = single->add_option("--guidance", guidance, "override guidance");
    auto* single_lr = single->add_option("--lr", lr, "override the learning rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (train->parsed())
            return run_train_prior(config_path, out_path, train_seed->count() ? &seed : nullptr);
        if (init->parsed())
            return run_init(config_path, out_path, init_seed->count() ? &seed : nullptr);
        if (opt->parsed())
            return run_optimize(config_path, in_path, out_path, loss_csv_path,
                                opt_seed->count() ? &seed : nullptr);
        if (met->parsed()) return run_metrics(in_path, ref_path, out_path);
        if (single->parsed())
            return run_single_prompt(config_path, condition, frames, out_path, loss_csv_path,
                                     single_seed->count() ? &seed : nullptr,
                                     single_guidance->count() ? &guidance : nullptr,
                                     single_lr->count() ? &lr : nullptr);
    } catch (const ssdm::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 2;
}
