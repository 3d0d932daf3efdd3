#pragma once

#include <vector>

#include "ssdm/denoiser.hpp"
#include "ssdm/motion.hpp"
#include "ssdm/rng.hpp"

namespace ssdm {

// Sliding-window geometry for segment-wise optimization.
struct WindowSpec {
    int window = 120;
    int stride = 30;

    void validate() const {
        require(window >= 1, Errc::invalid_argument,
                strfmt("window size %d must be positive", window));
        require(stride >= 1, Errc::invalid_argument,
                strfmt("stride %d must be positive", stride));
    }
};

// Stride-grid start offsets, with the final window pinned to the sequence
// tail so the last frames are always coverable.
inline std::vector<int> window_starts(int total_length, const WindowSpec& spec) {
    spec.validate();
    require(spec.window <= total_length, Errc::invalid_argument,
            strfmt("window %d longer than sequence %d", spec.window, total_length));
    std::vector<int> starts;
    for (int s = 0; s + spec.window <= total_length; s += spec.stride) starts.push_back(s);
    const int tail = total_length - spec.window;
    if (starts.empty() || starts.back() != tail) starts.push_back(tail);
    return starts;
}

// Frames not covered by any window (non-empty only when stride > window).
inline std::vector<int> uncovered_frames(int total_length, const WindowSpec& spec) {
    std::vector<bool> covered(total_length, false);
    for (int s : window_starts(total_length, spec))
        for (int f = s; f < s + spec.window; ++f) covered[f] = true;
    std::vector<int> out;
    for (int f = 0; f < total_length; ++f)
        if (!covered[f]) out.push_back(f);
    return out;
}

// Motion spans (as ordinals into the ordered motion list) whose frames
// intersect [start, start + window).
inline std::vector<int> overlapped_motion_ordinals(const SequenceLayout& layout, int start,
                                                   int window) {
    std::vector<int> out;
    const auto motions = layout.motion_spans();
    for (size_t k = 0; k < motions.size(); ++k) {
        const int b = layout.span_start(motions[k]);
        const int e = b + layout.spans()[motions[k]].length;
        if (b < start + window && e > start) out.push_back(static_cast<int>(k));
    }
    return out;
}

// Label for one sampled window. A window fully inside a motion span takes
// that span's label outright; a window spanning n >= 2 motions picks one of
// their labels uniformly (rng is consumed only in that case); a window that
// touches no motion span is unconditional.
inline ConditionLabel select_condition(const SequenceLayout& layout, int start, int window,
                                       Rng& rng) {
    require(start >= 0 && start + window <= layout.total_length(), Errc::invalid_argument,
            strfmt("window [%d, %d) outside sequence of %d frames",
                   start, start + window, layout.total_length()));
    const auto ords = overlapped_motion_ordinals(layout, start, window);
    if (ords.empty()) return ConditionLabel::unconditional();
    const auto motions = layout.motion_spans();
    int pick = ords[0];
    if (ords.size() >= 2)
        pick = ords[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(ords.size()) - 1))];
    return ConditionLabel::of(layout.spans()[motions[static_cast<size_t>(pick)]].condition);
}

// One extracted window plus its sampling metadata.
struct WindowSample {
    int start = 0;
    Mat frames;  // W x D copy
    ConditionLabel condition;
    std::vector<int> overlapped_motions;  // motion ordinals intersecting the window
};

inline WindowSample extract(const MotionSequence& seq, int start, const WindowSpec& spec,
                            Rng& rng) {
    spec.validate();
    require(start >= 0 && start + spec.window <= seq.length(), Errc::invalid_argument,
            strfmt("window [%d, %d) outside sequence of %d frames",
                   start, start + spec.window, seq.length()));
    WindowSample w;
    w.start = start;
    w.frames = seq.frames.middleRows(start, spec.window);
    w.overlapped_motions = overlapped_motion_ordinals(seq.layout, start, spec.window);
    w.condition = select_condition(seq.layout, start, spec.window, rng);
    return w;
}

}  // namespace ssdm
