#pragma once

#include <optional>
#include <vector>

#include "ssdm/common.hpp"

namespace ssdm {

enum class SpanKind { motion, transition };

// One span of the long sequence: a prompted motion or a free transition.
struct Span {
    SpanKind kind = SpanKind::motion;
    int length = 0;
    int condition = -1;  // label id for motion spans; unused for transitions
};

// Ordered span list describing a long sequence. Spans strictly alternate
// motion / transition and both ends are motions, so n motions come with
// n-1 transitions (a single motion span is the degenerate case).
class SequenceLayout {
public:
    SequenceLayout() = default;

    SequenceLayout(std::vector<Span> spans, int interp_width)
        : spans_(std::move(spans)), interp_width_(interp_width) {
        validate();
    }

    const std::vector<Span>& spans() const { return spans_; }
    int interp_width() const { return interp_width_; }

    int total_length() const {
        int t = 0;
        for (const auto& s : spans_) t += s.length;
        return t;
    }

    // First frame of span i.
    int span_start(size_t i) const {
        int t = 0;
        for (size_t k = 0; k < i; ++k) t += spans_[k].length;
        return t;
    }

    // Index of the span containing frame f.
    size_t span_at(int frame) const {
        require(frame >= 0 && frame < total_length(), Errc::invalid_argument,
                strfmt("frame %d outside layout of %d frames", frame, total_length()));
        int t = 0;
        for (size_t i = 0; i < spans_.size(); ++i) {
            t += spans_[i].length;
            if (frame < t) return i;
        }
        return spans_.size() - 1;  // unreachable
    }

    // Span indices of all motion spans, in order.
    std::vector<size_t> motion_spans() const {
        std::vector<size_t> out;
        for (size_t i = 0; i < spans_.size(); ++i)
            if (spans_[i].kind == SpanKind::motion) out.push_back(i);
        return out;
    }

    bool is_motion_frame(int frame) const {
        return spans_[span_at(frame)].kind == SpanKind::motion;
    }

    // Frames where the span kind changes; boundary b is the first frame of
    // the later span. With alternation these are exactly the motion <->
    // transition seams.
    std::vector<int> boundaries() const {
        std::vector<int> out;
        int t = 0;
        for (size_t i = 0; i + 1 < spans_.size(); ++i) {
            t += spans_[i].length;
            out.push_back(t);
        }
        return out;
    }

private:
    void validate() const {
        require(!spans_.empty(), Errc::invalid_argument, "layout has no spans");
        require(spans_.front().kind == SpanKind::motion, Errc::invalid_argument,
                "layout must start with a motion span");
        require(spans_.back().kind == SpanKind::motion, Errc::invalid_argument,
                "layout must end with a motion span");
        int min_len = spans_.front().length;
        for (size_t i = 0; i < spans_.size(); ++i) {
            const auto& s = spans_[i];
            require(s.length >= 1, Errc::invalid_argument,
                    strfmt("span %zu has non-positive length %d", i, s.length));
            min_len = std::min(min_len, s.length);
            if (i > 0)
                require(s.kind != spans_[i - 1].kind, Errc::invalid_argument,
                        strfmt("spans %zu and %zu have the same kind; "
                               "motion and transition spans must alternate",
                               i - 1, i));
            if (s.kind == SpanKind::motion)
                require(s.condition >= 0, Errc::invalid_argument,
                        strfmt("motion span %zu lacks a condition label", i));
        }
        require(interp_width_ >= 0, Errc::invalid_argument,
                strfmt("interp_width %d is negative", interp_width_));
        require(interp_width_ <= min_len, Errc::invalid_argument,
                strfmt("interp_width %d exceeds shortest span length %d",
                       interp_width_, min_len));
    }

    std::vector<Span> spans_;
    int interp_width_ = 0;
};

// Convenience builders used all over the tests.
inline Span motion_span(int length, int condition) {
    return Span{SpanKind::motion, length, condition};
}
inline Span transition_span(int length) {
    return Span{SpanKind::transition, length, -1};
}

}  // namespace ssdm
