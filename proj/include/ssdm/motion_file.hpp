#pragma once

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "ssdm/motion.hpp"

namespace ssdm {

namespace detail {

inline std::string mf_getline(std::istream& is, const std::string& path, const char* what) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), Errc::io,
            "unexpected end of " + path + " while reading " + what);
    return line;
}

// Parse "<key> <value...>" enforcing the exact key.
inline std::string mf_value(const std::string& line, const std::string& key,
                            const std::string& path) {
    require(line.size() > key.size() + 1 && line.compare(0, key.size(), key) == 0 &&
                line[key.size()] == ' ',
            Errc::io, "expected '" + key + " ...' in " + path + ", got: " + line);
    return line.substr(key.size() + 1);
}

inline long mf_long(const std::string& s, const std::string& what, const std::string& path) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    require(end && *end == '\0' && end != s.c_str(), Errc::io,
            "bad integer for " + what + " in " + path + ": " + s);
    return v;
}

}  // namespace detail

// Plain-text motion container: a version header, a fixed-order metadata
// block (fps, dim, frame count, blend width, span list, associated joint
// count), a "data" marker, then one line per frame of space-separated
// doubles at 17 significant digits. The decimal width makes write -> read ->
// write byte-identical.
inline void write_motion(const MotionSequence& seq, const std::string& path, int joints = 0) {
    seq.validate();
    require(joints == 0 || 3 + 3 * joints == seq.dim(), Errc::invalid_argument,
            strfmt("joint count %d does not match dimension %d", joints, seq.dim()));
    std::string out = "SSDMOTION v1\n";
    out += strfmt("fps %d\n", seq.fps);
    out += strfmt("dim %d\n", seq.dim());
    out += strfmt("frames %d\n", seq.length());
    out += strfmt("interp %d\n", seq.layout.interp_width());
    out += strfmt("spans %zu\n", seq.layout.spans().size());
    for (const auto& s : seq.layout.spans()) {
        if (s.kind == SpanKind::motion)
            out += strfmt("span motion %d %d\n", s.length, s.condition);
        else
            out += strfmt("span transition %d -\n", s.length);
    }
    out += strfmt("joints %d\n", joints);
    out += "data\n";
    for (int t = 0; t < seq.length(); ++t) {
        for (int d = 0; d < seq.dim(); ++d) {
            if (d) out += ' ';
            out += strfmt("%.17g", seq.frames(t, d));
        }
        out += '\n';
    }
    std::ofstream os(path, std::ios::binary);
    require(os.good(), Errc::io, "cannot open motion file for writing: " + path);
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    require(os.good(), Errc::io, "write failed for motion file: " + path);
}

struct MotionFileData {
    MotionSequence seq;
    int joints = 0;
};

inline MotionFileData read_motion(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::io, "cannot open motion file: " + path);

    require(detail::mf_getline(is, path, "header") == "SSDMOTION v1", Errc::io,
            "not a motion file (bad header): " + path);
    const int fps = static_cast<int>(detail::mf_long(
        detail::mf_value(detail::mf_getline(is, path, "fps"), "fps", path), "fps", path));
    const int dim = static_cast<int>(detail::mf_long(
        detail::mf_value(detail::mf_getline(is, path, "dim"), "dim", path), "dim", path));
    const int frames = static_cast<int>(detail::mf_long(
        detail::mf_value(detail::mf_getline(is, path, "frames"), "frames", path), "frames",
        path));
    const int interp = static_cast<int>(detail::mf_long(
        detail::mf_value(detail::mf_getline(is, path, "interp"), "interp", path), "interp",
        path));
    const long n_spans = detail::mf_long(
        detail::mf_value(detail::mf_getline(is, path, "spans"), "spans", path), "spans", path);
    require(n_spans >= 1, Errc::io, "span count must be >= 1 in " + path);

    std::vector<Span> spans;
    for (long i = 0; i < n_spans; ++i) {
        const std::string body =
            detail::mf_value(detail::mf_getline(is, path, "span"), "span", path);
        const size_t p1 = body.find(' ');
        require(p1 != std::string::npos, Errc::io, "malformed span line in " + path);
        const size_t p2 = body.find(' ', p1 + 1);
        require(p2 != std::string::npos && body.find(' ', p2 + 1) == std::string::npos,
                Errc::io, "malformed span line in " + path);
        const std::string kind = body.substr(0, p1);
        const int len = static_cast<int>(
            detail::mf_long(body.substr(p1 + 1, p2 - p1 - 1), "span length", path));
        const std::string cond = body.substr(p2 + 1);
        if (kind == "motion") {
            spans.push_back(motion_span(
                len, static_cast<int>(detail::mf_long(cond, "span condition", path))));
        } else if (kind == "transition") {
            require(cond == "-", Errc::io, "transition span must carry '-' in " + path);
            spans.push_back(transition_span(len));
        } else {
            throw Error(Errc::io, "unknown span kind '" + kind + "' in " + path);
        }
    }
    const int joints = static_cast<int>(detail::mf_long(
        detail::mf_value(detail::mf_getline(is, path, "joints"), "joints", path), "joints",
        path));
    require(detail::mf_getline(is, path, "data marker") == "data", Errc::io,
            "expected 'data' marker in " + path);

    MotionFileData out;
    out.joints = joints;
    require(joints == 0 || 3 + 3 * joints == dim, Errc::io,
            "joint count does not match dimension in " + path);

    try {
        out.seq.layout = SequenceLayout(spans, interp);
    } catch (const Error& e) {
        throw Error(Errc::io, "invalid layout in " + path + ": " + e.what());
    }
    require(out.seq.layout.total_length() == frames, Errc::io,
            "span lengths do not sum to the frame count in " + path);

    out.seq.fps = fps;
    out.seq.frames.resize(frames, dim);
    for (int t = 0; t < frames; ++t) {
        const std::string line = detail::mf_getline(is, path, "frame data");
        const char* p = line.c_str();
        for (int d = 0; d < dim; ++d) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            require(end != p, Errc::io,
                    strfmt("bad frame value at frame %d column %d in %s", t, d, path.c_str()));
            out.seq.frames(t, d) = v;
            p = end;
            if (d + 1 < dim) {
                require(*p == ' ', Errc::io,
                        strfmt("expected separator at frame %d in %s", t, path.c_str()));
                ++p;
            }
        }
        require(*p == '\0', Errc::io,
                strfmt("trailing characters at frame %d in %s", t, path.c_str()));
    }
    std::string tail;
    require(!std::getline(is, tail), Errc::io, "trailing lines in " + path);

    try {
        out.seq.validate();
    } catch (const Error& e) {
        throw Error(Errc::io, "invalid motion data in " + path + ": " + e.what());
    }
    return out;
}

}  // namespace ssdm
