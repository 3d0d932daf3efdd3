#pragma once

// Shared helpers for the test suite: scratch directories, subprocess capture
// for CLI checks, and small numeric utilities.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "ssdm/common.hpp"

namespace testsup {

// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("ssdm_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

// Run a shell command, capturing combined output and the exit code.
inline RunResult run_command(const std::string& cmd) {
    RunResult r;
    FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// Max relative error between an analytic gradient and a central finite
// difference of `f`, probing every coordinate of `x`.
inline double gradient_rel_error(const std::function<double(const ssdm::Mat&)>& f,
                                 const ssdm::Mat& x, const ssdm::Mat& analytic,
                                 double h = 1e-6) {
    double worst = 0.0;
    double scale = 1e-12;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            scale = std::max(scale, std::abs(analytic(i, j)));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            ssdm::Mat xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            const double fd = (f(xp) - f(xm)) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - analytic(i, j)) / scale);
        }
    }
    return worst;
}

}  // namespace testsup
