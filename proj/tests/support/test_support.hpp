#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include <unistd.h>

#include "trigcm/model.hpp"
#include "trigcm/pointcloud.hpp"
#include "trigcm/random.hpp"
#include "trigcm/tensor.hpp"

namespace trigcm::testing {

inline Points random_points(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    Rng rng(seed, stream_id("test.points"));
    Points p(n);
    for (auto& v : p)
        for (double& c : v) c = rng.normal(0.0, sd);
    return p;
}

inline double max_abs_diff(const Points& a, const Points& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) m = std::max(m, std::abs(a[i][k] - b[i][k]));
    return m;
}

inline double frobenius(const Points& a) {
    double s = 0.0;
    for (const auto& p : a)
        for (double c : p) s += c * c;
    return std::sqrt(s);
}

inline double sq_dist(const Vec3& a, const Vec3& b) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

// Smallest gap between the nearest and second-nearest squared distance,
// in either direction. Configurations below the margin are skipped.
inline double tie_margin(const Points& a, const Points& b) {
    double margin = std::numeric_limits<double>::infinity();
    auto scan = [&](const Points& from, const Points& to) {
        for (const auto& p : from) {
            double d1 = std::numeric_limits<double>::infinity(), d2 = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                const double d = sq_dist(p, q);
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                } else if (d < d2) {
                    d2 = d;
                }
            }
            margin = std::min(margin, d2 - d1);
        }
    };
    scan(a, b);
    scan(b, a);
    return margin;
}

inline double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
   public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("trigcm_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

   private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst;  // "<param>[index]"
    std::size_t checked = 0;
};

// Compares tape gradients of `loss` with respect to every model parameter
// against central differences with step h. `loss` must record on the
// active tape and return a scalar.
//
// Relative error is |a - n| / max(|a|, |n|, floor) with
// floor = 1e-6 * max(1, largest |gradient component|). Components far below
// the gradient's own scale are compared at that scale, since central
// differences cannot resolve them beyond roundoff in the loss.
inline GradCheckResult grad_check(VelocityModel& model, const std::function<Tensor()>& loss, double h = 1e-5) {
    model.zero_grad();
    {
        Tape tape;
        TapeScope scope(tape);
        tape.backward(loss());
    }
    double g_max = 0.0;
    for (const auto& p : model.parameters())
        for (double g : p.tensor.grad()) g_max = std::max(g_max, std::abs(g));
    const double floor = 1e-6 * std::max(1.0, g_max);
    GradCheckResult out;
    for (auto& p : model.parameters()) {
        const auto grad = p.tensor.grad();
        auto data = p.tensor.mutable_data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + h;
            double up, down;
            {
                NoGradScope ng;
                up = loss().item();
            }
            data[i] = saved - h;
            {
                NoGradScope ng;
                down = loss().item();
            }
            data[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = grad.empty() ? 0.0 : grad[i];
            const double err =
                std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
            ++out.checked;
            if (err > out.max_rel_error) {
                out.max_rel_error = err;
                out.worst = p.name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic) +
                            " numeric " + std::to_string(numeric);
            }
        }
    }
    return out;
}

}  // namespace trigcm::testing
