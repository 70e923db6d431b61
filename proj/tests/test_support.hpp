#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "advforge/param_store.hpp"
#include "advforge/rng.hpp"
#include "advforge/toy_face.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("advforge_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(static_cast<unsigned long long>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string sub(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Central finite differences over every parameter coordinate vs the
/// caller-supplied analytic gradients. Relative error uses a small floor so
/// near-zero coordinates compare on the FD noise scale.
inline double max_fd_rel_error(advforge::nn::ParamStore& store,
                               const std::function<double()>& loss_value,
                               const std::function<void()>& compute_grads, double h = 1e-5) {
    compute_grads();
    std::vector<std::pair<std::string, Eigen::ArrayXd>> analytic;
    for (const auto& name : store.names()) analytic.emplace_back(name, store.grad(name).data);
    double worst = 0;
    for (const auto& [name, grad] : analytic) {
        auto& value = store.value(name);
        for (Eigen::Index i = 0; i < value.numel(); ++i) {
            const double keep = value.data[i];
            value.data[i] = keep + h;
            const double up = loss_value();
            value.data[i] = keep - h;
            const double dn = loss_value();
            value.data[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double a = grad[i];
            const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

inline advforge::ToyFace toy_face(std::uint64_t seed, int size = 64) {
    advforge::Rng rng(seed);
    return advforge::generate_toy_face(advforge::ToyFaceSpec::random(rng, size, size));
}

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace testutil
