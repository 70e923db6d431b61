#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <string>
#include <vector>

#include "advforge/image.hpp"
#include "advforge/rng.hpp"

namespace advforge::nn {

/// Dense n-d value: shape + flat row-major doubles. The workhorse container
/// for activations and parameters; Eigen maps provide the matrix views.
struct Tensor {
    std::vector<int> shape;
    Eigen::ArrayXd data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);
    Tensor(std::vector<int> s, Eigen::ArrayXd d);

    static Tensor zeros(std::vector<int> s);
    static Tensor full(std::vector<int> s, double v);
    static Tensor scalar(double v);
    static Tensor from_values(std::vector<int> s, std::initializer_list<double> vals);
    static Tensor randn(std::vector<int> s, Rng& rng, double stddev);

    Eigen::Index numel() const { return data.size(); }
    int ndim() const { return static_cast<int>(shape.size()); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    double& at(int i) { return data[i]; }
    double at(int i) const { return data[i]; }

    // row-major indexers
    double& at2(int i, int j) { return data[i * shape[1] + j]; }
    double at2(int i, int j) const { return data[i * shape[1] + j]; }
    double& at3(int c, int y, int x) { return data[(c * shape[1] + y) * shape[2] + x]; }
    double at3(int c, int y, int x) const { return data[(c * shape[1] + y) * shape[2] + x]; }

    bool all_finite() const { return data.isFinite().all(); }
};

Tensor image_to_chw(const Image& img);
Tensor images_to_chw(const Image& a, const Image& b);  // 6-channel concatenation
Mask tensor_to_mask(const Tensor& t);                  // 2-d tensor -> mask plane
Tensor mask_to_tensor(const Mask& m);

}  // namespace advforge::nn
