#include "advforge/tensor.hpp"

#include <numeric>
#include <stdexcept>

namespace advforge::nn {

static Eigen::Index shape_numel(const std::vector<int>& s) {
    Eigen::Index n = 1;
    for (int d : s) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dim " + std::to_string(d));
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
    data = Eigen::ArrayXd::Zero(shape_numel(shape));
}

Tensor::Tensor(std::vector<int> s, Eigen::ArrayXd d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != shape_numel(shape))
        throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                    " != numel of shape " + shape_str());
}

Tensor Tensor::zeros(std::vector<int> s) { return Tensor(std::move(s)); }

Tensor Tensor::full(std::vector<int> s, double v) {
    Tensor t(std::move(s));
    t.data.setConstant(v);
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
}

Tensor Tensor::from_values(std::vector<int> s, std::initializer_list<double> vals) {
    Tensor t(std::move(s));
    if (static_cast<Eigen::Index>(vals.size()) != t.numel())
        throw std::invalid_argument("Tensor::from_values: wrong value count");
    Eigen::Index i = 0;
    for (double v : vals) t.data[i++] = v;
    return t;
}

Tensor Tensor::randn(std::vector<int> s, Rng& rng, double stddev) {
    Tensor t(std::move(s));
    for (Eigen::Index i = 0; i < t.numel(); ++i) t.data[i] = rng.normal(0.0, stddev);
    return t;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor image_to_chw(const Image& img) {
    const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
    Tensor t({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) t.at3(c, y, x) = img.ch[c](y, x);
    return t;
}

Tensor images_to_chw(const Image& a, const Image& b) {
    require_same_shape(a, b, "images_to_chw");
    const int h = static_cast<int>(a.rows()), w = static_cast<int>(a.cols());
    Tensor t({6, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                t.at3(c, y, x) = a.ch[c](y, x);
                t.at3(c + 3, y, x) = b.ch[c](y, x);
            }
    return t;
}

Mask tensor_to_mask(const Tensor& t) {
    if (t.ndim() == 3 && t.shape[0] == 1) {
        Mask m(t.shape[1], t.shape[2]);
        for (int y = 0; y < t.shape[1]; ++y)
            for (int x = 0; x < t.shape[2]; ++x) m(y, x) = t.at3(0, y, x);
        return m;
    }
    if (t.ndim() == 2) {
        Mask m(t.shape[0], t.shape[1]);
        for (int y = 0; y < t.shape[0]; ++y)
            for (int x = 0; x < t.shape[1]; ++x) m(y, x) = t.at2(y, x);
        return m;
    }
    throw std::invalid_argument("tensor_to_mask: expected [H,W] or [1,H,W], got " + t.shape_str());
}

Tensor mask_to_tensor(const Mask& m) {
    Tensor t({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
    for (int y = 0; y < m.rows(); ++y)
        for (int x = 0; x < m.cols(); ++x) t.at2(y, x) = m(y, x);
    return t;
}

}  // namespace advforge::nn
