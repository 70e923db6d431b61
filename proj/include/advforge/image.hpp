#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

namespace advforge {

template <class Scalar>
using PlaneT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Soft mask, H×W, values in [0,1]. Indexed (row=y, col=x).
template <class Scalar>
using MaskT = PlaneT<Scalar>;

/// H×W×3 image in [0,1], stored as three planes indexed (y, x).
template <class Scalar>
struct ImageT {
    std::array<PlaneT<Scalar>, 3> ch;

    ImageT() = default;
    ImageT(Eigen::Index h, Eigen::Index w) { for (auto& p : ch) p = PlaneT<Scalar>::Zero(h, w); }

    Eigen::Index rows() const { return ch[0].rows(); }
    Eigen::Index cols() const { return ch[0].cols(); }

    static ImageT constant(Eigen::Index h, Eigen::Index w, Scalar r, Scalar g, Scalar b) {
        ImageT img(h, w);
        img.ch[0].setConstant(r);
        img.ch[1].setConstant(g);
        img.ch[2].setConstant(b);
        return img;
    }
};

using Plane = PlaneT<double>;
using Mask = MaskT<double>;
using Image = ImageT<double>;

template <class Scalar>
void require_same_shape(const ImageT<Scalar>& a, const ImageT<Scalar>& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(where) + ": image shapes differ (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
}

template <class Scalar>
ImageT<Scalar> clamp01(ImageT<Scalar> img) {
    for (auto& p : img.ch) p = p.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
    return img;
}

/// Quantize to the nearest 8-bit level, back to [0,1]; PNG write/read round-trips
/// such images exactly.
template <class Scalar>
ImageT<Scalar> quantize8(ImageT<Scalar> img) {
    for (auto& p : img.ch)
        p = ((p.cwiseMax(Scalar(0)).cwiseMin(Scalar(1)) * Scalar(255)).round()) / Scalar(255);
    return img;
}

template <class Scalar>
MaskT<Scalar> quantize8(MaskT<Scalar> m) {
    return ((m.cwiseMax(Scalar(0)).cwiseMin(Scalar(1)) * Scalar(255)).round()) / Scalar(255);
}

template <class Scalar>
Scalar max_abs_diff(const ImageT<Scalar>& a, const ImageT<Scalar>& b) {
    require_same_shape(a, b, "max_abs_diff");
    Scalar m = 0;
    for (int c = 0; c < 3; ++c) m = std::max(m, (a.ch[c] - b.ch[c]).abs().maxCoeff());
    return m;
}

}  // namespace advforge
