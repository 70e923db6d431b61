#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "advforge/geometry.hpp"
#include "advforge/image.hpp"
#include "advforge/rng.hpp"

namespace advforge {

/// Kernel sizes the randomized blur draws from.
inline const std::array<int, 5>& blur_kernel_pool() {
    static const std::array<int, 5> pool = {3, 5, 7, 9, 11};
    return pool;
}

template <class Scalar>
std::vector<Scalar> gaussian_kernel(int size) {
    if (size < 1 || size % 2 == 0)
        throw std::invalid_argument("gaussian_kernel: size must be odd and >= 1, got " +
                                    std::to_string(size));
    std::vector<Scalar> k(static_cast<std::size_t>(size));
    if (size == 1) {
        k[0] = Scalar(1);
        return k;
    }
    const Scalar sigma = Scalar(size) / Scalar(6);
    const int c = size / 2;
    Scalar sum = 0;
    for (int i = 0; i < size; ++i) {
        const Scalar d = Scalar(i - c);
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (Scalar(2) * sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

/// Separable Gaussian blur (sigma = size/6) with edge-replicate padding.
template <class Scalar>
MaskT<Scalar> blur_mask(const MaskT<Scalar>& mask, int kernel_size) {
    const auto k = gaussian_kernel<Scalar>(kernel_size);
    if (kernel_size == 1) return mask;
    const Eigen::Index h = mask.rows(), w = mask.cols();
    const int c = kernel_size / 2;
    MaskT<Scalar> tmp(h, w), out(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            for (int i = 0; i < kernel_size; ++i) {
                const Eigen::Index xs = std::clamp<Eigen::Index>(x + i - c, 0, w - 1);
                acc += k[static_cast<std::size_t>(i)] * mask(y, xs);
            }
            tmp(y, x) = acc;
        }
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            for (int i = 0; i < kernel_size; ++i) {
                const Eigen::Index ys = std::clamp<Eigen::Index>(y + i - c, 0, h - 1);
                acc += k[static_cast<std::size_t>(i)] * tmp(ys, x);
            }
            out(y, x) = acc;
        }
    return out;
}

/// Randomized-kernel variant: draws the size from blur_kernel_pool().
template <class Scalar>
MaskT<Scalar> blur_mask(const MaskT<Scalar>& mask, Rng& rng) {
    const auto& pool = blur_kernel_pool();
    return blur_mask(mask, pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))]);
}

/// Smooth random warp of the mask contour. An 8x8 control grid of N(0,1)
/// offsets is smoothed with a 3x3 binomial pass, bilinearly interpolated over
/// the image, and norm-capped at magnitude - sqrt(2): the bilinear sampling
/// footprint adds up to sqrt(2) px, so the output support is guaranteed to
/// stay inside the input support dilated by `magnitude`.
template <class Scalar>
MaskT<Scalar> deform_mask(const MaskT<Scalar>& mask, Rng& rng, Scalar magnitude) {
    if (magnitude < Scalar(0)) throw std::invalid_argument("deform_mask: magnitude must be >= 0");
    if (magnitude == Scalar(0)) return mask;

    constexpr int kGrid = 8;  // cells; control points are (kGrid+1)^2
    constexpr int g = kGrid + 1;
    Eigen::Matrix<Scalar, g, g> dx, dy;
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < g; ++c) {
            dx(r, c) = Scalar(rng.normal());
            dy(r, c) = Scalar(rng.normal());
        }
    auto smooth = [](Eigen::Matrix<Scalar, g, g>& f) {
        Eigen::Matrix<Scalar, g, g> o;
        static const Scalar w1[3] = {Scalar(0.25), Scalar(0.5), Scalar(0.25)};
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) {
                Scalar acc = 0;
                for (int u = -1; u <= 1; ++u)
                    for (int v = -1; v <= 1; ++v) {
                        const int rr = std::clamp(r + u, 0, g - 1);
                        const int cc = std::clamp(c + v, 0, g - 1);
                        acc += w1[u + 1] * w1[v + 1] * f(rr, cc);
                    }
                o(r, c) = acc;
            }
        f = o;
    };
    smooth(dx);
    smooth(dy);

    Scalar maxnorm = 0;
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < g; ++c)
            maxnorm = std::max(maxnorm, std::hypot(dx(r, c), dy(r, c)));
    const Scalar cap = std::max(Scalar(0), magnitude - Scalar(std::sqrt(2.0)));
    const Scalar scale = (maxnorm > Scalar(0)) ? cap / maxnorm : Scalar(0);
    dx *= scale;
    dy *= scale;

    const Eigen::Index h = mask.rows(), w = mask.cols();
    MaskT<Scalar> out(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
            // bilinear interpolation of the control grid over the image domain
            const Scalar gy = (h > 1) ? Scalar(y) / Scalar(h - 1) * Scalar(kGrid) : Scalar(0);
            const Scalar gx = (w > 1) ? Scalar(x) / Scalar(w - 1) * Scalar(kGrid) : Scalar(0);
            const int r0 = std::min(static_cast<int>(gy), kGrid - 1);
            const int c0 = std::min(static_cast<int>(gx), kGrid - 1);
            const Scalar fy = gy - Scalar(r0), fx = gx - Scalar(c0);
            auto lerp2 = [&](const Eigen::Matrix<Scalar, g, g>& f) {
                return (Scalar(1) - fy) * ((Scalar(1) - fx) * f(r0, c0) + fx * f(r0, c0 + 1)) +
                       fy * ((Scalar(1) - fx) * f(r0 + 1, c0) + fx * f(r0 + 1, c0 + 1));
            };
            const Scalar sx = Scalar(x) + lerp2(dx);
            const Scalar sy = Scalar(y) + lerp2(dy);
            // outside the image the mask is zero
            if (sx < Scalar(0) || sy < Scalar(0) || sx > Scalar(w - 1) || sy > Scalar(h - 1)) {
                out(y, x) = Scalar(0);
            } else {
                out(y, x) = bilinear_sample(mask, sx, sy);
            }
        }
    return out;
}

/// 16x16 block average down to (H/16) x (W/16).
template <class Scalar>
MaskT<Scalar> downsample_16(const MaskT<Scalar>& mask) {
    const Eigen::Index h = mask.rows(), w = mask.cols();
    if (h % 16 != 0 || w % 16 != 0)
        throw std::invalid_argument("downsample_16: dims " + std::to_string(h) + "x" +
                                    std::to_string(w) + " not divisible by 16");
    MaskT<Scalar> out(h / 16, w / 16);
    for (Eigen::Index by = 0; by < h / 16; ++by)
        for (Eigen::Index bx = 0; bx < w / 16; ++bx)
            out(by, bx) = mask.block(by * 16, bx * 16, 16, 16).mean();
    return out;
}

}  // namespace advforge
