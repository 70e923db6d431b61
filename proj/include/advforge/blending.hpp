#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "advforge/image.hpp"

namespace advforge {

/// Shift src's channel means to dst's, mask-weighted, applied wherever the
/// mask is positive; result clamped to [0,1], untouched outside the support.
template <class Scalar>
ImageT<Scalar> color_transfer(const ImageT<Scalar>& src, const ImageT<Scalar>& dst,
                              const MaskT<Scalar>& mask) {
    require_same_shape(src, dst, "color_transfer");
    if (mask.rows() != src.rows() || mask.cols() != src.cols())
        throw std::invalid_argument("color_transfer: mask shape mismatch");
    const Scalar wsum = mask.sum();
    if (wsum <= Scalar(0)) throw std::invalid_argument("color_transfer: empty mask support");
    ImageT<Scalar> out = src;
    for (int c = 0; c < 3; ++c) {
        const Scalar mean_src = (mask * src.ch[c]).sum() / wsum;
        const Scalar mean_dst = (mask * dst.ch[c]).sum() / wsum;
        const Scalar shift = mean_dst - mean_src;
        out.ch[c] = (mask > Scalar(0))
                        .select((src.ch[c] + shift).cwiseMax(Scalar(0)).cwiseMin(Scalar(1)),
                                src.ch[c]);
    }
    return out;
}

/// out = md * if + (1 - md) * ip, per channel.
template <class Scalar>
ImageT<Scalar> alpha_blend(const ImageT<Scalar>& ip, const ImageT<Scalar>& if_,
                           const MaskT<Scalar>& md) {
    require_same_shape(ip, if_, "alpha_blend");
    ImageT<Scalar> out(ip.rows(), ip.cols());
    for (int c = 0; c < 3; ++c) out.ch[c] = md * if_.ch[c] + (Scalar(1) - md) * ip.ch[c];
    return out;
}

/// I_a = ag * md * (if - ip) + ip, per channel (mixup).
template <class Scalar>
ImageT<Scalar> mixup_blend(const ImageT<Scalar>& ip, const ImageT<Scalar>& if_,
                           const MaskT<Scalar>& md, Scalar ag) {
    if (!(ag >= Scalar(0) && ag <= Scalar(1)))
        throw std::invalid_argument("mixup_blend: ratio " + std::to_string(ag) + " outside [0,1]");
    require_same_shape(ip, if_, "mixup_blend");
    ImageT<Scalar> out(ip.rows(), ip.cols());
    for (int c = 0; c < 3; ++c) out.ch[c] = ag * md * (if_.ch[c] - ip.ch[c]) + ip.ch[c];
    return out;
}

namespace detail {

/// 5-point Dirichlet Poisson system on the interior pixel set, matrix-free CG.
/// Solves A u = b with A = 4 I - adjacency (SPD). Returns the infinity-norm
/// residual reached.
template <class Scalar>
Scalar poisson_cg(const std::vector<Eigen::Index>& interior_ys,
                  const std::vector<Eigen::Index>& interior_xs,
                  const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& index,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                  Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u, Scalar tol, long max_iter) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = b.size();
    auto apply_A = [&](const Vec& x, Vec& out) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index y = interior_ys[static_cast<std::size_t>(i)];
            const Eigen::Index x0 = interior_xs[static_cast<std::size_t>(i)];
            Scalar acc = Scalar(4) * x[i];
            const int up = index(y - 1, x0), dn = index(y + 1, x0);
            const int lf = index(y, x0 - 1), rt = index(y, x0 + 1);
            if (up >= 0) acc -= x[up];
            if (dn >= 0) acc -= x[dn];
            if (lf >= 0) acc -= x[lf];
            if (rt >= 0) acc -= x[rt];
            out[i] = acc;
        }
    };
    Vec r(n), p(n), Ap(n);
    apply_A(u, Ap);
    r = b - Ap;
    p = r;
    Scalar rs = r.squaredNorm();
    for (long it = 0; it < max_iter; ++it) {
        if (r.template lpNorm<Eigen::Infinity>() <= tol) break;
        apply_A(p, Ap);
        const Scalar denom = p.dot(Ap);
        if (denom <= Scalar(0)) break;  // numerically exhausted
        const Scalar alpha = rs / denom;
        u += alpha * p;
        r -= alpha * Ap;
        const Scalar rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    return r.template lpNorm<Eigen::Infinity>();
}

}  // namespace detail

/// Gradient-domain compositing (seamless cloning): per channel solve
/// lap(u) = lap(if) on the interior {mask >= 0.5} with u = ip on the boundary,
/// then paste u over ip and clamp to [0,1]. The interior must be nonempty and
/// must not touch the image border.
template <class Scalar>
ImageT<Scalar> poisson_blend(const ImageT<Scalar>& ip, const ImageT<Scalar>& if_,
                             const MaskT<Scalar>& mask_bin) {
    require_same_shape(ip, if_, "poisson_blend");
    const Eigen::Index h = ip.rows(), w = ip.cols();
    if (mask_bin.rows() != h || mask_bin.cols() != w)
        throw std::invalid_argument("poisson_blend: mask shape mismatch");

    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> index(h, w);
    index.setConstant(-1);
    std::vector<Eigen::Index> ys, xs;
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x)
            if (mask_bin(y, x) >= Scalar(0.5)) {
                if (y == 0 || y == h - 1 || x == 0 || x == w - 1)
                    throw std::invalid_argument("poisson_blend: interior touches image border at (" +
                                                std::to_string(x) + "," + std::to_string(y) + ")");
                index(y, x) = static_cast<int>(ys.size());
                ys.push_back(y);
                xs.push_back(x);
            }
    const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
    if (n == 0) throw std::invalid_argument("poisson_blend: empty interior");

    const Scalar cg_tol = Scalar(1e-8);
    const Scalar residual_limit = Scalar(1e-6);
    const long max_iter = 10 * static_cast<long>(n);

    ImageT<Scalar> out = ip;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    for (int c = 0; c < 3; ++c) {
        const PlaneT<Scalar>& f = if_.ch[c];
        const PlaneT<Scalar>& g = ip.ch[c];
        Vec b(n), u(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index y = ys[static_cast<std::size_t>(i)], x = xs[static_cast<std::size_t>(i)];
            // -lap(if) at the interior pixel ...
            Scalar rhs = Scalar(4) * f(y, x) - f(y - 1, x) - f(y + 1, x) - f(y, x - 1) - f(y, x + 1);
            // ... plus Dirichlet terms from boundary neighbors
            if (index(y - 1, x) < 0) rhs += g(y - 1, x);
            if (index(y + 1, x) < 0) rhs += g(y + 1, x);
            if (index(y, x - 1) < 0) rhs += g(y, x - 1);
            if (index(y, x + 1) < 0) rhs += g(y, x + 1);
            b[i] = rhs;
            u[i] = f(y, x);  // warm start at the source values
        }
        const Scalar res = detail::poisson_cg<Scalar>(ys, xs, index, b, u, cg_tol, max_iter);
        if (!(res < residual_limit))
            throw std::runtime_error("poisson_blend: CG did not converge, residual " +
                                     std::to_string(static_cast<double>(res)));
        for (Eigen::Index i = 0; i < n; ++i)
            out.ch[c](ys[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i)]) =
                std::clamp(u[i], Scalar(0), Scalar(1));
    }
    return out;
}

}  // namespace advforge
