#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "advforge/image.hpp"

namespace advforge {

inline constexpr int kNumLandmarks = 68;

/// 68 named 2-D keypoints, row i = (x, y) in pixels, sub-pixel precision.
template <class Scalar>
using LandmarkSetT = Eigen::Matrix<Scalar, kNumLandmarks, 2>;

using LandmarkSet = LandmarkSetT<double>;

/// Base facial parts addressable by the region vocabulary.
enum class FacePart { LeftEye = 0, RightEye = 1, Nose = 2, Mouth = 3 };

/// Landmark index subsets per part (68-point convention: nose bridge+base
/// 27..35, left eye 36..41, right eye 42..47, mouth 48..67). "Left"/"right"
/// are image-frame. Declared once; the toy-face generator emits landmarks
/// matching these subsets.
inline const std::vector<int>& part_landmark_indices(FacePart part) {
    static const std::vector<int> left_eye = {36, 37, 38, 39, 40, 41};
    static const std::vector<int> right_eye = {42, 43, 44, 45, 46, 47};
    static const std::vector<int> nose = {27, 28, 29, 30, 31, 32, 33, 34, 35};
    static const std::vector<int> mouth = {48, 49, 50, 51, 52, 53, 54, 55, 56, 57,
                                           58, 59, 60, 61, 62, 63, 64, 65, 66, 67};
    switch (part) {
        case FacePart::LeftEye: return left_eye;
        case FacePart::RightEye: return right_eye;
        case FacePart::Nose: return nose;
        case FacePart::Mouth: return mouth;
    }
    throw std::invalid_argument("part_landmark_indices: bad part");
}

inline constexpr int kNumRegions = 10;

/// Region index -> set of base parts. Single parts 0..3, then the fixed
/// combination table 4..9.
inline const std::vector<FacePart>& region_parts(int region) {
    static const std::array<std::vector<FacePart>, kNumRegions> table = {{
        {FacePart::LeftEye},
        {FacePart::RightEye},
        {FacePart::Nose},
        {FacePart::Mouth},
        {FacePart::LeftEye, FacePart::RightEye},
        {FacePart::LeftEye, FacePart::Nose},
        {FacePart::RightEye, FacePart::Nose},
        {FacePart::Nose, FacePart::Mouth},
        {FacePart::LeftEye, FacePart::RightEye, FacePart::Nose},
        {FacePart::LeftEye, FacePart::RightEye, FacePart::Nose, FacePart::Mouth},
    }};
    if (region < 0 || region >= kNumRegions)
        throw std::invalid_argument("region_parts: region index " + std::to_string(region) +
                                    " outside {0..9}");
    return table[static_cast<std::size_t>(region)];
}

template <class Scalar>
void validate_landmarks(const LandmarkSetT<Scalar>& lm, Eigen::Index h, Eigen::Index w,
                        Scalar margin = Scalar(0)) {
    for (int i = 0; i < kNumLandmarks; ++i) {
        const Scalar x = lm(i, 0), y = lm(i, 1);
        if (!std::isfinite(x) || !std::isfinite(y) || x < margin || y < margin ||
            x > Scalar(w - 1) - margin || y > Scalar(h - 1) - margin)
            throw std::invalid_argument("landmark " + std::to_string(i) + " at (" + std::to_string(x) +
                                        "," + std::to_string(y) + ") outside bounds " +
                                        std::to_string(w) + "x" + std::to_string(h));
    }
}

// --- convex hull -----------------------------------------------------------

template <class Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <class Scalar>
Scalar cross2(const Point2<Scalar>& o, const Point2<Scalar>& a, const Point2<Scalar>& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Monotone-chain convex hull, CCW, no duplicate endpoint. Collinear input
/// collapses to fewer than 3 vertices.
template <class Scalar>
std::vector<Point2<Scalar>> convex_hull(std::vector<Point2<Scalar>> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2<Scalar>& a, const Point2<Scalar>& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point2<Scalar>& a, const Point2<Scalar>& b) {
                              return a.x() == b.x() && a.y() == b.y();
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Point2<Scalar>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

template <class Scalar>
bool point_in_convex_polygon(const Point2<Scalar>& p, const std::vector<Point2<Scalar>>& hull) {
    const std::size_t n = hull.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (cross2(hull[i], hull[(i + 1) % n], p) < 0) return false;  // CCW: inside is left
    }
    return true;
}

template <class Scalar>
Scalar point_segment_distance(const Point2<Scalar>& p, const Point2<Scalar>& a,
                              const Point2<Scalar>& b) {
    const Point2<Scalar> ab = b - a;
    const Scalar len2 = ab.squaredNorm();
    if (len2 == Scalar(0)) return (p - a).norm();
    Scalar t = (p - a).dot(ab) / len2;
    t = std::clamp(t, Scalar(0), Scalar(1));
    return (p - (a + t * ab)).norm();
}

/// 0 inside, else min distance to the boundary.
template <class Scalar>
Scalar point_polygon_distance(const Point2<Scalar>& p, const std::vector<Point2<Scalar>>& hull) {
    if (point_in_convex_polygon(p, hull)) return Scalar(0);
    Scalar best = std::numeric_limits<Scalar>::max();
    const std::size_t n = hull.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, point_segment_distance(p, hull[i], hull[(i + 1) % n]));
    return best;
}

// --- region rasterization ---------------------------------------------------

/// Fallback disc radius when a part's landmarks are degenerate (collinear or
/// coincident).
inline constexpr double kDegenerateDiscRadius = 3.0;

template <class Scalar>
struct RegionMaskT {
    MaskT<Scalar> mask;
    bool used_fallback = false;  // any part fell back to the centroid disc
};

using RegionMask = RegionMaskT<double>;

/// Binary mask of the region: union over parts of the convex hull of that
/// part's landmarks dilated by `dilation` px (Euclidean). Pixel (y, x) is lit
/// iff its center lies within `dilation` of the hull.
template <class Scalar>
RegionMaskT<Scalar> rasterize_region(const LandmarkSetT<Scalar>& lm, int region, Eigen::Index h,
                                     Eigen::Index w, Scalar dilation) {
    if (dilation < Scalar(0)) throw std::invalid_argument("rasterize_region: dilation must be >= 0");
    RegionMaskT<Scalar> out;
    out.mask = MaskT<Scalar>::Zero(h, w);
    for (FacePart part : region_parts(region)) {
        std::vector<Point2<Scalar>> pts;
        for (int idx : part_landmark_indices(part)) pts.push_back(Point2<Scalar>(lm(idx, 0), lm(idx, 1)));
        const auto hull = convex_hull(pts);
        if (hull.size() < 3) {
            // Degenerate part: disc of declared radius around the centroid.
            Point2<Scalar> c = Point2<Scalar>::Zero();
            for (const auto& p : pts) c += p;
            c /= Scalar(pts.size());
            const Scalar r = Scalar(kDegenerateDiscRadius);
            const Eigen::Index y0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(c.y() - r)));
            const Eigen::Index y1 = std::min<Eigen::Index>(h - 1, static_cast<Eigen::Index>(std::ceil(c.y() + r)));
            const Eigen::Index x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(c.x() - r)));
            const Eigen::Index x1 = std::min<Eigen::Index>(w - 1, static_cast<Eigen::Index>(std::ceil(c.x() + r)));
            for (Eigen::Index y = y0; y <= y1; ++y)
                for (Eigen::Index x = x0; x <= x1; ++x)
                    if ((Point2<Scalar>(Scalar(x), Scalar(y)) - c).norm() <= r) out.mask(y, x) = Scalar(1);
            out.used_fallback = true;
            continue;
        }
        Scalar minx = hull[0].x(), maxx = hull[0].x(), miny = hull[0].y(), maxy = hull[0].y();
        for (const auto& p : hull) {
            minx = std::min(minx, p.x()); maxx = std::max(maxx, p.x());
            miny = std::min(miny, p.y()); maxy = std::max(maxy, p.y());
        }
        const Eigen::Index y0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(miny - dilation)));
        const Eigen::Index y1 = std::min<Eigen::Index>(h - 1, static_cast<Eigen::Index>(std::ceil(maxy + dilation)));
        const Eigen::Index x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(minx - dilation)));
        const Eigen::Index x1 = std::min<Eigen::Index>(w - 1, static_cast<Eigen::Index>(std::ceil(maxx + dilation)));
        for (Eigen::Index y = y0; y <= y1; ++y)
            for (Eigen::Index x = x0; x <= x1; ++x)
                if (point_polygon_distance(Point2<Scalar>(Scalar(x), Scalar(y)), hull) <= dilation)
                    out.mask(y, x) = Scalar(1);
    }
    return out;
}

// --- similarity alignment ---------------------------------------------------

/// p -> scale * R(rotation) * p + (tx, ty).
template <class Scalar>
struct SimilarityTransformT {
    Scalar scale = Scalar(1);
    Scalar rotation = Scalar(0);  // radians
    Scalar tx = Scalar(0), ty = Scalar(0);

    Point2<Scalar> apply(const Point2<Scalar>& p) const {
        const Scalar c = std::cos(rotation) * scale, s = std::sin(rotation) * scale;
        return Point2<Scalar>(c * p.x() - s * p.y() + tx, s * p.x() + c * p.y() + ty);
    }

    SimilarityTransformT inverse() const {
        SimilarityTransformT inv;
        inv.scale = Scalar(1) / scale;
        inv.rotation = -rotation;
        const Point2<Scalar> t0 = inv.apply(Point2<Scalar>(-tx, -ty));
        inv.tx = t0.x();
        inv.ty = t0.y();
        return inv;
    }
};

using SimilarityTransform = SimilarityTransformT<double>;

/// Least-squares similarity (uniform scale + rotation + translation, no
/// reflection) minimizing sum ||T(src_i) - dst_i||^2. Closed form via the
/// complex-regression identity: a+ib = sum(conj(x) y) / sum|x|^2 on centered
/// coordinates.
template <class Scalar, int N>
SimilarityTransformT<Scalar> estimate_alignment(const Eigen::Matrix<Scalar, N, 2>& src,
                                                const Eigen::Matrix<Scalar, N, 2>& dst) {
    if (src.rows() != dst.rows() || src.rows() < 2)
        throw std::invalid_argument("estimate_alignment: need >= 2 corresponding points");
    const Eigen::Matrix<Scalar, 1, 2> sc = src.colwise().mean();
    const Eigen::Matrix<Scalar, 1, 2> dc = dst.colwise().mean();
    Scalar denom = 0, a = 0, b = 0;
    for (Eigen::Index i = 0; i < src.rows(); ++i) {
        const Scalar xs = src(i, 0) - sc(0), ys = src(i, 1) - sc(1);
        const Scalar xd = dst(i, 0) - dc(0), yd = dst(i, 1) - dc(1);
        denom += xs * xs + ys * ys;
        a += xs * xd + ys * yd;   // Re(conj(x) y)
        b += xs * yd - ys * xd;   // Im(conj(x) y)
    }
    if (denom <= Scalar(0))
        throw std::invalid_argument("estimate_alignment: all source points identical");
    a /= denom;
    b /= denom;
    SimilarityTransformT<Scalar> t;
    t.scale = std::sqrt(a * a + b * b);
    if (t.scale < Scalar(1e-12))
        throw std::invalid_argument("estimate_alignment: degenerate (zero-scale) solution");
    t.rotation = std::atan2(b, a);
    const Scalar c = a, s = b;  // c,s already include scale
    t.tx = dc(0) - (c * sc(0) - s * sc(1));
    t.ty = dc(1) - (s * sc(0) + c * sc(1));
    return t;
}

// --- image warping ----------------------------------------------------------

/// Bilinear sample with clamp-to-edge.
template <class Scalar>
Scalar bilinear_sample(const PlaneT<Scalar>& p, Scalar x, Scalar y) {
    const Eigen::Index h = p.rows(), w = p.cols();
    x = std::clamp(x, Scalar(0), Scalar(w - 1));
    y = std::clamp(y, Scalar(0), Scalar(h - 1));
    const Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(x));
    const Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(y));
    const Eigen::Index x1 = std::min(x0 + 1, w - 1);
    const Eigen::Index y1 = std::min(y0 + 1, h - 1);
    const Scalar fx = x - Scalar(x0), fy = y - Scalar(y0);
    const Scalar top = (Scalar(1) - fx) * p(y0, x0) + fx * p(y0, x1);
    const Scalar bot = (Scalar(1) - fx) * p(y1, x0) + fx * p(y1, x1);
    return (Scalar(1) - fy) * top + fy * bot;
}

/// Resample img under t: out(q) = img(t^{-1}(q)), bilinear, edge-replicated.
template <class Scalar>
ImageT<Scalar> warp_image(const ImageT<Scalar>& img, const SimilarityTransformT<Scalar>& t) {
    const auto inv = t.inverse();
    ImageT<Scalar> out(img.rows(), img.cols());
    for (Eigen::Index y = 0; y < img.rows(); ++y)
        for (Eigen::Index x = 0; x < img.cols(); ++x) {
            const auto s = inv.apply(Point2<Scalar>(Scalar(x), Scalar(y)));
            for (int c = 0; c < 3; ++c) out.ch[c](y, x) = bilinear_sample(img.ch[c], s.x(), s.y());
        }
    return out;
}

template <class Scalar>
LandmarkSetT<Scalar> transform_landmarks(const LandmarkSetT<Scalar>& lm,
                                         const SimilarityTransformT<Scalar>& t) {
    LandmarkSetT<Scalar> out;
    for (int i = 0; i < kNumLandmarks; ++i) {
        const auto p = t.apply(Point2<Scalar>(lm(i, 0), lm(i, 1)));
        out(i, 0) = p.x();
        out(i, 1) = p.y();
    }
    return out;
}

}  // namespace advforge
