#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "advforge/blending.hpp"
#include "advforge/geometry.hpp"
#include "advforge/image.hpp"
#include "advforge/mask_ops.hpp"
#include "advforge/rng.hpp"

namespace advforge {

enum class BlendType : int { Alpha = 0, Poisson = 1, Mixup = 2, DoNothing = 3 };

inline constexpr int kNumBlendTypes = 4;

inline const char* blend_name(BlendType t) {
    switch (t) {
        case BlendType::Alpha: return "alpha";
        case BlendType::Poisson: return "poisson";
        case BlendType::Mixup: return "mixup";
        case BlendType::DoNothing: return "none";
    }
    return "?";
}

inline BlendType blend_from_name(const std::string& s) {
    if (s == "alpha") return BlendType::Alpha;
    if (s == "poisson") return BlendType::Poisson;
    if (s == "mixup") return BlendType::Mixup;
    if (s == "none") return BlendType::DoNothing;
    throw std::invalid_argument("unknown blend type '" + s + "' (alpha|poisson|mixup|none)");
}

/// One sampled configuration plus the log-probabilities its sampling carried
/// (log p_region[region], log p_type[blend], and the ratio log-density when
/// blend is mixup, else 0).
struct ForgeryConfig {
    int region = 0;
    BlendType blend = BlendType::Alpha;
    double ratio = 0.0;  // only meaningful for mixup
    double logp_region = 0.0;
    double logp_type = 0.0;
    double logp_ratio = 0.0;
};

/// Knobs of the mask pipeline; defaults are tuned for 64x64 and scale with H.
struct SynthesisOptions {
    double dilation = 4.0;          // hull dilation at 64x64
    double deform_magnitude = 4.0;  // at 64x64
    bool scale_with_size = true;    // multiply the two above by H/64

    double dilation_for(Eigen::Index h) const {
        return scale_with_size ? dilation * static_cast<double>(h) / 64.0 : dilation;
    }
    double deform_for(Eigen::Index h) const {
        return scale_with_size ? deform_magnitude * static_cast<double>(h) / 64.0 : deform_magnitude;
    }
};

template <class Scalar>
struct SynthesisResult {
    ImageT<Scalar> image;
    MaskT<Scalar> mask;  // the deformed final mask actually used
};

/// Render the forgery: rasterize the region on the pristine's landmarks,
/// deform + blur to get M_d, then blend. Alpha/Poisson first align the
/// reference onto the pristine frame and color-transfer it inside the mask;
/// mixup consumes the raw reference. If the mask support vanishes (possible
/// after deformation of a tiny region) the pristine is returned unchanged.
template <class Scalar>
SynthesisResult<Scalar> synthesize(const ImageT<Scalar>& ip, const LandmarkSetT<Scalar>& lm_p,
                                   const ImageT<Scalar>& if_, const LandmarkSetT<Scalar>& lm_f,
                                   const ForgeryConfig& cfg, Rng& rng,
                                   const SynthesisOptions& opt = {}) {
    if (cfg.blend == BlendType::DoNothing)
        throw std::invalid_argument("synthesize: do-nothing config; route the pristine unchanged");
    require_same_shape(ip, if_, "synthesize");
    const Eigen::Index h = ip.rows(), w = ip.cols();

    auto raster = rasterize_region(lm_p, cfg.region, h, w, Scalar(opt.dilation_for(h)));
    MaskT<Scalar> md = deform_mask(raster.mask, rng, Scalar(opt.deform_for(h)));
    md = blur_mask(md, rng);

    SynthesisResult<Scalar> out;
    out.mask = md;
    if (cfg.blend == BlendType::Mixup) {
        out.image = mixup_blend(ip, if_, md, Scalar(cfg.ratio));
        return out;
    }

    if (md.sum() <= Scalar(0)) {  // vanished mask: nothing to blend
        out.image = ip;
        return out;
    }
    const auto t = estimate_alignment(lm_f, lm_p);
    ImageT<Scalar> ref = warp_image(if_, t);
    ref = color_transfer(ref, ip, md);

    if (cfg.blend == BlendType::Alpha) {
        out.image = alpha_blend(ip, ref, md);
        return out;
    }

    // Poisson: binarize at 0.5 and keep off the border ring (poisson_blend
    // treats border contact as an error; the pipeline trims instead).
    MaskT<Scalar> bin = MaskT<Scalar>::Zero(h, w);
    bool any = false;
    for (Eigen::Index y = 1; y + 1 < h; ++y)
        for (Eigen::Index x = 1; x + 1 < w; ++x)
            if (md(y, x) >= Scalar(0.5)) {
                bin(y, x) = Scalar(1);
                any = true;
            }
    if (!any) {
        out.image = ip;
        return out;
    }
    out.image = poisson_blend(ip, ref, bin);
    return out;
}

}  // namespace advforge
