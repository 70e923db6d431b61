#include "advforge/toy_face.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "advforge/manifest.hpp"
#include "advforge/png_io.hpp"

namespace advforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Anti-aliased ellipse composite: coverage falls off linearly over ~1 px
/// around the implicit boundary.
void draw_ellipse(Image& img, double cx, double cy, double rx, double ry,
                  const std::array<double, 3>& color) {
    const Eigen::Index h = img.rows(), w = img.cols();
    const Eigen::Index y0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(cy - ry - 2)));
    const Eigen::Index y1 = std::min<Eigen::Index>(h - 1, static_cast<Eigen::Index>(std::ceil(cy + ry + 2)));
    const Eigen::Index x0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(cx - rx - 2)));
    const Eigen::Index x1 = std::min<Eigen::Index>(w - 1, static_cast<Eigen::Index>(std::ceil(cx + rx + 2)));
    const double rmin = std::min(rx, ry);
    for (Eigen::Index y = y0; y <= y1; ++y)
        for (Eigen::Index x = x0; x <= x1; ++x) {
            const double nx = (static_cast<double>(x) - cx) / rx;
            const double ny = (static_cast<double>(y) - cy) / ry;
            const double d = (std::sqrt(nx * nx + ny * ny) - 1.0) * rmin;  // approx signed dist
            const double cov = std::clamp(0.5 - d, 0.0, 1.0);
            if (cov <= 0) continue;
            for (int c = 0; c < 3; ++c)
                img.ch[c](y, x) = cov * color[static_cast<std::size_t>(c)] + (1.0 - cov) * img.ch[c](y, x);
        }
}

double hash_noise(std::uint64_t seed, Eigen::Index y, Eigen::Index x, int c) {
    std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(y) + 1,
                               static_cast<std::uint64_t>(x) + 1, static_cast<std::uint64_t>(c) + 1);
    return (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53) * 2.0 - 1.0;  // [-1, 1)
}

}  // namespace

ToyFaceSpec ToyFaceSpec::random(Rng& rng, int h, int w) {
    ToyFaceSpec s;
    s.height = h;
    s.width = w;
    s.noise_seed = rng.next_u64();
    const double W = w, H = h;

    for (int c = 0; c < 3; ++c) {
        s.bg_base[static_cast<std::size_t>(c)] = rng.uniform(0.25, 0.55);
        s.bg_amp[static_cast<std::size_t>(c)] = rng.uniform(0.02, 0.08);
    }
    s.bg_ux = rng.uniform(0.5, 2.5);
    s.bg_uy = rng.uniform(0.5, 2.5);
    s.bg_phase = rng.uniform(0.0, 2.0 * kPi);
    s.checker_amp = 0.05;  // constant across faces: the pristine response is flat
    s.checker_sign = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    s.noise_amp = rng.uniform(0.015, 0.025);

    s.face_cx = 0.5 * W + rng.uniform(-0.02, 0.02) * W;
    s.face_cy = 0.5 * H + rng.uniform(0.0, 0.02) * H;
    s.face_rx = rng.uniform(0.32, 0.38) * W;
    s.face_ry = rng.uniform(0.34, 0.40) * H;
    s.face_color = {rng.uniform(0.62, 0.88), rng.uniform(0.46, 0.70), rng.uniform(0.36, 0.60)};
    s.tex_amp = rng.uniform(0.05, 0.11);
    {
        const double angle = rng.uniform(0.0, kPi);
        const double freq = rng.uniform(3.0, 8.0);
        s.tex_ux = freq * std::cos(angle);
        s.tex_uy = freq * std::sin(angle);
        s.tex_phase = rng.uniform(0.0, 2.0 * kPi);
    }
    s.tex2_amp = rng.uniform(0.03, 0.07);
    {
        const double angle = rng.uniform(0.0, kPi);
        const double freq = rng.uniform(8.0, 16.0);
        s.tex2_ux = freq * std::cos(angle);
        s.tex2_uy = freq * std::sin(angle);
        s.tex2_phase = rng.uniform(0.0, 2.0 * kPi);
    }

    s.eye_dx = rng.uniform(0.155, 0.195) * W;
    s.eye_cy = s.face_cy - rng.uniform(0.13, 0.17) * H;
    s.eye_rx = rng.uniform(0.085, 0.105) * W;
    s.eye_ry = rng.uniform(0.055, 0.072) * H;
    s.sclera_color = {rng.uniform(0.78, 0.97), rng.uniform(0.78, 0.97), rng.uniform(0.78, 0.97)};
    s.pupil_frac = rng.uniform(0.3, 0.6);
    s.pupil_color = {rng.uniform(0.02, 0.45), rng.uniform(0.02, 0.5), rng.uniform(0.05, 0.65)};

    s.brow_dy = rng.uniform(0.075, 0.1) * H;
    s.brow_thickness = rng.uniform(0.012, 0.022) * H;
    s.brow_color = {rng.uniform(0.1, 0.3), rng.uniform(0.08, 0.22), rng.uniform(0.05, 0.18)};

    s.nose_cx = s.face_cx + rng.uniform(-0.012, 0.012) * W;
    s.nose_top_y = s.eye_cy + rng.uniform(0.03, 0.05) * H;
    s.nose_base_y = s.face_cy + rng.uniform(0.07, 0.11) * H;
    s.nose_half_w = rng.uniform(0.055, 0.075) * W;
    s.nose_color = {s.face_color[0] * 0.88, s.face_color[1] * 0.86, s.face_color[2] * 0.84};

    s.mouth_cx = s.face_cx + rng.uniform(-0.012, 0.012) * W;
    s.mouth_cy = s.face_cy + rng.uniform(0.21, 0.26) * H;
    s.mouth_rx = rng.uniform(0.135, 0.17) * W;
    s.mouth_ry = rng.uniform(0.05, 0.068) * H;
    s.mouth_color = {rng.uniform(0.45, 0.85), rng.uniform(0.1, 0.38), rng.uniform(0.12, 0.42)};
    s.lip_inner_color = {s.mouth_color[0] * 0.6, s.mouth_color[1] * 0.6, s.mouth_color[2] * 0.6};
    return s;
}

ToyFace generate_toy_face(const ToyFaceSpec& s) {
    const int h = s.height, w = s.width;
    if (h < 32 || w < 32) throw std::invalid_argument("generate_toy_face: canvas must be >= 32x32");
    auto in_canvas = [&](double cx, double cy, double rx, double ry) {
        return cx - rx >= 1.0 && cx + rx <= w - 2.0 && cy - ry >= 1.0 && cy + ry <= h - 2.0;
    };
    if (!in_canvas(s.face_cx, s.face_cy, s.face_rx, s.face_ry))
        throw std::invalid_argument("generate_toy_face: face ellipse outside canvas");
    if (!in_canvas(s.mouth_cx, s.mouth_cy, s.mouth_rx, s.mouth_ry))
        throw std::invalid_argument("generate_toy_face: mouth outside canvas");
    if (!in_canvas(s.face_cx - s.eye_dx, s.eye_cy, s.eye_rx, s.eye_ry) ||
        !in_canvas(s.face_cx + s.eye_dx, s.eye_cy, s.eye_rx, s.eye_ry))
        throw std::invalid_argument("generate_toy_face: eye outside canvas");

    ToyFace out;
    out.image = Image(h, w);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double wave =
                    std::sin(2.0 * kPi * (s.bg_ux * x + s.bg_uy * y) / static_cast<double>(w) +
                             s.bg_phase + 1.7 * c);
                double v = s.bg_base[static_cast<std::size_t>(c)] +
                           s.bg_amp[static_cast<std::size_t>(c)] * wave;
                out.image.ch[c](y, x) = std::clamp(v, 0.0, 1.0);
            }
    }

    draw_ellipse(out.image, s.face_cx, s.face_cy, s.face_rx, s.face_ry, s.face_color);

    // identity weave over the skin; amplitude tapers with the face coverage
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double nx = (x - s.face_cx) / s.face_rx;
            const double ny = (y - s.face_cy) / s.face_ry;
            const double d = (std::sqrt(nx * nx + ny * ny) - 1.0) * std::min(s.face_rx, s.face_ry);
            const double cov = std::clamp(0.5 - d, 0.0, 1.0);
            if (cov <= 0) continue;
            const double u = static_cast<double>(x) / w, v = static_cast<double>(y) / h;
            const double weave =
                s.tex_amp * std::sin(2.0 * kPi * (s.tex_ux * u + s.tex_uy * v) + s.tex_phase) +
                s.tex2_amp * std::sin(2.0 * kPi * (s.tex2_ux * u + s.tex2_uy * v) + s.tex2_phase);
            for (int c = 0; c < 3; ++c) {
                const double scale = c == 0 ? 1.0 : (c == 1 ? 0.8 : 0.6);  // warm-toned weave
                out.image.ch[c](y, x) =
                    std::clamp(out.image.ch[c](y, x) + cov * scale * weave, 0.0, 1.0);
            }
        }

    const double exl = s.face_cx - s.eye_dx, exr = s.face_cx + s.eye_dx;
    // brows
    draw_ellipse(out.image, exl, s.eye_cy - s.brow_dy, s.eye_rx * 1.15, s.brow_thickness, s.brow_color);
    draw_ellipse(out.image, exr, s.eye_cy - s.brow_dy, s.eye_rx * 1.15, s.brow_thickness, s.brow_color);
    // eyes
    draw_ellipse(out.image, exl, s.eye_cy, s.eye_rx, s.eye_ry, s.sclera_color);
    draw_ellipse(out.image, exr, s.eye_cy, s.eye_rx, s.eye_ry, s.sclera_color);
    draw_ellipse(out.image, exl, s.eye_cy, s.eye_rx * s.pupil_frac, s.eye_ry * s.pupil_frac, s.pupil_color);
    draw_ellipse(out.image, exr, s.eye_cy, s.eye_rx * s.pupil_frac, s.eye_ry * s.pupil_frac, s.pupil_color);
    // nose: bridge + base
    const double nose_mid = 0.5 * (s.nose_top_y + s.nose_base_y);
    draw_ellipse(out.image, s.nose_cx, nose_mid, s.nose_half_w * 0.45,
                 0.5 * (s.nose_base_y - s.nose_top_y), s.nose_color);
    draw_ellipse(out.image, s.nose_cx, s.nose_base_y - 0.3 * s.nose_half_w, s.nose_half_w,
                 0.55 * s.nose_half_w, s.nose_color);
    // mouth
    draw_ellipse(out.image, s.mouth_cx, s.mouth_cy, s.mouth_rx, s.mouth_ry, s.mouth_color);
    draw_ellipse(out.image, s.mouth_cx, s.mouth_cy, s.mouth_rx * 0.55, s.mouth_ry * 0.45,
                 s.lip_inner_color);

    // ---- landmarks ----
    LandmarkSet& lm = out.landmarks;
    // jaw 0..16 on the lower face arc, image-left to image-right
    for (int i = 0; i <= 16; ++i) {
        const double t = kPi * (0.92 - 0.84 * static_cast<double>(i) / 16.0);
        lm(i, 0) = s.face_cx + s.face_rx * std::cos(t);
        lm(i, 1) = s.face_cy + s.face_ry * std::sin(t);
    }
    // brows 17..21 (left), 22..26 (right), outer to inner
    for (int i = 0; i < 5; ++i) {
        const double f = static_cast<double>(i) / 4.0;  // 0..1
        const double arc = -1.0 * std::sin(f * kPi);    // slight arch up
        lm(17 + i, 0) = exl - s.eye_rx * 1.1 + 2.2 * s.eye_rx * 1.1 * f;
        lm(17 + i, 1) = s.eye_cy - s.brow_dy + arc;
        lm(22 + i, 0) = exr - s.eye_rx * 1.1 + 2.2 * s.eye_rx * 1.1 * f;
        lm(22 + i, 1) = s.eye_cy - s.brow_dy + arc;
    }
    // nose bridge 27..30
    for (int i = 0; i < 4; ++i) {
        const double f = static_cast<double>(i) / 3.0;
        lm(27 + i, 0) = s.nose_cx;
        lm(27 + i, 1) = s.nose_top_y + f * (s.nose_base_y - s.nose_top_y - s.nose_half_w * 0.6);
    }
    // nose base 31..35, left to right with a shallow V
    for (int i = 0; i < 5; ++i) {
        const double f = static_cast<double>(i) / 4.0;
        lm(31 + i, 0) = s.nose_cx - s.nose_half_w * 0.92 + 2.0 * 0.92 * s.nose_half_w * f;
        lm(31 + i, 1) = s.nose_base_y - 0.25 * s.nose_half_w * std::abs(f - 0.5) * 2.0;
    }
    // eyes 36..41 (left), 42..47 (right): hexagon at 0.9 scale
    static const double eye_angles[6] = {180.0, 120.0, 60.0, 0.0, -60.0, -120.0};
    for (int i = 0; i < 6; ++i) {
        const double a = eye_angles[i] * kPi / 180.0;
        lm(36 + i, 0) = exl + 0.9 * s.eye_rx * std::cos(a);
        lm(36 + i, 1) = s.eye_cy - 0.9 * s.eye_ry * std::sin(a);
        lm(42 + i, 0) = exr + 0.9 * s.eye_rx * std::cos(a);
        lm(42 + i, 1) = s.eye_cy - 0.9 * s.eye_ry * std::sin(a);
    }
    // mouth outer 48..59 (12 pts), inner 60..67 (8 pts)
    for (int i = 0; i < 12; ++i) {
        const double a = kPi - 2.0 * kPi * static_cast<double>(i) / 12.0;  // start at left corner
        lm(48 + i, 0) = s.mouth_cx + 0.92 * s.mouth_rx * std::cos(a);
        lm(48 + i, 1) = s.mouth_cy - 0.92 * s.mouth_ry * std::sin(a);
    }
    for (int i = 0; i < 8; ++i) {
        const double a = kPi - 2.0 * kPi * static_cast<double>(i) / 8.0;
        lm(60 + i, 0) = s.mouth_cx + 0.5 * s.mouth_rx * std::cos(a);
        lm(60 + i, 1) = s.mouth_cy - 0.4 * s.mouth_ry * std::sin(a);
    }

    // grain goes on last, over everything: pristine faces carry an intact
    // sensor pattern, so any resampled patch stands out
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double parity = ((x + y) % 2 == 0) ? 1.0 : -1.0;
                const double grain = s.checker_sign * s.checker_amp * parity +
                                     s.noise_amp * hash_noise(s.noise_seed, y, x, c);
                // keep headroom so the pattern never clips away
                const double base = 0.08 + 0.84 * out.image.ch[c](y, x);
                out.image.ch[c](y, x) = std::clamp(base + grain, 0.0, 1.0);
            }

    validate_landmarks(lm, h, w, 1.0);
    return out;
}

std::string generate_toy_dataset(const std::string& out_dir, const ToyDatasetOptions& opt) {
    namespace fs = std::filesystem;
    if (opt.n_pristine <= 0 || opt.n_forgery <= 0)
        throw std::invalid_argument("generate_toy_dataset: counts must be positive");
    if (opt.size % 16 != 0)
        throw std::invalid_argument("generate_toy_dataset: size must be divisible by 16");
    if (opt.regions.empty() || opt.blends.empty())
        throw std::invalid_argument("generate_toy_dataset: empty region/blend pool");
    for (BlendType b : opt.blends)
        if (b == BlendType::DoNothing)
            throw std::invalid_argument("generate_toy_dataset: 'none' is not a forgery blend");

    fs::create_directories(fs::path(out_dir) / "images");
    fs::create_directories(fs::path(out_dir) / "landmarks");
    fs::create_directories(fs::path(out_dir) / "masks");

    DatasetManifest manifest;
    manifest.root_dir = out_dir;

    char name[64];
    for (int i = 0; i < opt.n_pristine; ++i) {
        Rng rng(mix_seed(opt.seed, 0x70u, static_cast<std::uint64_t>(i)));
        const auto face = generate_toy_face(ToyFaceSpec::random(rng, opt.size, opt.size));
        std::snprintf(name, sizeof(name), "pristine_%05d", i);
        const std::string img_rel = std::string("images/") + name + ".png";
        const std::string lm_rel = std::string("landmarks/") + name + ".txt";
        write_png_rgb((fs::path(out_dir) / img_rel).string(), face.image);
        write_landmarks((fs::path(out_dir) / lm_rel).string(), face.landmarks);
        manifest.records.push_back({img_rel, lm_rel, Category::Pristine, std::nullopt});
    }

    for (int i = 0; i < opt.n_forgery; ++i) {
        Rng rng(mix_seed(opt.seed, 0x66u, static_cast<std::uint64_t>(i)));
        // target identities are drawn from the pristine pool (as in face-swap
        // corpora, where source videos appear both clean and manipulated), so
        // identity features cannot separate the classes
        Rng target_rng(mix_seed(opt.seed, 0x70u, static_cast<std::uint64_t>(i % opt.n_pristine)));
        const auto target = generate_toy_face(ToyFaceSpec::random(target_rng, opt.size, opt.size));
        const auto donor = generate_toy_face(ToyFaceSpec::random(rng, opt.size, opt.size));
        ForgeryConfig cfg;
        cfg.region = opt.regions[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(opt.regions.size())))];
        cfg.blend = opt.blends[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(opt.blends.size())))];
        if (cfg.blend == BlendType::Mixup) cfg.ratio = rng.uniform(opt.ratio_min, opt.ratio_max);
        const auto result =
            synthesize(target.image, target.landmarks, donor.image, donor.landmarks, cfg, rng, opt.synth);
        std::snprintf(name, sizeof(name), "forgery_%05d", i);
        const std::string img_rel = std::string("images/") + name + ".png";
        const std::string lm_rel = std::string("landmarks/") + name + ".txt";
        const std::string mask_rel = std::string("masks/") + name + ".png";
        write_png_rgb((fs::path(out_dir) / img_rel).string(), result.image);
        write_landmarks((fs::path(out_dir) / lm_rel).string(), target.landmarks);
        write_png_gray((fs::path(out_dir) / mask_rel).string(), result.mask);
        manifest.records.push_back({img_rel, lm_rel, Category::DatasetForgery, mask_rel});
    }

    const std::string manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

}  // namespace advforge
