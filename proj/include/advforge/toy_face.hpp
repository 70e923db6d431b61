#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "advforge/geometry.hpp"
#include "advforge/image.hpp"
#include "advforge/rng.hpp"
#include "advforge/synth.hpp"

namespace advforge {

/// Fully explicit procedural face: ellipse face, two eyes with pupils, brows,
/// nose, mouth on a low-frequency textured background. All 68 landmarks are
/// derived from the same geometry, so they lie on the drawn features by
/// construction.
struct ToyFaceSpec {
    int height = 64, width = 64;
    std::uint64_t noise_seed = 0;

    std::array<double, 3> bg_base{};
    std::array<double, 3> bg_amp{};
    double bg_ux = 1, bg_uy = 1, bg_phase = 0;
    // sensor grain, applied after compositing: a fixed-amplitude Nyquist
    // checkerboard plus a little speckle. Resampling during splicing wipes the
    // checkerboard inside the patch -- the toy analogue of the demosaicing /
    // sensor-pattern traces real forgery detectors key on.
    double checker_amp = 0.05;
    double checker_sign = 1.0;
    double noise_amp = 0.02;

    double face_cx = 0, face_cy = 0, face_rx = 0, face_ry = 0;
    std::array<double, 3> face_color{};
    // identity skin texture: an oriented sinusoidal weave inside the face,
    // unique per face, so spliced patches carry a visible pattern mismatch
    double tex_amp = 0, tex_ux = 0, tex_uy = 0, tex_phase = 0;
    double tex2_amp = 0, tex2_ux = 0, tex2_uy = 0, tex2_phase = 0;

    double eye_dx = 0;  // eye center offset from face center
    double eye_cy = 0, eye_rx = 0, eye_ry = 0;
    std::array<double, 3> sclera_color{};
    double pupil_frac = 0.45;
    std::array<double, 3> pupil_color{};

    double brow_dy = 0, brow_thickness = 0;
    std::array<double, 3> brow_color{};

    double nose_cx = 0, nose_top_y = 0, nose_base_y = 0, nose_half_w = 0;
    std::array<double, 3> nose_color{};

    double mouth_cx = 0, mouth_cy = 0, mouth_rx = 0, mouth_ry = 0;
    std::array<double, 3> mouth_color{};
    std::array<double, 3> lip_inner_color{};

    /// Draw a spec with safe margins for an h x w canvas.
    static ToyFaceSpec random(Rng& rng, int h, int w);
};

struct ToyFace {
    Image image;
    LandmarkSet landmarks;
};

/// Render the face and emit its landmarks. Throws if any feature or landmark
/// would leave the canvas.
ToyFace generate_toy_face(const ToyFaceSpec& spec);

struct ToyDatasetOptions {
    int n_pristine = 0;
    int n_forgery = 0;
    std::uint64_t seed = 0;
    int size = 64;
    std::vector<int> regions = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<BlendType> blends = {BlendType::Alpha};  // offline splices default to alpha
    double ratio_min = 0.3, ratio_max = 1.0;             // mixup only
    SynthesisOptions synth;
};

/// Write images/, landmarks/, masks/ and manifest.jsonl under out_dir.
/// Forgeries are offline splices of a random region from a second toy face,
/// with the deformed+blurred mask saved as ground truth.
/// Returns the manifest path.
std::string generate_toy_dataset(const std::string& out_dir, const ToyDatasetOptions& opt);

}  // namespace advforge
