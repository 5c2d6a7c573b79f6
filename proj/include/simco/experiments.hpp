#pragma once

#include <utility>

#include "simco/learner.hpp"
#include "simco/rng.hpp"

namespace simco {

struct SyntheticSpec {
  Index m = 16;
  Index d = 32;
  Index n = 78;
  Index sparsity = 4;   // S nonzeros per column
  double snr_db = 0.0;  // used only when has_noise
  bool has_noise = false;
  std::uint64_t seed = 0;
};

struct SyntheticInstance {
  Matrix y;
  Dictionary d_true;
  SparseCoeffs x_true;
};

/// Y = D_true X_true (+ noise scaled to the requested SNR). Codewords are
/// uniform on the sphere; supports are uniform S-subsets of [d]; values are
/// standard normal.
SyntheticInstance gen_synthetic(const SyntheticSpec& spec, RngState& rng);

struct PatchSet {
  int edge = 8;
  Matrix patches;  // edge^2 x count, per-patch mean removed
  Vector means;    // removed DC values, one per patch
  std::vector<std::pair<int, int>> anchors;  // top-left (row, col)
  int image_rows = 0;
  int image_cols = 0;
};

/// count patches of size edge x edge at uniform random anchors, vectorized in
/// row-major pixel order, DC removed per patch.
PatchSet extract_patches(const Matrix& image, int count, RngState& rng,
                         int edge = 8);

/// Puts (patches + means) back at their anchors; later patches overwrite
/// earlier ones where they overlap.
Matrix reassemble_patches(const PatchSet& ps);

/// 10 log10(255^2 / MSE).
double psnr(const Matrix& reference, const Matrix& image);

struct DenoiseConfig {
  Method method = Method::SimCORegularized;
  Index dict_size = 256;
  double mu = 0.05;
  int outer_iters = 10;
  int train_patches = 1000;
  double sigma = 25.0;           // noise level driving the OMP stopping rule
  double omp_threshold_c = 1.15; // residual threshold C * sigma * edge
  Index omp_max_atoms = 10;
  std::uint64_t seed = 0;
  UpdateConfig update;
};

struct DenoiseResult {
  Matrix image;
  double psnr_in = 0.0;
  double psnr_out = 0.0;
  bool have_psnr = false;
  double runtime_ms = 0.0;
};

/// Learns a dictionary on patches of the noisy image, re-encodes every
/// stride-1 patch and averages the overlapping estimates per pixel.
DenoiseResult denoise(const Matrix& noisy, const Matrix* clean,
                      const DenoiseConfig& cfg);

/// 8-bit grayscale PGM, P2 (ASCII) and P5 (binary).
Matrix load_pgm(const std::string& path);
void save_pgm(const std::string& path, const Matrix& image, bool binary = true);

}  // namespace simco
