#include "simco/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "simco/baselines.hpp"
#include "simco/omp.hpp"

namespace simco {
namespace {

std::vector<Index> uniform_subset(Index d, Index s, RngState& rng) {
  // Partial Fisher-Yates over [0, d): the first s entries are a uniform
  // random s-subset.
  std::vector<Index> pool(static_cast<size_t>(d));
  for (Index i = 0; i < d; ++i) pool[static_cast<size_t>(i)] = i;
  for (Index k = 0; k < s; ++k) {
    const Index pick =
        k + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(d - k)));
    std::swap(pool[static_cast<size_t>(k)], pool[static_cast<size_t>(pick)]);
  }
  std::vector<Index> out(pool.begin(), pool.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SyntheticInstance gen_synthetic(const SyntheticSpec& spec, RngState& rng) {
  if (spec.sparsity < 1 || spec.sparsity > spec.m || spec.m > spec.d)
    throw contract_error("gen_synthetic: requires S <= m <= d");
  SyntheticInstance inst;
  Matrix dmat(spec.m, spec.d);
  for (Index i = 0; i < spec.d; ++i) dmat.col(i) = stiefel_sample_uniform(spec.m, rng);
  inst.d_true = Dictionary{std::move(dmat)};

  SparsityPattern pattern;
  pattern.d = spec.d;
  pattern.n = spec.n;
  pattern.cols.resize(static_cast<size_t>(spec.n));
  std::vector<std::vector<double>> values(static_cast<size_t>(spec.n));
  for (Index j = 0; j < spec.n; ++j) {
    pattern.cols[static_cast<size_t>(j)] = uniform_subset(spec.d, spec.sparsity, rng);
    auto& val = values[static_cast<size_t>(j)];
    val.resize(static_cast<size_t>(spec.sparsity));
    for (auto& v : val) v = rng.next_gaussian();
  }
  inst.x_true.pattern = std::move(pattern);
  inst.x_true.values = std::move(values);

  inst.y = inst.d_true.a * inst.x_true.dense();
  if (spec.has_noise) {
    Matrix noise(spec.m, spec.n);
    for (Index j = 0; j < spec.n; ++j)
      for (Index i = 0; i < spec.m; ++i) noise(i, j) = rng.next_gaussian();
    const double signal = inst.y.squaredNorm();
    const double target = signal / std::pow(10.0, spec.snr_db / 10.0);
    noise *= std::sqrt(target / noise.squaredNorm());
    inst.y += noise;
  }
  return inst;
}

PatchSet extract_patches(const Matrix& image, int count, RngState& rng, int edge) {
  if (image.rows() < edge || image.cols() < edge)
    throw contract_error("extract_patches: image smaller than a patch");
  PatchSet ps;
  ps.edge = edge;
  ps.image_rows = static_cast<int>(image.rows());
  ps.image_cols = static_cast<int>(image.cols());
  const Index dim = static_cast<Index>(edge) * edge;
  ps.patches.resize(dim, count);
  ps.means.resize(count);
  ps.anchors.reserve(static_cast<size_t>(count));
  const std::uint64_t row_range = static_cast<std::uint64_t>(image.rows() - edge + 1);
  const std::uint64_t col_range = static_cast<std::uint64_t>(image.cols() - edge + 1);
  for (int k = 0; k < count; ++k) {
    const int r = static_cast<int>(rng.next_below(row_range));
    const int c = static_cast<int>(rng.next_below(col_range));
    ps.anchors.emplace_back(r, c);
    Index p = 0;
    for (int pr = 0; pr < edge; ++pr)
      for (int pc = 0; pc < edge; ++pc) ps.patches(p++, k) = image(r + pr, c + pc);
    const double mean = ps.patches.col(k).mean();
    ps.means(k) = mean;
    ps.patches.col(k).array() -= mean;
  }
  return ps;
}

Matrix reassemble_patches(const PatchSet& ps) {
  Matrix out = Matrix::Zero(ps.image_rows, ps.image_cols);
  for (size_t k = 0; k < ps.anchors.size(); ++k) {
    const auto [r, c] = ps.anchors[k];
    Index p = 0;
    for (int pr = 0; pr < ps.edge; ++pr)
      for (int pc = 0; pc < ps.edge; ++pc)
        out(r + pr, c + pc) = ps.patches(p++, static_cast<Index>(k)) + ps.means(static_cast<Index>(k));
  }
  return out;
}

double psnr(const Matrix& reference, const Matrix& image) {
  if (reference.rows() != image.rows() || reference.cols() != image.cols())
    throw contract_error("psnr: shape mismatch");
  const double mse = (reference - image).squaredNorm() /
                     static_cast<double>(reference.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

DenoiseResult denoise(const Matrix& noisy, const Matrix* clean,
                      const DenoiseConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  DenoiseResult out;
  if (clean) {
    out.psnr_in = psnr(*clean, noisy);
    out.have_psnr = true;
  }
  RngState rng(cfg.seed);
  PatchSet train = extract_patches(noisy, cfg.train_patches, rng);
  const Index dim = train.patches.rows();

  // Initial dictionary from training patches with usable energy.
  Matrix init(dim, cfg.dict_size);
  Index have = 0;
  for (Index k = 0; k < train.patches.cols() && have < cfg.dict_size; ++k) {
    const double norm = train.patches.col(k).norm();
    if (norm <= 1e-6) continue;
    init.col(have++) = train.patches.col(k) / norm;
  }
  while (have < cfg.dict_size) init.col(have++) = stiefel_sample_uniform(dim, rng);
  Dictionary dict{std::move(init)};

  OmpOptions omp;
  omp.residual_threshold = cfg.omp_threshold_c * cfg.sigma * train.edge;
  omp.max_atoms = cfg.omp_max_atoms;

  for (int it = 0; it < cfg.outer_iters; ++it) {
    SparseCoeffs x = omp_encode(dict, train.patches, omp);
    switch (cfg.method) {
      case Method::MOD: {
        ModResult r = mod_update(dict, train.patches, x);
        dict = std::move(r.dict);
        break;
      }
      case Method::KSVD: {
        KsvdResult r = ksvd_update(dict, train.patches, x);
        dict = std::move(r.dict);
        break;
      }
      case Method::SimCOPrimitive:
      case Method::SimCORegularized: {
        UpdateConfig u = cfg.update;
        u.mu = cfg.method == Method::SimCORegularized ? cfg.mu : 0.0;
        UpdateSelection sel = UpdateSelection::all(dict, train.patches, x);
        LineSearchResult r =
            line_search_iteration(dict, train.patches, x.pattern, sel, u);
        dict = std::move(r.dict);
        break;
      }
    }
  }

  // Stride-1 reconstruction with uniform averaging of overlapping estimates.
  const int edge = train.edge;
  const int rows = static_cast<int>(noisy.rows());
  const int cols = static_cast<int>(noisy.cols());
  const int nr = rows - edge + 1, nc = cols - edge + 1;
  const Index total = static_cast<Index>(nr) * nc;
  Matrix patches(dim, total);
  Vector means(total);
  Index k = 0;
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < nc; ++c, ++k) {
      Index p = 0;
      for (int pr = 0; pr < edge; ++pr)
        for (int pc = 0; pc < edge; ++pc) patches(p++, k) = noisy(r + pr, c + pc);
      means(k) = patches.col(k).mean();
      patches.col(k).array() -= means(k);
    }
  SparseCoeffs codes = omp_encode(dict, patches, omp);

  Matrix sums = Matrix::Zero(rows, cols);
  Matrix counts = Matrix::Zero(rows, cols);
  Vector est(dim);
  k = 0;
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < nc; ++c, ++k) {
      est.setConstant(means(k));
      const auto& idx = codes.pattern.cols[static_cast<size_t>(k)];
      const auto& val = codes.values[static_cast<size_t>(k)];
      for (size_t q = 0; q < idx.size(); ++q) est += val[q] * dict.a.col(idx[q]);
      Index p = 0;
      for (int pr = 0; pr < edge; ++pr)
        for (int pc = 0; pc < edge; ++pc) {
          sums(r + pr, c + pc) += est(p++);
          counts(r + pr, c + pc) += 1.0;
        }
    }
  out.image = (sums.array() / counts.array()).matrix();
  out.image = out.image.cwiseMax(0.0).cwiseMin(255.0);
  if (clean) out.psnr_out = psnr(*clean, out.image);
  out.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return out;
}

Matrix load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_pgm: cannot open " + path);
  auto next_token = [&in]() {
    std::string tok;
    for (;;) {
      int ch = in.get();
      if (ch == EOF) throw std::runtime_error("load_pgm: truncated header");
      if (ch == '#') {
        while (ch != EOF && ch != '\n') ch = in.get();
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
  };
  const std::string magic = next_token();
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("load_pgm: not a PGM (P2/P5) file: " + path);
  const int cols = std::stoi(next_token());
  const int rows = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (rows <= 0 || cols <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("load_pgm: unsupported header in " + path);
  Matrix img(rows, cols);
  if (magic == "P2") {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) img(r, c) = std::stod(next_token());
  } else {
    std::vector<unsigned char> buf(static_cast<size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw std::runtime_error("load_pgm: truncated pixel data in " + path);
    size_t k = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) img(r, c) = buf[k++];
  }
  return img;
}

void save_pgm(const std::string& path, const Matrix& image, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_pgm: cannot open " + path);
  const int rows = static_cast<int>(image.rows());
  const int cols = static_cast<int>(image.cols());
  out << (binary ? "P5" : "P2") << '\n' << cols << ' ' << rows << '\n' << 255 << '\n';
  auto quantize = [](double v) {
    const long q = std::lround(v);
    return static_cast<unsigned char>(std::clamp(q, 0l, 255l));
  };
  if (binary) {
    std::vector<unsigned char> buf;
    buf.reserve(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) buf.push_back(quantize(image(r, c)));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  } else {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (c) out << ' ';
        out << static_cast<int>(quantize(image(r, c)));
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("save_pgm: write failed for " + path);
}

}  // namespace simco
