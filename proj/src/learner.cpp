#include "simco/learner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "simco/baselines.hpp"
#include "simco/omp.hpp"
#include "simco/rng.hpp"

namespace simco {
namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

double coeff_energy(const SparseCoeffs& x) {
  double total = 0.0;
  for (const auto& col : x.values)
    for (double v : col) total += v * v;
  return total;
}

// One dictionary-update stage; returns flags for the trace.
std::string update_stage(Method method, const Matrix& y, Dictionary& d,
                         SparseCoeffs& x, const LearnConfig& cfg, double mu) {
  std::string flags;
  switch (method) {
    case Method::MOD: {
      ModResult r = mod_update(d, y, x);
      d = std::move(r.dict);
      x = std::move(r.coeffs);
      if (r.gram_singular) flags = "gram_singular";
      break;
    }
    case Method::KSVD: {
      KsvdResult r = ksvd_update(d, y, x);
      d = std::move(r.dict);
      x = std::move(r.coeffs);
      if (r.zero_blocks > 0) flags = "zero_blocks";
      break;
    }
    case Method::SimCOPrimitive:
    case Method::SimCORegularized: {
      UpdateConfig u = cfg.update;
      u.mu = method == Method::SimCORegularized ? mu : 0.0;
      if (cfg.single_sweep) {
        for (Index i = 0; i < d.cols(); ++i) {
          UpdateSelection sel = UpdateSelection::make(d, y, x, {i});
          LineSearchResult r = line_search_iteration(d, y, x.pattern, sel, u);
          d = std::move(r.dict);
          x = std::move(r.coeffs);
          if (r.trace.part_a_capped) flags = "part_a_capped";
        }
      } else {
        UpdateSelection sel = UpdateSelection::all(d, y, x);
        LineSearchResult r = line_search_iteration(d, y, x.pattern, sel, u);
        d = std::move(r.dict);
        x = std::move(r.coeffs);
        if (r.trace.part_a_capped) flags = "part_a_capped";
      }
      break;
    }
  }
  return flags;
}

TraceRecord snapshot(int iter, const Matrix& y, const Dictionary& d,
                     const SparseCoeffs& x, double mu, bool track_kappa,
                     clock_type::time_point t0) {
  TraceRecord rec;
  rec.iter = iter;
  rec.f = residual_energy(d, y, x);
  rec.f_reg = mu > 0.0 ? rec.f + mu * coeff_energy(x) : rec.f;
  UpdateSelection sel = UpdateSelection::all(d, y, x);
  rec.grad_max = gradient(d, y, x.pattern, sel, mu).max_norm();
  rec.kappa = track_kappa ? condition_number(d, x.pattern) : 0.0;
  rec.ms = ms_since(t0);
  return rec;
}

Dictionary default_init(const Matrix& y, Index d, std::uint64_t seed) {
  Matrix init(y.rows(), d);
  Index have = 0;
  for (Index j = 0; j < y.cols() && have < d; ++j) {
    const double norm = y.col(j).norm();
    if (norm <= 1e-12) continue;
    init.col(have++) = y.col(j) / norm;
  }
  RngState rng(seed ^ 0x5d1c0u);
  while (have < d) init.col(have++) = stiefel_sample_uniform(y.rows(), rng);
  return Dictionary{std::move(init)};
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::MOD: return "MOD";
    case Method::KSVD: return "KSVD";
    case Method::SimCOPrimitive: return "SimCO-primitive";
    case Method::SimCORegularized: return "SimCO-regularized";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& s) {
  if (s == "MOD") return Method::MOD;
  if (s == "KSVD") return Method::KSVD;
  if (s == "SimCO-primitive") return Method::SimCOPrimitive;
  if (s == "SimCO-regularized") return Method::SimCORegularized;
  return std::nullopt;
}

double mu_at(const std::vector<MuSchedulePoint>& schedule, int iter) {
  double mu = 0.0;
  for (const auto& p : schedule)
    if (iter >= p.start_iter) mu = p.mu;
  return mu;
}

std::string ConvergenceTrace::to_csv() const {
  std::ostringstream out;
  out << "iter,f,f_reg,grad_max,kappa,ms\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.iter << ',' << r.f << ',' << r.f_reg << ',' << r.grad_max << ',';
    if (std::isinf(r.kappa))
      out << "inf";
    else
      out << r.kappa;
    out << ',' << r.ms << '\n';
  }
  return out.str();
}

void ConvergenceTrace::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ConvergenceTrace: cannot open " + path);
  out << to_csv();
}

double condition_number(const Dictionary& d, const SparsityPattern& pattern) {
  double kappa = 1.0;
  for (Index j = 0; j < pattern.n; ++j) {
    const auto& idx = pattern.cols[static_cast<size_t>(j)];
    if (idx.empty()) continue;
    Matrix sub(d.rows(), static_cast<Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Index>(k)) = d.a.col(idx[k]);
    Vector sv = singular_values(sub);
    const double lmax = sv(0), lmin = sv(sv.size() - 1);
    if (lmin <= 1e-12 * lmax)
      return std::numeric_limits<double>::infinity();
    kappa = std::max(kappa, lmax / lmin);
  }
  return kappa;
}

LearnResult learn(const Matrix& y, Index d, const LearnConfig& cfg,
                  const Dictionary* d0) {
  if (d < 1) throw contract_error("learn: d must be >= 1");
  check_finite(y, "learn");
  const auto t0 = clock_type::now();
  LearnResult out;
  out.dict = d0 ? *d0 : default_init(y, d, cfg.seed);
  out.coeffs = omp_encode(out.dict, y, cfg.sparsity);

  const bool regularized = cfg.method == Method::SimCORegularized;
  double mu0 = regularized ? mu_at(cfg.mu_schedule, 0) : 0.0;
  out.trace.records.push_back(
      snapshot(0, y, out.dict, out.coeffs, mu0, cfg.track_kappa, t0));

  double prev_f = out.trace.records.back().f;
  for (int it = 0; it < cfg.outer_iters; ++it) {
    out.coeffs = omp_encode(out.dict, y, cfg.sparsity);
    const double mu = regularized ? mu_at(cfg.mu_schedule, it) : 0.0;
    std::string flags;
    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      std::string f = update_stage(cfg.method, y, out.dict, out.coeffs, cfg, mu);
      if (!f.empty()) flags = f;
    }
    TraceRecord rec =
        snapshot(it + 1, y, out.dict, out.coeffs, mu, cfg.track_kappa, t0);
    rec.flags = flags;
    out.trace.records.push_back(rec);
    if (cfg.use_stop_rule && prev_f > 0.0 &&
        (prev_f - rec.f) < cfg.f_rel_tol * prev_f)
      break;
    prev_f = rec.f;
  }
  return out;
}

LearnResult update_only(const Matrix& y, const Dictionary& d0,
                        const SparseCoeffs& x0, const LearnConfig& cfg) {
  const auto t0 = clock_type::now();
  LearnResult out;
  out.dict = d0;
  out.coeffs = x0;

  const bool regularized = cfg.method == Method::SimCORegularized;
  double mu0 = regularized ? mu_at(cfg.mu_schedule, 0) : 0.0;
  out.trace.records.push_back(
      snapshot(0, y, out.dict, out.coeffs, mu0, cfg.track_kappa, t0));
  for (int it = 0; it < cfg.outer_iters; ++it) {
    const double mu = regularized ? mu_at(cfg.mu_schedule, it) : 0.0;
    std::string flags;
    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      std::string f = update_stage(cfg.method, y, out.dict, out.coeffs, cfg, mu);
      if (!f.empty()) flags = f;
    }
    TraceRecord rec =
        snapshot(it + 1, y, out.dict, out.coeffs, mu, cfg.track_kappa, t0);
    rec.flags = flags;
    out.trace.records.push_back(rec);
  }
  return out;
}

LearnResult refine_two_step(const Matrix& y, Index d, const LearnConfig& cfg,
                            const Dictionary* d0) {
  const int split = cfg.refine_split_iter;
  if (split < 0 || split > cfg.outer_iters)
    throw contract_error("refine_two_step: bad split point");

  LearnConfig phase1 = cfg;
  phase1.method = Method::SimCORegularized;
  phase1.outer_iters = split;
  LearnResult r1 = learn(y, d, phase1, d0);

  LearnConfig phase2 = cfg;
  phase2.method = Method::SimCOPrimitive;
  phase2.outer_iters = cfg.outer_iters - split;
  LearnResult r2 = learn(y, d, phase2, &r1.dict);

  LearnResult out;
  out.dict = std::move(r2.dict);
  out.coeffs = std::move(r2.coeffs);
  out.trace = std::move(r1.trace);
  // Skip phase 2's initial row (same state as phase 1's last row).
  for (size_t k = 1; k < r2.trace.records.size(); ++k) {
    TraceRecord rec = r2.trace.records[k];
    rec.iter += split;
    out.trace.records.push_back(rec);
  }
  return out;
}

}  // namespace simco
