#include "simco/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "simco/experiments.hpp"
#include "simco/rankone.hpp"

namespace simco::cli {
namespace fs = std::filesystem;
namespace {

class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

json require_key(const json& cfg, const std::string& key) {
  if (!cfg.contains(key))
    throw config_error("missing config key: " + key);
  return cfg.at(key);
}

template <typename T>
T require_as(const json& cfg, const std::string& key) {
  try {
    return require_key(cfg, key).get<T>();
  } catch (const json::exception&) {
    throw config_error("invalid config key: " + key);
  }
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error("invalid config key: " + key);
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Collects output files and writes manifest.json at the end.
class Manifest {
public:
  Manifest(std::string subcommand, json config, std::uint64_t seed, fs::path dir)
      : dir_(std::move(dir)) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["config"] = std::move(config);
    doc_["seed"] = seed;
    doc_["output_dir"] = dir_.string();
    doc_["outputs"] = json::array();
    fs::create_directories(dir_);
  }

  fs::path dir() const { return dir_; }

  void emit(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    write_atomic(p, content);
    doc_["outputs"].push_back({{"path", name}, {"checksum", file_checksum(p.string())}});
  }

  void note(const std::string& name) {  // file written by other means
    const fs::path p = dir_ / name;
    doc_["outputs"].push_back({{"path", name}, {"checksum", file_checksum(p.string())}});
  }

  void finish() { write_atomic(dir_ / "manifest.json", doc_.dump(2) + "\n"); }

private:
  fs::path dir_;
  json doc_;
};

SyntheticSpec spec_from(const json& cfg, std::uint64_t seed) {
  const json js = require_key(cfg, "spec");
  SyntheticSpec spec;
  spec.m = require_as<Index>(js, "m");
  spec.d = require_as<Index>(js, "d");
  spec.n = require_as<Index>(js, "n");
  spec.sparsity = require_as<Index>(js, "S");
  if (js.contains("snr_db") && !js.at("snr_db").is_null()) {
    spec.snr_db = js.at("snr_db").get<double>();
    spec.has_noise = true;
  }
  spec.seed = seed;
  return spec;
}

std::vector<Method> methods_from(const json& cfg) {
  std::vector<Method> methods;
  for (const auto& name : require_as<std::vector<std::string>>(cfg, "methods")) {
    auto m = method_from_name(name);
    if (!m) throw config_error("invalid config key: methods (unknown method " + name + ")");
    methods.push_back(*m);
  }
  if (methods.empty()) throw config_error("invalid config key: methods (empty)");
  return methods;
}

std::vector<MuSchedulePoint> schedule_from(const json& cfg) {
  std::vector<MuSchedulePoint> sched;
  if (!cfg.contains("mu_schedule")) return sched;
  for (const auto& item : cfg.at("mu_schedule")) {
    if (!item.is_array() || item.size() != 2)
      throw config_error("invalid config key: mu_schedule");
    MuSchedulePoint p;
    p.start_iter = item.at(0).get<int>();
    p.mu = item.at(1).get<double>();
    if (p.mu < 0.0 ||
        (!sched.empty() && p.start_iter <= sched.back().start_iter))
      throw config_error("invalid config key: mu_schedule");
    sched.push_back(p);
  }
  return sched;
}

LearnConfig learn_config_from(const json& cfg, Method method, std::uint64_t seed) {
  LearnConfig lc;
  lc.method = method;
  lc.outer_iters = get_or<int>(cfg, "iters", 50);
  lc.inner_iters = get_or<int>(cfg, "inner_iters", 1);
  lc.sparsity = require_as<Index>(require_key(cfg, "spec"), "S");
  lc.mu_schedule = schedule_from(cfg);
  lc.seed = seed;
  lc.track_kappa = get_or<bool>(cfg, "track_kappa", true);
  lc.update.g_min = get_or<double>(cfg, "g_min", lc.update.g_min);
  lc.update.t4_init = get_or<double>(cfg, "t4_init", lc.update.t4_init);
  if (get_or<std::string>(cfg, "ls_backend", "QR") == "CG")
    lc.update.ls_backend = LsBackend::CG;
  return lc;
}

int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const contract_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
}

std::string csv17(double v) {
  std::ostringstream out;
  out.precision(17);
  if (std::isinf(v))
    out << "inf";
  else
    out << v;
  return out.str();
}

}  // namespace

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checksum: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

int run_synth(const json& cfg, const Options& opt) {
  return guard([&]() {
    const std::uint64_t seed0 =
        opt.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
    const auto methods = methods_from(cfg);
    const int num_seeds = get_or<int>(cfg, "num_seeds", 1);
    const std::string mode = get_or<std::string>(cfg, "mode", "learn");
    if (mode != "learn" && mode != "update_only")
      throw config_error("invalid config key: mode");

    Manifest manifest("synth", cfg, seed0, opt.out_dir);
    std::ostringstream summary;
    summary << "method,seed,final_f_over_n\n";
    for (int s = 0; s < num_seeds; ++s) {
      const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(s);
      RngState rng(seed);
      const SyntheticSpec spec = spec_from(cfg, seed);
      const SyntheticInstance inst = gen_synthetic(spec, rng);
      for (Method method : methods) {
        LearnConfig lc = learn_config_from(cfg, method, seed);
        LearnResult res;
        if (mode == "update_only") {
          Matrix init(spec.m, spec.d);
          for (Index i = 0; i < spec.d; ++i)
            init.col(i) = stiefel_sample_uniform(spec.m, rng);
          Dictionary d0{std::move(init)};
          SparseCoeffs x0 =
              objective(d0, inst.y, inst.x_true.pattern,
                        UpdateSelection::all(d0, inst.y, inst.x_true), 0.0)
                  .coeffs;
          res = update_only(inst.y, d0, x0, lc);
        } else {
          res = learn(inst.y, spec.d, lc);
        }
        std::ostringstream name;
        name << "trace_" << method_name(method) << "_seed" << seed << ".csv";
        manifest.emit(name.str(), res.trace.to_csv());
        const double fn = res.trace.records.back().f / static_cast<double>(spec.n);
        summary << method_name(method) << ',' << seed << ',' << csv17(fn) << '\n';
      }
    }
    manifest.emit("summary.csv", summary.str());
    manifest.finish();
    return kExitOk;
  });
}

int run_illcond(const json& cfg, const Options& opt) {
  return guard([&]() {
    const std::uint64_t seed0 =
        opt.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
    const double mu = get_or<double>(cfg, "mu", 0.01);
    const int iters = get_or<int>(cfg, "iters", 100);
    const int max_seeds = get_or<int>(cfg, "max_seeds", 200);
    const int window = get_or<int>(cfg, "plateau_window", 20);
    const double plateau_rel = get_or<double>(cfg, "plateau_rel", 1e-4);
    const double kappa_gate = get_or<double>(cfg, "kappa_gate", 10.0);

    Manifest manifest("illcond", cfg, seed0, opt.out_dir);

    auto make_problem = [&](std::uint64_t seed) {
      RngState rng(seed);
      const SyntheticSpec spec = spec_from(cfg, seed);
      SyntheticInstance inst = gen_synthetic(spec, rng);
      Matrix init(spec.m, spec.d);
      for (Index i = 0; i < spec.d; ++i)
        init.col(i) = stiefel_sample_uniform(spec.m, rng);
      Dictionary d0{std::move(init)};
      SparseCoeffs x0 =
          objective(d0, inst.y, inst.x_true.pattern,
                    UpdateSelection::all(d0, inst.y, inst.x_true), 0.0)
              .coeffs;
      return std::make_tuple(std::move(inst), std::move(d0), std::move(x0));
    };

    LearnConfig base = learn_config_from(cfg, Method::SimCOPrimitive, seed0);
    base.outer_iters = iters;

    json report;
    bool found = false;
    for (int s = 0; s < max_seeds && !found; ++s) {
      const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(s);
      auto [inst, d0, x0] = make_problem(seed);
      const double ygate = base.update.g_min * inst.y.squaredNorm();

      LearnConfig lc = base;
      lc.method = Method::SimCOPrimitive;
      LearnResult prim = update_only(inst.y, d0, x0, lc);
      const auto& recs = prim.trace.records;
      const auto& last = recs.back();
      const double f_ref = recs[recs.size() - 1 - static_cast<size_t>(window)].f;
      const bool plateau =
          std::abs(f_ref - last.f) < plateau_rel * std::max(std::abs(f_ref), 1e-300);
      const bool grad_large = last.grad_max > 10.0 * ygate;
      const bool ill = !(last.kappa < kappa_gate);  // includes +inf
      if (!(plateau && grad_large && ill)) continue;

      lc.method = Method::SimCORegularized;
      lc.mu_schedule = {{0, mu}};
      LearnResult reg = update_only(inst.y, d0, x0, lc);
      if (!(reg.trace.records.back().kappa < kappa_gate)) continue;
      found = true;

      manifest.emit("trace_SimCO-primitive.csv", prim.trace.to_csv());
      manifest.emit("trace_SimCO-regularized.csv", reg.trace.to_csv());
      lc.method = Method::MOD;
      manifest.emit("trace_MOD.csv",
                    update_only(inst.y, d0, x0, lc).trace.to_csv());
      lc.method = Method::KSVD;
      manifest.emit("trace_KSVD.csv",
                    update_only(inst.y, d0, x0, lc).trace.to_csv());

      report["found_seed"] = seed;
      report["seeds_tried"] = s + 1;
      report["primitive_final_f"] = last.f;
      report["primitive_grad_max"] = last.grad_max;
      report["primitive_kappa"] =
          std::isinf(last.kappa) ? json("inf") : json(last.kappa);
      report["regularized_kappa"] = reg.trace.records.back().kappa;
    }
    report["found"] = found;
    manifest.emit("report.json", report.dump(2) + "\n");
    manifest.finish();
    return found ? kExitOk : kExitProperty;
  });
}

int run_denoise(const std::string& input_pgm,
                const std::optional<std::string>& clean_pgm, const json& cfg,
                const Options& opt) {
  return guard([&]() {
    DenoiseConfig dc;
    dc.seed = opt.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
    dc.dict_size = get_or<Index>(cfg, "d", dc.dict_size);
    dc.mu = get_or<double>(cfg, "mu", dc.mu);
    dc.outer_iters = get_or<int>(cfg, "outer_iters", dc.outer_iters);
    dc.train_patches = get_or<int>(cfg, "train_patches", dc.train_patches);
    dc.sigma = get_or<double>(cfg, "sigma", dc.sigma);
    dc.omp_max_atoms = get_or<Index>(cfg, "omp_max_atoms", dc.omp_max_atoms);
    dc.omp_threshold_c = get_or<double>(cfg, "omp_threshold_c", dc.omp_threshold_c);
    if (auto m = method_from_name(get_or<std::string>(cfg, "method", "SimCO-regularized")))
      dc.method = *m;
    else
      throw config_error("invalid config key: method");

    const Matrix noisy = load_pgm(input_pgm);
    Matrix clean;
    if (clean_pgm) clean = load_pgm(*clean_pgm);

    Manifest manifest("denoise", cfg, dc.seed, opt.out_dir);
    DenoiseResult res = denoise(noisy, clean_pgm ? &clean : nullptr, dc);
    save_pgm((manifest.dir() / "denoised.pgm").string(), res.image);
    manifest.note("denoised.pgm");

    json report;
    report["psnr_in"] = res.have_psnr ? json(res.psnr_in) : json(nullptr);
    report["psnr_out"] = res.have_psnr ? json(res.psnr_out) : json(nullptr);
    report["runtime_ms"] = res.runtime_ms;
    manifest.emit("report.json", report.dump(2) + "\n");
    manifest.finish();
    return kExitOk;
  });
}

int run_rankone(const json& cfg, const Options& opt) {
  return guard([&]() {
    const std::uint64_t seed =
        opt.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
    const int trials = get_or<int>(cfg, "trials", 100);
    const Index m = get_or<Index>(cfg, "m", 5);
    const Index n = get_or<Index>(cfg, "n", 8);
    const double gap_min = get_or<double>(cfg, "gap_min", 1.02);
    const double step_eps = get_or<double>(cfg, "step_eps", 1e-3);
    const int max_steps = get_or<int>(cfg, "max_steps", 100000);

    Manifest manifest("rankone", cfg, seed, opt.out_dir);
    RngState rng(seed);
    int successes = 0, bad_starts = 0;
    double max_gap = 0.0;
    for (int t = 0; t < trials; ++t) {
      RankOneProblem prob;
      for (;;) {  // enforce the singular value gap
        Matrix a(m, n);
        for (Index j = 0; j < n; ++j)
          for (Index i = 0; i < m; ++i) a(i, j) = rng.next_gaussian();
        prob = RankOneProblem::make(std::move(a));
        const auto& sv = prob.decomposition.singular_values;
        if (sv.size() < 2 || sv(0) >= gap_min * sv(1)) break;
      }
      const Vector u0 = stiefel_sample_uniform(m, rng);
      DescentResult res = descend_rank1(prob.a, u0, step_eps, max_steps);
      if (res.bad_start) {
        ++bad_starts;
        continue;
      }
      const auto& sv = prob.decomposition.singular_values;
      double opt_f = 0.0;
      for (Index i = 1; i < sv.size(); ++i) opt_f += sv(i) * sv(i);
      const double gap = f_rank1(res.u_final, prob.a) - opt_f;
      max_gap = std::max(max_gap, gap);
      if (gap <= 1e-8 * prob.a.squaredNorm()) ++successes;
    }
    json report;
    report["trials"] = trials;
    report["bad_start"] = bad_starts;
    report["successes"] = successes;
    report["max_final_gap"] = max_gap;
    manifest.emit("report.json", report.dump(2) + "\n");
    manifest.finish();
    return successes == trials - bad_starts ? kExitOk : kExitProperty;
  });
}

int run_bench(const json& cfg, const Options& opt) {
  return guard([&]() {
    const std::uint64_t seed =
        opt.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
    const auto methods = methods_from(cfg);
    const int repeats = get_or<int>(cfg, "repeats", 3);

    Manifest manifest("bench", cfg, seed, opt.out_dir);
    RngState rng(seed);
    const SyntheticSpec spec = spec_from(cfg, seed);
    const SyntheticInstance inst = gen_synthetic(spec, rng);
    Matrix init(spec.m, spec.d);
    for (Index i = 0; i < spec.d; ++i)
      init.col(i) = stiefel_sample_uniform(spec.m, rng);
    Dictionary d0{std::move(init)};
    SparseCoeffs x0 = objective(d0, inst.y, inst.x_true.pattern,
                                UpdateSelection::all(d0, inst.y, inst.x_true), 0.0)
                          .coeffs;

    std::ostringstream table;
    table << "method,min_ms,median_ms,max_ms\n";
    json timings;
    for (Method method : methods) {
      LearnConfig lc = learn_config_from(cfg, method, seed);
      lc.track_kappa = false;
      if (method == Method::SimCORegularized && lc.mu_schedule.empty())
        lc.mu_schedule = {{0, get_or<double>(cfg, "mu", 0.01)}};
      std::vector<double> times;
      for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        update_only(inst.y, d0, x0, lc);
        times.push_back(std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count());
      }
      std::sort(times.begin(), times.end());
      const double median = times[times.size() / 2];
      table << method_name(method) << ',' << csv17(times.front()) << ','
            << csv17(median) << ',' << csv17(times.back()) << '\n';
      timings[method_name(method)] = median;
    }
    // Informational ordering observations, never a failure.
    json report;
    report["timings_median_ms"] = timings;
    if (timings.contains("SimCO-regularized") && timings.contains("KSVD"))
      report["simco_faster_than_ksvd"] =
          timings["SimCO-regularized"].get<double>() < timings["KSVD"].get<double>();
    if (timings.contains("SimCO-regularized") && timings.contains("MOD"))
      report["simco_slower_than_mod"] =
          timings["SimCO-regularized"].get<double>() > timings["MOD"].get<double>();
    manifest.emit("bench.csv", table.str());
    manifest.emit("report.json", report.dump(2) + "\n");
    manifest.finish();
    return kExitOk;
  });
}

int run_verify(const std::string& manifest_path) {
  return guard([&]() {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open " + manifest_path);
    json doc = json::parse(in);
    const fs::path dir = fs::path(manifest_path).parent_path();
    bool ok = true;
    for (const auto& entry : doc.at("outputs")) {
      const std::string rel = entry.at("path").get<std::string>();
      const std::string want = entry.at("checksum").get<std::string>();
      const std::string have = file_checksum((dir / rel).string());
      if (have != want) {
        std::cerr << "checksum mismatch: " << rel << '\n';
        ok = false;
      }
    }
    return ok ? kExitOk : kExitProperty;
  });
}

}  // namespace simco::cli
