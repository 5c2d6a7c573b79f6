#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "simco/cli.hpp"

namespace {

using simco::cli::json;

int load_config(const std::string& path, json& out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "i/o error: cannot open config " << path << '\n';
    return simco::cli::kExitIo;
  }
  try {
    out = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return simco::cli::kExitConfig;
  }
  return simco::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dictionary learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  if (const char* env = std::getenv("SIMCO_THREADS")) threads = std::atoi(env);

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "JSON config file");
    if (needs_config) c->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", threads, "worker thread count");
  };

  auto* synth = app.add_subcommand("synth", "synthetic recovery experiment");
  add_common(synth, true);
  auto* illcond = app.add_subcommand("illcond", "ill-conditioning diagnostic run");
  add_common(illcond, true);
  auto* denoise = app.add_subcommand("denoise", "image denoising experiment");
  add_common(denoise, true);
  std::string input_pgm, clean_pgm;
  denoise->add_option("--input", input_pgm, "noisy input image (PGM)")->required();
  denoise->add_option("--clean", clean_pgm, "clean reference image (PGM)");
  auto* rankone = app.add_subcommand("rankone", "rank-one descent verification");
  add_common(rankone, true);
  auto* bench = app.add_subcommand("bench", "dictionary update timing");
  add_common(bench, true);
  auto* verify = app.add_subcommand("verify", "re-check manifest checksums");
  std::string manifest_path;
  verify->add_option("manifest", manifest_path, "path to manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? simco::cli::kExitOk : simco::cli::kExitConfig;
  }

  simco::cli::Options opt;
  opt.out_dir = out_dir;
  opt.seed = seed;
  opt.threads = threads > 0 ? threads : 1;

  if (verify->parsed()) return simco::cli::run_verify(manifest_path);

  json cfg;
  if (int rc = load_config(config_path, cfg); rc != simco::cli::kExitOk) return rc;

  if (synth->parsed()) return simco::cli::run_synth(cfg, opt);
  if (illcond->parsed()) return simco::cli::run_illcond(cfg, opt);
  if (denoise->parsed())
    return simco::cli::run_denoise(
        input_pgm,
        clean_pgm.empty() ? std::nullopt : std::optional<std::string>(clean_pgm),
        cfg, opt);
  if (rankone->parsed()) return simco::cli::run_rankone(cfg, opt);
  if (bench->parsed()) return simco::cli::run_bench(cfg, opt);
  return simco::cli::kExitConfig;
}
