#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "simco/cli.hpp"
#include "simco/experiments.hpp"

using namespace simco;
using cli::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json small_synth_cfg() {
  return json{{"spec", {{"m", 8}, {"d", 12}, {"n", 30}, {"S", 3}}},
              {"methods", {"MOD", "SimCO-regularized"}},
              {"mu_schedule", {{0, 0.05}}},
              {"iters", 3},
              {"num_seeds", 2},
              {"track_kappa", false}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("file_checksum is deterministic and content sensitive") {
  TempDir td("simco_cli_ck");
  std::ofstream(td.path / "a.txt") << "hello";
  std::ofstream(td.path / "b.txt") << "hello";
  std::ofstream(td.path / "c.txt") << "hellp";
  CHECK(cli::file_checksum((td.path / "a.txt").string()) ==
        cli::file_checksum((td.path / "b.txt").string()));
  CHECK(cli::file_checksum((td.path / "a.txt").string()) !=
        cli::file_checksum((td.path / "c.txt").string()));
  CHECK_THROWS(cli::file_checksum((td.path / "missing").string()));
}

TEST_CASE("run_synth writes traces, summary, and a verifiable manifest") {
  TempDir td("simco_cli_synth");
  cli::Options opt;
  opt.out_dir = td.path.string();
  CHECK(cli::run_synth(small_synth_cfg(), opt) == cli::kExitOk);

  CHECK(fs::exists(td.path / "trace_MOD_seed0.csv"));
  CHECK(fs::exists(td.path / "trace_SimCO-regularized_seed1.csv"));
  const std::string summary = slurp(td.path / "summary.csv");
  CHECK(summary.rfind("method,seed,final_f_over_n\n", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);  // header + 4

  const std::string mp = (td.path / "manifest.json").string();
  CHECK(cli::run_verify(mp) == cli::kExitOk);

  // Tampering with an output must fail verification.
  std::ofstream(td.path / "summary.csv", std::ios::app) << "x";
  CHECK(cli::run_verify(mp) == cli::kExitProperty);
}

TEST_CASE("run_synth is deterministic") {
  TempDir ta("simco_cli_det_a"), tb("simco_cli_det_b");
  cli::Options oa, ob;
  oa.out_dir = ta.path.string();
  ob.out_dir = tb.path.string();
  const json cfg = small_synth_cfg();
  REQUIRE(cli::run_synth(cfg, oa) == cli::kExitOk);
  REQUIRE(cli::run_synth(cfg, ob) == cli::kExitOk);
  // Timing column excluded: compare everything before the last field per row.
  for (const auto& name :
       {"trace_MOD_seed0.csv", "trace_SimCO-regularized_seed0.csv", "summary.csv"}) {
    std::istringstream la(slurp(ta.path / name)), lb(slurp(tb.path / name));
    std::string ra, rb;
    while (std::getline(la, ra)) {
      REQUIRE(std::getline(lb, rb));
      CHECK(ra.substr(0, ra.rfind(',')) == rb.substr(0, rb.rfind(',')));
    }
    CHECK(!std::getline(lb, rb));
  }
}

TEST_CASE("run_synth rejects bad configs") {
  TempDir td("simco_cli_bad");
  cli::Options opt;
  opt.out_dir = td.path.string();
  json cfg = small_synth_cfg();
  cfg["spec"].erase("S");
  CHECK(cli::run_synth(cfg, opt) == cli::kExitConfig);

  cfg = small_synth_cfg();
  cfg["methods"] = json::array({"nope"});
  CHECK(cli::run_synth(cfg, opt) == cli::kExitConfig);

  cfg = small_synth_cfg();
  cfg["mu_schedule"] = {{5, 0.1}, {2, 0.01}};  // not ascending
  CHECK(cli::run_synth(cfg, opt) == cli::kExitConfig);

  cfg = small_synth_cfg();
  cfg["mode"] = "banana";
  CHECK(cli::run_synth(cfg, opt) == cli::kExitConfig);
}

TEST_CASE("run_synth with zero iterations emits only the initial row") {
  TempDir td("simco_cli_zero");
  cli::Options opt;
  opt.out_dir = td.path.string();
  json cfg = small_synth_cfg();
  cfg["iters"] = 0;
  cfg["num_seeds"] = 1;
  cfg["methods"] = json::array({"SimCO-primitive"});
  REQUIRE(cli::run_synth(cfg, opt) == cli::kExitOk);
  const std::string trace = slurp(td.path / "trace_SimCO-primitive_seed0.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 2);  // header + iter 0
}

TEST_CASE("run_rankone reports success on every good start") {
  TempDir td("simco_cli_r1");
  cli::Options opt;
  opt.out_dir = td.path.string();
  json cfg{{"trials", 5}, {"seed", 11}};
  CHECK(cli::run_rankone(cfg, opt) == cli::kExitOk);
  json report = json::parse(slurp(td.path / "report.json"));
  CHECK(report["trials"] == 5);
  CHECK(report["successes"].get<int>() + report["bad_start"].get<int>() == 5);

  json empty{{"trials", 0}};
  CHECK(cli::run_rankone(empty, opt) == cli::kExitOk);
}

TEST_CASE("run_denoise without a reference leaves psnr null") {
  TempDir td("simco_cli_dn");
  Matrix img(24, 24);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      img(i, j) = std::round(128.0 + 60.0 * std::sin(0.2 * i) * std::cos(0.3 * j));
  const std::string in = (td.path / "in.pgm").string();
  save_pgm(in, img);

  cli::Options opt;
  opt.out_dir = (td.path / "out").string();
  json cfg{{"d", 32}, {"outer_iters", 1}, {"train_patches", 80}, {"sigma", 2.0}};
  REQUIRE(cli::run_denoise(in, std::nullopt, cfg, opt) == cli::kExitOk);
  json report = json::parse(slurp(td.path / "out" / "report.json"));
  CHECK(report["psnr_in"].is_null());
  CHECK(report["psnr_out"].is_null());
  CHECK(fs::exists(td.path / "out" / "denoised.pgm"));
  CHECK(cli::run_verify((td.path / "out" / "manifest.json").string()) ==
        cli::kExitOk);
}

TEST_CASE("run_denoise with a reference reports psnr numbers") {
  TempDir td("simco_cli_dn2");
  Matrix img(24, 24);
  RngState rng(3);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      img(i, j) = std::round(128.0 + 40.0 * std::sin(0.15 * i + 0.1 * j));
  Matrix noisy = img;
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      noisy(i, j) = std::round(noisy(i, j) + 3.0 * rng.next_gaussian());
  const std::string cp = (td.path / "clean.pgm").string();
  const std::string np = (td.path / "noisy.pgm").string();
  save_pgm(cp, img);
  save_pgm(np, noisy);

  cli::Options opt;
  opt.out_dir = (td.path / "out").string();
  json cfg{{"d", 32}, {"outer_iters", 1}, {"train_patches", 80}, {"sigma", 3.0}};
  REQUIRE(cli::run_denoise(np, cp, cfg, opt) == cli::kExitOk);
  json report = json::parse(slurp(td.path / "out" / "report.json"));
  CHECK(report["psnr_in"].is_number());
  CHECK(report["psnr_out"].is_number());
}

TEST_CASE("run_denoise on a missing input is an i/o failure") {
  TempDir td("simco_cli_dn3");
  cli::Options opt;
  opt.out_dir = td.path.string();
  CHECK(cli::run_denoise((td.path / "nope.pgm").string(), std::nullopt, json::object(),
                         opt) == cli::kExitIo);
}

TEST_CASE("run_verify on a missing manifest is an i/o failure") {
  CHECK(cli::run_verify("/nonexistent/manifest.json") == cli::kExitIo);
}

TEST_CASE("run_bench writes a timing table") {
  TempDir td("simco_cli_bench");
  cli::Options opt;
  opt.out_dir = td.path.string();
  json cfg = small_synth_cfg();
  cfg["repeats"] = 2;
  cfg["iters"] = 2;
  REQUIRE(cli::run_bench(cfg, opt) == cli::kExitOk);
  const std::string table = slurp(td.path / "bench.csv");
  CHECK(table.rfind("method,min_ms,median_ms,max_ms\n", 0) == 0);
  CHECK(table.find("MOD,") != std::string::npos);
  CHECK(table.find("SimCO-regularized,") != std::string::npos);
  json report = json::parse(slurp(td.path / "report.json"));
  CHECK(report["timings_median_ms"].is_object());
}
