#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace simco::cli {

using nlohmann::json;

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProperty = 3;
inline constexpr int kExitIo = 4;

struct Options {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int threads = 1;
};

int run_synth(const json& cfg, const Options& opt);
int run_illcond(const json& cfg, const Options& opt);
int run_denoise(const std::string& input_pgm,
                const std::optional<std::string>& clean_pgm, const json& cfg,
                const Options& opt);
int run_rankone(const json& cfg, const Options& opt);
int run_bench(const json& cfg, const Options& opt);

/// Recomputes the checksums listed in a manifest and compares.
int run_verify(const std::string& manifest_path);

/// FNV-1a 64 over the file bytes, hex encoded.
std::string file_checksum(const std::string& path);

}  // namespace simco::cli
