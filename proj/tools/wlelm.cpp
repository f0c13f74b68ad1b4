// Command-line front end: sweep, flops, doppler.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "wlelm/harness.hpp"

using namespace wlelm;

namespace {

int fail(std::string_view kind, std::string_view msg) {
  std::string line(msg);
  for (auto& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::fprintf(stderr, "error: %.*s: %s\n", static_cast<int>(kind.size()), kind.data(), line.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite post-distortion BER simulator"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "run a BER sweep and export the records");
  std::string config_path, out_path, format = "csv";
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  sweep->add_option("--config", config_path, "experiment JSON")->required();
  sweep->add_option("--out", out_path, "output file")->required();
  sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--seed", seed, "master seed (overrides the config)");
  sweep->add_option("--jobs", jobs, "worker threads, 0 = OpenMP default")->check(CLI::NonNegativeNumber);

  auto* flops = app.add_subcommand("flops", "closed-form FLOP estimate");
  std::string variant;
  std::size_t n = 1024, l = 6, taps = 3;
  flops->add_option("--variant", variant, "LS, MMSE, ELM, CELM, CELMAH or CELM_WLLS")->required();
  flops->add_option("--n", n, "pilot length N")->check(CLI::PositiveNumber);
  flops->add_option("--l", l, "hidden nodes L")->check(CLI::PositiveNumber);
  flops->add_option("--i", taps, "taps I")->check(CLI::PositiveNumber);

  auto* doppler = app.add_subcommand("doppler", "maximum |f_d| over a pass");
  std::string orbit_path;
  double tmax = -1.0;
  doppler->add_option("--orbit", orbit_path, "orbit JSON")->required();
  doppler->add_option("--tmax", tmax, "search window [0, tmax] in s; default: horizon to zenith");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*sweep) {
      auto cfg = load_experiment_config(config_path);
      if (seed) cfg.master_seed = *seed;
      const auto records = run_sweep(cfg, jobs);
      export_records(records, format == "json" ? ExportFormat::kJson : ExportFormat::kCsv, out_path);
      std::printf("%zu records -> %s\n", records.size(), out_path.c_str());
    } else if (*flops) {
      const auto kind = parse_receiver_kind(variant);
      if (!kind) return fail("input", "unknown variant '" + variant + "'");
      std::printf("%llu\n", static_cast<unsigned long long>(flops_estimate(*kind, n, l, taps)));
    } else if (*doppler) {
      const auto orbit = load_orbit_config(orbit_path);
      const double window = tmax >= 0.0 ? tmax : orbit.visibility_half_window_s();
      std::printf("%.6f\n", max_abs_doppler(orbit, window));
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
