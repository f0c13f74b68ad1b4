#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlelm/channel.hpp"
#include "wlelm/receivers.hpp"
#include "wlelm/waveform.hpp"

namespace wlelm {

enum class ReceiverKind { kLs, kMmse, kElm, kCelm, kCelmah, kCelmWlls };

std::string_view to_string(ReceiverKind k);
std::optional<ReceiverKind> parse_receiver_kind(std::string_view name);
bool is_learned(ReceiverKind k);
NetworkVariant network_variant(ReceiverKind k);

std::string case_name(ChannelCase c);
std::optional<ChannelCase> parse_case(std::string_view name);

enum class SweepVariable { kSnrDb, kDelaySpreadNs, kEtaPhi, kDopplerHz, kIboDb };

std::string_view to_string(SweepVariable v);
std::optional<SweepVariable> parse_sweep_variable(std::string_view name);

struct ReceiverSpec {
  ReceiverKind kind = ReceiverKind::kCelmWlls;
  /// Channel condition for LS/MMSE. Learned receivers always see case 1.
  ChannelCase channel_case = ChannelCase::kCase1;
  int hidden_nodes = 6;
  double init_variance = kDefaultInitVariance;
  std::size_t taps = 3;
  double ridge = 0.0;
  /// Output label; defaults to the kind name. (label, case) must be unique.
  std::string name;

  std::string label() const;
};

struct ExperimentConfig {
  OfdmParams ofdm;
  int qam_order = 4;
  std::size_t data_symbols = kDefaultDataSymbols;

  ImpairmentConfig channel;
  double delay_spread_ns = 10.0;

  std::vector<ReceiverSpec> receivers;
  ChannelCase case_id = ChannelCase::kCase1;

  SweepVariable sweep_variable = SweepVariable::kSnrDb;
  std::vector<double> sweep_values;
  double fixed_snr_db = 10.0;
  std::size_t n_frames = 200;
  std::uint64_t master_seed = 1;

  /// Impulse-response window of the LS/MMSE pilot estimate; 0 = per-subcarrier LS.
  std::size_t channel_estimate_window = kDefaultEstimateWindow;

  void validate() const;
  /// Channel configuration at one sweep point (before case toggles).
  ImpairmentConfig channel_at(double sweep_value) const;
};

/// Baseline experiment: 1 kHz residual Doppler, 10 ns delay spread, 1.39 rad I/Q
/// phase imbalance, no back-off, 4-QAM, N = 1024, CP 72, L = 6.
ExperimentConfig default_experiment();

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Orbit description for the Doppler profile. Keys (all optional): f_c,
/// altitude_m, earth_radius_m, velocity_mps, theta_max, eta_form
/// ("standard" | "as_printed"). w_s is velocity / (earth radius + altitude).
DopplerParams parse_orbit_config(std::string_view json_text);
DopplerParams load_orbit_config(const std::filesystem::path& path);

/// Samples fed to a learned receiver's tap matrix: n_fft + taps - 1 samples
/// ending at the last body sample, so the first taps - 1 come from the CP.
std::span<const cdouble> tap_window(const ComplexSignal& sym, const OfdmParams& ofdm, std::size_t taps);

struct ResultRecord {
  std::string sweep_variable;
  double sweep_value = 0.0;
  std::string receiver;
  std::string case_id;
  double ber = 0.0;
  std::uint64_t bits_total = 0;
  std::uint64_t bits_error = 0;
  std::uint64_t flops = 0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRecord&) const = default;
};

double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);
std::uint64_t count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

/// |sum z^2| / sum |z|^2, in [0, 1].
double impropriety_coefficient(std::span<const cdouble> sig);

/// Closed-form FLOP count for pilot training plus equalization of one data
/// symbol. Real FLOPs; a complex multiply-add counts 8. See flops.cpp for
/// the per-stage ledger. LS/MMSE assume the default estimate window.
std::uint64_t flops_estimate(ReceiverKind kind, std::size_t n, std::size_t hidden, std::size_t taps);

/// Stable per-trial seed: derive_seed(derive_seed(master, sweep_index), frame_index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t sweep_index, std::size_t frame_index);

/// One frame at one sweep point; one record per configured receiver.
std::vector<ResultRecord> run_trial(const ExperimentConfig& cfg, std::size_t sweep_index,
                                    std::size_t frame_index);

/// Aggregates n_frames trials per sweep point. Trials run in parallel over
/// `jobs` threads (0 = OpenMP default); error counts are summed, so the
/// result does not depend on scheduling.
std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg, int jobs = 0);
/// Single-threaded reference of run_sweep.
std::vector<ResultRecord> run_sweep_serial(const ExperimentConfig& cfg);

/// Merges trial fragments into one record per (sweep value, receiver, case).
std::vector<ResultRecord> aggregate(std::span<const ResultRecord> fragments, std::uint64_t seed);

enum class ExportFormat { kCsv, kJson };

inline constexpr std::string_view kCsvHeader =
    "sweep_variable,sweep_value,receiver,case,ber,bits_total,bits_error,flops,seed";

/// Sorted by (sweep_value, receiver, case).
std::vector<ResultRecord> sorted_records(std::vector<ResultRecord> records);

std::string to_csv(std::span<const ResultRecord> records);
std::string to_json(std::span<const ResultRecord> records);
std::vector<ResultRecord> parse_csv(std::string_view text);
std::vector<ResultRecord> parse_json(std::string_view text);

/// Writes records; refuses an empty list without touching the filesystem.
void export_records(std::span<const ResultRecord> records, ExportFormat format,
                    const std::filesystem::path& path);

}  // namespace wlelm
