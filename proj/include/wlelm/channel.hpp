#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "wlelm/core.hpp"
#include "wlelm/rng.hpp"
#include "wlelm/waveform.hpp"

namespace wlelm {

// ---------------------------------------------------------------------------
// High-power amplifier
// ---------------------------------------------------------------------------

/// One row of a measured amplifier curve.
struct HpaTablePoint {
  double input_amplitude;
  double output_amplitude;
  double phase_shift_rad;
};

/// Memoryless amplifier: either the Saleh model
///   T(A) = alpha_a A / (1 + beta_a A^2),  phi(A) = alpha_phi A^2 / (1 + beta_phi A^2)
/// or a measured lookup table (linear interpolation, clamped at the last row).
/// The input is scaled by 10^(-ibo_db/20) before the curve is applied.
struct HpaModel {
  enum class Kind { kSaleh, kTable };

  Kind kind = Kind::kSaleh;
  double alpha_a = 2.1587;
  double beta_a = 1.1517;
  double alpha_phi = 4.0033;
  double beta_phi = 9.1040;
  double ibo_db = 0.0;
  std::vector<HpaTablePoint> table;

  double am_am(double a) const;
  double am_pm(double a) const;
  /// Drive level (after back-off) at which AM/AM peaks.
  double saturation_input() const;
  double saturation_output() const { return am_am(saturation_input()); }
  double backoff_scale() const;
  void validate() const;
};

/// Reads whitespace-separated rows "input_amplitude output_amplitude phase_rad";
/// '#' starts a comment. Rows must have strictly increasing input amplitude.
HpaModel load_hpa_table(const std::filesystem::path& path);

ComplexSignal hpa_apply(const ComplexSignal& sig, const HpaModel& model);

/// Linear gain of the ideal pre-distorter + amplifier cascade.
inline constexpr double kPredistortionGain = 1.0;

/// Inverts the amplifier so that hpa_apply(ideal_predistort(x)) = kPredistortionGain * x.
/// Requests beyond the amplifier's peak output are driven at saturation.
ComplexSignal ideal_predistort(const ComplexSignal& sig, const HpaModel& model);

// ---------------------------------------------------------------------------
// Orbit Doppler
// ---------------------------------------------------------------------------

struct DopplerParams {
  /// kAsPrinted: eta = cos(acos((r_e/r_o) * theta_max) - theta_max)
  /// kStandard:  eta = cos(acos((r_e/r_o) * cos(theta_max)) - theta_max)
  enum class EtaForm { kAsPrinted, kStandard };

  double f_c = 2e9;
  double w_s = 7610.0 / (6371e3 + 800e3);
  double theta_max = M_PI / 2.0;
  double r_o = 6371e3 + 800e3;
  double r_e = 6371e3;
  double c = 299792458.0;
  EtaForm eta_form = EtaForm::kStandard;

  double eta() const;
  /// Half-width of the pass during which the satellite is above the horizon.
  double visibility_half_window_s() const;
  void validate() const;
};

double doppler_shift_at(double t, const DopplerParams& p);

/// max |f_d(t)| over t in [0, t_max] (grid search refined by golden section).
double max_abs_doppler(const DopplerParams& p, double t_max);

// ---------------------------------------------------------------------------
// Tapped delay line
// ---------------------------------------------------------------------------

struct TdlTap {
  std::size_t delay_samples = 0;
  cdouble gain{1.0, 0.0};
  double extra_doppler_hz = 0.0;
};

struct TdlProfile {
  std::vector<TdlTap> taps;
  double carrier_offset_phase = 0.0;  // sigma_0, radians
  double carrier_freq_hz = 0.0;       // f_0 relative to baseband

  std::size_t max_delay() const;
  double total_power() const;
  void validate(bool require_normalized = false) const;
};

/// Default profile: three taps with powers {0, -3, -6} dB, equally spaced in
/// whole samples, spacing chosen so the RMS delay spread approximates
/// `delay_spread_ns` (never below one sample). Powers sum to one.
TdlProfile make_tdl_profile(double delay_spread_ns, double sample_rate_hz);

/// Draws complex Gaussian tap gains with the profile's tap powers.
TdlProfile draw_fading_profile(const TdlProfile& mean_profile, Rng& rng);

/// out[n] = sum_i h_i v[n - d_i] exp(-j 2 pi (f_0 + f_d + f_i)(t_n - tau_i) + j sigma_0),
/// with t_n = n / fs. Output length is input length + max delay.
ComplexSignal tdl_apply(const ComplexSignal& sig, const TdlProfile& profile, double fd_hz);
ComplexSignal tdl_apply(const ComplexSignal& sig, const TdlProfile& profile,
                        std::span<const double> fd_hz_per_sample);

// ---------------------------------------------------------------------------
// Frequency offset, phase noise, I/Q imbalance, AWGN
// ---------------------------------------------------------------------------

ComplexSignal freq_offset_apply(const ComplexSignal& sig, double epsilon_hz, double sample_rate_hz);

/// (offset Hz, level dBc/Hz) pairs with strictly increasing offsets.
using PhaseNoiseMask = std::vector<std::pair<double, double>>;

PhaseNoiseMask default_phase_noise_mask();

/// Mask level in dBc/Hz at `f_hz`: linear in log10(f) between points,
/// flat beyond the first and last point.
double phase_noise_mask_level(const PhaseNoiseMask& mask, double f_hz);

/// Real Gaussian phase process of length n whose one-sided PSD (rad^2/Hz)
/// follows the mask, synthesized by spectral shaping of white noise.
std::vector<double> phase_noise_process(const PhaseNoiseMask& mask, std::size_t n,
                                        double sample_rate_hz, Rng& rng);

/// I/Q imbalance followed by the phase-noise rotation e^{j phi[n]}:
///   [(1+eta_a)(xI cos(eta_phi/2) - xQ sin(eta_phi/2))
///    + j (1-eta_a)(xQ cos(eta_phi/2) - xI sin(eta_phi/2))] e^{j phi}
ComplexSignal iq_phase_noise_apply(const ComplexSignal& sig, double eta_a, double eta_phi,
                                   std::span<const double> phi);

/// Circular complex Gaussian noise with variance = mean power / 10^(snr_db/10).
ComplexSignal awgn_apply(const ComplexSignal& sig, double snr_db, Rng& rng);
ComplexSignal add_noise(const ComplexSignal& sig, double noise_variance, Rng& rng);

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

enum class ChannelCase { kCase1 = 1, kCase2 = 2, kCase3 = 3, kCase4 = 4 };

struct ImpairmentConfig {
  HpaModel hpa;
  bool hpa_enabled = true;
  bool ideal_predistortion = false;

  TdlProfile tdl = make_tdl_profile(10.0, 15.36e6);
  bool tdl_enabled = true;
  bool tdl_fading = false;
  double doppler_hz = 1000.0;  // residual Doppler applied inside the TDL

  double residual_offset_hz = 0.0;
  bool offset_enabled = true;

  PhaseNoiseMask phase_noise = default_phase_noise_mask();
  bool phase_noise_enabled = true;

  double eta_a = 0.0;
  double eta_phi = 1.39;
  bool iq_enabled = true;

  double snr_db = 10.0;
  std::uint64_t seed = 1;

  /// Applies the stage toggles of the given baseline case.
  ImpairmentConfig with_case(ChannelCase c) const;
  void validate() const;
};

struct ReceivedFrame {
  ComplexSignal pilot_symbol;
  std::vector<ComplexSignal> data_symbols;
  /// Per-sample noise variance that was added.
  double noise_variance = 0.0;
  /// Samples appended after each symbol by the channel tail.
  std::size_t tail = 0;
};

/// Runs every symbol through HPA -> TDL + Doppler -> frequency offset ->
/// I/Q imbalance & phase noise -> AWGN. Each symbol keeps its own time origin;
/// the phase-noise process runs continuously across the frame. The noise
/// variance is set from the mean power of the noiseless frame.
ReceivedFrame propagate(const Frame& frame, const ImpairmentConfig& cfg);

}  // namespace wlelm
