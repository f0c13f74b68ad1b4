#include "wlelm/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wlelm/fft.hpp"

namespace wlelm {

// ---------------------------------------------------------------------------
// HPA

double HpaModel::am_am(double a) const {
  if (kind == Kind::kSaleh) return alpha_a * a / (1.0 + beta_a * a * a);
  if (a <= table.front().input_amplitude) {
    // Linear ramp from the origin to the first row.
    const auto& p = table.front();
    return p.input_amplitude > 0.0 ? p.output_amplitude * a / p.input_amplitude : p.output_amplitude;
  }
  if (a >= table.back().input_amplitude) return table.back().output_amplitude;
  const auto hi = std::upper_bound(table.begin(), table.end(), a, [](double v, const HpaTablePoint& p) {
    return v < p.input_amplitude;
  });
  const auto lo = hi - 1;
  const double w = (a - lo->input_amplitude) / (hi->input_amplitude - lo->input_amplitude);
  return lo->output_amplitude + w * (hi->output_amplitude - lo->output_amplitude);
}

double HpaModel::am_pm(double a) const {
  if (kind == Kind::kSaleh) return alpha_phi * a * a / (1.0 + beta_phi * a * a);
  if (a <= table.front().input_amplitude) {
    const auto& p = table.front();
    return p.input_amplitude > 0.0 ? p.phase_shift_rad * a / p.input_amplitude : p.phase_shift_rad;
  }
  if (a >= table.back().input_amplitude) return table.back().phase_shift_rad;
  const auto hi = std::upper_bound(table.begin(), table.end(), a, [](double v, const HpaTablePoint& p) {
    return v < p.input_amplitude;
  });
  const auto lo = hi - 1;
  const double w = (a - lo->input_amplitude) / (hi->input_amplitude - lo->input_amplitude);
  return lo->phase_shift_rad + w * (hi->phase_shift_rad - lo->phase_shift_rad);
}

double HpaModel::saturation_input() const {
  if (kind == Kind::kSaleh) return 1.0 / std::sqrt(beta_a);
  const auto it = std::max_element(table.begin(), table.end(), [](const auto& a, const auto& b) {
    return a.output_amplitude < b.output_amplitude;
  });
  return it->input_amplitude;
}

double HpaModel::backoff_scale() const { return std::pow(10.0, -ibo_db / 20.0); }

void HpaModel::validate() const {
  if (!(ibo_db >= 0.0)) throw InputError("ibo_db must be >= 0");
  if (kind == Kind::kSaleh) {
    if (!(beta_a > 0.0) || !(alpha_a > 0.0)) throw InputError("Saleh alpha_a and beta_a must be positive");
    if (!(beta_phi >= 0.0)) throw InputError("Saleh beta_phi must be >= 0");
    return;
  }
  if (table.empty()) throw InputError("HPA table is empty");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].input_amplitude < 0.0 || table[i].output_amplitude < 0.0) {
      throw InputError("HPA table amplitudes must be nonnegative");
    }
    if (i > 0 && !(table[i].input_amplitude > table[i - 1].input_amplitude)) {
      throw InputError("HPA table input amplitudes must be strictly increasing");
    }
  }
}

HpaModel load_hpa_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open HPA table '" + path.string() + "'");
  HpaModel m;
  m.kind = HpaModel::Kind::kTable;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    HpaTablePoint p{};
    if (!(row >> p.input_amplitude)) continue;
    if (!(row >> p.output_amplitude >> p.phase_shift_rad)) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
    }
    m.table.push_back(p);
  }
  m.validate();
  return m;
}

ComplexSignal hpa_apply(const ComplexSignal& sig, const HpaModel& model) {
  model.validate();
  const double scale = model.backoff_scale();
  ComplexSignal out{std::vector<cdouble>(sig.size()), sig.sample_rate_hz};
  for (std::size_t n = 0; n < sig.size(); ++n) {
    const double a = std::abs(sig.samples[n]) * scale;
    if (a == 0.0) continue;
    const double theta = std::arg(sig.samples[n]);
    out.samples[n] = std::polar(model.am_am(a), theta + model.am_pm(a));
  }
  return out;
}

namespace {

// Drive level u in [0, u_sat] with T(u) = target (target < T(u_sat)).
double invert_am_am(const HpaModel& m, double target, double u_sat) {
  if (m.kind == HpaModel::Kind::kSaleh) {
    // beta_a target u^2 - alpha_a u + target = 0, smaller root.
    const double disc = m.alpha_a * m.alpha_a - 4.0 * m.beta_a * target * target;
    return 2.0 * target / (m.alpha_a + std::sqrt(std::max(disc, 0.0)));
  }
  double lo = 0.0;
  double hi = u_sat;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * u_sat; ++it) {
    const double mid = 0.5 * (lo + hi);
    (m.am_am(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ComplexSignal ideal_predistort(const ComplexSignal& sig, const HpaModel& model) {
  model.validate();
  const double scale = model.backoff_scale();
  const double u_sat = model.saturation_input();
  const double t_max = model.am_am(u_sat);
  ComplexSignal out{std::vector<cdouble>(sig.size()), sig.sample_rate_hz};
  for (std::size_t n = 0; n < sig.size(); ++n) {
    const double target = kPredistortionGain * std::abs(sig.samples[n]);
    if (target == 0.0) continue;
    const double u = target >= t_max ? u_sat : invert_am_am(model, target, u_sat);
    const double theta = std::arg(sig.samples[n]);
    out.samples[n] = std::polar(u / scale, theta - model.am_pm(u));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Doppler

double DopplerParams::eta() const {
  const double ratio = r_e / r_o;
  const double arg = eta_form == EtaForm::kAsPrinted ? ratio * theta_max : ratio * std::cos(theta_max);
  if (arg < -1.0 || arg > 1.0) {
    throw DomainError("eta(theta_max): acos argument " + std::to_string(arg) + " outside [-1, 1]");
  }
  return std::cos(std::acos(arg) - theta_max);
}

double DopplerParams::visibility_half_window_s() const { return std::acos(r_e / r_o) / w_s; }

void DopplerParams::validate() const {
  if (!(r_e > 0.0) || !(r_o > r_e)) throw InputError("orbit requires r_o > r_e > 0");
  if (!(w_s > 0.0)) throw InputError("w_s must be positive");
  if (!(theta_max > 0.0) || theta_max > M_PI / 2.0 + 1e-12) {
    throw InputError("theta_max must lie in (0, pi/2]");
  }
  if (!(c > 0.0) || !(f_c > 0.0)) throw InputError("c and f_c must be positive");
}

double doppler_shift_at(double t, const DopplerParams& p) {
  const double eta = p.eta();
  const double wt = p.w_s * t;
  const double radicand = p.r_e * p.r_e + p.r_o * p.r_o - 2.0 * p.r_e * p.r_o * std::cos(wt) * eta;
  if (!(radicand > 0.0)) throw DomainError("Doppler denominator is not positive");
  return -p.f_c * p.w_s * p.r_e * p.r_o * std::sin(wt) * eta / (p.c * std::sqrt(radicand));
}

double max_abs_doppler(const DopplerParams& p, double t_max) {
  p.validate();
  if (!(t_max > 0.0)) throw InputError("t_max must be positive");
  constexpr int kGrid = 4096;
  const auto f = [&](double t) { return std::abs(doppler_shift_at(t, p)); };
  int best = 0;
  double best_v = -1.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = f(t_max * i / kGrid);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = t_max * std::max(best - 1, 0) / kGrid;
  double b = t_max * std::min(best + 1, kGrid) / kGrid;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  for (int it = 0; it < 100; ++it) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return std::max(best_v, f(0.5 * (a + b)));
}

// ---------------------------------------------------------------------------
// TDL

std::size_t TdlProfile::max_delay() const {
  std::size_t d = 0;
  for (const auto& t : taps) d = std::max(d, t.delay_samples);
  return d;
}

double TdlProfile::total_power() const {
  double p = 0.0;
  for (const auto& t : taps) p += std::norm(t.gain);
  return p;
}

void TdlProfile::validate(bool require_normalized) const {
  if (taps.empty()) throw InputError("TDL profile has no taps");
  for (std::size_t i = 1; i < taps.size(); ++i) {
    if (taps[i].delay_samples < taps[i - 1].delay_samples) {
      throw InputError("TDL tap delays must be nondecreasing");
    }
  }
  if (require_normalized && std::abs(total_power() - 1.0) > 1e-9) {
    throw InputError("TDL profile is not power-normalized");
  }
}

TdlProfile make_tdl_profile(double delay_spread_ns, double sample_rate_hz) {
  if (!(delay_spread_ns >= 0.0)) throw InputError("delay spread must be >= 0");
  if (!(sample_rate_hz > 0.0)) throw InputError("sample rate must be positive");
  constexpr std::array<double, 3> kPowersDb = {0.0, -3.0, -6.0};
  std::array<double, 3> power{};
  double total = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    power[i] = std::pow(10.0, kPowersDb[i] / 10.0);
    total += power[i];
  }
  // RMS delay spread of the profile with unit tap spacing.
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    power[i] /= total;
    mean += power[i] * static_cast<double>(i);
    second += power[i] * static_cast<double>(i * i);
  }
  const double rms_unit = std::sqrt(second - mean * mean);
  const double spacing_samples = delay_spread_ns * 1e-9 * sample_rate_hz / rms_unit;
  const auto spacing = static_cast<std::size_t>(std::max(1.0, std::round(spacing_samples)));

  TdlProfile p;
  for (std::size_t i = 0; i < power.size(); ++i) {
    p.taps.push_back({i * spacing, cdouble(std::sqrt(power[i]), 0.0), 0.0});
  }
  return p;
}

TdlProfile draw_fading_profile(const TdlProfile& mean_profile, Rng& rng) {
  TdlProfile p = mean_profile;
  for (auto& t : p.taps) t.gain = rng.complex_normal(std::norm(t.gain));
  return p;
}

ComplexSignal tdl_apply(const ComplexSignal& sig, const TdlProfile& profile,
                        std::span<const double> fd_hz_per_sample) {
  profile.validate();
  if (!(sig.sample_rate_hz > 0.0)) throw InputError("signal has no sample rate");
  const std::size_t n_in = sig.size();
  const std::size_t n_out = n_in + profile.max_delay();
  if (profile.max_delay() >= n_in) throw ContractViolation("tap delay exceeds signal length");
  if (fd_hz_per_sample.size() != n_out) {
    throw ContractViolation("Doppler trajectory must cover all " + std::to_string(n_out) + " output samples");
  }
  const double fs = sig.sample_rate_hz;
  ComplexSignal out{std::vector<cdouble>(n_out), fs};
  for (const auto& tap : profile.taps) {
    const double tau = static_cast<double>(tap.delay_samples) / fs;
    for (std::size_t k = 0; k < n_in; ++k) {
      const std::size_t n = k + tap.delay_samples;
      const double t = static_cast<double>(n) / fs;
      const double f = profile.carrier_freq_hz + fd_hz_per_sample[n] + tap.extra_doppler_hz;
      const double phase = -2.0 * M_PI * f * (t - tau) + profile.carrier_offset_phase;
      out.samples[n] += tap.gain * sig.samples[k] * std::polar(1.0, phase);
    }
  }
  return out;
}

ComplexSignal tdl_apply(const ComplexSignal& sig, const TdlProfile& profile, double fd_hz) {
  const std::vector<double> fd(sig.size() + profile.max_delay(), fd_hz);
  return tdl_apply(sig, profile, fd);
}

// ---------------------------------------------------------------------------
// Frequency offset, phase noise, I/Q, AWGN

ComplexSignal freq_offset_apply(const ComplexSignal& sig, double epsilon_hz, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw InputError("sample rate must be positive");
  ComplexSignal out{sig.samples, sig.sample_rate_hz};
  if (epsilon_hz == 0.0) return out;
  for (std::size_t n = 0; n < out.size(); ++n) {
    out.samples[n] *= std::polar(1.0, -2.0 * M_PI * epsilon_hz * static_cast<double>(n) / sample_rate_hz);
  }
  return out;
}

PhaseNoiseMask default_phase_noise_mask() {
  return {{100.0, -30.0}, {1e3, -60.0}, {1e4, -75.0}, {1e5, -90.0}, {1e6, -96.0}};
}

namespace {

void validate_mask(const PhaseNoiseMask& mask) {
  if (mask.empty()) throw InputError("phase-noise mask is empty");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!(mask[i].first > 0.0)) throw InputError("phase-noise mask offsets must be positive");
    if (i > 0 && !(mask[i].first > mask[i - 1].first)) {
      throw InputError("phase-noise mask offsets must be strictly increasing");
    }
  }
}

}  // namespace

double phase_noise_mask_level(const PhaseNoiseMask& mask, double f_hz) {
  if (f_hz <= mask.front().first) return mask.front().second;
  if (f_hz >= mask.back().first) return mask.back().second;
  std::size_t i = 1;
  while (mask[i].first < f_hz) ++i;
  const auto& [f0, l0] = mask[i - 1];
  const auto& [f1, l1] = mask[i];
  const double w = (std::log10(f_hz) - std::log10(f0)) / (std::log10(f1) - std::log10(f0));
  return l0 + w * (l1 - l0);
}

std::vector<double> phase_noise_process(const PhaseNoiseMask& mask, std::size_t n,
                                        double sample_rate_hz, Rng& rng) {
  validate_mask(mask);
  if (!(sample_rate_hz > 0.0)) throw InputError("sample rate must be positive");
  std::vector<double> phi(n, 0.0);
  if (n < 2) return phi;

  const double df = sample_rate_hz / static_cast<double>(n);
  std::vector<cdouble> spectrum(n, cdouble{});
  // Bin k and its mirror n-k each carry half of the one-sided power S(f_k) df.
  for (std::size_t k = 1; 2 * k <= n; ++k) {
    const double s = std::pow(10.0, phase_noise_mask_level(mask, static_cast<double>(k) * df) / 10.0);
    const double half = s * df / 2.0;
    if (2 * k == n) {
      spectrum[k] = std::sqrt(half) * rng.normal();
    } else {
      spectrum[k] = rng.complex_normal(half);
      spectrum[n - k] = std::conj(spectrum[k]);
    }
  }
  const auto time = fft::inverse(spectrum);
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) phi[i] = scale * time[i].real();
  return phi;
}

ComplexSignal iq_phase_noise_apply(const ComplexSignal& sig, double eta_a, double eta_phi,
                                   std::span<const double> phi) {
  if (phi.size() != sig.size()) {
    throw ContractViolation("phase trajectory has " + std::to_string(phi.size()) +
                            " samples, signal has " + std::to_string(sig.size()));
  }
  const double c = std::cos(eta_phi / 2.0);
  const double s = std::sin(eta_phi / 2.0);
  ComplexSignal out{std::vector<cdouble>(sig.size()), sig.sample_rate_hz};
  for (std::size_t n = 0; n < sig.size(); ++n) {
    const double xi = sig.samples[n].real();
    const double xq = sig.samples[n].imag();
    const cdouble imbalanced((1.0 + eta_a) * (xi * c - xq * s), (1.0 - eta_a) * (xq * c - xi * s));
    out.samples[n] = phi[n] == 0.0 ? imbalanced : imbalanced * std::polar(1.0, phi[n]);
  }
  return out;
}

ComplexSignal add_noise(const ComplexSignal& sig, double noise_variance, Rng& rng) {
  ComplexSignal out{sig.samples, sig.sample_rate_hz};
  for (auto& z : out.samples) z += rng.complex_normal(noise_variance);
  return out;
}

ComplexSignal awgn_apply(const ComplexSignal& sig, double snr_db, Rng& rng) {
  const double power = sig.mean_power();
  if (!(power > 0.0)) throw InputError("cannot set SNR on a zero-power signal");
  return add_noise(sig, power / std::pow(10.0, snr_db / 10.0), rng);
}

// ---------------------------------------------------------------------------
// Composition

ImpairmentConfig ImpairmentConfig::with_case(ChannelCase c) const {
  ImpairmentConfig out = *this;
  switch (c) {
    case ChannelCase::kCase1:
      out.ideal_predistortion = false;
      break;
    case ChannelCase::kCase2:
      out.ideal_predistortion = true;
      break;
    case ChannelCase::kCase3:
      out.ideal_predistortion = true;
      out.iq_enabled = false;
      out.phase_noise_enabled = false;
      break;
    case ChannelCase::kCase4:
      out.ideal_predistortion = true;
      out.iq_enabled = false;
      out.phase_noise_enabled = false;
      out.tdl_enabled = false;
      out.offset_enabled = false;
      break;
  }
  return out;
}

void ImpairmentConfig::validate() const {
  hpa.validate();
  tdl.validate();
  if (!std::isfinite(snr_db)) throw InputError("snr_db must be finite");
  if (phase_noise_enabled && phase_noise.empty()) throw InputError("phase-noise mask is empty");
}

ReceivedFrame propagate(const Frame& frame, const ImpairmentConfig& cfg) {
  cfg.validate();
  Rng pn_rng(derive_seed(cfg.seed, 1));
  Rng noise_rng(derive_seed(cfg.seed, 2));
  Rng fading_rng(derive_seed(cfg.seed, 3));

  const TdlProfile profile = cfg.tdl_fading ? draw_fading_profile(cfg.tdl, fading_rng) : cfg.tdl;

  std::vector<const ComplexSignal*> symbols;
  symbols.push_back(&frame.pilot_symbol);
  for (const auto& s : frame.data_symbols) symbols.push_back(&s);

  ReceivedFrame rx;
  rx.tail = cfg.tdl_enabled ? profile.max_delay() : 0;

  std::vector<ComplexSignal> out;
  out.reserve(symbols.size());
  for (const auto* sym : symbols) {
    ComplexSignal x = *sym;
    if (cfg.hpa_enabled) {
      if (cfg.ideal_predistortion) x = ideal_predistort(x, cfg.hpa);
      x = hpa_apply(x, cfg.hpa);
    }
    if (cfg.tdl_enabled) x = tdl_apply(x, profile, cfg.doppler_hz);
    if (cfg.offset_enabled && cfg.residual_offset_hz != 0.0) {
      x = freq_offset_apply(x, cfg.residual_offset_hz, x.sample_rate_hz);
    }
    out.push_back(std::move(x));
  }

  std::size_t total = 0;
  for (const auto& s : out) total += s.size();
  std::vector<double> phi;
  if (cfg.phase_noise_enabled) {
    phi = phase_noise_process(cfg.phase_noise, total, out.front().sample_rate_hz, pn_rng);
  } else {
    phi.assign(total, 0.0);
  }

  const double eta_a = cfg.iq_enabled ? cfg.eta_a : 0.0;
  const double eta_phi = cfg.iq_enabled ? cfg.eta_phi : 0.0;
  double energy = 0.0;
  std::size_t offset = 0;
  for (auto& s : out) {
    if (cfg.iq_enabled || cfg.phase_noise_enabled) {
      s = iq_phase_noise_apply(s, eta_a, eta_phi, std::span<const double>(phi.data() + offset, s.size()));
    }
    offset += s.size();
    energy += s.energy();
  }

  if (!(energy > 0.0)) throw InputError("cannot set SNR on a zero-power frame");
  rx.noise_variance = energy / static_cast<double>(total) / std::pow(10.0, cfg.snr_db / 10.0);
  for (auto& s : out) s = add_noise(s, rx.noise_variance, noise_rng);

  rx.pilot_symbol = std::move(out.front());
  rx.data_symbols.assign(std::make_move_iterator(out.begin() + 1), std::make_move_iterator(out.end()));
  return rx;
}

}  // namespace wlelm
