#include <algorithm>
#include <exception>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wlelm/harness.hpp"
#include "wlelm/rng.hpp"

namespace wlelm {

std::uint64_t count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.size() != rx.size()) {
    throw ContractViolation("bit streams differ in length (" + std::to_string(tx.size()) + " vs " +
                            std::to_string(rx.size()) + ")");
  }
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] & 1U) != (rx[i] & 1U);
  return errors;
}

double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.empty() && rx.empty()) throw InputError("BER of empty bit streams is undefined");
  const auto errors = count_bit_errors(tx, rx);
  return static_cast<double>(errors) / static_cast<double>(tx.size());
}

double impropriety_coefficient(std::span<const cdouble> sig) {
  if (sig.empty()) throw InputError("impropriety of an empty signal is undefined");
  cdouble pseudo{};
  double power = 0.0;
  for (const auto& z : sig) {
    pseudo += z * z;
    power += std::norm(z);
  }
  if (!(power > 0.0)) throw InputError("impropriety of a zero-power signal is undefined");
  return std::min(1.0, std::abs(pseudo) / power);
}

// The oldest tap reaches I - 1 samples back into the cyclic prefix, so row k
// holds the current body sample and its I - 1 predecessors.
std::span<const cdouble> tap_window(const ComplexSignal& sym, const OfdmParams& ofdm, std::size_t taps) {
  if (taps - 1 > ofdm.n_cp) {
    throw InputError("taps - 1 (" + std::to_string(taps - 1) + ") exceeds the cyclic prefix (" +
                     std::to_string(ofdm.n_cp) + ")");
  }
  return {sym.samples.data() + ofdm.n_cp - (taps - 1), ofdm.n_fft + taps - 1};
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t sweep_index, std::size_t frame_index) {
  return derive_seed(derive_seed(master_seed, sweep_index), frame_index);
}

namespace {

// Seed streams within one trial.
constexpr std::uint64_t kPilotStream = 10;
constexpr std::uint64_t kDataStream = 11;
constexpr std::uint64_t kChannelStream = 12;
constexpr std::uint64_t kNetworkStream = 13;

std::span<const cdouble> body_of(const ComplexSignal& sym, const OfdmParams& ofdm) {
  return {sym.samples.data() + ofdm.n_cp, ofdm.n_fft};
}

// Received symbol trimmed to the CP + body window the OFDM demodulator expects.
ComplexSignal ofdm_window(const ComplexSignal& sym, const OfdmParams& ofdm) {
  return {std::vector<cdouble>(sym.samples.begin(), sym.samples.begin() + static_cast<std::ptrdiff_t>(ofdm.symbol_length())),
          sym.sample_rate_hz};
}

Bits detect_baseline(const ReceiverSpec& spec, const Frame& tx, const ReceivedFrame& rx,
                     const ExperimentConfig& cfg, const QamConstellation& qam) {
  const auto& ofdm = cfg.ofdm;
  const auto tx_pilot = dfts_ofdm_demodulate(tx.pilot_symbol, ofdm).subcarriers;
  const auto rx_pilot = dfts_ofdm_demodulate(ofdm_window(rx.pilot_symbol, ofdm), ofdm).subcarriers;
  const auto est = cfg.channel_estimate_window > 0
                       ? windowed_ls_channel_estimate(rx_pilot, tx_pilot, rx.noise_variance, cfg.channel_estimate_window)
                       : ls_channel_estimate(rx_pilot, tx_pilot, rx.noise_variance);

  Bits bits;
  bits.reserve(tx.tx_bits.size());
  for (const auto& sym : rx.data_symbols) {
    const auto y = dfts_ofdm_demodulate(ofdm_window(sym, ofdm), ofdm).subcarriers;
    const auto eq = spec.kind == ReceiverKind::kLs ? equalize_ls(y, est) : equalize_mmse(y, est);
    const auto symbols = despread(eq.values, ofdm);
    const auto b = qam_demap(symbols, qam);
    bits.insert(bits.end(), b.begin(), b.end());
  }
  return bits;
}

TrainedNetwork train_receiver(const ReceiverSpec& spec, const TapDelayMatrix& taps, const ComplexVector& target,
                              std::uint64_t seed) {
  TrainOptions opts;
  opts.variant = network_variant(spec.kind);
  opts.hidden_nodes = spec.hidden_nodes;
  opts.init_variance = spec.init_variance;
  opts.ridge = spec.ridge;
  opts.seed = seed;
  try {
    return train(taps, target, opts);
  } catch (const SingularSystem&) {
    if (opts.variant != NetworkVariant::kCelmWlls || opts.ridge > 0.0) throw;
  }
  // Degenerate pilot block: retry with the documented fallback ridge.
  TrainedNetwork probe = train(taps, target, {.variant = NetworkVariant::kCelm,
                                              .hidden_nodes = opts.hidden_nodes,
                                              .init_variance = opts.init_variance,
                                              .seed = seed});
  const ComplexMatrix H = hidden_layer(taps.Z, probe.W, probe.b, opts.activation);
  opts.ridge = fallback_ridge(compute_stats(H, target));
  return train(taps, target, opts);
}

Bits detect_learned(const ReceiverSpec& spec, const Frame& tx, const ReceivedFrame& rx,
                    const ExperimentConfig& cfg, const QamConstellation& qam, std::uint64_t seed) {
  const auto& ofdm = cfg.ofdm;
  const std::size_t n = ofdm.n_fft;

  const ComplexVector target = as_vector(body_of(tx.pilot_symbol, ofdm));
  const auto taps = build_tap_matrix(tap_window(rx.pilot_symbol, ofdm, spec.taps), n, spec.taps);
  const TrainedNetwork net = train_receiver(spec, taps, target, seed);

  Bits bits;
  bits.reserve(tx.tx_bits.size());
  for (const auto& sym : rx.data_symbols) {
    const ComplexVector body = equalize_ml(tap_window(sym, ofdm, spec.taps), net, n);
    const std::vector<cdouble> est(body.data(), body.data() + body.size());
    const auto symbols = despread(body_to_subcarriers(est, ofdm), ofdm);
    const auto b = qam_demap(symbols, qam);
    bits.insert(bits.end(), b.begin(), b.end());
  }
  return bits;
}

}  // namespace

std::vector<ResultRecord> run_trial(const ExperimentConfig& cfg, std::size_t sweep_index, std::size_t frame_index) {
  if (sweep_index >= cfg.sweep_values.size()) throw ContractViolation("sweep index out of range");
  const double value = cfg.sweep_values[sweep_index];
  const std::uint64_t seed = trial_seed(cfg.master_seed, sweep_index, frame_index);
  const auto qam = QamConstellation::make(cfg.qam_order);
  const Frame frame = build_frame(derive_seed(seed, kPilotStream), derive_seed(seed, kDataStream), qam, cfg.ofdm,
                                  cfg.data_symbols);

  ImpairmentConfig channel = cfg.channel_at(value);
  channel.seed = derive_seed(seed, kChannelStream);

  // Every case shares the same noise and phase-noise draws.
  std::map<ChannelCase, ReceivedFrame> received;
  const auto rx_for = [&](ChannelCase c) -> const ReceivedFrame& {
    auto it = received.find(c);
    if (it == received.end()) it = received.emplace(c, propagate(frame, channel.with_case(c))).first;
    return it->second;
  };

  std::vector<ResultRecord> out;
  out.reserve(cfg.receivers.size());
  for (const auto& spec : cfg.receivers) {
    const ChannelCase c = is_learned(spec.kind) ? ChannelCase::kCase1 : spec.channel_case;
    const ReceivedFrame& rx = rx_for(c);
    const Bits bits = is_learned(spec.kind)
                          ? detect_learned(spec, frame, rx, cfg, qam, derive_seed(seed, kNetworkStream))
                          : detect_baseline(spec, frame, rx, cfg, qam);
    ResultRecord r;
    r.sweep_variable = std::string(to_string(cfg.sweep_variable));
    r.sweep_value = value;
    r.receiver = spec.label();
    r.case_id = case_name(c);
    r.bits_total = frame.tx_bits.size();
    r.bits_error = count_bit_errors(frame.tx_bits, bits);
    r.ber = static_cast<double>(r.bits_error) / static_cast<double>(r.bits_total);
    r.flops = flops_estimate(spec.kind, cfg.ofdm.n_occupied, static_cast<std::size_t>(spec.hidden_nodes), spec.taps);
    r.seed = seed;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRecord> aggregate(std::span<const ResultRecord> fragments, std::uint64_t seed) {
  std::map<std::tuple<double, std::string, std::string>, ResultRecord> merged;
  for (const auto& f : fragments) {
    auto [it, inserted] = merged.try_emplace({f.sweep_value, f.receiver, f.case_id}, f);
    if (!inserted) {
      it->second.bits_total += f.bits_total;
      it->second.bits_error += f.bits_error;
    }
  }
  std::vector<ResultRecord> out;
  out.reserve(merged.size());
  for (auto& [key, r] : merged) {
    r.ber = static_cast<double>(r.bits_error) / static_cast<double>(r.bits_total);
    r.seed = seed;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRecord> run_sweep_serial(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRecord> fragments;
  for (std::size_t s = 0; s < cfg.sweep_values.size(); ++s) {
    for (std::size_t f = 0; f < cfg.n_frames; ++f) {
      auto part = run_trial(cfg, s, f);
      fragments.insert(fragments.end(), part.begin(), part.end());
    }
  }
  return aggregate(fragments, cfg.master_seed);
}

std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const std::size_t n_points = cfg.sweep_values.size();
  const auto n_tasks = static_cast<std::int64_t>(n_points * cfg.n_frames);
  std::vector<std::vector<ResultRecord>> parts(static_cast<std::size_t>(n_tasks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_tasks));

#ifdef _OPENMP
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t t = 0; t < n_tasks; ++t) {
    const auto task = static_cast<std::size_t>(t);
    try {
      parts[task] = run_trial(cfg, task / cfg.n_frames, task % cfg.n_frames);
    } catch (...) {
      errors[task] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ResultRecord> fragments;
  for (auto& p : parts) fragments.insert(fragments.end(), p.begin(), p.end());
  return aggregate(fragments, cfg.master_seed);
}

}  // namespace wlelm
