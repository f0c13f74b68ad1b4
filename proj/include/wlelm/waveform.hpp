#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wlelm/core.hpp"

namespace wlelm {

/// Gray-coded square QAM with unit mean energy.
///
/// Point index equals the integer value of its bit label (MSB first). Each
/// axis uses the 2-bit Gray sequence 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3
/// (16-QAM; bits 0-1 select I, bits 2-3 select Q). 4-QAM uses one bit per
/// axis with 0 -> +1, so label 00 sits in the first quadrant.
class QamConstellation {
 public:
  static QamConstellation make(int order);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_per_symbol_; }
  const std::vector<cdouble>& points() const { return points_; }
  /// Label of point i as an integer (MSB = first bit on the wire).
  unsigned label(std::size_t i) const { return static_cast<unsigned>(i); }

 private:
  int order_ = 0;
  int bits_per_symbol_ = 0;
  std::vector<cdouble> points_;
};

std::vector<cdouble> qam_map(std::span<const std::uint8_t> bits, const QamConstellation& c);

/// Hard decision: nearest point, ties go to the lowest point index.
Bits qam_demap(std::span<const cdouble> symbols, const QamConstellation& c);

struct OfdmParams {
  std::size_t n_fft = 1024;
  double subcarrier_spacing_hz = 15000.0;
  std::size_t n_cp = 72;
  std::size_t n_occupied = 1024;

  double sample_rate_hz() const { return static_cast<double>(n_fft) * subcarrier_spacing_hz; }
  std::size_t symbol_length() const { return n_fft + n_cp; }
  void validate() const;
};

/// Spreads with an n_occupied-point DFT, maps onto subcarriers 0..n_occupied-1,
/// applies the n_fft-point inverse transform and prepends the cyclic prefix.
ComplexSignal dfts_ofdm_modulate(std::span<const cdouble> qam, const OfdmParams& params);

struct Demodulated {
  std::vector<cdouble> subcarriers;  // occupied bins, frequency domain
  std::vector<cdouble> symbols;      // despread, one per QAM symbol
};

Demodulated dfts_ofdm_demodulate(const ComplexSignal& sig, const OfdmParams& params);

/// The transform stages of demodulation, split so equalizers can work on either side.
std::vector<cdouble> body_to_subcarriers(std::span<const cdouble> body, const OfdmParams& params);
std::vector<cdouble> despread(std::span<const cdouble> subcarriers, const OfdmParams& params);

struct Pilot {
  std::vector<cdouble> qam;
  ComplexSignal symbol;
};

Pilot generate_pilot(std::uint64_t seed, const QamConstellation& c, const OfdmParams& params);

inline constexpr std::size_t kDefaultDataSymbols = 13;

struct Frame {
  ComplexSignal pilot_symbol;
  std::vector<ComplexSignal> data_symbols;
  std::vector<cdouble> pilot_qam;
  Bits tx_bits;
};

/// One pilot symbol followed by n_data random data symbols.
Frame build_frame(std::uint64_t pilot_seed, std::uint64_t data_seed, const QamConstellation& c,
                  const OfdmParams& params, std::size_t n_data = kDefaultDataSymbols);

}  // namespace wlelm
