#include "wlelm/waveform.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "wlelm/fft.hpp"
#include "wlelm/rng.hpp"

namespace wlelm {
namespace {

// 2-bit Gray PAM levels indexed by bit pair value.
constexpr std::array<double, 4> kPam4 = {3.0, 1.0, -3.0, -1.0};

}  // namespace

QamConstellation QamConstellation::make(int order) {
  QamConstellation c;
  c.order_ = order;
  if (order == 4) {
    c.bits_per_symbol_ = 2;
    const double a = 1.0 / std::sqrt(2.0);
    for (unsigned label = 0; label < 4; ++label) {
      const double i = (label & 2U) ? -a : a;
      const double q = (label & 1U) ? -a : a;
      c.points_.emplace_back(i, q);
    }
  } else if (order == 16) {
    c.bits_per_symbol_ = 4;
    const double a = 1.0 / std::sqrt(10.0);
    for (unsigned label = 0; label < 16; ++label) {
      c.points_.emplace_back(a * kPam4[label >> 2], a * kPam4[label & 3U]);
    }
  } else {
    throw InputError("unsupported QAM order " + std::to_string(order) + " (expected 4 or 16)");
  }
  return c;
}

std::vector<cdouble> qam_map(std::span<const std::uint8_t> bits, const QamConstellation& c) {
  const auto k = static_cast<std::size_t>(c.bits_per_symbol());
  if (bits.size() % k != 0) {
    throw InputError("bit count " + std::to_string(bits.size()) + " is not a multiple of " +
                     std::to_string(k));
  }
  std::vector<cdouble> out;
  out.reserve(bits.size() / k);
  for (std::size_t i = 0; i < bits.size(); i += k) {
    unsigned label = 0;
    for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[i + b] & 1U);
    out.push_back(c.points()[label]);
  }
  return out;
}

Bits qam_demap(std::span<const cdouble> symbols, const QamConstellation& c) {
  const auto k = static_cast<std::size_t>(c.bits_per_symbol());
  const auto& pts = c.points();
  Bits out;
  out.reserve(symbols.size() * k);
  for (const auto& z : symbols) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const double d = std::norm(z - pts[p]);
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    const unsigned label = c.label(best);
    for (std::size_t b = 0; b < k; ++b) {
      out.push_back(static_cast<std::uint8_t>((label >> (k - 1 - b)) & 1U));
    }
  }
  return out;
}

void OfdmParams::validate() const {
  if (n_fft < 1) throw InputError("n_fft must be positive");
  if (n_cp >= n_fft) throw InputError("n_cp must be smaller than n_fft");
  if (n_occupied < 1 || n_occupied > n_fft) throw InputError("n_occupied must lie in [1, n_fft]");
  if (!(subcarrier_spacing_hz > 0.0)) throw InputError("subcarrier spacing must be positive");
}

ComplexSignal dfts_ofdm_modulate(std::span<const cdouble> qam, const OfdmParams& params) {
  params.validate();
  if (qam.size() != params.n_occupied) {
    throw ContractViolation("modulator expects " + std::to_string(params.n_occupied) +
                            " QAM symbols, got " + std::to_string(qam.size()));
  }
  const auto spread = fft::forward(qam);
  std::vector<cdouble> grid(params.n_fft, cdouble{});
  std::copy(spread.begin(), spread.end(), grid.begin());
  const auto body = fft::inverse(grid);

  ComplexSignal sig;
  sig.sample_rate_hz = params.sample_rate_hz();
  sig.samples.reserve(params.symbol_length());
  sig.samples.insert(sig.samples.end(), body.end() - static_cast<std::ptrdiff_t>(params.n_cp),
                     body.end());
  sig.samples.insert(sig.samples.end(), body.begin(), body.end());
  return sig;
}

std::vector<cdouble> body_to_subcarriers(std::span<const cdouble> body, const OfdmParams& params) {
  if (body.size() != params.n_fft) {
    throw ContractViolation("symbol body must have n_fft = " + std::to_string(params.n_fft) +
                            " samples, got " + std::to_string(body.size()));
  }
  auto bins = fft::forward(body);
  bins.resize(params.n_occupied);
  return bins;
}

std::vector<cdouble> despread(std::span<const cdouble> subcarriers, const OfdmParams& params) {
  if (subcarriers.size() != params.n_occupied) {
    throw ContractViolation("expected " + std::to_string(params.n_occupied) + " subcarriers");
  }
  return fft::inverse(subcarriers);
}

Demodulated dfts_ofdm_demodulate(const ComplexSignal& sig, const OfdmParams& params) {
  params.validate();
  if (sig.size() != params.symbol_length()) {
    throw ContractViolation("demodulator expects " + std::to_string(params.symbol_length()) +
                            " samples, got " + std::to_string(sig.size()));
  }
  const std::span<const cdouble> body(sig.samples.data() + params.n_cp, params.n_fft);
  Demodulated d;
  d.subcarriers = body_to_subcarriers(body, params);
  d.symbols = despread(d.subcarriers, params);
  return d;
}

Pilot generate_pilot(std::uint64_t seed, const QamConstellation& c, const OfdmParams& params) {
  Rng rng(seed);
  Bits bits(params.n_occupied * static_cast<std::size_t>(c.bits_per_symbol()));
  for (auto& b : bits) b = rng.bit();
  Pilot p;
  p.qam = qam_map(bits, c);
  p.symbol = dfts_ofdm_modulate(p.qam, params);
  return p;
}

Frame build_frame(std::uint64_t pilot_seed, std::uint64_t data_seed, const QamConstellation& c,
                  const OfdmParams& params, std::size_t n_data) {
  Frame f;
  auto pilot = generate_pilot(pilot_seed, c, params);
  f.pilot_symbol = std::move(pilot.symbol);
  f.pilot_qam = std::move(pilot.qam);

  const std::size_t bits_per_symbol = params.n_occupied * static_cast<std::size_t>(c.bits_per_symbol());
  Rng rng(data_seed);
  f.tx_bits.resize(bits_per_symbol * n_data);
  for (auto& b : f.tx_bits) b = rng.bit();
  f.data_symbols.reserve(n_data);
  for (std::size_t s = 0; s < n_data; ++s) {
    const std::span<const std::uint8_t> chunk(f.tx_bits.data() + s * bits_per_symbol, bits_per_symbol);
    f.data_symbols.push_back(dfts_ofdm_modulate(qam_map(chunk, c), params));
  }
  return f;
}

}  // namespace wlelm
