#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlelm/core.hpp"
#include "wlelm/numerics.hpp"

namespace wlelm {

// ---------------------------------------------------------------------------
// Learned post-distorters
// ---------------------------------------------------------------------------

enum class NetworkVariant { kElm, kCelm, kCelmah, kCelmWlls };

std::string_view to_string(NetworkVariant v);
std::optional<NetworkVariant> parse_network_variant(std::string_view name);

enum class Activation { kAsinh, kLinear };

std::string_view to_string(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

/// Z[k, i] = y[k + I - 1 - i] (0-based): column i is the received sequence
/// delayed by i samples relative to the newest tap.
struct TapDelayMatrix {
  ComplexMatrix Z;

  Eigen::Index n_samples() const { return Z.rows(); }
  Eigen::Index n_taps() const { return Z.cols(); }
};

TapDelayMatrix build_tap_matrix(std::span<const cdouble> y, std::size_t n, std::size_t taps);

/// H[k, p] = g(sum_i W[p, i] Z[k, i] + b[p]) with the unconjugated inner
/// product. Rows are evaluated in parallel.
ComplexMatrix hidden_layer(const ComplexMatrix& Z, const ComplexMatrix& W, const ComplexVector& b,
                           Activation g = Activation::kAsinh);
/// Single-threaded reference of hidden_layer.
ComplexMatrix hidden_layer_serial(const ComplexMatrix& Z, const ComplexMatrix& W,
                                  const ComplexVector& b, Activation g = Activation::kAsinh);

/// [H, conj(H)]
ComplexMatrix augment_hidden(const ComplexMatrix& H);

/// Small enough that asinh stays close to linear for unit-power taps; at 1.0
/// the network cannot reproduce an identity channel to 1e-3.
inline constexpr double kDefaultInitVariance = 0.01;

struct TrainOptions {
  NetworkVariant variant = NetworkVariant::kCelmWlls;
  int hidden_nodes = 6;
  /// Total variance of each input weight and bias; real and imaginary parts
  /// are i.i.d. uniform with variance init_variance / 2 each.
  double init_variance = kDefaultInitVariance;
  double ridge = 0.0;
  Activation activation = Activation::kAsinh;
  std::uint64_t seed = 1;
};

struct TrainedNetwork {
  NetworkVariant variant = NetworkVariant::kCelmWlls;
  Activation activation = Activation::kAsinh;
  int hidden_nodes = 0;
  Eigen::Index n_taps = 0;
  double init_variance = 0.0;
  double ridge = 0.0;
  std::uint64_t seed = 0;

  // Complex variants.
  ComplexMatrix W;  // L x I
  ComplexVector b;  // L
  WidelyLinearWeights weights;  // alpha is zero for CELM

  // Real ELM: features [Re z, Im z], targets [Re x, Im x].
  RealMatrix W_real;     // L x 2I
  RealVector b_real;     // L
  RealMatrix beta_real;  // L x 2
};

TrainedNetwork train(const TapDelayMatrix& taps, const ComplexVector& x_pilot, const TrainOptions& opts);

/// Forward pass on an already built tap matrix.
ComplexVector network_output(const TrainedNetwork& net, const TapDelayMatrix& taps);

/// Builds the N x I tap matrix from y (zero-padded if shorter than N + I - 1)
/// and returns the network's time-domain estimate of length N.
ComplexVector equalize_ml(std::span<const cdouble> y, const TrainedNetwork& net, std::size_t n);

/// Self-describing JSON record of a trained network.
std::string serialize(const TrainedNetwork& net);
TrainedNetwork deserialize(std::string_view text);

// ---------------------------------------------------------------------------
// Pilot-based one-tap baselines
// ---------------------------------------------------------------------------

struct ChannelEstimate {
  std::vector<cdouble> H_f;
  double noise_var = 0.0;
};

ChannelEstimate ls_channel_estimate(std::span<const cdouble> rx_pilot, std::span<const cdouble> tx_pilot,
                                    double noise_var = 0.0);

/// Least-squares fit of an impulse response confined to the first `n_taps`
/// samples: minimizes sum_m |rx_m - tx_m H_m|^2 over H = F c, c of length n_taps.
/// Weak pilot subcarriers are down-weighted instead of divided by, which matters
/// for a DFT-spread pilot whose subcarrier magnitudes are not bounded away from 0.
/// n_taps >= size reduces to ls_channel_estimate. The normal matrix is
/// Hermitian Toeplitz and is solved by Levinson recursion in O(n_taps^2).
/// Default window: the cyclic-prefix length at N = 1024.
inline constexpr std::size_t kDefaultEstimateWindow = 72;

ChannelEstimate windowed_ls_channel_estimate(std::span<const cdouble> rx_pilot, std::span<const cdouble> tx_pilot,
                                             double noise_var, std::size_t n_taps);

struct Equalized {
  std::vector<cdouble> values;
  /// Subcarriers whose gain magnitude was clamped to avoid dividing by zero.
  std::size_t clamped = 0;
};

inline constexpr double kGainClamp = 1e-12;

Equalized equalize_ls(std::span<const cdouble> rx, const ChannelEstimate& est);
Equalized equalize_mmse(std::span<const cdouble> rx, const ChannelEstimate& est);

}  // namespace wlelm
