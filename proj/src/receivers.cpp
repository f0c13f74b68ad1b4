#include "wlelm/receivers.hpp"

#include <cmath>

#include <json.hpp>

#include "wlelm/fft.hpp"
#include "wlelm/rng.hpp"

namespace wlelm {

std::string_view to_string(NetworkVariant v) {
  switch (v) {
    case NetworkVariant::kElm: return "ELM";
    case NetworkVariant::kCelm: return "CELM";
    case NetworkVariant::kCelmah: return "CELMAH";
    case NetworkVariant::kCelmWlls: return "CELM_WLLS";
  }
  return "?";
}

std::optional<NetworkVariant> parse_network_variant(std::string_view name) {
  for (auto v : {NetworkVariant::kElm, NetworkVariant::kCelm, NetworkVariant::kCelmah,
                 NetworkVariant::kCelmWlls}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

std::string_view to_string(Activation a) {
  return a == Activation::kAsinh ? "asinh" : "linear";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "asinh") return Activation::kAsinh;
  if (name == "linear") return Activation::kLinear;
  return std::nullopt;
}

TapDelayMatrix build_tap_matrix(std::span<const cdouble> y, std::size_t n, std::size_t taps) {
  if (taps < 1 || n < 1) throw ContractViolation("tap matrix needs N >= 1 and I >= 1");
  if (y.size() < n + taps - 1) {
    throw ContractViolation("received sequence has " + std::to_string(y.size()) + " samples, need " +
                            std::to_string(n + taps - 1));
  }
  TapDelayMatrix t;
  t.Z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(taps));
  for (std::size_t i = 0; i < taps; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      t.Z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = y[k + taps - 1 - i];
    }
  }
  return t;
}

namespace {

void check_layer_shapes(const ComplexMatrix& Z, const ComplexMatrix& W, const ComplexVector& b) {
  if (W.cols() != Z.cols()) {
    throw ContractViolation("input weights expect " + std::to_string(W.cols()) + " taps, tap matrix has " +
                            std::to_string(Z.cols()));
  }
  if (W.rows() != b.size()) throw ContractViolation("bias length differs from hidden-node count");
}

inline cdouble activate(cdouble u, Activation g) {
  return g == Activation::kAsinh ? std::asinh(u) : u;
}

inline cdouble hidden_entry(const ComplexMatrix& Z, const ComplexMatrix& W, const ComplexVector& b,
                            Activation g, Eigen::Index k, Eigen::Index p) {
  cdouble acc = b(p);
  for (Eigen::Index i = 0; i < Z.cols(); ++i) acc += W(p, i) * Z(k, i);
  return activate(acc, g);
}

}  // namespace

ComplexMatrix hidden_layer_serial(const ComplexMatrix& Z, const ComplexMatrix& W, const ComplexVector& b,
                                  Activation g) {
  check_layer_shapes(Z, W, b);
  ComplexMatrix H(Z.rows(), W.rows());
  for (Eigen::Index k = 0; k < Z.rows(); ++k) {
    for (Eigen::Index p = 0; p < W.rows(); ++p) H(k, p) = hidden_entry(Z, W, b, g, k, p);
  }
  if (!H.allFinite()) throw InputError("hidden layer produced non-finite activations");
  return H;
}

ComplexMatrix hidden_layer(const ComplexMatrix& Z, const ComplexMatrix& W, const ComplexVector& b,
                           Activation g) {
  check_layer_shapes(Z, W, b);
  ComplexMatrix H(Z.rows(), W.rows());
  const Eigen::Index rows = Z.rows();
  const Eigen::Index nodes = W.rows();
#pragma omp parallel for schedule(static) if (rows * nodes > 4096)
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index p = 0; p < nodes; ++p) H(k, p) = hidden_entry(Z, W, b, g, k, p);
  }
  if (!H.allFinite()) throw InputError("hidden layer produced non-finite activations");
  return H;
}

ComplexMatrix augment_hidden(const ComplexMatrix& H) {
  ComplexMatrix out(H.rows(), 2 * H.cols());
  out << H, H.conjugate();
  return out;
}

namespace {

RealMatrix real_features(const ComplexMatrix& Z) {
  RealMatrix F(Z.rows(), 2 * Z.cols());
  F << Z.real(), Z.imag();
  return F;
}

RealMatrix real_hidden(const RealMatrix& F, const RealMatrix& W, const RealVector& b, Activation g) {
  RealMatrix U = F * W.transpose();
  U.rowwise() += b.transpose();
  if (g == Activation::kAsinh) U = U.unaryExpr([](double v) { return std::asinh(v); });
  return U;
}

}  // namespace

TrainedNetwork train(const TapDelayMatrix& taps, const ComplexVector& x_pilot, const TrainOptions& opts) {
  if (opts.hidden_nodes < 1) throw InputError("hidden_nodes must be >= 1");
  if (!(opts.init_variance > 0.0)) throw InputError("init_variance must be positive");
  if (x_pilot.size() != taps.n_samples()) {
    throw ContractViolation("pilot target has " + std::to_string(x_pilot.size()) + " samples, tap matrix has " +
                            std::to_string(taps.n_samples()) + " rows");
  }
  require_finite(taps.Z, "tap matrix");

  TrainedNetwork net;
  net.variant = opts.variant;
  net.activation = opts.activation;
  net.hidden_nodes = opts.hidden_nodes;
  net.n_taps = taps.n_taps();
  net.init_variance = opts.init_variance;
  net.ridge = opts.ridge;
  net.seed = opts.seed;

  const Eigen::Index L = opts.hidden_nodes;
  const Eigen::Index I = taps.n_taps();
  Rng rng(opts.seed);

  if (opts.variant == NetworkVariant::kElm) {
    const double a = std::sqrt(3.0 * opts.init_variance);
    net.W_real.resize(L, 2 * I);
    net.b_real.resize(L);
    for (Eigen::Index p = 0; p < L; ++p) {
      for (Eigen::Index i = 0; i < 2 * I; ++i) net.W_real(p, i) = rng.uniform(-a, a);
    }
    for (Eigen::Index p = 0; p < L; ++p) net.b_real(p) = rng.uniform(-a, a);
    const RealMatrix H = real_hidden(real_features(taps.Z), net.W_real, net.b_real, opts.activation);
    RealMatrix T(x_pilot.size(), 2);
    T << x_pilot.real(), x_pilot.imag();
    net.beta_real = pseudo_inverse(H) * T;
    return net;
  }

  const double a = std::sqrt(1.5 * opts.init_variance);
  net.W.resize(L, I);
  net.b.resize(L);
  for (Eigen::Index p = 0; p < L; ++p) {
    for (Eigen::Index i = 0; i < I; ++i) {
      const double re = rng.uniform(-a, a);
      const double im = rng.uniform(-a, a);
      net.W(p, i) = {re, im};
    }
  }
  for (Eigen::Index p = 0; p < L; ++p) {
    const double re = rng.uniform(-a, a);
    const double im = rng.uniform(-a, a);
    net.b(p) = {re, im};
  }

  const ComplexMatrix H = hidden_layer(taps.Z, net.W, net.b, opts.activation);
  switch (opts.variant) {
    case NetworkVariant::kCelm:
      net.weights = linear_pinv_solve(H, x_pilot);
      break;
    case NetworkVariant::kCelmah:
      net.weights = augmented_pinv_solve(H, x_pilot);
      break;
    case NetworkVariant::kCelmWlls:
      net.weights = wlls_solve(compute_stats(H, x_pilot), opts.ridge);
      break;
    case NetworkVariant::kElm:
      break;
  }
  return net;
}

ComplexVector network_output(const TrainedNetwork& net, const TapDelayMatrix& taps) {
  if (taps.n_taps() != net.n_taps) {
    throw ContractViolation("network was trained on " + std::to_string(net.n_taps) + " taps, got " +
                            std::to_string(taps.n_taps()));
  }
  if (net.variant == NetworkVariant::kElm) {
    const RealMatrix H = real_hidden(real_features(taps.Z), net.W_real, net.b_real, net.activation);
    const RealMatrix out = H * net.beta_real;
    ComplexVector x(out.rows());
    for (Eigen::Index k = 0; k < out.rows(); ++k) x(k) = {out(k, 0), out(k, 1)};
    return x;
  }
  return predict(hidden_layer(taps.Z, net.W, net.b, net.activation), net.weights);
}

ComplexVector equalize_ml(std::span<const cdouble> y, const TrainedNetwork& net, std::size_t n) {
  const auto taps = static_cast<std::size_t>(net.n_taps);
  const std::size_t need = n + taps - 1;
  if (y.size() >= need) return network_output(net, build_tap_matrix(y, n, taps));
  std::vector<cdouble> padded(y.begin(), y.end());
  padded.resize(need, cdouble{});
  return network_output(net, build_tap_matrix(padded, n, taps));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json complex_array(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json complex_list(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

json real_array(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix read_complex_array(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw InputError("ragged matrix in network record");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& z = j.at(r).at(c);
      m(r, c) = {z.at(0).get<double>(), z.at(1).get<double>()};
    }
  }
  return m;
}

ComplexVector read_complex_list(const json& j) {
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>()};
  return v;
}

RealMatrix read_real_array(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  RealMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

std::string serialize(const TrainedNetwork& net) {
  json j;
  j["record"] = "trained_network";
  j["version"] = 1;
  j["variant"] = std::string(to_string(net.variant));
  j["activation"] = std::string(to_string(net.activation));
  j["hidden_nodes"] = net.hidden_nodes;
  j["n_taps"] = net.n_taps;
  j["init_variance"] = net.init_variance;
  j["ridge"] = net.ridge;
  j["seed"] = net.seed;
  if (net.variant == NetworkVariant::kElm) {
    j["W"] = real_array(net.W_real);
    j["b"] = real_array(net.b_real);
    j["beta"] = real_array(net.beta_real);
  } else {
    j["W"] = complex_array(net.W);
    j["b"] = complex_list(net.b);
    j["beta"] = complex_list(net.weights.beta);
    j["alpha"] = complex_list(net.weights.alpha);
  }
  return j.dump(2);
}

TrainedNetwork deserialize(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed network record: ") + e.what());
  }
  try {
    if (j.at("record").get<std::string>() != "trained_network") throw InputError("not a trained_network record");
    TrainedNetwork net;
    const auto variant = parse_network_variant(j.at("variant").get<std::string>());
    const auto activation = parse_activation(j.at("activation").get<std::string>());
    if (!variant || !activation) throw InputError("unknown variant or activation in network record");
    net.variant = *variant;
    net.activation = *activation;
    net.hidden_nodes = j.at("hidden_nodes").get<int>();
    net.n_taps = j.at("n_taps").get<Eigen::Index>();
    net.init_variance = j.at("init_variance").get<double>();
    net.ridge = j.at("ridge").get<double>();
    net.seed = j.at("seed").get<std::uint64_t>();
    if (net.variant == NetworkVariant::kElm) {
      net.W_real = read_real_array(j.at("W"));
      net.b_real = read_real_array(j.at("b")).col(0);
      net.beta_real = read_real_array(j.at("beta"));
    } else {
      net.W = read_complex_array(j.at("W"));
      net.b = read_complex_list(j.at("b"));
      net.weights.beta = read_complex_list(j.at("beta"));
      net.weights.alpha = read_complex_list(j.at("alpha"));
    }
    return net;
  } catch (const json::exception& e) {
    throw InputError(std::string("incomplete network record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// One-tap baselines

ChannelEstimate ls_channel_estimate(std::span<const cdouble> rx_pilot, std::span<const cdouble> tx_pilot,
                                    double noise_var) {
  if (rx_pilot.size() != tx_pilot.size()) throw ContractViolation("pilot lengths differ");
  if (noise_var < 0.0) throw InputError("noise variance must be >= 0");
  ChannelEstimate est;
  est.noise_var = noise_var;
  est.H_f.resize(rx_pilot.size());
  for (std::size_t m = 0; m < rx_pilot.size(); ++m) {
    if (tx_pilot[m] == cdouble{}) throw InputError("pilot subcarrier " + std::to_string(m) + " is zero");
    est.H_f[m] = rx_pilot[m] / tx_pilot[m];
  }
  return est;
}

namespace {

// Levinson recursion for T x = y with T[i][j] = t[i - j], t[-k] = conj(t[k]).
// Keeps the forward/backward solutions of the growing leading block.
std::vector<cdouble> solve_hermitian_toeplitz(std::span<const cdouble> t, std::span<const cdouble> y) {
  const std::size_t n = t.size();
  const double tiny = 1e-12 * std::abs(t[0]);
  if (!(t[0].real() > 0.0)) throw SingularSystem("pilot power in estimate window");
  std::vector<cdouble> f{1.0 / t[0]}, b{1.0 / t[0]}, x{y[0] / t[0]};
  f.reserve(n);
  b.reserve(n);
  x.reserve(n);
  std::vector<cdouble> f_next(n), b_next(n);
  for (std::size_t m = 1; m < n; ++m) {
    cdouble ef{}, eb{}, ex{};
    for (std::size_t i = 0; i < m; ++i) {
      ef += t[m - i] * f[i];
      eb += std::conj(t[i + 1]) * b[i];
      ex += t[m - i] * x[i];
    }
    const cdouble denom = 1.0 - ef * eb;
    if (!(std::abs(denom) > tiny)) throw SingularSystem("pilot power in estimate window");
    for (std::size_t i = 0; i <= m; ++i) {
      const cdouble fi = i < m ? f[i] : cdouble{};
      const cdouble bi = i > 0 ? b[i - 1] : cdouble{};
      f_next[i] = (fi - ef * bi) / denom;
      b_next[i] = (bi - eb * fi) / denom;
    }
    f.assign(f_next.begin(), f_next.begin() + static_cast<std::ptrdiff_t>(m + 1));
    b.assign(b_next.begin(), b_next.begin() + static_cast<std::ptrdiff_t>(m + 1));
    x.push_back(cdouble{});
    const cdouble step = y[m] - ex;
    for (std::size_t i = 0; i <= m; ++i) x[i] += step * b[i];
  }
  return x;
}

}  // namespace

ChannelEstimate windowed_ls_channel_estimate(std::span<const cdouble> rx_pilot, std::span<const cdouble> tx_pilot,
                                             double noise_var, std::size_t n_taps) {
  const std::size_t n = rx_pilot.size();
  if (n_taps < 1) throw InputError("channel estimate window must be >= 1");
  if (n_taps >= n) return ls_channel_estimate(rx_pilot, tx_pilot, noise_var);
  if (tx_pilot.size() != n) throw ContractViolation("pilot lengths differ");
  if (noise_var < 0.0) throw InputError("noise variance must be >= 0");

  // Normal equations (F_W^H |X|^2 F_W) c = F_W^H conj(X) Y. F_W^H v is the head
  // of the unitary inverse transform, so the matrix is Hermitian Toeplitz in
  // the transform of |X|^2.
  std::vector<cdouble> power(n), corr(n);
  for (std::size_t m = 0; m < n; ++m) {
    power[m] = std::norm(tx_pilot[m]);
    corr[m] = std::conj(tx_pilot[m]) * rx_pilot[m];
  }
  auto g = fft::inverse(power);
  const auto rhs = fft::inverse(corr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  g.resize(n_taps);
  for (auto& v : g) v *= scale;
  g[0] = g[0].real();
  auto c = solve_hermitian_toeplitz(g, std::span<const cdouble>(rhs).first(n_taps));
  c.resize(n, cdouble{});
  return {fft::forward(c), noise_var};
}

Equalized equalize_ls(std::span<const cdouble> rx, const ChannelEstimate& est) {
  if (rx.size() != est.H_f.size()) throw ContractViolation("subcarrier count differs from channel estimate");
  Equalized out;
  out.values.resize(rx.size());
  for (std::size_t m = 0; m < rx.size(); ++m) {
    cdouble h = est.H_f[m];
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) throw InputError("channel estimate is not finite");
    if (std::abs(h) < kGainClamp) {
      h = std::abs(h) > 0.0 ? h / std::abs(h) * kGainClamp : cdouble(kGainClamp, 0.0);
      ++out.clamped;
    }
    out.values[m] = rx[m] / h;
  }
  return out;
}

Equalized equalize_mmse(std::span<const cdouble> rx, const ChannelEstimate& est) {
  if (est.noise_var == 0.0) return equalize_ls(rx, est);
  if (rx.size() != est.H_f.size()) throw ContractViolation("subcarrier count differs from channel estimate");
  Equalized out;
  out.values.resize(rx.size());
  for (std::size_t m = 0; m < rx.size(); ++m) {
    const cdouble h = est.H_f[m];
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) throw InputError("channel estimate is not finite");
    out.values[m] = std::conj(h) * rx[m] / (std::norm(h) + est.noise_var);
  }
  return out;
}

}  // namespace wlelm
