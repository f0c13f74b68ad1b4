#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "wlelm/fft.hpp"
#include "wlelm/receivers.hpp"

using namespace wlelm;

namespace {

std::vector<cdouble> random_samples(Rng& rng, std::size_t n) {
  std::vector<cdouble> y(n);
  for (auto& v : y) v = rng.complex_normal(1.0);
  return y;
}

double mse(const ComplexVector& a, const ComplexVector& b) {
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

// Target that the identity channel should reproduce: the newest tap.
ComplexVector identity_target(const std::vector<cdouble>& y, std::size_t n, std::size_t taps) {
  ComplexVector x(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) x(static_cast<Eigen::Index>(k)) = y[k + taps - 1];
  return x;
}

}  // namespace

TEST_CASE("tap delay matrix") {
  const std::vector<cdouble> y{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  const auto t = build_tap_matrix(y, 3, 2);
  REQUIRE(t.n_samples() == 3);
  REQUIRE(t.n_taps() == 2);
  // Newest sample in column 0.
  CHECK(t.Z(0, 0) == cdouble(2, 0));
  CHECK(t.Z(0, 1) == cdouble(1, 0));
  CHECK(t.Z(2, 0) == cdouble(4, 0));
  CHECK(t.Z(2, 1) == cdouble(3, 0));
  const auto single = build_tap_matrix(y, 4, 1);
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(single.Z(k, 0) == y[static_cast<std::size_t>(k)]);
  CHECK_THROWS_AS(build_tap_matrix(y, 4, 2), ContractViolation);
  CHECK_THROWS_AS(build_tap_matrix(y, 0, 1), ContractViolation);
}

TEST_CASE("hidden layer: parallel matches serial and a direct formula") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(test::uniform_int(rng, 1, 300));
    const auto L = static_cast<Eigen::Index>(test::uniform_int(rng, 1, 12));
    const auto I = static_cast<Eigen::Index>(test::uniform_int(rng, 1, 5));
    const ComplexMatrix Z = test::random_matrix(rng, n, I);
    const ComplexMatrix W = test::random_matrix(rng, L, I);
    const ComplexVector b = test::random_vector(rng, L);
    const ComplexMatrix H = hidden_layer(Z, W, b);
    CHECK((H - hidden_layer_serial(Z, W, b)).norm() == 0.0);
    const auto k = static_cast<Eigen::Index>(test::uniform_int(rng, 0, static_cast<int>(n) - 1));
    const auto p = static_cast<Eigen::Index>(test::uniform_int(rng, 0, static_cast<int>(L) - 1));
    cdouble u = b(p);
    for (Eigen::Index i = 0; i < I; ++i) u += W(p, i) * Z(k, i);
    CHECK(std::abs(H(k, p) - std::asinh(u)) < 1e-12);
    const ComplexMatrix lin = hidden_layer(Z, W, b, Activation::kLinear);
    CHECK(std::abs(lin(k, p) - u) < 1e-12);
  }
  CHECK_THROWS_AS(hidden_layer(ComplexMatrix::Ones(3, 2), ComplexMatrix::Ones(4, 3), ComplexVector::Ones(4)),
                  ContractViolation);
}

TEST_CASE("augment_hidden") {
  Rng rng(22);
  const ComplexMatrix H = test::random_matrix(rng, 5, 3);
  const ComplexMatrix A = augment_hidden(H);
  CHECK(A.cols() == 6);
  CHECK((A.leftCols(3) - H).norm() == 0.0);
  CHECK((A.rightCols(3) - H.conjugate()).norm() == 0.0);
}

TEST_CASE("identity channel is reproduced by every variant") {
  constexpr std::size_t n = 1024, taps = 3;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Rng rng(seed);
    const auto y = random_samples(rng, n + taps - 1);
    const auto Z = build_tap_matrix(y, n, taps);
    const auto x = identity_target(y, n, taps);
    for (auto v : {NetworkVariant::kCelm, NetworkVariant::kCelmah, NetworkVariant::kCelmWlls}) {
      const auto net = train(Z, x, {.variant = v, .hidden_nodes = 6, .seed = seed});
      CAPTURE(to_string(v));
      CHECK(mse(network_output(net, Z), x) <= 1e-3);
    }
    // The real network has L real nodes on 2I real inputs; it needs 2L to
    // span the identity map.
    const auto elm = train(Z, x, {.variant = NetworkVariant::kElm, .hidden_nodes = 12, .seed = seed});
    CHECK(mse(network_output(elm, Z), x) <= 1e-3);
  }
}

TEST_CASE("augmented pseudoinverse and WLLS predictions agree") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = static_cast<std::size_t>(test::uniform_int(rng, 40, 400));
    const std::size_t taps = static_cast<std::size_t>(test::uniform_int(rng, 1, 4));
    const auto y = random_samples(rng, n + taps - 1);
    const auto Z = build_tap_matrix(y, n, taps);
    ComplexVector x = test::random_vector(rng, static_cast<Eigen::Index>(n));
    const int L = test::uniform_int(rng, 1, 8);
    const auto seed = static_cast<std::uint64_t>(trial + 1);
    const auto a = train(Z, x, {.variant = NetworkVariant::kCelmah, .hidden_nodes = L, .init_variance = 1.0, .seed = seed});
    const auto w = train(Z, x, {.variant = NetworkVariant::kCelmWlls, .hidden_nodes = L, .init_variance = 1.0, .seed = seed});
    const auto pa = network_output(a, Z), pw = network_output(w, Z);
    CHECK((pa - pw).norm() / std::max(pw.norm(), 1e-300) <= 1e-6);
  }
}

TEST_CASE("train: validation and determinism") {
  Rng rng(24);
  const auto y = random_samples(rng, 66);
  const auto Z = build_tap_matrix(y, 64, 3);
  const auto x = identity_target(y, 64, 3);
  CHECK_THROWS_AS(train(Z, x, {.hidden_nodes = 0}), InputError);
  CHECK_THROWS_AS(train(Z, x, {.init_variance = 0.0}), InputError);
  CHECK_THROWS_AS(train(Z, x.head(10), {}), ContractViolation);
  const auto a = train(Z, x, {.seed = 9});
  const auto b = train(Z, x, {.seed = 9});
  CHECK((a.W - b.W).norm() == 0.0);
  CHECK((network_output(a, Z) - network_output(b, Z)).norm() == 0.0);
  const auto c = train(Z, x, {.seed = 10});
  CHECK((a.W - c.W).norm() > 0.0);
  // Weight variance follows init_variance.
  double var = 0.0;
  int count = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto net = train(Z, x, {.variant = NetworkVariant::kCelm, .hidden_nodes = 20, .init_variance = 0.5, .seed = seed});
    for (Eigen::Index p = 0; p < net.W.rows(); ++p) {
      var += std::norm(net.W(p, 0));
      ++count;
    }
  }
  CHECK(var / count == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("equalize_ml: padding, zero input, tap mismatch") {
  Rng rng(25);
  const auto y = random_samples(rng, 130);
  const auto Z = build_tap_matrix(y, 128, 3);
  const auto x = identity_target(y, 128, 3);
  const auto net = train(Z, x, {.variant = NetworkVariant::kCelmah, .seed = 4});
  CHECK((equalize_ml(y, net, 128) - network_output(net, Z)).norm() == 0.0);
  CHECK((equalize_ml(y, net, 128) - equalize_ml(y, net, 128)).norm() == 0.0);

  // Zero input gives the bias response on every row.
  const std::vector<cdouble> zeros(130);
  const auto z = equalize_ml(zeros, net, 128);
  for (Eigen::Index k = 1; k < z.size(); ++k) CHECK(std::abs(z(k) - z(0)) < 1e-15);
  const ComplexMatrix H0 = hidden_layer(ComplexMatrix::Zero(1, 3), net.W, net.b);
  CHECK(std::abs(z(0) - predict(H0, net.weights)(0)) < 1e-14);

  const std::vector<cdouble> shortseq(y.begin(), y.begin() + 100);
  const auto padded = equalize_ml(shortseq, net, 128);
  CHECK(padded.size() == 128);
  CHECK(std::abs(padded(0) - network_output(net, Z)(0)) < 1e-14);
  CHECK_THROWS_AS(network_output(net, build_tap_matrix(y, 128, 2)), ContractViolation);
}

TEST_CASE("network serialization round trip and golden record") {
  Rng rng(26);
  const auto y = random_samples(rng, 34);
  const auto Z = build_tap_matrix(y, 32, 3);
  const auto x = identity_target(y, 32, 3);
  for (auto v : {NetworkVariant::kElm, NetworkVariant::kCelm, NetworkVariant::kCelmah, NetworkVariant::kCelmWlls}) {
    const auto net = train(Z, x, {.variant = v, .hidden_nodes = 4, .seed = 5});
    const auto back = deserialize(serialize(net));
    CHECK(back.variant == v);
    CHECK(back.hidden_nodes == 4);
    CHECK(back.n_taps == 3);
    CHECK(back.seed == 5);
    CHECK((network_output(back, Z) - network_output(net, Z)).norm() == 0.0);
    CHECK(serialize(back) == serialize(net));
  }
  CHECK_THROWS_AS(deserialize("{"), InputError);
  CHECK_THROWS_AS(deserialize(R"({"record":"other"})"), InputError);
  CHECK_THROWS_AS(deserialize(R"({"record":"trained_network","variant":"celm"})"), InputError);

  TrainedNetwork fixed;
  fixed.variant = NetworkVariant::kCelmWlls;
  fixed.hidden_nodes = 1;
  fixed.n_taps = 1;
  fixed.init_variance = 0.01;
  fixed.seed = 7;
  fixed.W = ComplexMatrix::Constant(1, 1, cdouble(0.5, -0.25));
  fixed.b = ComplexVector::Constant(1, cdouble(0.0, 1.0));
  fixed.weights.beta = ComplexVector::Constant(1, cdouble(2.0, 0.0));
  fixed.weights.alpha = ComplexVector::Constant(1, cdouble(0.0, -0.5));
  const auto path = std::filesystem::path(WLELM_TEST_DATA) / "network_golden.json";
  if (std::getenv("WLELM_REGEN_GOLDEN")) std::ofstream(path) << serialize(fixed);
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == serialize(fixed));
}

TEST_CASE("LS and MMSE one-tap equalizers") {
  const std::vector<cdouble> tx{{1, 1}, {-1, 1}, {1, -1}};
  const std::vector<cdouble> h{{2, 0}, {0, 1}, {0.5, 0.5}};
  std::vector<cdouble> rx(3);
  for (std::size_t m = 0; m < 3; ++m) rx[m] = h[m] * tx[m];
  const auto est = ls_channel_estimate(rx, tx, 0.0);
  for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(est.H_f[m] - h[m]) < 1e-15);
  const auto ls = equalize_ls(rx, est);
  for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(ls.values[m] - tx[m]) < 1e-15);
  // Zero noise: MMSE is LS.
  CHECK(equalize_mmse(rx, est).values == ls.values);

  const ChannelEstimate noisy{{cdouble(2, 0)}, 1.0};
  const std::vector<cdouble> one{cdouble(4, 0)};
  CHECK(std::abs(equalize_mmse(one, noisy).values[0] - cdouble(8.0 / 5.0, 0)) < 1e-15);

  const ChannelEstimate dead{{cdouble(0, 0)}, 0.0};
  const auto clamped = equalize_ls(one, dead);
  CHECK(clamped.clamped == 1);
  CHECK(std::isfinite(clamped.values[0].real()));

  CHECK_THROWS_AS(ls_channel_estimate(rx, {tx.data(), 2}), ContractViolation);
  CHECK_THROWS_AS(ls_channel_estimate(rx, std::vector<cdouble>(3)), InputError);
  CHECK_THROWS_AS(equalize_ls(one, est), ContractViolation);
}

TEST_CASE("windowed LS channel estimate") {
  Rng rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(test::uniform_int(rng, 8, 96));
    const auto w = static_cast<std::size_t>(test::uniform_int(rng, 1, static_cast<int>(n) - 1));
    std::vector<cdouble> tx(n), rx(n);
    for (auto& v : tx) v = rng.complex_normal(1.0);
    for (auto& v : rx) v = rng.complex_normal(1.0);
    const auto est = windowed_ls_channel_estimate(rx, tx, 0.25, w);
    CHECK(est.noise_var == 0.25);

    // Dense oracle: explicit F_W and a QR least-squares solve.
    ComplexMatrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w));
    for (std::size_t m = 0; m < n; ++m) {
      for (std::size_t l = 0; l < w; ++l) {
        M(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) =
            tx[m] * std::polar(1.0 / std::sqrt(static_cast<double>(n)), -2.0 * M_PI * static_cast<double>(m * l) / static_cast<double>(n));
      }
    }
    const ComplexVector c = M.colPivHouseholderQr().solve(Eigen::Map<const ComplexVector>(rx.data(), static_cast<Eigen::Index>(n)));
    const ComplexVector fit = M * c;
    double err = 0.0, ref = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      err += std::norm(tx[m] * est.H_f[m] - fit(static_cast<Eigen::Index>(m)));
      ref += std::norm(fit(static_cast<Eigen::Index>(m)));
    }
    CHECK(std::sqrt(err / ref) < 1e-9);
  }

  // Short channel, no noise: exact recovery. Full window: per-subcarrier LS.
  std::vector<cdouble> impulse(64), tx(64), rx(64);
  for (std::size_t i = 0; i < 5; ++i) impulse[i] = rng.complex_normal(1.0);
  const auto H = fft::forward(impulse);
  for (std::size_t m = 0; m < 64; ++m) {
    tx[m] = rng.complex_normal(1.0);
    rx[m] = tx[m] * H[m];
  }
  const auto exact = windowed_ls_channel_estimate(rx, tx, 0.0, 8);
  for (std::size_t m = 0; m < 64; ++m) CHECK(std::abs(exact.H_f[m] - H[m]) < 1e-10);
  const auto full = windowed_ls_channel_estimate(rx, tx, 0.0, 64);
  CHECK(full.H_f == ls_channel_estimate(rx, tx).H_f);
  CHECK_THROWS_AS(windowed_ls_channel_estimate(rx, tx, 0.0, 0), InputError);
  CHECK_THROWS_AS(windowed_ls_channel_estimate(rx, std::vector<cdouble>(64), 0.0, 8), SingularSystem);
}

TEST_CASE("hidden layer examples and conjugation symmetry") {
  const ComplexMatrix one = ComplexMatrix::Constant(1, 1, cdouble(1.0, 0.0));
  const ComplexVector zero_b = ComplexVector::Zero(1);
  CHECK(std::abs(hidden_layer(one, one, zero_b)(0, 0) - std::log(1.0 + std::sqrt(2.0))) < 1e-15);
  Rng rng(28);
  const ComplexMatrix Z = test::random_matrix(rng, 50, 3);
  CHECK(hidden_layer(Z, ComplexMatrix::Zero(4, 3), ComplexVector::Zero(4)).norm() == 0.0);

  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix Zt = 0.3 * test::random_matrix(rng, 20, 3);
    const ComplexMatrix W = 0.3 * test::random_matrix(rng, 5, 3);
    const ComplexVector b = 0.3 * test::random_vector(rng, 5);
    const ComplexMatrix H = hidden_layer(Zt, W, b);
    const ComplexMatrix Hc = hidden_layer(Zt.conjugate(), W.conjugate(), b.conjugate());
    CHECK((Hc - H.conjugate()).norm() < 1e-12 * H.norm());
  }
  const ComplexMatrix i_only = ComplexMatrix::Constant(1, 1, cdouble(0.0, 1.0));
  const ComplexMatrix aug = augment_hidden(i_only);
  CHECK(aug(0, 0) == cdouble(0.0, 1.0));
  CHECK(aug(0, 1) == cdouble(0.0, -1.0));
  const ComplexMatrix real_h = test::random_matrix(rng, 4, 2).real().cast<cdouble>();
  const ComplexMatrix real_aug = augment_hidden(real_h);
  CHECK((real_aug.leftCols(2) - real_aug.rightCols(2)).norm() == 0.0);
}

TEST_CASE("CELM is CELMAH without the conjugate block") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto y = random_samples(rng, 258);
    const auto Z = build_tap_matrix(y, 256, 3);
    const ComplexVector x = test::random_vector(rng, 256);
    const auto seed = static_cast<std::uint64_t>(trial + 100);
    const auto celm = train(Z, x, {.variant = NetworkVariant::kCelm, .seed = seed});
    const auto celmah = train(Z, x, {.variant = NetworkVariant::kCelmah, .seed = seed});
    CHECK((celm.W - celmah.W).norm() == 0.0);
    const ComplexMatrix H = hidden_layer(Z.Z, celmah.W, celmah.b);
    const auto resolved = linear_pinv_solve(H, x);
    CHECK((resolved.beta - celm.weights.beta).norm() <= 1e-10 * celm.weights.beta.norm());
    CHECK(celm.weights.alpha.norm() == 0.0);
  }
}

TEST_CASE("proper channel: conjugate weights shrink with pilot length") {
  // Proper input through a linear FIR plus circular noise, zero biases.
  // L = I keeps the weights well posed; with L > I and near-linear asinh the
  // extra columns are almost dependent and the weight split is arbitrary.
  // At init variance 1 asinh itself makes the features improper and the
  // ratio levels off (about 0.45), so only the near-linear regime is checked.
  const auto ratio_at = [](std::size_t n, int L, double theta) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      Rng rng(seed * 7919 + n);
      std::vector<cdouble> x(n + 2), y(n + 2);
      for (auto& v : x) v = cdouble(rng.bit() ? 1.0 : -1.0, rng.bit() ? 1.0 : -1.0) / std::sqrt(2.0);
      for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] = x[k] + (k > 0 ? cdouble(0.3, 0.2) * x[k - 1] : cdouble{}) + rng.complex_normal(0.01);
      }
      const auto Z = build_tap_matrix(y, n, 3);
      ComplexVector target(static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) target(static_cast<Eigen::Index>(k)) = x[k + 2];
      TrainedNetwork net = train(Z, target, {.variant = NetworkVariant::kCelm, .hidden_nodes = L, .init_variance = theta, .seed = seed});
      net.b.setZero();
      const ComplexMatrix H = hidden_layer(Z.Z, net.W, net.b);
      const auto w = wlls_solve(compute_stats(H, target), 0.0);
      sum += w.alpha.norm() / w.beta.norm();
    }
    return sum / 8.0;
  };
  const double r256 = ratio_at(256, 3, 0.01), r1024 = ratio_at(1024, 3, 0.01), r4096 = ratio_at(4096, 3, 0.01);
  CAPTURE(r256);
  CAPTURE(r1024);
  CAPTURE(r4096);
  CHECK(r1024 < r256);
  CHECK(r4096 < r1024);
  CHECK(r4096 < 0.05);
}
