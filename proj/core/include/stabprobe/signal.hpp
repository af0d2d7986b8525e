#pragma once

#include "stabprobe/linalg.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace stabprobe {

// Deterministic stream addressing.  (base, stream) picks an independent
// random stream; within a stream, lanes isolate consumers (channel 0..n-1,
// the rotation used for the separation sanity check, ...) so that adding a
// consumer never perturbs the draws of another.
struct RngSeed {
  std::uint64_t base = 0;
  std::uint64_t stream = 0;
};

// splitmix64 finalizer; good avalanche, stable across platforms.
std::uint64_t mix64(std::uint64_t x);

// Collapses (base, stream, lane) into one engine seed.
std::uint64_t derive_seed(RngSeed seed, std::uint64_t lane);

inline constexpr std::uint64_t kLaneRotation = 1u << 20;

// mt19937_64 with hand-rolled transforms so every draw is reproducible
// bit-for-bit regardless of the standard library's distribution choices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Uniform on the open interval (0,1).
  double uniform();
  // Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();
  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);
  // Fair sign.
  double sign();

 private:
  std::mt19937_64 engine_;
};

enum class SourceKind { iid_gg, ar1_gaussian, ar1_gg };

struct SourceSpec {
  SourceKind kind = SourceKind::iid_gg;
  double shape = 2.0;          // generalized Gaussian exponent p (gg kinds)
  std::vector<double> ar;      // per-channel AR(1) coefficients (ar1 kinds)
};

// T x n block of samples; row t is one time step across all channels.
struct SignalBlock {
  Mat samples;

  long length() const { return samples.rows(); }
  int channels() const { return static_cast<int>(samples.cols()); }
};

// Unit-variance i.i.d. generalized Gaussian series, density ~ exp(-|x/alpha|^p)
// with alpha^2 = Gamma(1/p)/Gamma(3/p).  Sampled exactly as
// X = alpha * G^(1/p) * S, G ~ Gamma(1/p, 1), S a fair sign.
Vec sample_gg(double p, long t_count, RngSeed seed);

// Stationary AR(1) series s(t) = a s(t-1) + u(t) with unit-variance
// innovations (Gaussian, or generalized Gaussian of shape gg_shape), a
// 1000-sample burn-in discarded, then rescaled to unit sample variance.
Vec sample_ar1(double a, long t_count, std::optional<double> gg_shape, RngSeed seed);

// n independent channels per the spec; channel i draws from lane i only.
SignalBlock generate_sources(const SourceSpec& spec, int n, long t_count, RngSeed seed);

// x(t) = H s(t) applied per sample.
SignalBlock mix(const Mat& h, const SignalBlock& s);

// Haar-distributed orthogonal matrix via QR of a Gaussian matrix with the
// sign of the R diagonal fixed.  Draws from kLaneRotation.
Mat random_orthogonal(int n, RngSeed seed);

// Population excess kurtosis of the unit-variance generalized Gaussian:
// Gamma(5/p) Gamma(1/p) / Gamma(3/p)^2 - 3.
double gg_excess_kurtosis(double p);

}  // namespace stabprobe
