#include "stabprobe/signal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stabprobe {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr long kBurnIn = 1000;

double gg_scale(double p) {
  // alpha^2 = Gamma(1/p)/Gamma(3/p) gives unit population variance.
  return std::exp(0.5 * (std::lgamma(1.0 / p) - std::lgamma(3.0 / p)));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(RngSeed seed, std::uint64_t lane) {
  std::uint64_t h = mix64(seed.base + kGolden);
  h = mix64(h ^ (seed.stream + kGolden));
  h = mix64(h ^ (lane + kGolden));
  return h;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
  // 53-bit mantissa, shifted to the open interval.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape) {
  if (shape < 1.0) {
    // Boost: G(a) = G(a+1) * U^(1/a).
    return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double Rng::sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

double gg_excess_kurtosis(double p) {
  if (p <= 0.0) {
    throw std::invalid_argument("gg_excess_kurtosis: shape must be positive");
  }
  return std::exp(std::lgamma(5.0 / p) + std::lgamma(1.0 / p) - 2.0 * std::lgamma(3.0 / p)) - 3.0;
}

Vec sample_gg(double p, long t_count, RngSeed seed) {
  if (p <= 0.0) {
    throw std::invalid_argument("sample_gg: shape must be positive");
  }
  if (t_count < 1) {
    throw std::invalid_argument("sample_gg: sample count must be positive");
  }
  Rng rng(derive_seed(seed, 0));
  const double alpha = gg_scale(p);
  const double inv_p = 1.0 / p;
  Vec out(t_count);
  for (long t = 0; t < t_count; ++t) {
    const double g = rng.gamma(inv_p);
    out[t] = alpha * std::pow(g, inv_p) * rng.sign();
  }
  return out;
}

namespace {

Vec ar1_channel(double a, long t_count, std::optional<double> gg_shape, Rng& rng) {
  const double alpha = gg_shape ? gg_scale(*gg_shape) : 0.0;
  const double inv_p = gg_shape ? 1.0 / *gg_shape : 0.0;
  auto innovation = [&]() {
    if (!gg_shape) {
      return rng.normal();
    }
    return alpha * std::pow(rng.gamma(inv_p), inv_p) * rng.sign();
  };

  double state = 0.0;
  for (long t = 0; t < kBurnIn; ++t) {
    state = a * state + innovation();
  }
  Vec out(t_count);
  for (long t = 0; t < t_count; ++t) {
    state = a * state + innovation();
    out[t] = state;
  }
  // Rescale to unit sample variance so whitening sees a clean scale.
  const double mean = out.mean();
  const double var = (out.array() - mean).square().mean();
  if (var > 0.0) {
    out /= std::sqrt(var);
  }
  return out;
}

}  // namespace

Vec sample_ar1(double a, long t_count, std::optional<double> gg_shape, RngSeed seed) {
  if (std::abs(a) >= 1.0) {
    throw std::invalid_argument("sample_ar1: |a| must be below 1");
  }
  if (gg_shape && *gg_shape <= 0.0) {
    throw std::invalid_argument("sample_ar1: shape must be positive");
  }
  if (t_count < 1) {
    throw std::invalid_argument("sample_ar1: sample count must be positive");
  }
  Rng rng(derive_seed(seed, 0));
  return ar1_channel(a, t_count, gg_shape, rng);
}

SignalBlock generate_sources(const SourceSpec& spec, int n, long t_count, RngSeed seed) {
  if (n < 1) {
    throw std::invalid_argument("generate_sources: channel count must be positive");
  }
  if (t_count < 1) {
    throw std::invalid_argument("generate_sources: sample count must be positive");
  }
  const bool ar_kind = spec.kind != SourceKind::iid_gg;
  if (ar_kind && static_cast<int>(spec.ar.size()) != n) {
    throw std::invalid_argument("generate_sources: need one AR coefficient per channel, got " +
                                std::to_string(spec.ar.size()) + " for " + std::to_string(n) +
                                " channels");
  }
  if (spec.kind != SourceKind::ar1_gaussian && spec.shape <= 0.0) {
    throw std::invalid_argument("generate_sources: shape must be positive");
  }
  for (double a : spec.ar) {
    if (ar_kind && std::abs(a) >= 1.0) {
      throw std::invalid_argument("generate_sources: |a| must be below 1");
    }
  }

  SignalBlock block;
  block.samples.resize(t_count, n);
  for (int ch = 0; ch < n; ++ch) {
    // One lane per channel: adding channels never disturbs existing ones.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ch)));
    switch (spec.kind) {
      case SourceKind::iid_gg: {
        const double alpha = gg_scale(spec.shape);
        const double inv_p = 1.0 / spec.shape;
        for (long t = 0; t < t_count; ++t) {
          block.samples(t, ch) = alpha * std::pow(rng.gamma(inv_p), inv_p) * rng.sign();
        }
        break;
      }
      case SourceKind::ar1_gaussian:
        block.samples.col(ch) = ar1_channel(spec.ar[ch], t_count, std::nullopt, rng);
        break;
      case SourceKind::ar1_gg:
        block.samples.col(ch) = ar1_channel(spec.ar[ch], t_count, spec.shape, rng);
        break;
    }
  }
  return block;
}

SignalBlock mix(const Mat& h, const SignalBlock& s) {
  if (h.cols() != s.channels()) {
    throw std::invalid_argument("mix: mixing matrix has " + std::to_string(h.cols()) +
                                " columns but the block has " + std::to_string(s.channels()) +
                                " channels");
  }
  require_finite(h, "mix");
  SignalBlock out;
  out.samples = s.samples * h.transpose();
  return out;
}

Mat random_orthogonal(int n, RngSeed seed) {
  if (n < 1) {
    throw std::invalid_argument("random_orthogonal: dimension must be positive");
  }
  Rng rng(derive_seed(seed, kLaneRotation));
  Mat g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  return q;
}

}  // namespace stabprobe
