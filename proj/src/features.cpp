#include "phyto/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>

#include "phyto/text.hpp"

namespace phyto {

namespace {

/// Shared intermediate quantities of one slice.
struct SliceStats {
  std::span<const double> x;
  std::size_t n = 0;
  bool constant = false;
  double mean = 0.0;
  double variance = 0.0;  // population
  double stddev = 0.0;
  std::vector<double> sorted;
  std::vector<double> centered;
  std::vector<std::complex<double>> spectrum;  // bins 0..n/2 of the centered series

  explicit SliceStats(std::span<const double> values) : x(values), n(values.size()) {
    sorted.assign(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    constant = sorted.front() == sorted.back();
    mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    if (constant) mean = sorted.front();
    centered.resize(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = constant ? 0.0 : x[i] - mean;
    double ss = 0.0;
    for (double c : centered) ss += c * c;
    variance = ss / static_cast<double>(n);
    stddev = std::sqrt(variance);

    // Direct transform over a twiddle table indexed by (k * t) mod n.
    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      twiddle[m] = {std::cos(angle), std::sin(angle)};
    }
    spectrum.assign(n / 2 + 1, {0.0, 0.0});
    for (std::size_t k = 1; k < spectrum.size(); ++k) {
      std::complex<double> acc{0.0, 0.0};
      std::size_t m = 0;
      for (std::size_t t = 0; t < n; ++t) {
        acc += centered[t] * twiddle[m];
        m += k;
        if (m >= n) m -= n;
      }
      spectrum[k] = acc;
    }
  }

  double moment(int order) const {
    double s = 0.0;
    for (double c : centered) s += std::pow(c, order);
    return s / static_cast<double>(n);
  }

  double quantile(double q) const {
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
};

using Compute = std::function<double(const SliceStats&)>;

struct Entry {
  FeatureDescriptor descriptor;
  Compute compute;
};

double skewness(const SliceStats& s) {
  if (s.constant || s.n < 3) return 0.0;
  const double m2 = s.variance;
  const double g1 = s.moment(3) / std::pow(m2, 1.5);
  const double n = static_cast<double>(s.n);
  return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

double kurtosis(const SliceStats& s) {
  if (s.constant || s.n < 4) return 0.0;
  const double m2 = s.variance;
  const double g2 = s.moment(4) / (m2 * m2) - 3.0;
  const double n = static_cast<double>(s.n);
  return ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
}

double longest_strike(const SliceStats& s, bool above) {
  std::size_t best = 0, run = 0;
  for (double c : s.centered) {
    const bool hit = above ? c > 0.0 : c < 0.0;
    run = hit ? run + 1 : 0;
    best = std::max(best, run);
  }
  return static_cast<double>(best);
}

double autocorrelation(const SliceStats& s, std::size_t lag) {
  if (s.constant || lag >= s.n) return 0.0;
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < s.n; ++t) acc += s.centered[t] * s.centered[t + lag];
  return acc / (static_cast<double>(s.n - lag) * s.variance);
}

double c3(const SliceStats& s, std::size_t lag) {
  if (2 * lag >= s.n) return 0.0;
  double acc = 0.0;
  const std::size_t m = s.n - 2 * lag;
  for (std::size_t i = 0; i < m; ++i) acc += s.x[i] * s.x[i + lag] * s.x[i + 2 * lag];
  return acc / static_cast<double>(m);
}

double spectral_moment(const SliceStats& s, bool variance) {
  double total = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < s.spectrum.size(); ++k) {
    const double p = std::norm(s.spectrum[k]);
    total += p;
    weighted += static_cast<double>(k) * p;
  }
  if (total == 0.0) return 0.0;
  const double centroid = weighted / total;
  if (!variance) return centroid;
  double spread = 0.0;
  for (std::size_t k = 0; k < s.spectrum.size(); ++k) {
    const double d = static_cast<double>(k) - centroid;
    spread += d * d * std::norm(s.spectrum[k]);
  }
  return spread / total;
}

double binned_entropy(const SliceStats& s, std::size_t bins) {
  if (s.constant) return 0.0;
  const double lo = s.sorted.front(), hi = s.sorted.back();
  std::vector<std::size_t> counts(bins, 0);
  for (double v : s.x) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)] += 1;
  }
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(s.n);
    h -= p * std::log(p);
  }
  return h;
}

struct Trend {
  double slope = 0.0, intercept = 0.0, stderr_ = 0.0;
};

Trend linear_trend(const SliceStats& s) {
  const double n = static_cast<double>(s.n);
  const double t_mean = (n - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t < s.n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxy += dt * s.centered[t];
    sxx += dt * dt;
  }
  Trend tr;
  tr.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  tr.intercept = s.mean - tr.slope * t_mean;
  if (s.n > 2) {
    double ssr = 0.0;
    for (std::size_t t = 0; t < s.n; ++t) {
      const double r = s.centered[t] - tr.slope * (static_cast<double>(t) - t_mean);
      ssr += r * r;
    }
    tr.stderr_ = std::sqrt(ssr / (n - 2.0));
  }
  return tr;
}

std::string param_suffix(double v) {
  return format_double(v);
}

std::vector<Entry> build_entries() {
  std::vector<Entry> e;
  auto add = [&](std::string name, FeatureFamily fam, std::vector<std::pair<std::string, double>> params,
                 Compute fn) {
    e.push_back({{std::move(name), fam, std::move(params)}, std::move(fn)});
  };
  using F = FeatureFamily;

  add("mean", F::Moments, {}, [](const SliceStats& s) { return s.mean; });
  add("median", F::Moments, {}, [](const SliceStats& s) { return s.quantile(0.5); });
  add("standard_deviation", F::Moments, {}, [](const SliceStats& s) { return s.stddev; });
  add("variance", F::Moments, {}, [](const SliceStats& s) { return s.variance; });
  add("skewness", F::Moments, {}, skewness);
  add("kurtosis", F::Moments, {}, kurtosis);
  add("minimum", F::Moments, {}, [](const SliceStats& s) { return s.sorted.front(); });
  add("maximum", F::Moments, {}, [](const SliceStats& s) { return s.sorted.back(); });
  for (double q : {0.1, 0.25, 0.75, 0.9}) {
    add("quantile_q_" + param_suffix(q), F::Moments, {{"q", q}},
        [q](const SliceStats& s) { return s.quantile(q); });
  }
  add("root_mean_square", F::Moments, {}, [](const SliceStats& s) {
    double acc = 0.0;
    for (double v : s.x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(s.n));
  });
  add("mean_second_derivative_central", F::Moments, {}, [](const SliceStats& s) {
    if (s.n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 2 < s.n; ++i) acc += 0.5 * (s.x[i + 2] - 2.0 * s.x[i + 1] + s.x[i]);
    return acc / static_cast<double>(s.n - 2);
  });

  add("abs_energy", F::EnergyChange, {}, [](const SliceStats& s) {
    double acc = 0.0;
    for (double v : s.x) acc += v * v;
    return acc;
  });
  add("absolute_sum_of_changes", F::EnergyChange, {}, [](const SliceStats& s) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s.n; ++i) acc += std::abs(s.x[i] - s.x[i - 1]);
    return acc;
  });
  add("mean_abs_change", F::EnergyChange, {}, [](const SliceStats& s) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s.n; ++i) acc += std::abs(s.x[i] - s.x[i - 1]);
    return s.n > 1 ? acc / static_cast<double>(s.n - 1) : 0.0;
  });
  add("mean_change", F::EnergyChange, {}, [](const SliceStats& s) {
    return s.n > 1 ? (s.x[s.n - 1] - s.x[0]) / static_cast<double>(s.n - 1) : 0.0;
  });
  add("cid_ce", F::EnergyChange, {}, [](const SliceStats& s) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s.n; ++i) acc += (s.x[i] - s.x[i - 1]) * (s.x[i] - s.x[i - 1]);
    return std::sqrt(acc);
  });
  add("variance_larger_than_standard_deviation", F::EnergyChange, {},
      [](const SliceStats& s) { return s.variance > s.stddev ? 1.0 : 0.0; });
  add("sum_values", F::EnergyChange, {},
      [](const SliceStats& s) { return std::accumulate(s.x.begin(), s.x.end(), 0.0); });

  add("count_above_mean", F::CountsRuns, {}, [](const SliceStats& s) {
    return static_cast<double>(std::count_if(s.centered.begin(), s.centered.end(), [](double c) { return c > 0.0; }));
  });
  add("count_below_mean", F::CountsRuns, {}, [](const SliceStats& s) {
    return static_cast<double>(std::count_if(s.centered.begin(), s.centered.end(), [](double c) { return c < 0.0; }));
  });
  add("longest_strike_above_mean", F::CountsRuns, {}, [](const SliceStats& s) { return longest_strike(s, true); });
  add("longest_strike_below_mean", F::CountsRuns, {}, [](const SliceStats& s) { return longest_strike(s, false); });
  add("number_of_zero_crossings", F::CountsRuns, {}, [](const SliceStats& s) {
    std::size_t count = 0;
    for (std::size_t i = 1; i < s.n; ++i) count += (s.centered[i] > 0.0) != (s.centered[i - 1] > 0.0);
    return static_cast<double>(count);
  });
  add("first_location_of_maximum", F::CountsRuns, {}, [](const SliceStats& s) {
    auto it = std::max_element(s.x.begin(), s.x.end());
    return static_cast<double>(it - s.x.begin()) / static_cast<double>(s.n);
  });
  add("last_location_of_maximum", F::CountsRuns, {}, [](const SliceStats& s) {
    std::size_t last = 0;
    for (std::size_t i = 0; i < s.n; ++i)
      if (s.x[i] >= s.x[last]) last = i;
    return static_cast<double>(last + 1) / static_cast<double>(s.n);
  });
  add("first_location_of_minimum", F::CountsRuns, {}, [](const SliceStats& s) {
    auto it = std::min_element(s.x.begin(), s.x.end());
    return static_cast<double>(it - s.x.begin()) / static_cast<double>(s.n);
  });
  add("last_location_of_minimum", F::CountsRuns, {}, [](const SliceStats& s) {
    std::size_t last = 0;
    for (std::size_t i = 0; i < s.n; ++i)
      if (s.x[i] <= s.x[last]) last = i;
    return static_cast<double>(last + 1) / static_cast<double>(s.n);
  });
  add("number_of_peaks_n_3", F::CountsRuns, {{"n", 3.0}}, [](const SliceStats& s) {
    constexpr std::size_t support = 3;
    std::size_t peaks = 0;
    for (std::size_t i = support; i + support < s.n; ++i) {
      bool peak = true;
      for (std::size_t j = 1; j <= support && peak; ++j) peak = s.x[i] > s.x[i - j] && s.x[i] > s.x[i + j];
      peaks += peak;
    }
    return static_cast<double>(peaks);
  });

  for (std::size_t lag = 1; lag <= 10; ++lag) {
    add("autocorrelation_lag_" + std::to_string(lag), F::Autocorrelation, {{"lag", double(lag)}},
        [lag](const SliceStats& s) { return autocorrelation(s, lag); });
  }
  for (std::size_t lag = 1; lag <= 3; ++lag) {
    add("c3_lag_" + std::to_string(lag), F::Autocorrelation, {{"lag", double(lag)}},
        [lag](const SliceStats& s) { return c3(s, lag); });
  }

  for (std::size_t k = 1; k <= 8; ++k) {
    add("fft_coefficient_k_" + std::to_string(k) + "_real", F::Spectral, {{"k", double(k)}},
        [k](const SliceStats& s) { return k < s.spectrum.size() ? s.spectrum[k].real() : 0.0; });
    add("fft_coefficient_k_" + std::to_string(k) + "_abs", F::Spectral, {{"k", double(k)}},
        [k](const SliceStats& s) { return k < s.spectrum.size() ? std::abs(s.spectrum[k]) : 0.0; });
  }
  add("spectral_centroid", F::Spectral, {}, [](const SliceStats& s) { return spectral_moment(s, false); });
  add("spectral_variance", F::Spectral, {}, [](const SliceStats& s) { return spectral_moment(s, true); });

  add("binned_entropy_bins_10", F::Distributional, {{"bins", 10.0}},
      [](const SliceStats& s) { return binned_entropy(s, 10); });
  for (double r : {1.0, 2.0, 3.0}) {
    add("ratio_beyond_r_sigma_" + param_suffix(r), F::Distributional, {{"r", r}}, [r](const SliceStats& s) {
      std::size_t count = 0;
      for (double c : s.centered) count += std::abs(c) > r * s.stddev;
      return static_cast<double>(count) / static_cast<double>(s.n);
    });
  }
  add("range", F::Distributional, {}, [](const SliceStats& s) { return s.sorted.back() - s.sorted.front(); });
  add("mean_n_absolute_max_7", F::Distributional, {{"n", 7.0}}, [](const SliceStats& s) {
    std::vector<double> mags(s.x.begin(), s.x.end());
    for (auto& v : mags) v = std::abs(v);
    const std::size_t m = std::min<std::size_t>(7, mags.size());
    std::partial_sort(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(m), mags.end(), std::greater<>());
    return std::accumulate(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(m), 0.0) / static_cast<double>(m);
  });

  add("linear_trend_slope", F::Trend, {}, [](const SliceStats& s) { return linear_trend(s).slope; });
  add("linear_trend_intercept", F::Trend, {}, [](const SliceStats& s) { return linear_trend(s).intercept; });
  add("linear_trend_stderr", F::Trend, {}, [](const SliceStats& s) { return linear_trend(s).stderr_; });
  return e;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = build_entries();
  return table;
}

}  // namespace

const std::vector<FeatureDescriptor>& catalog() {
  static const std::vector<FeatureDescriptor> descriptors = [] {
    std::vector<FeatureDescriptor> out;
    for (const auto& entry : entries()) out.push_back(entry.descriptor);
    return out;
  }();
  return descriptors;
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& d : catalog()) names.push_back(d.name);
  return names;
}

FeatureVector extract(std::span<const double> slice, std::size_t min_length) {
  if (slice.size() < std::max<std::size_t>(min_length, 1)) {
    throw Error(ErrorCode::SliceTooShort, "slice of length " + std::to_string(slice.size()) +
                                              " is shorter than " + std::to_string(min_length));
  }
  for (double v : slice) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "slice contains a non-finite value");
  }
  const SliceStats stats(slice);
  FeatureVector out;
  out.values.reserve(entries().size());
  for (const auto& entry : entries()) {
    const double v = entry.compute(stats);
    out.values.push_back(std::isfinite(v) ? v : 0.0);
  }
  return out;
}

FeatureVector extract_with_background(const SliceTriple& triple, bool use_stimulus, std::size_t min_length) {
  const auto& window = use_stimulus ? triple.stimulus : triple.prestimulus;
  if (window.size() != triple.background.size()) {
    throw Error(ErrorCode::LengthMismatch, "slice and background lengths differ");
  }
  auto fv = extract(window, min_length);
  const auto bg = extract(triple.background, min_length);
  for (std::size_t i = 0; i < fv.values.size(); ++i) fv.values[i] -= bg.values[i];
  fv.exposition_id = triple.exposition_id;
  fv.channel_id = triple.channel_id;
  fv.subtracted = true;
  return fv;
}

}  // namespace phyto
