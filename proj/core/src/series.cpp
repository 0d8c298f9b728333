#include "econoscale/series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>

#include <fftw3.h>

#include "econoscale/error.hpp"
#include "econoscale/rng.hpp"
#include "econoscale/text.hpp"

namespace econoscale::series {

void TimeSeries::validate() const {
  require(values.size() >= 2, "time series needs at least 2 samples");
  require(std::isfinite(sample_interval) && sample_interval > 0.0,
          "sample_interval must be positive");
  if (volume) require(volume->size() == values.size(), "volume channel length mismatch");
}

TimeSeries TimeSeries::from_values(std::vector<double> values, double sample_interval) {
  TimeSeries s;
  s.values = std::move(values);
  s.sample_interval = sample_interval;
  s.validate();
  return s;
}

TimeSeries parse_csv(std::istream& in, const std::string& source_name) {
  TimeSeries s;
  std::vector<double> times;
  std::vector<std::size_t> row_lines;
  bool header_seen = false;
  bool has_volume = false;
  std::string line;
  std::size_t line_no = 0;
  const auto bad = [&](const std::string& what) {
    fail(ErrorCode::parse_error, source_name + ": line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      constexpr std::string_view key = "sample_interval:";
      const auto body = trim(text.substr(1));
      if (body.substr(0, key.size()) == key) {
        const auto dt = parse_number(body.substr(key.size()));
        if (!dt || *dt <= 0.0) bad("sample_interval must be a positive number");
        s.sample_interval = *dt;
      }
      continue;
    }
    const auto fields = split_fields(text);
    if (!header_seen) {
      const bool ok = (fields.size() == 2 || fields.size() == 3) && fields[0] == "t" &&
                      fields[1] == "value" && (fields.size() == 2 || fields[2] == "volume");
      if (!ok) bad("expected header 't,value' or 't,value,volume'");
      has_volume = fields.size() == 3;
      if (has_volume) s.volume.emplace();
      header_seen = true;
      continue;
    }
    if (fields.size() != (has_volume ? 3u : 2u)) {
      bad("expected " + std::to_string(has_volume ? 3 : 2) + " fields, got " +
          std::to_string(fields.size()));
    }
    const auto t = parse_number(fields[0]);
    if (!t) bad("timestamp '" + std::string(fields[0]) + "' is not a number");
    const auto v = parse_number(fields[1]);
    if (!v) bad("value '" + std::string(fields[1]) + "' is not a number");
    if (has_volume) {
      const auto vol = parse_number(fields[2]);
      if (!vol || *vol < 0.0) bad("volume '" + std::string(fields[2]) + "' is not a non-negative number");
      s.volume->push_back(*vol);
    }
    times.push_back(*t);
    s.values.push_back(*v);
    row_lines.push_back(line_no);
  }
  if (!header_seen) fail(ErrorCode::parse_error, source_name + ": missing header");
  if (s.values.size() < 2) fail(ErrorCode::parse_error, source_name + ": need at least 2 rows");

  std::vector<double> spacing;
  for (std::size_t i = 1; i < times.size(); ++i) spacing.push_back(times[i] - times[i - 1]);
  std::vector<double> sorted = spacing;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::size_t gaps = 0;
  std::size_t first_gap_line = 0;
  for (std::size_t i = 0; i < spacing.size(); ++i) {
    if (spacing[i] > 1.5 * median) {
      if (gaps++ == 0) first_gap_line = row_lines[i + 1];
    }
  }
  if (gaps > 0) {
    s.warnings.push_back("non-uniform timestamps: " + std::to_string(gaps) +
                         " gap(s) wider than 1.5x the median spacing, first at line " +
                         std::to_string(first_gap_line));
  }
  return s;
}

TimeSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  out << "# sample_interval: " << format_number(series.sample_interval) << '\n';
  out << (series.volume ? "t,value,volume\n" : "t,value\n");
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    out << format_number(static_cast<double>(i) * series.sample_interval) << ','
        << format_number(series.values[i]);
    if (series.volume) out << ',' << format_number((*series.volume)[i]);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  write_csv(out, series);
}

std::vector<double> trailing_means(const std::vector<double>& values, std::size_t window) {
  require(window >= 1, "window must be at least 1 sample");
  require(window <= values.size(), "window longer than the series");
  std::vector<double> out(values.size(), 0.0);
  // long double keeps the rolling sum's drift far below any sensible threshold
  long double sum = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= window) sum -= values[i - window];
    if (i + 1 >= window) {
      out[i] = window == 1 ? values[i] : static_cast<double>(sum / static_cast<long double>(window));
    }
  }
  return out;
}

TimeSeries sliding_average(const TimeSeries& series, std::size_t window) {
  series.validate();
  require(window >= 1, "window must be at least 1 sample");
  require(window <= series.usable_size(), "window longer than the usable series");
  TimeSeries out;
  out.sample_interval = series.sample_interval;
  out.values = trailing_means(series.values, window);
  out.first_usable = series.first_usable + window - 1;
  for (std::size_t i = 0; i < out.first_usable; ++i) out.values[i] = 0.0;
  return out;
}

void CascadeSpec::validate() const {
  require(p > 0.0 && p < 1.0, "cascade p must lie in (0,1)");
  require(depth >= 1 && depth <= 28, "cascade depth must lie in [1,28]");
}

std::vector<double> binomial_cascade_masses(const CascadeSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  const double q = 1.0 - spec.p;
  std::vector<double> mass{1.0};
  std::vector<double> next;
  for (int g = 0; g < spec.depth; ++g) {
    next.resize(mass.size() * 2);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      const bool heavy_left = (rng() >> 63) != 0;
      const double left = heavy_left ? spec.p : q;
      const double right = heavy_left ? q : spec.p;
      next[2 * i] = mass[i] * left;
      next[2 * i + 1] = mass[i] * right;
    }
    mass.swap(next);
  }
  return mass;
}

TimeSeries generate_binomial_cascade(const CascadeSpec& spec) {
  const auto mass = binomial_cascade_masses(spec);
  TimeSeries s;
  s.values.resize(mass.size() + 1);
  s.values[0] = 0.0;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    acc += mass[i];
    s.values[i + 1] = static_cast<double>(acc);
  }
  s.sample_interval = std::ldexp(1.0, -spec.depth);
  return s;
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place forward complex DFT.
void forward_dft(std::vector<std::complex<double>>& data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

double fgn_autocovariance(std::size_t k, double hurst) {
  const double h2 = 2.0 * hurst;
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, h2) - 2.0 * std::pow(kd, h2) + std::pow(std::abs(kd - 1.0), h2));
}

}  // namespace

std::vector<double> generate_fgn(double hurst, std::size_t length, std::uint64_t seed) {
  require(hurst > 0.0 && hurst < 1.0, "Hurst exponent must lie in (0,1)");
  require(length >= 2, "fGn length must be at least 2");

  // Circulant embedding of the Toeplitz covariance (Davies & Harte; Wood & Chan).
  const std::size_t half = length;
  const std::size_t m = 2 * half;
  std::vector<std::complex<double>> eig(m);
  for (std::size_t k = 0; k <= half; ++k) eig[k] = fgn_autocovariance(k, hurst);
  for (std::size_t k = half + 1; k < m; ++k) eig[k] = eig[m - k];
  forward_dft(eig);

  SplitMix64 rng(seed);
  const double md = static_cast<double>(m);
  std::vector<std::complex<double>> w(m);
  const auto root = [&](std::size_t k) { return std::sqrt(std::max(0.0, eig[k].real())); };
  w[0] = root(0) / std::sqrt(md) * rng.normal();
  w[half] = root(half) / std::sqrt(md) * rng.normal();
  for (std::size_t k = 1; k < half; ++k) {
    const double a = rng.normal();
    const double b = rng.normal();
    w[k] = root(k) / std::sqrt(2.0 * md) * std::complex<double>(a, b);
    w[m - k] = std::conj(w[k]);
  }
  forward_dft(w);

  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = w[i].real();
  return out;
}

TimeSeries generate_fgn_path(double hurst, std::size_t length, std::uint64_t seed) {
  const auto noise = generate_fgn(hurst, length, seed);
  TimeSeries s;
  s.values.resize(length);
  double acc = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    acc += noise[i];
    s.values[i] = acc;
  }
  return s;
}

TimeSeries generate_white_noise(std::size_t length, std::uint64_t seed) {
  require(length >= 2, "series length must be at least 2");
  SplitMix64 rng(seed);
  TimeSeries s;
  s.values.resize(length);
  for (auto& v : s.values) v = rng.normal();
  return s;
}

}  // namespace econoscale::series
