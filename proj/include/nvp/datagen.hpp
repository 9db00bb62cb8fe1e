#pragma once

// Simulated demand laws, dataset generation, and CSV ingestion for both the
// plain `p,z1,...,zm,d` dataset format and the electricity-market schema.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nvp/dataset.hpp"
#include "nvp/parallel.hpp"

namespace nvp {

inline constexpr std::size_t kSimFeatureDim = 4;
using Vec4 = std::array<double, kSimFeatureDim>;

/// D = max{0, intercept + price_slope p + a_scale a'(z + phi_scale phi)
///            + theta_scale (b'z) theta},  phi ~ N(0, I4), theta ~ N(0, 1).
struct ComplexSim {
  Vec4 a{8.0, 1.0, 1.0, 1.0};
  Vec4 b{-1.0, 1.0, 0.0, 0.0};
  double intercept = 60.0;
  double price_slope = -1.0;
  double a_scale = 12.0;
  double phi_scale = 0.25;
  double theta_scale = 5.0;
};

/// D = max{0, intercept + price_slope p + slopes'z + noise_std phi}, phi ~ N(0, 1).
struct LinearSim {
  double intercept = 60.0;
  double price_slope = -1.0;
  Vec4 slopes{1.0, 1.0, 1.0, 1.0};
  double noise_std = 1.0;
};

using DemandModel = std::variant<ComplexSim, LinearSim>;

inline std::string model_name(const DemandModel& m) {
  return std::holds_alternative<ComplexSim>(m) ? "complex" : "linear";
}

namespace detail {
inline void check_sim_features(std::span<const double> z) {
  if (z.size() != kSimFeatureDim)
    throw std::invalid_argument("simulated demand models take 4 features");
}
inline double dot4(const Vec4& a, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t j = 0; j < kSimFeatureDim; ++j) s += a[j] * z[j];
  return s;
}
}  // namespace detail

/// Deterministic (unfloored) part of demand.
inline double mean_demand(const DemandModel& model, double p, std::span<const double> z) {
  detail::check_sim_features(z);
  if (const auto* m = std::get_if<ComplexSim>(&model))
    return m->intercept + m->price_slope * p + m->a_scale * detail::dot4(m->a, z);
  const auto& m = std::get<LinearSim>(model);
  return m.intercept + m.price_slope * p + detail::dot4(m.slopes, z);
}

/// Additive random shock; its law depends on z but not on p, so demand at
/// any price is max(0, mean_demand(p, z) + shock). Always consumes the same
/// number of normal draws regardless of the noise scales.
inline double draw_shock(const DemandModel& model, std::span<const double> z, Rng& rng) {
  detail::check_sim_features(z);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (const auto* m = std::get_if<ComplexSim>(&model)) {
    double aphi = 0.0;
    for (std::size_t j = 0; j < kSimFeatureDim; ++j) aphi += m->a[j] * normal(rng);
    const double theta = normal(rng);
    return m->a_scale * m->phi_scale * aphi + m->theta_scale * detail::dot4(m->b, z) * theta;
  }
  const auto& m = std::get<LinearSim>(model);
  return m.noise_std * normal(rng);
}

inline double demand_from_shock(const DemandModel& model, double p, std::span<const double> z,
                                double shock) {
  return std::max(0.0, mean_demand(model, p, z) + shock);
}

inline double sample_demand(const DemandModel& model, double p, std::span<const double> z,
                            Rng& rng) {
  return demand_from_shock(model, p, z, draw_shock(model, z, rng));
}

/// True when the shock is identically zero.
inline bool is_noiseless(const DemandModel& model) {
  if (const auto* m = std::get_if<ComplexSim>(&model))
    return m->phi_scale == 0.0 && m->theta_scale == 0.0;
  return std::get<LinearSim>(model).noise_std == 0.0;
}

/// Largest demand the model can produce at (p, z); infinite under Gaussian noise.
inline double max_possible_demand(const DemandModel& model, double p, std::span<const double> z) {
  if (!is_noiseless(model)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, mean_demand(model, p, z));
}

/// Distribution of historical prices: uniform over `range`.
struct PricePolicy {
  Interval range{7.0, 40.0};
};

inline std::vector<std::vector<double>> gen_features(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_features: n must be >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> z(n, std::vector<double>(kSimFeatureDim));
  for (auto& row : z)
    for (auto& v : row) v = unit(rng);
  return z;
}

/// One sequential RNG stream per seed: for each row, z ~ U[0,1]^4, then
/// p ~ policy, then the demand shock.
inline Dataset gen_dataset(const DemandModel& model, std::size_t n, const PricePolicy& policy,
                           std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
  if (!(policy.range.lo <= policy.range.hi))
    throw std::invalid_argument("gen_dataset: empty price range");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Sample> samples(n);
  for (auto& s : samples) {
    s.features.resize(kSimFeatureDim);
    for (auto& v : s.features) v = unit(rng);
    s.price = policy.range.lo + policy.range.width() * unit(rng);
    s.demand = sample_demand(model, s.price, s.features, rng);
  }
  return Dataset(std::move(samples));
}

// ---------------------------------------------------------------------------
// Dataset CSV: header `p,z1,...,zm,d`.

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_dataset_csv(std::ostream& os, const Dataset& data, bool scaled = false) {
  const Dataset tmp = scaled ? data.scaled() : Dataset{};
  const Dataset& src = scaled ? tmp : data;
  os << "p";
  for (std::size_t j = 0; j < src.feature_dim(); ++j) os << ",z" << (j + 1);
  os << ",d\n";
  for (const auto& s : src.samples()) {
    os << format_double(s.price);
    for (double v : s.features) os << ',' << format_double(v);
    os << ',' << format_double(s.demand) << '\n';
  }
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last && std::isfinite(out);
}
}  // namespace detail

inline Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset csv: empty input");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.front() != "p" || header.back() != "d")
    throw std::runtime_error("dataset csv: header must be p,z1,...,zm,d");
  for (std::size_t j = 1; j + 1 < header.size(); ++j)
    if (header[j] != "z" + std::to_string(j))
      throw std::runtime_error("dataset csv: unexpected column '" + header[j] + "'");
  const std::size_t m = header.size() - 2;
  std::vector<Sample> samples;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != m + 2)
      throw std::runtime_error("dataset csv: line " + std::to_string(lineno) +
                               ": expected " + std::to_string(m + 2) + " fields");
    Sample s;
    s.features.resize(m);
    bool ok = detail::parse_double(f[0], s.price) && detail::parse_double(f.back(), s.demand);
    for (std::size_t j = 0; j < m && ok; ++j) ok = detail::parse_double(f[j + 1], s.features[j]);
    if (!ok) throw std::runtime_error("dataset csv: line " + std::to_string(lineno) + ": bad number");
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples));
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return read_dataset_csv(in);
}

// ---------------------------------------------------------------------------
// Electricity-market data: Date, Demand, RRP, min temperature,
// max temperature, solar exposure, rainfall, school day, holiday.

struct RealDataRow {
  std::string date;
  double demand = 0.0;
  double price = 0.0;
  double min_temperature = 0.0;
  double max_temperature = 0.0;
  double solar_exposure = 0.0;
  double rainfall = 0.0;
  bool school_day = false;
  bool holiday = false;
};

/// Heating degree day as printed: (15 - T_max)^+.
inline double heating_degree_day(double t_max) { return std::max(15.0 - t_max, 0.0); }
/// Cooling degree day as printed: (T_min - 18)^+.
inline double cooling_degree_day(double t_min) { return std::max(t_min - 18.0, 0.0); }

/// Feature vector (HDD, CDD, solar, rainfall, school_day, holiday).
inline std::vector<double> real_features(const RealDataRow& r) {
  return {heating_degree_day(r.max_temperature), cooling_degree_day(r.min_temperature),
          r.solar_exposure, r.rainfall, r.school_day ? 1.0 : 0.0, r.holiday ? 1.0 : 0.0};
}

inline const std::vector<std::string>& real_feature_names() {
  static const std::vector<std::string> names{"hdd", "cdd", "solar_exposure",
                                              "rainfall", "school_day", "holiday"};
  return names;
}

struct RealData {
  Dataset train;
  Dataset test;
  std::size_t rows_read = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_invalid = 0;
  std::vector<std::string> diagnostics;
};

namespace detail {
inline std::string normalize_column(std::string s) {
  for (auto& ch : s) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == ' ' || ch == '-') ch = '_';
  }
  return s;
}

inline bool parse_bool(std::string s, bool& out) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "true" || s == "y" || s == "yes" || s == "1") return out = true, true;
  if (s == "false" || s == "n" || s == "no" || s == "0") return out = false, true;
  return false;
}
}  // namespace detail

/// Parses the electricity CSV, derives HDD/CDD, orders rows by date and
/// splits 90/10 chronologically. Feature and price scaling come from the
/// training rows only. Rows with empty fields or unparseable/invalid values
/// are dropped and reported in `diagnostics` with their line numbers.
inline RealData load_real_csv(std::istream& is) {
  static const std::vector<std::string> required{
      "date", "demand", "rrp", "min_temperature", "max_temperature",
      "solar_exposure", "rainfall", "school_day", "holiday"};
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("real csv: empty input");
  const auto header = detail::split_csv_line(line);
  std::vector<std::size_t> col(required.size());
  for (std::size_t r = 0; r < required.size(); ++r) {
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h)
      if (detail::normalize_column(header[h]) == required[r]) found = h;
    if (found == header.size()) throw std::runtime_error("real csv: missing column '" + required[r] + "'");
    col[r] = found;
  }

  RealData out;
  std::vector<RealDataRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    ++out.rows_read;
    const auto f = detail::split_csv_line(line);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != header.size()) {
      ++out.dropped_invalid;
      out.diagnostics.push_back(where + "expected " + std::to_string(header.size()) + " fields");
      continue;
    }
    bool missing = false;
    for (std::size_t c : col) missing = missing || f[c].empty();
    if (missing) {
      ++out.dropped_missing;
      out.diagnostics.push_back(where + "missing value");
      continue;
    }
    RealDataRow r;
    r.date = f[col[0]];
    double* nums[] = {&r.demand, &r.price, &r.min_temperature, &r.max_temperature,
                      &r.solar_exposure, &r.rainfall};
    std::string bad;
    for (std::size_t k = 0; k < 6 && bad.empty(); ++k)
      if (!detail::parse_double(f[col[k + 1]], *nums[k])) bad = required[k + 1];
    if (bad.empty() && !detail::parse_bool(f[col[7]], r.school_day)) bad = required[7];
    if (bad.empty() && !detail::parse_bool(f[col[8]], r.holiday)) bad = required[8];
    if (bad.empty() && !(r.demand > 0.0)) bad = "demand (must be positive)";
    if (!bad.empty()) {
      ++out.dropped_invalid;
      out.diagnostics.push_back(where + "unparseable or invalid " + bad);
      continue;
    }
    rows.push_back(std::move(r));
  }
  if (rows.size() < 2) throw std::runtime_error("real csv: need at least two valid rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const RealDataRow& a, const RealDataRow& b) { return a.date < b.date; });
  const std::size_t n_train = std::max<std::size_t>(1, rows.size() * 9 / 10);
  std::vector<Sample> train;
  std::vector<Sample> test;
  for (std::size_t i = 0; i < rows.size(); ++i)
    (i < n_train ? train : test).push_back({rows[i].price, real_features(rows[i]), rows[i].demand});
  out.train = Dataset(std::move(train));
  out.test = Dataset(std::move(test), out.train.scaling());
  return out;
}

/// Writes a synthetic stand-in with the electricity schema: n consecutive
/// days from 2015-01-01, demand falling in price and rising with HDD/CDD.
inline void write_synthetic_real_csv(std::ostream& os, std::size_t n, std::uint64_t seed) {
  using namespace std::chrono;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  os << "Date,Demand,RRP,min temperature,max temperature,solar exposure,rainfall,school day,holiday\n";
  sys_days day = year{2015} / January / 1;
  for (std::size_t i = 0; i < n; ++i, day += days{1}) {
    const double season = std::cos(2.0 * 3.141592653589793 * static_cast<double>(i) / 365.25);
    const double tmin = std::clamp(11.0 - 5.0 * season + 3.0 * normal(rng), 0.6, 28.0);
    const double tmax = std::clamp(tmin + 7.0 + 4.0 * unit(rng) - 2.0 * season, 9.0, 43.5);
    const double solar = std::clamp(13.0 - 8.0 * season + 3.0 * normal(rng), 0.7, 33.3);
    const double rain = unit(rng) < 0.5 ? 0.0 : 10.0 * unit(rng) * unit(rng);
    const weekday wd{day};
    const bool holiday = unit(rng) < 0.04;
    const bool school = wd != Saturday && wd != Sunday && !holiday && unit(rng) < 0.9;
    const double rrp = std::clamp(66.7 + 25.0 * normal(rng), 0.0, 300.0);
    const double demand = std::max(85100.0, 120000.0 - 150.0 * rrp + 2500.0 * heating_degree_day(tmax) +
                                                3000.0 * cooling_degree_day(tmin) + 4000.0 * (school ? 1.0 : 0.0) -
                                                8000.0 * (holiday ? 1.0 : 0.0) + 3000.0 * normal(rng));
    const year_month_day ymd{day};
    char date[16];
    std::snprintf(date, sizeof(date), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    os << date << ',' << format_double(std::round(demand * 10.0) / 10.0) << ','
       << format_double(std::round(rrp * 100.0) / 100.0) << ',' << format_double(std::round(tmin * 10.0) / 10.0)
       << ',' << format_double(std::round(tmax * 10.0) / 10.0) << ','
       << format_double(std::round(solar * 10.0) / 10.0) << ',' << format_double(std::round(rain * 10.0) / 10.0)
       << ',' << (school ? 'Y' : 'N') << ',' << (holiday ? 'Y' : 'N') << '\n';
  }
}

inline RealData load_real_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_real_csv(in);
}

}  // namespace nvp
