#pragma once

// Straightforward reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace oracle {

// Rank of v[i] = (number of smaller values) + (number of equal values + 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

// Alpha by enumerating ordered value pairs: within units (weighted 1/(m-1))
// for the observed disagreement, across all pairable values for the expected one.
inline double alpha(const std::vector<std::vector<double>>& units, bool ordinal) {
  std::vector<double> pool;
  for (const auto& u : units)
    if (u.size() >= 2) pool.insert(pool.end(), u.begin(), u.end());
  std::map<double, double> freq;
  for (double v : pool) freq[v] += 1;
  auto delta = [&](double a, double b) {
    if (!ordinal) return (a - b) * (a - b);
    if (a > b) std::swap(a, b);
    double s = 0;
    for (const auto& [v, f] : freq)
      if (v >= a && v <= b) s += f;
    s -= (freq[a] + freq[b]) / 2;
    return s * s;
  };
  const double n = static_cast<double>(pool.size());
  double observed = 0;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j) s += delta(u[i], u[j]);
    observed += s / static_cast<double>(u.size() - 1);
  }
  observed /= n;
  double expected = 0;
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t j = 0; j < pool.size(); ++j)
      if (i != j) expected += delta(pool[i], pool[j]);
  expected /= n * (n - 1);
  return 1 - observed / expected;
}

}  // namespace oracle
