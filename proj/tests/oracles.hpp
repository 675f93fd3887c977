#pragma once

// Independent reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// Full-matrix edit distance.
inline std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  return d[a.size()][b.size()];
}

/// Ratcliff/Obershelp matched-character count by brute force: every block
/// (i, j, len) is checked character by character; the longest wins, ties go to
/// the smallest i, then the smallest j.
inline std::size_t gestalt_matches(const std::string& a, const std::string& b) {
  std::size_t bi = 0, bj = 0, best = 0;
  for (std::size_t len = std::min(a.size(), b.size()); len > 0 && best == 0; --len) {
    for (std::size_t i = 0; i + len <= a.size() && best == 0; ++i)
      for (std::size_t j = 0; j + len <= b.size() && best == 0; ++j)
        if (a.compare(i, len, b, j, len) == 0) {
          bi = i;
          bj = j;
          best = len;
        }
  }
  if (best == 0) return 0;
  return best + gestalt_matches(a.substr(0, bi), b.substr(0, bj)) +
         gestalt_matches(a.substr(bi + best), b.substr(bj + best));
}

inline double gestalt(const std::string& a, const std::string& b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(gestalt_matches(a, b)) / static_cast<double>(total);
}

/// Damped PageRank solved directly: (I - d M) x = (1 - d)/n, with M the
/// column-normalized weight matrix; dangling nodes link to every node.
inline std::vector<double> pagerank_linear(const std::vector<std::vector<double>>& w, double d = 0.85) {
  const std::size_t n = w.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double out = 0;
    for (std::size_t k = 0; k < n; ++k) out += w[j][k];
    for (std::size_t i = 0; i < n; ++i) {
      const double m = out > 0 ? w[j][i] / out : 1.0 / static_cast<double>(n);
      A[i][j] -= d * m;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] += 1.0;
    A[i][n] = (1.0 - d) / static_cast<double>(n);
  }
  for (std::size_t c = 0; c < n; ++c) {  // Gauss-Jordan, partial pivoting
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = A[i][n] / A[i][i];
  return x;
}

/// Bag-of-n-gram-types F1 between two token sequences.
inline double ngram_f1(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t n) {
  std::set<std::vector<std::string>> sa, sb;
  for (std::size_t i = 0; i + n <= a.size(); ++i) sa.insert({a.begin() + static_cast<long>(i), a.begin() + static_cast<long>(i + n)});
  for (std::size_t i = 0; i + n <= b.size(); ++i) sb.insert({b.begin() + static_cast<long>(i), b.begin() + static_cast<long>(i + n)});
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& g : sa) common += sb.count(g);
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / static_cast<double>(sb.size());
  const double r = static_cast<double>(common) / static_cast<double>(sa.size());
  return 2 * p * r / (p + r);
}

}  // namespace oracle
