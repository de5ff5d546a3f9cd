#include <stdexcept>
#include <vector>

#include "oamjrc/harness.hpp"

namespace oamjrc {

namespace {

// Advances `idx` to the next k-combination of [0, n); false after the last.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

}  // namespace

int kruskal_rank_bruteforce(const CMatrix& a, int max_cols) {
  const int n = static_cast<int>(a.cols());
  if (n > max_cols || n > 12)
    throw std::invalid_argument("kruskal_rank_bruteforce: too many columns for exhaustive search");

  // Singular values are compared against the largest one of the whole matrix
  // so that a zero column is rank deficient on its own.
  const double smax = n > 0 ? Eigen::JacobiSVD<CMatrix>(a).singularValues()(0) : 0.0;
  if (!(smax > 0.0)) return 0;

  for (int k = 1; k <= std::min<int>(n, static_cast<int>(a.rows())); ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) idx[j] = j;
    do {
      CMatrix sub(a.rows(), k);
      for (int j = 0; j < k; ++j) sub.col(j) = a.col(idx[j]);
      const auto sv = Eigen::JacobiSVD<CMatrix>(sub).singularValues();
      if (!(sv(k - 1) > 1e-10 * smax)) return k - 1;
    } while (next_combination(idx, n));
  }
  return std::min<int>(n, static_cast<int>(a.rows()));
}

}  // namespace oamjrc
