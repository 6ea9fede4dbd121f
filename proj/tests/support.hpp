#pragma once

#include "mathenc/linalg.hpp"
#include "mathenc/random.hpp"

#include <string>
#include <vector>

namespace testing {

using mathenc::Matrix;

// n_blobs Gaussian blobs of `per_blob` points in `dims` dimensions; centres
// sit on scaled coordinate axes so every pair is `separation` apart (in
// units of sigma = 1).
inline Matrix gaussian_blobs(int n_blobs, int per_blob, int dims, double separation, std::uint64_t seed,
                             std::vector<int>* membership = nullptr) {
  mathenc::Rng rng(seed);
  Matrix x(n_blobs * per_blob, dims);
  if (membership) membership->clear();
  for (int b = 0; b < n_blobs; ++b)
    for (int p = 0; p < per_blob; ++p) {
      const int row = b * per_blob + p;
      for (int d = 0; d < dims; ++d) x(row, d) = rng.normal();
      x(row, b % dims) += separation / std::sqrt(2.0) * (1 + b / dims);
      if (membership) membership->push_back(b);
    }
  return x;
}

inline std::vector<std::string> as_labels(const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int i : ids) out.push_back("c" + std::to_string(i));
  return out;
}

// Partition equality up to relabelling.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

}  // namespace testing
