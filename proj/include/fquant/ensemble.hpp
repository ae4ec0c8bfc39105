#pragma once

#include <string>
#include <vector>

namespace fquant {

// Weighted family of discretized paths on a shared time grid.
struct QuantizedPathEnsemble {
  std::vector<double> tgrid;
  std::vector<double> paths;  // N x tgrid.size(), row-major
  std::vector<double> weights;
  std::string provenance;

  int size() const { return static_cast<int>(weights.size()); }
  int grid_size() const { return static_cast<int>(tgrid.size()); }
  const double* path(int i) const { return paths.data() + static_cast<std::size_t>(i) * tgrid.size(); }
  double* path(int i) { return paths.data() + static_cast<std::size_t>(i) * tgrid.size(); }
};

std::vector<double> uniform_grid(double T, int n);  // n+1 points on [0, T]

}  // namespace fquant
