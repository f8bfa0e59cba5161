#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace termharm {

// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi rotations.
struct SymmetricEigen {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[i] belongs to values[i], unit length
};

// `matrix` is n x n, row-major; only symmetry is assumed.
SymmetricEigen symmetric_eigen(std::span<const double> matrix, std::size_t n);

double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> x);

}  // namespace termharm
