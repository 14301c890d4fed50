// Copyright 2026 The nsclab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NSC_MATRIX_HPP_
#define NSC_MATRIX_HPP_

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace nsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singular-value cutoff used for numerical rank and pseudo-inverses.
inline constexpr double kRankTolerance = 1e-9;
// Minimum-eigenvalue slack accepted when checking positive semidefiniteness.
inline constexpr double kPsdTolerance = 1e-9;

// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_double(double value);

// Plain-text matrix format: "rows cols" on the first line, then one line per
// row of whitespace-separated decimals.
void write_matrix(std::ostream& out, const Matrix& m);
std::string matrix_to_string(const Matrix& m);
Matrix read_matrix(std::istream& in);
Matrix matrix_from_string(const std::string& text);
Matrix load_matrix_file(const std::string& path);
void save_matrix_file(const std::string& path, const Matrix& m);

bool all_finite(const Matrix& m);

double spectral_norm(const Matrix& m);

// Numerical rank: number of singular values above tol * sigma_max.
int numerical_rank(const Matrix& m, double rel_tol = kRankTolerance);

// Moore-Penrose pseudo-inverse with the same cutoff as numerical_rank.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = kRankTolerance);

// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-9);
bool is_psd(const Matrix& m, double tol = kPsdTolerance);

// Stacks matrices column-major into one vector and back. All blocks share the
// given shape.
Vector flatten(const std::vector<Matrix>& blocks);
std::vector<Matrix> unflatten(const Vector& flat, int count, int rows,
                              int cols);

}  // namespace nsc

#endif  // NSC_MATRIX_HPP_
