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

#include "nsc/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nsc/error.hpp"

namespace nsc {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::string matrix_to_string(const Matrix& m) {
  std::ostringstream out;
  write_matrix(out, m);
  return out.str();
}

Matrix read_matrix(std::istream& in) {
  long rows = 0;
  long cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw ConfigError("matrix header must be two positive integers");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      // operator>> rejects "nan"/"inf", which is what we want.
      if (!(in >> m(i, j))) {
        throw ConfigError("matrix body truncated or malformed at entry (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  return m;
}

Matrix matrix_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

Matrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file: " + path);
  try {
    return read_matrix(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write matrix file: " + path);
  write_matrix(out, m);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

int numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  if (s.size() > 0 && s(0) > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rel_tol * s(0)) inv(i) = 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double min_symmetric_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_psd(const Matrix& m, double tol) {
  return is_symmetric(m) && min_symmetric_eigenvalue(m) >= -tol;
}

Vector flatten(const std::vector<Matrix>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Vector flat(total);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    flat.segment(offset, b.size()) =
        Eigen::Map<const Vector>(b.data(), b.size());
    offset += b.size();
  }
  return flat;
}

std::vector<Matrix> unflatten(const Vector& flat, int count, int rows,
                              int cols) {
  const Eigen::Index block = static_cast<Eigen::Index>(rows) * cols;
  if (flat.size() != block * count) {
    throw ConfigError("parameter vector has wrong length for unflatten");
  }
  std::vector<Matrix> blocks;
  blocks.reserve(count);
  for (int i = 0; i < count; ++i) {
    blocks.emplace_back(
        Eigen::Map<const Matrix>(flat.data() + i * block, rows, cols));
  }
  return blocks;
}

}  // namespace nsc
