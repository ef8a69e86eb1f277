#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "oofa/candidates.hpp"

namespace oofa {

/// Relative pivot below which an information matrix is treated as singular.
inline constexpr double kSingularPivot = 1e-10;

/// Width of the main-effects model row [1 | PWO | process dummies].
inline int model_width(const std::vector<int>& column_levels) {
  int p = 1;
  for (int s : column_levels) p += s - 1;
  return p;
}

/// Main-effects model row for an extended run. Two-level columns enter as their
/// 0/1 level; an s-level column enters as indicators of levels 1..s-1.
template <class Row>
inline void model_row(const Row& ext, const std::vector<int>& column_levels, double* out) {
  int j = 0;
  out[j++] = 1.0;
  for (std::size_t c = 0; c < column_levels.size(); ++c) {
    const int s = column_levels[c];
    for (int a = 1; a < s; ++a) out[j++] = static_cast<int>(ext[c]) == a ? 1.0 : 0.0;
  }
}

inline Eigen::MatrixXd model_matrix(const std::vector<std::vector<std::uint8_t>>& ext,
                                    const std::vector<int>& column_levels) {
  const int p = model_width(column_levels);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ext.size()), p);
  std::vector<double> buf(p);
  for (std::size_t i = 0; i < ext.size(); ++i) {
    model_row(ext[i], column_levels, buf.data());
    for (int j = 0; j < p; ++j) x(static_cast<Eigen::Index>(i), j) = buf[j];
  }
  return x;
}

/// log det of a symmetric positive semi-definite matrix via pivoted LDL^T;
/// nullopt when the smallest pivot is below kSingularPivot relative to the largest.
inline std::optional<double> logdet_psd(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double big = d.cwiseAbs().maxCoeff();
  if (!(big > 0.0)) return std::nullopt;
  double ld = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] <= kSingularPivot * big) return std::nullopt;
    ld += std::log(d[i]);
  }
  return ld;
}

/// Information matrix X'X of the reference pool, assembled from its cached one-
/// and two-column tables rather than by a pass over every row.
inline Eigen::MatrixXd reference_information(const CandidateSet& cands) {
  const auto& ref = cands.reference();
  const auto& lv = ref.column_levels();
  const int p = model_width(lv);
  std::vector<int> offset(lv.size());
  int j = 1;
  for (std::size_t c = 0; c < lv.size(); ++c) {
    offset[c] = j;
    j += lv[c] - 1;
  }
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  info(0, 0) = static_cast<double>(ref.size());
  for (const auto& tab : ref.tables(1)) {
    const int c = tab.columns[0];
    for (int a = 1; a < lv[c]; ++a) {
      const double n = static_cast<double>(tab.counts[a]);
      const int idx = offset[c] + a - 1;
      info(0, idx) = info(idx, 0) = n;
      info(idx, idx) = n;
    }
  }
  for (const auto& tab : ref.tables(2)) {
    const int c1 = tab.columns[0], c2 = tab.columns[1];
    for (int a = 1; a < lv[c1]; ++a)
      for (int b = 1; b < lv[c2]; ++b) {
        const double n = static_cast<double>(tab.counts[a * lv[c2] + b]);
        const int i1 = offset[c1] + a - 1, i2 = offset[c2] + b - 1;
        info(i1, i2) = info(i2, i1) = n;
      }
  }
  return info;
}

}  // namespace oofa
