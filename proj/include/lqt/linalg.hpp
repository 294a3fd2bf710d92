#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "lqt/error.hpp"

namespace lqt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

inline bool all_finite(const Mat& a) { return a.allFinite(); }

// Moore–Penrose pseudo-inverse by SVD, zeroing singular values below
// sigma_max * max(rows, cols) * 1e-12.
inline Mat pinv(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return Mat::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = smax * static_cast<double>(std::max(a.rows(), a.cols())) * 1e-12;
  Vec inv_sv = Vec::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) inv_sv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

inline Eigen::Index numeric_rank(const Mat& a, double threshold_scale) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = smax * threshold_scale;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

inline Eigen::Index numeric_rank(const Mat& a) {
  return numeric_rank(a, static_cast<double>(std::max(a.rows(), a.cols())) * 1e-12);
}

inline double min_symmetric_eigenvalue(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Symmetric PSD square root from the spectral decomposition; eigenvalues that
// are slightly negative from rounding are clamped to zero.
inline Mat sqrt_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
  Vec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? std::sqrt(d(i)) : 0.0;
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline std::vector<std::complex<double>> eigenvalues(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> out(static_cast<size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return out;
}

inline bool is_hurwitz(const Mat& a, double margin = 0.0) {
  for (const auto& ev : eigenvalues(a))
    if (ev.real() >= -margin) return false;
  return true;
}

// Matrix exponential by scaling-and-squaring with the degree-13 Pade
// approximant (Higham 2005 coefficients).
inline Mat expm(const Mat& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return Mat::Zero(0, 0);
  const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                      670442572800.0,      33522128640.0,       1323241920.0,
                      40840800.0,          960960.0,            16380.0,
                      182.0,               1.0};
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // induced inf-norm
  int squarings = 0;
  Mat as = a;
  const double theta13 = 5.371920351148152;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    as = a / std::pow(2.0, squarings);
  }
  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat ident = Mat::Identity(n, n);
  Mat u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
          b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  Mat r = (v - u).fullPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace lqt
