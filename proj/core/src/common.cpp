#include "geoptics/common.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numeric>

namespace geoptics {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::MultiplicityDrift: return "MultiplicityDrift";
    case ErrorKind::NotSemisimple: return "NotSemisimple";
    case ErrorKind::CharacteristicBoundary: return "CharacteristicBoundary";
    case ErrorKind::GlancingOrSingular: return "GlancingOrSingular";
    case ErrorKind::StabilityFail: return "StabilityFail";
    case ErrorKind::GlancingMode: return "GlancingMode";
    case ErrorKind::IrregularFrequency: return "IrregularFrequency";
    case ErrorKind::NotHyperbolicMode: return "NotHyperbolicMode";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::ClassificationContradiction: return "ClassificationContradiction";
    case ErrorKind::UnindexedMode: return "UnindexedMode";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::MissingTrace: return "MissingTrace";
    case ErrorKind::SupportLeak: return "SupportLeak";
    case ErrorKind::BoundaryResidualNonzero: return "BoundaryResidualNonzero";
    case ErrorKind::NotSolvable: return "NotSolvable";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::SpectrumViolation: return "SpectrumViolation";
    case ErrorKind::MissingUpstream: return "MissingUpstream";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& msg)
    : std::runtime_error(std::string(to_string(kind)) + " [" + stage + "]: " + msg),
      kind_(kind),
      stage_(std::move(stage)) {}

void fail(ErrorKind kind, const std::string& stage, const std::string& msg) {
  throw Error(kind, stage, msg);
}

int numeric_rank(const CMat& m, double rel) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel * s(0)) ++r;
  return r;
}

CMat null_space(const CMat& m, int dim) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const CMat& v = svd.matrixV();
  return v.rightCols(dim);
}

CMat orth(const CMat& m, double rel) {
  if (m.cols() == 0) return CMat(m.rows(), 0);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU);
  int r = 0;
  const auto& s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel * std::max(1.0, s(0))) ++r;
  return svd.matrixU().leftCols(r);
}

namespace {

void fix_phase(CMat& b) {
  for (int c = 0; c < b.cols(); ++c) {
    double nrm = b.col(c).norm();
    for (int r = 0; r < b.rows(); ++r) {
      if (std::abs(b(r, c)) > 1e-8 * nrm) {
        cd ph = b(r, c) / std::abs(b(r, c));
        b.col(c) /= ph;
        break;
      }
    }
  }
}

}  // namespace

CMat canonical_basis(const CMat& basis) {
  const int n = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  CMat b = basis;
  // Column echelon form: for each column choose the first row (in order) with a
  // non-negligible entry among the remaining columns, eliminate it elsewhere.
  int col = 0;
  for (int r = 0; r < n && col < k; ++r) {
    int piv = -1;
    double best = 0.0;
    for (int c = col; c < k; ++c) {
      double a = std::abs(b(r, c));
      if (a > best + 1e-12) {
        best = a;
        piv = c;
      }
    }
    if (piv < 0 || best < 1e-9 * std::max(1.0, b.norm())) continue;
    b.col(col).swap(b.col(piv));
    b.col(col) /= b(r, col);
    for (int c = 0; c < k; ++c)
      if (c != col) b.col(c) -= b(r, c) * b.col(col);
    ++col;
  }
  // Gram-Schmidt in the echelon order.
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < c; ++j) b.col(c) -= b.col(j).dot(b.col(c)) * b.col(j);
    double nrm = b.col(c).norm();
    if (nrm > 0) b.col(c) /= nrm;
  }
  fix_phase(b);
  return b;
}

Mat canonical_real_basis(const CMat& basis) {
  const int n = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  CMat both(n, 2 * k);
  for (int c = 0; c < k; ++c) {
    both.col(2 * c) = basis.col(c).real().cast<cd>();
    both.col(2 * c + 1) = basis.col(c).imag().cast<cd>();
  }
  Eigen::JacobiSVD<CMat> svd(both, Eigen::ComputeThinU);
  CMat span = svd.matrixU().leftCols(k);
  // The span is real, so its projector is real; re-extract a real basis from it.
  Mat proj = (span * span.adjoint()).real();
  Eigen::JacobiSVD<Mat> svd2(proj, Eigen::ComputeThinU);
  Mat realb = svd2.matrixU().leftCols(k);
  CMat canon = canonical_basis(realb.cast<cd>());
  return canon.real();
}

int gcd3(int a, int b, int c) {
  return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
}

}  // namespace geoptics
