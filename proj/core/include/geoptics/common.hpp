#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoptics {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

enum class ErrorKind {
  MultiplicityDrift,
  NotSemisimple,
  CharacteristicBoundary,
  GlancingOrSingular,
  StabilityFail,
  GlancingMode,
  IrregularFrequency,
  NotHyperbolicMode,
  DegenerateBasis,
  ClassificationContradiction,
  UnindexedMode,
  NoConvergence,
  CFLViolation,
  MissingTrace,
  SupportLeak,
  BoundaryResidualNonzero,
  NotSolvable,
  NearSingular,
  BlowUp,
  SpectrumViolation,
  MissingUpstream,
  InvalidInput,
  ConfigError,
};

const char* to_string(ErrorKind k);

// Every failure raised by the library carries a kind and the pipeline stage
// that was running, so the CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& msg);
  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& stage, const std::string& msg);

// Numerical rank of a complex matrix using the relative singular value
// threshold rel * sigma_max.
int numeric_rank(const CMat& m, double rel = 1e-8);

// Orthonormal basis (columns) of the null space of m, dimension `dim`, taken
// from the trailing right singular vectors.
CMat null_space(const CMat& m, int dim);

// Deterministic canonical form for a basis of a subspace: column echelon form
// by pivoting on rows in order, then Gram-Schmidt, then each column rotated so
// its first non-negligible entry is real and positive.
CMat canonical_basis(const CMat& basis);

// Same, but returns a real basis for a subspace that admits one.
Mat canonical_real_basis(const CMat& basis);

// Orthonormal basis of the column span.
CMat orth(const CMat& m, double rel = 1e-10);

int gcd3(int a, int b, int c);

}  // namespace geoptics
