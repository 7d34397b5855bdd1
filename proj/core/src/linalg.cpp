#include "hdmean/linalg.hpp"

#include "hdmean/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hdmean {

SymMatrix::SymMatrix(Matrix m, double asym_tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("SymMatrix: matrix is not square");
  }
  if (m_.rows() == 0) {
    throw std::invalid_argument("SymMatrix: dimension must be positive");
  }
  if (!m_.allFinite()) {
    throw std::invalid_argument("SymMatrix: non-finite entry");
  }
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > asym_tol * scale) {
    std::ostringstream msg;
    msg << "SymMatrix: asymmetry " << asym << " exceeds tolerance";
    throw std::invalid_argument(msg.str());
  }
  // Average then copy the upper triangle down so entries mirror exactly.
  const Eigen::Index p = m_.rows();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double v = 0.5 * (m_(i, j) + m_(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::identity(std::size_t p) {
  const auto n = static_cast<Eigen::Index>(p);
  return SymMatrix(Matrix::Identity(n, n));
}

SymMatrix SymMatrix::zero(std::size_t p) {
  const auto n = static_cast<Eigen::Index>(p);
  return SymMatrix(Matrix::Zero(n, n));
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  return SymMatrix(Matrix(d.asDiagonal()));
}

double SymMatrix::max_abs() const { return m_.cwiseAbs().maxCoeff(); }

EigenDecomp eigh(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigh: symmetric eigensolver did not converge");
  }
  EigenDecomp out;
  // Eigen returns ascending order.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  if (!out.values.allFinite() || !out.vectors.allFinite()) {
    throw NumericalError("eigh: non-finite eigen decomposition");
  }
  return out;
}

namespace {

Matrix spectral_apply(const EigenDecomp& e, const Vector& f) {
  return e.vectors * f.asDiagonal() * e.vectors.transpose();
}

}  // namespace

SymMatrix sqrt_psd(const SymMatrix& m, std::optional<double> clamp_floor) {
  const EigenDecomp e = eigh(m);
  const double lmax = e.values(0);
  const double lmin = e.values(e.values.size() - 1);
  const double scale = std::max(std::abs(lmax), std::abs(lmin));
  if (lmin < -1e-8 * scale) {
    std::ostringstream msg;
    msg << "sqrt_psd: matrix is not positive semidefinite (eigenvalue " << lmin << ")";
    throw NumericalError(msg.str());
  }
  const double floor = clamp_floor.value_or(kDefaultClampRelative * std::max(lmax, 0.0));
  if (floor < 0.0) {
    throw std::invalid_argument("sqrt_psd: clamp_floor must be non-negative");
  }
  Vector roots = e.values.unaryExpr([floor](double v) { return std::sqrt(std::max(v, floor)); });
  return SymMatrix(spectral_apply(e, roots), 1e-6);
}

SymMatrix inverse_psd(const SymMatrix& m) {
  const EigenDecomp e = eigh(m);
  const double lmax = e.values(0);
  const double lmin = e.values(e.values.size() - 1);
  if (!(lmax > 0.0) || lmin <= 1e-10 * lmax) {
    std::ostringstream msg;
    msg << "inverse_psd: matrix is singular or indefinite (lambda_min=" << lmin
        << ", lambda_max=" << lmax << ", condition estimate=";
    if (lmin > 0.0) {
      msg << lmax / lmin;
    } else {
      msg << "inf";
    }
    msg << ")";
    throw NumericalError(msg.str());
  }
  Vector inv = e.values.cwiseInverse();
  return SymMatrix(spectral_apply(e, inv), 1e-6);
}

SymMatrix correlation_of(const SymMatrix& sigma) {
  const Vector d = sigma.diag();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      std::ostringstream msg;
      msg << "correlation_of: non-positive diagonal entry at index " << i << " (" << d(i) << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  const Vector s = d.cwiseSqrt().cwiseInverse();
  Matrix r = s.asDiagonal() * sigma.mat() * s.asDiagonal();
  r.diagonal().setOnes();
  return SymMatrix(std::move(r));
}

double trace_sq(const SymMatrix& m) { return m.mat().squaredNorm(); }

SymMatrix sandwich(const SymMatrix& l, const SymMatrix& m) {
  if (l.dim() != m.dim()) {
    throw std::invalid_argument("sandwich: dimension mismatch");
  }
  return SymMatrix(l.mat() * m.mat() * l.mat(), 1e-6);
}

}  // namespace hdmean
