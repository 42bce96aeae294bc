#include "cqs/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cqs::hilbert {

namespace {

void require_same_dim(const Operator& a, const Operator& b, const char* what) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

TwoLevelOps ladder_two_level() {
  TwoLevelOps ops;
  ops.lower = Operator::Zero(2, 2);
  ops.lower(kGround, kExcited) = 1.0;
  ops.raise = ops.lower.adjoint();
  ops.z = Operator::Zero(2, 2);
  ops.z(kExcited, kExcited) = 1.0;
  ops.z(kGround, kGround) = -1.0;
  return ops;
}

LambdaOps lambda_system_ops() {
  LambdaOps ops;
  ops.lower1 = Operator::Zero(3, 3);
  ops.lower1(kLambdaGround1, kLambdaExcited) = 1.0;
  ops.lower2 = Operator::Zero(3, 3);
  ops.lower2(kLambdaGround2, kLambdaExcited) = 1.0;
  ops.raise1 = ops.lower1.adjoint();
  ops.raise2 = ops.lower2.adjoint();
  return ops;
}

Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

StateVector kron(const StateVector& a, const StateVector& b) {
  StateVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

Operator commutator(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

Operator anticommutator(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "anticommutator");
  return a * b + b * a;
}

Operator dagger(const Operator& a) { return a.adjoint(); }

Complex expectation(const DensityMatrix& rho, const Operator& a) {
  require_same_dim(rho, a, "expectation");
  // Tr(rho A) without forming the product.
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index k = 0; k < rho.cols(); ++k) {
      acc += rho(i, k) * a(k, i);
    }
  }
  return acc;
}

Complex expectation(const StateVector& psi, const Operator& a) {
  if (a.rows() != a.cols() || a.rows() != psi.size()) {
    throw std::invalid_argument("expectation: dimension mismatch (state " +
                                std::to_string(psi.size()) + ", operator " +
                                std::to_string(a.rows()) + ")");
  }
  return psi.dot(a * psi);
}

StateVector basis(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) {
    throw std::out_of_range("basis: index " + std::to_string(index) + " outside dimension " +
                            std::to_string(dim));
  }
  StateVector v = StateVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

DensityMatrix projector(const StateVector& psi) { return psi * psi.adjoint(); }

StateVector qubit_state(Complex excited_amplitude) {
  const double pe = std::norm(excited_amplitude);
  if (pe > 1.0 + 1e-12) {
    throw std::invalid_argument("qubit_state: |c|^2 = " + std::to_string(pe) + " exceeds 1");
  }
  StateVector v(2);
  v(kExcited) = excited_amplitude;
  v(kGround) = std::sqrt(std::max(0.0, 1.0 - pe));
  return v;
}

double hermiticity_defect(const Operator& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DensityMatrix& rho) {
  const Operator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace cqs::hilbert
