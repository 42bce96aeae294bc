#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>

namespace cqs {

using Complex = std::complex<double>;

/// Dense complex operator on a small Hilbert space (dim <= 16 in practice).
using Operator = Eigen::MatrixXcd;
/// Density matrices share the operator representation.
using DensityMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

namespace hilbert {

// Two-level basis order is (|e>, |g>).
inline constexpr Eigen::Index kExcited = 0;
inline constexpr Eigen::Index kGround = 1;

// Lambda-system basis order is (|e>, |g1>, |g2>).
inline constexpr Eigen::Index kLambdaExcited = 0;
inline constexpr Eigen::Index kLambdaGround1 = 1;
inline constexpr Eigen::Index kLambdaGround2 = 2;

struct TwoLevelOps {
  Operator lower;  // sigma^-
  Operator raise;  // sigma^+
  Operator z;      // sigma^z
};

struct LambdaOps {
  Operator lower1;  // |g1><e|
  Operator lower2;  // |g2><e|
  Operator raise1;
  Operator raise2;
};

TwoLevelOps ladder_two_level();
LambdaOps lambda_system_ops();

Operator identity(Eigen::Index dim);

/// Kronecker product; `a` is the left (system 1) factor.
Operator kron(const Operator& a, const Operator& b);
StateVector kron(const StateVector& a, const StateVector& b);

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);
Operator dagger(const Operator& a);

/// Tr(rho A).
Complex expectation(const DensityMatrix& rho, const Operator& a);
/// <psi|A|psi>, not divided by the norm.
Complex expectation(const StateVector& psi, const Operator& a);

/// Basis ket with a one at `index`.
StateVector basis(Eigen::Index dim, Eigen::Index index);
/// |psi><psi|
DensityMatrix projector(const StateVector& psi);

/// Single-qubit state sqrt(1-|c|^2)|g> + c|e>.
StateVector qubit_state(Complex excited_amplitude);

/// Largest elementwise |A - A^dagger|.
double hermiticity_defect(const Operator& a);
double min_eigenvalue(const DensityMatrix& rho);

}  // namespace hilbert
}  // namespace cqs
