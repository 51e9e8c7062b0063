#include "pairsim/state.hpp"

#include <Eigen/Eigenvalues>

namespace pairsim {

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw ValidationError("cannot normalize the zero state");
  return StateVector{amplitudes / n, space};
}

StateVector zero_state(const TensorSpace& space) {
  return StateVector{DenseVector::Zero(static_cast<Eigen::Index>(space.dimension())), space};
}

StateVector basis_state(const TensorSpace& space, const std::vector<int>& digits) {
  StateVector psi = zero_state(space);
  psi.amplitudes[static_cast<Eigen::Index>(space.index_of(digits))] = Complex(1.0, 0.0);
  return psi;
}

StateVector basis_state(const FockSpace& space, const std::vector<int>& occupations) {
  for (int n : occupations)
    if (n < 0 || n > space.n_max) throw ValidationError("basis_state: occupation beyond cutoff");
  return basis_state(space.tensor(), occupations);
}

StateVector apply(const LatticeOperator& op, const StateVector& psi) {
  if (!(op.space == psi.space)) throw ValidationError("apply: operator/state space mismatch");
  return StateVector{op.matrix * psi.amplitudes, psi.space};
}

Complex overlap(const StateVector& bra, const StateVector& ket) {
  if (!(bra.space == ket.space)) throw ValidationError("overlap: space mismatch");
  return bra.amplitudes.dot(ket.amplitudes);
}

Complex expectation(const LatticeOperator& op, const StateVector& psi) {
  return psi.amplitudes.dot(op.matrix * psi.amplitudes);
}

void DensityMatrix::validate(double tol, double eig_floor) const {
  if (rho.rows() != rho.cols()) throw ValidationError("density matrix must be square");
  const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm_err > tol) throw ValidationError("density matrix not Hermitian within tolerance");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol)
    throw ValidationError("density matrix trace deviates from 1");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_floor)
    throw ValidationError("density matrix has a negative eigenvalue beyond tolerance");
}

DensityMatrix pure_density(const StateVector& psi) {
  return DensityMatrix{psi.amplitudes * psi.amplitudes.adjoint(), psi.space};
}

}  // namespace pairsim
