#pragma once

#include "pairsim/fock.hpp"

namespace pairsim {

struct StateVector {
  DenseVector amplitudes;
  TensorSpace space;

  double norm() const { return amplitudes.norm(); }
  double squared_norm() const { return amplitudes.squaredNorm(); }
  StateVector normalized() const;
};

StateVector zero_state(const TensorSpace& space);
StateVector basis_state(const FockSpace& space, const std::vector<int>& occupations);
StateVector basis_state(const TensorSpace& space, const std::vector<int>& digits);

StateVector apply(const LatticeOperator& op, const StateVector& psi);
Complex overlap(const StateVector& bra, const StateVector& ket);          // <bra|ket>
Complex expectation(const LatticeOperator& op, const StateVector& psi);   // <psi|O|psi>, psi normalized by caller

struct DensityMatrix {
  DenseMatrix rho;
  TensorSpace space;

  Complex trace() const { return rho.trace(); }
  // Hermiticity/trace within tol; eigenvalues above -eig_floor.
  void validate(double tol = 1e-9, double eig_floor = 1e-9) const;
};

DensityMatrix pure_density(const StateVector& psi);

}  // namespace pairsim
