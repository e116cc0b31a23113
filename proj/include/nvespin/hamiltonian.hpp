#pragma once

#include "nvespin/types.hpp"

namespace nvespin {

inline constexpr int kDefaultDimensionCap = 64;

// Full laboratory-frame spin Hamiltonian in MHz, product basis ordered
// electron first, then nuclei in list order:
//   H = g_e muB B (b.S) + S D S + sum_k [ S A_k I_k + I_k Q_k I_k
//                                         - g_nk muN B (b.I_k) ]
// Throws DimensionCapError when the Hilbert space exceeds `cap`.
HamiltonianMatrix build_hamiltonian(const SpinSystem& sys, const FieldVector& field,
                                    int cap = kDefaultDimensionCap);

// Hermitian eigendecomposition with ascending eigenvalues and a deterministic
// phase convention: the largest-magnitude component of each eigenvector is
// made real and positive. Throws NotHermitianError / NonConvergenceError.
EigenSolution eigensolve(const HamiltonianMatrix& h);

// Same checks and conventions for a plain matrix.
EigenSolution eigensolve(const ComplexMatrix& h);

}  // namespace nvespin
