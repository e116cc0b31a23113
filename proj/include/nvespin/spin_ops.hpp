#pragma once

#include <array>

#include "nvespin/types.hpp"

namespace nvespin {

struct SpinMatrices {
  ComplexMatrix sx, sy, sz;
};

// Angular momentum matrices in the |S,m> basis with m descending (S..-S),
// so Sz = diag(S, S-1, ..., -S). Built from the ladder operators.
SpinMatrices spin_matrices(const SpinQuantum& spin);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Operator acting on factor `index` of a product space with the given factor
// dimensions, embedded with identities elsewhere.
ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& dims, int index);

// Cartesian spin vector operators for every factor of the product space of
// `sys` (index 0 = electron, then nuclei in list order).
std::vector<std::array<ComplexMatrix, 3>> product_space_spins(const SpinSystem& sys);

}  // namespace nvespin
