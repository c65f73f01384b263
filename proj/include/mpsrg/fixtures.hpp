#pragma once

#include <cstdint>
#include <random>

#include "mpsrg/tensor.hpp"

namespace mpsrg::fixtures {

/// AKLT in the symmetric two-qubit encoding (d = 4, D = 2).
SiteTensor aklt();

/// AKLT with a spin-1 physical leg (d = 3, D = 2).
SiteTensor aklt_spin1();

/// A^0 = [[0,0],[1,1]], A^1 = [[1,g],[0,0]]; xi = 1/ln((1+g)/(1-g)).
SiteTensor g_family(double g);

/// g with correlation length xi: g = tanh(1/(2 xi)).
double g_for_xi(double xi);

/// A^0 = |0><0|, A^1 = |1><1| (GHZ, two branches).
SiteTensor ghz();

/// Left-canonical tensor from the first D columns of a Haar unitary of size d*D.
SiteTensor haar_isometric(int d, int D, std::mt19937_64& rng);

/// Open chain of n Haar tensors with boundary vectors e_0.
MpsChain random_obc_chain(std::uint64_t n, int d, int D, std::mt19937_64& rng);

}  // namespace mpsrg::fixtures
