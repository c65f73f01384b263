#pragma once

#include <cstdint>

#include "mpsrg/circuit.hpp"

namespace mpsrg {

struct SimulationOptions {
  std::uint64_t max_dim = std::uint64_t{1} << 22;
  double ancilla_tol = 1e-10;
};

/// Mixed-radix statevector run of a circuit from |0...0>, register 0 most significant.
/// Throws AncillaNotZero if an isometry or preparation meets a register outside its input space.
Vector simulate_circuit(const CircuitIR& c, const SimulationOptions& opt = {});

}  // namespace mpsrg
