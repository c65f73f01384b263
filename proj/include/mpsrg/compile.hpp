#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mpsrg/circuit.hpp"
#include "mpsrg/fixed_point.hpp"

namespace mpsrg {

struct CompileOptions {
  Scheme scheme = Scheme::SequentialRG;
  std::uint64_t n = 0;
  int q = 2;
  RemainderPolicy remainder = RemainderPolicy::AbsorbLast;
  double rel_cutoff = 1e-12;
};

struct CompiledProgram {
  CircuitIR circuit;
  FixedPointState fixed_point;             // unused for the sequential scheme
  std::vector<int> blocks;
  std::map<int, Matrix> block_isometries;  // per block size: what the gates implement on (a, b)
  MpsChain target;                         // the exact state

  /// The state the circuit prepares, as an MPS (sum_j alpha_j (x) omega_j pushed through the V's).
  MpsChain prepared() const;
};

/// Compile a normal translation-invariant tensor (periodic chain of N sites).
CompiledProgram compile_normal(const SiteTensor& a, const CompileOptions& opt);

/// Compile a block-structured non-normal tensor through the branch fixed point.
CompiledProgram compile_branches(const CanonicalDecomposition& decomp, const CompileOptions& opt);

}  // namespace mpsrg
