#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mpsrg/circuit.hpp"
#include "mpsrg/tensor.hpp"

namespace mpsrg {

/// Open chain of blocked positive parts P_i (end bonds of dimension 1) and the V_i that were split off.
struct PositiveChain {
  MpsChain chain;
  std::vector<Matrix> isometries;
  std::vector<int> blocks;
};

PositiveChain positive_chain(const MpsChain& chain, int q, RemainderPolicy policy = RemainderPolicy::AbsorbLast,
                             double rel_cutoff = 1e-12);

/// One unitary per internal bond; the pair on bond i is W_i|00>, indexed b*D + a with b the
/// right leg of block i and a the left leg of block i+1.
struct PairGateSet {
  std::vector<Matrix> gates;
  std::uint64_t seed = 0;

  Vector pair(std::size_t bond) const { return gates[bond].col(0); }
  void validate(double tol = 1e-10) const;
};

/// Normalized <phi_pos|Omega>.
cplx pair_overlap(const PairGateSet& gates, const MpsChain& positive);

/// E with <phi_pos|Omega> = Tr[E W_bond]; only row 0 is nonzero.
Matrix environment(std::size_t bond, const PairGateSet& gates, const MpsChain& positive);

/// argmax_W Re Tr[E W] = Y X^dagger for E = X S Y^dagger.
Matrix update_gate(const Matrix& env);

/// Pairs built from the left and right environments of each bond, sqrt(L) sqrt(R).
PairGateSet analytic_pairs(const MpsChain& positive);
PairGateSet haar_pairs(const MpsChain& positive, std::uint64_t seed);

struct SweepReport {
  std::vector<double> fidelities;  // before the first sweep, then after each sweep
  std::vector<double> updates;     // after every local update
  bool converged = false;
  int sweeps_used = 0;

  /// Largest decrease between consecutive entries of fidelities or updates (0 if none).
  double max_drop() const;
};

struct VariationalOptions {
  int max_sweeps = 200;
  double tol = 1e-10;
  int seeds = 3;  // run 0 starts from analytic_pairs, the rest from Haar gates
  std::uint64_t seed = 0;
  bool analytic_init = true;
};

struct VariationalResult {
  PairGateSet gates;
  SweepReport report;
  double fidelity = 0.0;
  int best_run = 0;
  std::vector<SweepReport> runs;  // every run, in seed order

  double epsilon() const;
};

/// Sweeps starting from the given gates.
VariationalResult sweep_from(const MpsChain& positive, PairGateSet init, const VariationalOptions& opt);
VariationalResult optimize_positive(const MpsChain& positive, const VariationalOptions& opt = {});
VariationalResult optimize(const MpsChain& target, int q, const VariationalOptions& opt = {});

}  // namespace mpsrg
