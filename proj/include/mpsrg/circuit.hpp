#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpsrg/fixed_point.hpp"
#include "mpsrg/polar.hpp"

namespace mpsrg {

enum class Scheme { Sequential, SequentialRG, TreeRG, TreeRGMeasured };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

enum class GateKind { Isometry, Swap, PairPrep, GhzPrep };

std::string_view to_string(GateKind k);

struct Gate {
  GateKind kind = GateKind::Isometry;
  std::vector<int> support;  // registers, in the gate's tensor-factor order (first most significant)
  // Isometry: unitary on the window and the window basis states it was built for
  Matrix unitary;
  std::vector<std::uint64_t> input_basis;
  std::vector<int> ancillas;  // support registers required in |0>
  // PairPrep: state on the support; GhzPrep: sum_j alpha_j (x)_bonds pair_j on (R_0,L_1,R_1,L_2,...)
  Vector state;
  std::vector<cplx> alpha;
  std::vector<Vector> branch_pairs;
  bool nonlocal = false;
  std::string label;
};

struct CircuitMetadata {
  Scheme scheme = Scheme::SequentialRG;
  std::uint64_t n = 0;
  int q = 0;
  int d = 0;
  int leg_dim = 0;
  std::vector<int> blocks;
  std::string notes;
};

struct CircuitIR {
  std::vector<int> registers;  // register dims; register n holds site n
  std::vector<std::vector<Gate>> layers;
  CircuitMetadata meta;

  std::size_t depth() const { return layers.size(); }
  std::size_t count(GateKind k) const;
  /// Layers that contain at least one gate of the given kind.
  std::size_t layers_with(GateKind k) const;
  std::size_t nonlocal_gates() const;
  /// Every gate acts on disjoint registers within its layer and local gates are contiguous.
  void validate() const;
};

/// Gates are placed in the earliest layer after every gate touching their support.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::vector<int> register_dims);
  void add(Gate g);
  void swap(int r1, int r2);
  /// Swap chain moving the content of register `from` to `to`.
  void move(int from, int to);
  CircuitIR finish(CircuitMetadata meta) &&;
  const std::vector<int>& dims() const { return dims_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> ready_;
  std::vector<std::vector<Gate>> layers_;
};

/// One leg of an isometry: a value < dim written in mixed radix over `registers`.
struct Leg {
  int dim = 1;
  std::vector<int> registers;
};

/// Embed an (out x in) isometry acting on the given legs into a unitary on the union of
/// their registers. Columns of window states outside the input space are completed
/// deterministically in standard-basis order.
Gate make_isometry_gate(const Matrix& v, const std::vector<Leg>& inputs, const std::vector<Leg>& outputs,
                        const std::vector<int>& register_dims, std::string label = {});

struct EmbeddedUnitary {
  Matrix unitary;
  int in_dim = 0;
  int ancilla_dim = 0;
};

/// Square unitary U with U(|i> (x) |0>) = V|i>, input index i*ancilla_dim + a.
EmbeddedUnitary embed_isometry(const Matrix& v);

// ---------------------------------------------------------------------------

enum class RemainderPolicy { AbsorbLast, Strict };

/// Block sizes for N sites; the last block absorbs N mod q unless strict.
std::vector<int> block_sizes(std::uint64_t n, int q, RemainderPolicy policy = RemainderPolicy::AbsorbLast);

/// Sequential-RG circuit. `decomps` maps block size to a decomposition with the input leg
/// on the last site; the fixed point supplies the pairs.
CircuitIR assemble_sequential_rg(const std::vector<int>& blocks, const std::map<int, SequentialDecomposition>& decomps,
                                 const FixedPointState& fp, int d);

CircuitIR assemble_tree_rg(const std::vector<int>& blocks, const std::map<int, TreeDecomposition>& trees,
                           const FixedPointState& fp, int d, bool measured);

/// Staircase baseline: the whole chain as one sequential decomposition with input dim 1.
CircuitIR assemble_sequential(const SequentialDecomposition& chain, int d);

// ---------------------------------------------------------------------------

/// Lower bound on the CNOT count of an m -> n qubit isometry.
std::int64_t t_iso(int m, int n);

struct DepthReport {
  Scheme scheme = Scheme::SequentialRG;
  std::uint64_t n = 0;
  int q = 0;
  std::uint64_t layer_depth = 0;
  std::uint64_t cnot_depth = 0;
  std::vector<std::pair<std::string, std::uint64_t>> breakdown;
};

/// Depth estimate with t_iso as the per-gate cost. d and D must be powers of two.
DepthReport cnot_depth(Scheme scheme, std::uint64_t n, int q, int d, int D);

}  // namespace mpsrg
