#include "mpsrg/compile.hpp"

#include <set>

#include "mpsrg/error.hpp"

namespace mpsrg {

namespace {

Matrix loop_vector(int D) {
  Matrix k = Matrix::Zero(static_cast<Index>(D) * D, 1);
  for (int l = 0; l < D; ++l) k(l * D + l, 0) = 1.0;
  return k;
}

CompiledProgram compile_with(const SiteTensor& unit, const FixedPointState* fp, const MpsChain& target,
                             const CompileOptions& opt, bool branches) {
  CompiledProgram prog;
  prog.target = target;
  const int d = unit.phys_dim();
  if (opt.scheme == Scheme::Sequential) {
    require(opt.n >= 2 && opt.n <= 4096, ErrorCode::InvalidArgument, "sequential circuits support 2 <= N <= 4096");
    const SiteTensor& site = target.segments().front().tensor;
    std::vector<SiteTensor> sites(opt.n, site);
    SequentialOptions so;
    so.rel_cutoff = opt.rel_cutoff;
    auto dec = sequential_decompose(sites, loop_vector(site.left_dim()), so);
    // the staircase prepares the normalized state; absorb the norm into the first factor
    dec.factors.front().matrix /= dec.factors.front().matrix.norm();
    prog.circuit = assemble_sequential(dec, d);
    prog.blocks = {static_cast<int>(opt.n)};
    return prog;
  }

  prog.blocks = block_sizes(opt.n, opt.q, opt.remainder);
  prog.fixed_point = *fp;
  std::set<int> sizes(prog.blocks.begin(), prog.blocks.end());
  if (opt.scheme == Scheme::SequentialRG) {
    std::map<int, SequentialDecomposition> decs;
    for (int s : sizes) {
      PolarSplit ps = polar_split(block(unit, s), {opt.rel_cutoff});
      require(branches || ps.injective(), ErrorCode::InjectivityImpossible,
              "block of " + std::to_string(s) + " sites is not injective; increase q");
      SequentialOptions so;
      so.rel_cutoff = opt.rel_cutoff;
      so.complete_center = true;
      auto dec = sequential_rg_decompose(unit, s, ps.P, so);
      prog.block_isometries[s] = dec.reconstruct();
      decs.emplace(s, std::move(dec));
    }
    prog.circuit = assemble_sequential_rg(prog.blocks, decs, *fp, d);
  } else {
    std::map<int, TreeDecomposition> trees;
    for (int s : sizes) {
      TreeOptions to;
      to.rel_cutoff = opt.rel_cutoff;
      auto t = tree_rg_decompose_span(unit, s, to);
      for (const auto& [span, node] : t.nodes)
        require(branches || node.split.injective(), ErrorCode::InjectivityImpossible,
                "tree node of span " + std::to_string(span) + " is not injective");
      prog.block_isometries[s] = t.isometry();
      trees.emplace(s, std::move(t));
    }
    prog.circuit = assemble_tree_rg(prog.blocks, trees, *fp, d, opt.scheme == Scheme::TreeRGMeasured);
  }
  return prog;
}

}  // namespace

MpsChain CompiledProgram::prepared() const {
  if (circuit.meta.scheme == Scheme::Sequential) return target;
  MpsChain omega = fixed_point.block_chain();
  // one segment per run of equal block sizes
  std::vector<Segment> segs;
  std::uint64_t block = 0;
  for (const auto& s : omega.segments()) {
    std::uint64_t left = s.repeat;
    while (left > 0) {
      const int size = blocks[block];
      std::uint64_t run = 1;
      while (run < left && blocks[block + run] == size) ++run;
      segs.push_back({apply_isometry(block_isometries.at(size), s.tensor), run});
      block += run;
      left -= run;
    }
  }
  return MpsChain::from_segments(std::move(segs), Boundary::Periodic);
}

CompiledProgram compile_normal(const SiteTensor& a, const CompileOptions& opt) {
  SiteTensor g = canonical_gauge(a);
  MpsChain target = MpsChain::uniform(g, opt.n);
  if (opt.scheme == Scheme::Sequential) return compile_with(g, nullptr, target, opt, false);
  const auto m = static_cast<std::uint64_t>(block_sizes(opt.n, opt.q, opt.remainder).size());
  FixedPointState fp = normal_fixed_point(g, m);
  return compile_with(g, &fp, target, opt, false);
}

CompiledProgram compile_branches(const CanonicalDecomposition& decomp, const CompileOptions& opt) {
  decomp.validate();
  MpsChain target = MpsChain::uniform(decomp.full_tensor(), opt.n);
  SiteTensor red = decomp.reduced_tensor();
  if (opt.scheme == Scheme::Sequential) return compile_with(red, nullptr, target, opt, true);
  block_sizes(opt.n, opt.q, opt.remainder);
  FixedPointState fp = nonnormal_fixed_point(decomp, opt.n, opt.q);
  return compile_with(red, &fp, target, opt, true);
}

}  // namespace mpsrg
