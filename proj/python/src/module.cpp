#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mpsrg/cli.hpp"
#include "mpsrg/compile.hpp"
#include "mpsrg/error.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/io.hpp"
#include "mpsrg/simulate.hpp"
#include "mpsrg/verifier.hpp"

namespace py = pybind11;
using namespace mpsrg;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// (d, Dl, Dr) complex array
SiteTensor tensor_from(const CArray& a) {
  require(a.ndim() == 3, ErrorCode::InvalidArgument, "tensor must have shape (d, D_l, D_r)");
  const auto d = static_cast<int>(a.shape(0)), dl = static_cast<int>(a.shape(1)), dr = static_cast<int>(a.shape(2));
  SiteTensor t(d, dl, dr);
  auto r = a.unchecked<3>();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < dl; ++j)
      for (int k = 0; k < dr; ++k) t[i](j, k) = r(i, j, k);
  return t;
}

CArray tensor_to(const SiteTensor& t) {
  CArray a({t.phys_dim(), t.left_dim(), t.right_dim()});
  auto w = a.mutable_unchecked<3>();
  for (int i = 0; i < t.phys_dim(); ++i)
    for (int j = 0; j < t.left_dim(); ++j)
      for (int k = 0; k < t.right_dim(); ++k) w(i, j, k) = t[i](j, k);
  return a;
}

CArray matrix_to(const Matrix& m) {
  CArray a({m.rows(), m.cols()});
  auto w = a.mutable_unchecked<2>();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
  return a;
}

CArray vector_to(const Vector& v) {
  CArray a(v.size());
  std::copy(v.data(), v.data() + v.size(), a.mutable_data());
  return a;
}

py::dict fit_dict(const ErrorFit& f) {
  py::dict d;
  d["rate"] = f.rate;
  d["prefactor"] = f.prefactor;
  d["residual"] = f.residual;
  d["points"] = f.points;
  return d;
}

py::dict depth_dict(const DepthReport& r) { return py::module_::import("json").attr("loads")(io::to_json(r).dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MPS to log-depth circuit compiler";

  py::register_exception<Error>(m, "MpsrgError", PyExc_RuntimeError);

  m.def("aklt", [] { return tensor_to(fixtures::aklt()); });
  m.def("aklt_spin1", [] { return tensor_to(fixtures::aklt_spin1()); });
  m.def("ghz", [] { return tensor_to(fixtures::ghz()); });
  m.def("g_family", [](double g) { return tensor_to(fixtures::g_family(g)); }, py::arg("g"));
  m.def("g_for_xi", &fixtures::g_for_xi, py::arg("xi"));
  m.def("t_iso", &t_iso, py::arg("m"), py::arg("n"));

  m.def(
      "spectral_analyze",
      [](const CArray& a, double tol) {
        SpectralOptions o;
        o.tol = tol;
        SpectralReport r = spectral_analyze(tensor_from(a), o);
        py::dict d;
        d["eigenvalues"] = r.eigenvalues;
        d["lambda1"] = r.lambda1;
        d["rho"] = matrix_to(r.rho);
        d["left_fixed"] = matrix_to(r.left_fixed);
        d["xi"] = r.xi;
        d["is_normal"] = r.is_normal;
        d["degeneracy_b"] = r.degeneracy_b;
        return d;
      },
      py::arg("tensor"), py::arg("tol") = 1e-10);

  m.def(
      "error_scan",
      [](const CArray& a, const std::vector<int>& qs, std::uint64_t m_blocks, const std::string& scheme) {
        ErrorScanOptions o;
        o.m = m_blocks;
        o.scheme = scheme_from_string(scheme);
        ErrorScan s = error_scan(tensor_from(a), qs, o);
        py::list rows;
        for (const auto& r : s.rows) {
          py::dict d;
          d["q"] = r.q;
          d["xi"] = r.xi;
          d["M"] = r.m;
          d["epsilon"] = r.epsilon;
          d["epsilon_per_block"] = r.epsilon_per_block;
          rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["fit"] = fit_dict(s.fit);
        out["fit_q"] = fit_dict(s.fit_q);
        out["monotone"] = s.monotone();
        return out;
      },
      py::arg("tensor"), py::arg("qs"), py::arg("M") = 200, py::arg("scheme") = "sequential-rg");

  m.def(
      "cnot_depth",
      [](const std::string& scheme, std::uint64_t n, int q, int d, int dd) {
        return depth_dict(cnot_depth(scheme_from_string(scheme), n, q, d, dd));
      },
      py::arg("scheme"), py::arg("N"), py::arg("q"), py::arg("d") = 2, py::arg("D") = 2);

  m.def(
      "compile_circuit",
      [](const CArray& a, std::uint64_t n, int q, const std::string& scheme) {
        CompileOptions o;
        o.scheme = scheme_from_string(scheme);
        o.n = n;
        o.q = q;
        return io::to_json(compile_normal(tensor_from(a), o).circuit).dump();
      },
      py::arg("tensor"), py::arg("N"), py::arg("q"), py::arg("scheme") = "sequential-rg",
      "Compile a normal tensor; returns the circuit as a JSON string.");

  m.def(
      "simulate",
      [](const std::string& circuit_json) {
        CircuitIR c = io::circuit_from_json(io::parse_json(circuit_json, "<circuit>"));
        return vector_to(simulate_circuit(c));
      },
      py::arg("circuit_json"));

  m.def(
      "mps_state",
      [](const CArray& a, std::uint64_t n) { return vector_to(mps_to_dense(MpsChain::uniform(tensor_from(a), n))); },
      py::arg("tensor"), py::arg("N"), "Dense periodic-chain state.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
