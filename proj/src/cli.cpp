#include "mpsrg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "CLI11.hpp"
#include "mpsrg/compile.hpp"
#include "mpsrg/error.hpp"
#include "mpsrg/fixtures.hpp"
#include "mpsrg/io.hpp"
#include "mpsrg/simulate.hpp"
#include "mpsrg/variational.hpp"
#include "mpsrg/verifier.hpp"

namespace mpsrg::cli {

using io::json;

Input load_input(const std::string& path) {
  json j = io::read_json_file(path);
  Input in;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, path + ": expected a JSON object");
  if (j.contains("generator")) {
    const std::string g = j["generator"].is_string() ? j["generator"].get<std::string>() : "";
    if (g == "aklt") {
      in.tensor = fixtures::aklt();
    } else if (g == "aklt-spin1") {
      in.tensor = fixtures::aklt_spin1();
    } else if (g == "ghz") {
      in.tensor = fixtures::ghz();
    } else if (g == "g-family") {
      if (j.contains("g") && j["g"].is_number()) {
        in.tensor = fixtures::g_family(j["g"].get<double>());
      } else if (j.contains("xi") && j["xi"].is_number()) {
        in.tensor = fixtures::g_family(fixtures::g_for_xi(j["xi"].get<double>()));
      } else {
        throw Error(ErrorCode::ParseError, path + ": g-family generator needs \"g\" or \"xi\"");
      }
    } else {
      throw Error(ErrorCode::ParseError, path + ": unknown generator \"" + g + "\"");
    }
  } else if (j.contains("branches")) {
    in.decomposition = io::decomposition_from_json(j);
  } else if (j.contains("boundary")) {
    in.chain = io::chain_from_json(j);
  } else if (j.contains("d")) {
    in.tensor = io::tensor_from_json(j);
  } else {
    throw Error(ErrorCode::ParseError, path + ": not a tensor, chain, decomposition or generator");
  }
  return in;
}

std::vector<int> parse_int_list(const std::string& text) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && !s.empty(), ErrorCode::InvalidArgument, "bad integer list \"" + text + "\"");
    return v;
  };
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    for (;;) {
      std::size_t c = text.find(':', pos);
      parts.push_back(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    require(parts.size() == 2 || parts.size() == 3, ErrorCode::InvalidArgument, "range must be lo:hi[:step]");
    const int lo = num(parts[0]), hi = num(parts[1]), step = parts.size() == 3 ? num(parts[2]) : 1;
    require(step > 0 && lo <= hi, ErrorCode::InvalidArgument, "empty range \"" + text + "\"");
    for (int v = lo; v <= hi; v += step) out.push_back(v);
  } else {
    std::size_t pos = 0;
    for (;;) {
      std::size_t c = text.find(',', pos);
      out.push_back(num(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos)));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
  }
  return out;
}

namespace {

struct Globals {
  std::uint64_t seed = 2024;
  double tol = 1e-10;
  int jobs = 1;
};

json globals_json(const Globals& g) { return {{"seed", g.seed}, {"tol", g.tol}, {"jobs", g.jobs}}; }

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    io::write_text_file(path, text);
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

const SiteTensor& need_tensor(const Input& in, const std::string& what) {
  require(in.tensor.has_value(), ErrorCode::InvalidArgument, what + " needs a tensor input");
  return *in.tensor;
}

RemainderPolicy policy_from(const std::string& s) {
  if (s == "absorb") return RemainderPolicy::AbsorbLast;
  if (s == "strict") return RemainderPolicy::Strict;
  throw Error(ErrorCode::InvalidArgument, "remainder must be absorb or strict");
}

bool power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

double max_gate_defect(const CircuitIR& c) {
  double worst = 0.0;
  for (const auto& l : c.layers)
    for (const auto& g : l)
      if (g.kind == GateKind::Isometry) worst = std::max(worst, isometry_defect(g.unitary));
  return worst;
}

json scan_summary(const ErrorScan& s, double gamma) {
  BoundCheck bc = bound_check(s, gamma);
  return {{"fit", io::to_json(s.fit)},
          {"fit_q", io::to_json(s.fit_q)},
          {"monotone", s.monotone()},
          {"bound_check", {{"gamma", gamma}, {"passed", bc.passed}, {"constant", bc.constant}, {"margin", bc.margin}}}};
}

json rate_json(const RateSummary& r) {
  return {{"median", r.median}, {"q1", r.q1}, {"q3", r.q3}, {"iqr", r.iqr()}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile matrix product states into log-depth circuits and verify them", "mpsrg"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--tol", g.tol, "Spectral and convergence tolerance")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // analyze
  std::string a_in, a_out;
  auto* analyze = app.add_subcommand("analyze", "Spectral report of a tensor");
  analyze->add_option("input", a_in, "Tensor, decomposition or generator JSON")->required();
  analyze->add_option("--out", a_out, "Write the report here instead of stdout");

  // compile
  std::string c_in, c_out, c_depth, c_scheme = "sequential-rg", c_rem = "absorb";
  std::uint64_t c_n = 0;
  int c_q = 4;
  auto* compile = app.add_subcommand("compile", "Compile a tensor or decomposition into a circuit");
  compile->add_option("input", c_in, "Tensor, decomposition or generator JSON")->required();
  compile->add_option("--scheme", c_scheme, "sequential | sequential-rg | tree-rg | tree-rg-measured")->capture_default_str();
  compile->add_option("--q", c_q, "Blocking range")->capture_default_str();
  compile->add_option("--N", c_n, "Number of sites")->required();
  compile->add_option("--remainder", c_rem, "absorb | strict")->capture_default_str();
  compile->add_option("--out", c_out, "Circuit JSON path (embedded in the summary when omitted)");
  compile->add_option("--depth-out", c_depth, "DepthReport CSV path");

  // simulate
  std::string s_in, s_target, s_out;
  int s_max_qubits = 22;
  auto* simulate = app.add_subcommand("simulate", "Statevector simulation of a circuit");
  simulate->add_option("circuit", s_in, "CircuitIR JSON")->required();
  simulate->add_option("--target", s_target, "Tensor or decomposition to compare with");
  simulate->add_option("--max-qubits", s_max_qubits, "Statevector cap in qubits")->capture_default_str();
  simulate->add_option("--out", s_out, "Write the report here instead of stdout");

  // error-scan
  std::string e_in, e_q = "2:12", e_scheme = "sequential-rg", e_out, e_summary;
  std::uint64_t e_m = 200;
  double e_gamma = 0.45;
  auto* escan = app.add_subcommand("error-scan", "Analytic error per block against q");
  escan->add_option("input", e_in, "Tensor, decomposition or generator JSON")->required();
  escan->add_option("--q", e_q, "q values: lo:hi[:step] or a comma list")->capture_default_str();
  escan->add_option("--M", e_m, "Number of blocks")->capture_default_str();
  escan->add_option("--scheme", e_scheme, "sequential-rg | tree-rg | tree-rg-measured")->capture_default_str();
  escan->add_option("--gamma", e_gamma, "Exponent for bound_check")->capture_default_str();
  escan->add_option("--out", e_out, "ErrorScan CSV path (stdout when omitted)");
  escan->add_option("--summary-out", e_summary, "Fit summary JSON path");

  // depth-scan
  std::string d_in, d_out, d_ns, d_summary;
  double d_xi = 4.0, d_fid = 0.9;
  std::uint64_t d_lo = 1000, d_hi = 1000000;
  int d_per = 10, d_qmax = 64;
  auto* dscan = app.add_subcommand("depth-scan", "Minimal q and CNOT depth per scheme against N");
  dscan->add_option("input", d_in, "Tensor or generator JSON (g-family at --xi when omitted)");
  dscan->add_option("--xi", d_xi, "Correlation length of the default g-family tensor")->capture_default_str();
  dscan->add_option("--fidelity", d_fid, "Target fidelity")->capture_default_str();
  dscan->add_option("--N-min", d_lo, "Smallest N")->capture_default_str();
  dscan->add_option("--N-max", d_hi, "Largest N")->capture_default_str();
  dscan->add_option("--per-decade", d_per, "Grid points per decade")->capture_default_str();
  dscan->add_option("--N", d_ns, "Explicit comma list of N (overrides the grid)");
  dscan->add_option("--q-max", d_qmax, "Largest q searched")->capture_default_str();
  dscan->add_option("--out", d_out, "DepthReport CSV path (stdout when omitted)");
  dscan->add_option("--summary-out", d_summary, "Per-N q and epsilon JSON path");

  // ensemble
  EnsembleOptions en;
  std::string n_q = "4:10", n_out, n_summary;
  bool n_full = false;
  auto* ens = app.add_subcommand("ensemble", "Random inhomogeneous MPS error scans");
  ens->add_option("--count", en.count, "Samples")->capture_default_str();
  ens->add_flag("--full-scale", n_full, "1000 samples");
  ens->add_option("--N", en.n, "Sites per chain")->capture_default_str();
  ens->add_option("--q", n_q, "q values")->capture_default_str();
  ens->add_option("--d", en.d, "Physical dimension")->capture_default_str();
  ens->add_option("--D", en.bond, "Bond dimension")->capture_default_str();
  ens->add_option("--max-sweeps", en.variational.max_sweeps, "Sweeps per run")->capture_default_str();
  ens->add_option("--restarts", en.variational.seeds, "Runs per fit (first from analytic pairs)")->capture_default_str();
  ens->add_option("--out", n_out, "ErrorScan CSV path (stdout when omitted)");
  ens->add_option("--summary-out", n_summary, "Rate summary JSON path");

  // variational-fit
  std::string v_in, v_out, v_gates, v_summary;
  std::uint64_t v_n = 0;
  int v_q = 4;
  VariationalOptions vo;
  auto* vfit = app.add_subcommand("variational-fit", "Optimize nearest-neighbour pairs for an open chain");
  vfit->add_option("input", v_in, "Open chain JSON, or a tensor with --N")->required();
  vfit->add_option("--N", v_n, "Sites when the input is a tensor");
  vfit->add_option("--q", v_q, "Blocking range")->capture_default_str();
  vfit->add_option("--max-sweeps", vo.max_sweeps, "Sweep limit")->capture_default_str();
  vfit->add_option("--restarts", vo.seeds, "Runs (first from analytic pairs)")->capture_default_str();
  vfit->add_option("--out", v_out, "SweepReport CSV path (stdout when omitted)");
  vfit->add_option("--gates-out", v_gates, "PairGateSet JSON path");
  vfit->add_option("--summary-out", v_summary, "Summary JSON path");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    io::RunConfig cfg;
    cfg.params["global"] = globals_json(g);
    SpectralOptions sopt;
    sopt.tol = g.tol;

    if (*analyze) {
      cfg.command = "analyze";
      cfg.params["input"] = a_in;
      Input in = load_input(a_in);
      json rep = {{"config", cfg.to_json()}};
      if (in.decomposition) {
        json br = json::array();
        for (const auto& b : in.decomposition->normalized_branches()) br.push_back(io::to_json(spectral_analyze(b, sopt)));
        rep["branches"] = br;
        in.tensor = in.decomposition->full_tensor();
      }
      const SiteTensor& t = need_tensor(in, "analyze");
      rep["d"] = t.phys_dim();
      rep["D_l"] = t.left_dim();
      rep["D_r"] = t.right_dim();
      rep["spectral"] = io::to_json(spectral_analyze(t, sopt));
      emit(a_out, pretty(rep), out);
    } else if (*compile) {
      cfg.command = "compile";
      cfg.params.update({{"input", c_in}, {"scheme", c_scheme}, {"q", c_q}, {"N", c_n}, {"remainder", c_rem}});
      Input in = load_input(c_in);
      CompileOptions co;
      co.scheme = scheme_from_string(c_scheme);
      co.n = c_n;
      co.q = c_q;
      co.remainder = policy_from(c_rem);
      CompiledProgram prog = in.decomposition ? compile_branches(*in.decomposition, co)
                                              : compile_normal(need_tensor(in, "compile"), co);
      const CircuitIR& c = prog.circuit;
      json rep = {{"config", cfg.to_json()},
                  {"layers", c.depth()},
                  {"registers", c.registers.size()},
                  {"gates",
                   {{"isometry", c.count(GateKind::Isometry)},
                    {"swap", c.count(GateKind::Swap)},
                    {"pair", c.count(GateKind::PairPrep)},
                    {"ghz", c.count(GateKind::GhzPrep)},
                    {"nonlocal", c.nonlocal_gates()}}},
                  {"swap_layers", c.layers_with(GateKind::Swap)},
                  {"isometry_layers", c.layers_with(GateKind::Isometry)},
                  {"max_isometry_defect", max_gate_defect(c)},
                  {"blocks", prog.blocks}};
      const int d = c.meta.d, D = c.meta.leg_dim;
      if (power_of_two(d) && power_of_two(D) && c_n % static_cast<std::uint64_t>(std::max(1, c_q)) == 0) {
        DepthReport dr = cnot_depth(co.scheme, c_n, c_q, d, D);
        rep["depth_report"] = io::to_json(dr);
        if (!c_depth.empty()) io::write_text_file(c_depth, cfg.header() + io::depth_csv({dr}));
      } else {
        rep["depth_report"] = nullptr;
      }
      if (!c.meta.notes.empty()) rep["notes"] = c.meta.notes;
      if (c_out.empty())
        rep["circuit"] = io::to_json(c);
      else
        io::write_text_file(c_out, io::to_json(c).dump() + "\n");
      out << pretty(rep);
    } else if (*simulate) {
      cfg.command = "simulate";
      cfg.params.update({{"circuit", s_in}, {"target", s_target}, {"max_qubits", s_max_qubits}});
      CircuitIR c = io::circuit_from_json(io::read_json_file(s_in));
      c.validate();
      SimulationOptions so;
      require(s_max_qubits >= 1 && s_max_qubits <= 30, ErrorCode::InvalidArgument, "max-qubits must lie in 1..30");
      so.max_dim = std::uint64_t{1} << s_max_qubits;
      Vector psi = simulate_circuit(c, so);
      double qubits = 0;
      for (int r : c.registers) qubits += std::log2(static_cast<double>(r));
      json rep = {{"config", cfg.to_json()},
                  {"registers", c.registers.size()},
                  {"qubits", qubits},
                  {"dimension", psi.size()},
                  {"layers", c.depth()},
                  {"norm", psi.norm()}};
      if (!s_target.empty()) {
        Input in = load_input(s_target);
        SiteTensor t = in.decomposition ? in.decomposition->full_tensor() : need_tensor(in, "simulate --target");
        Vector target = mps_to_dense(MpsChain::uniform(t, c.meta.n), so.max_dim);
        require(target.size() == psi.size(), ErrorCode::DimensionMismatch, "target does not match the circuit registers");
        const cplx ov = target.dot(psi) / (target.norm() * psi.norm());
        rep["overlap"] = {ov.real(), ov.imag()};
        rep["epsilon"] = 1.0 - std::abs(ov);
      }
      emit(s_out, pretty(rep), out);
    } else if (*escan) {
      cfg.command = "error-scan";
      std::vector<int> qs = parse_int_list(e_q);
      cfg.params.update({{"input", e_in}, {"q", qs}, {"M", e_m}, {"scheme", e_scheme}, {"gamma", e_gamma}});
      Input in = load_input(e_in);
      ErrorScanOptions eo;
      eo.scheme = scheme_from_string(e_scheme);
      eo.m = e_m;
      ErrorScan scan = in.decomposition ? error_scan(*in.decomposition, qs, eo)
                                        : error_scan(need_tensor(in, "error-scan"), qs, eo);
      emit(e_out, cfg.header() + io::error_scan_csv({&scan}), out);
      json summary = scan_summary(scan, e_gamma);
      summary["config"] = cfg.to_json();
      if (!e_summary.empty())
        io::write_text_file(e_summary, pretty(summary));
      else if (!e_out.empty())
        out << pretty(summary);
    } else if (*dscan) {
      cfg.command = "depth-scan";
      DepthScanOptions dopt;
      dopt.fidelity = d_fid;
      dopt.q_max = d_qmax;
      if (!d_ns.empty()) {
        for (int v : parse_int_list(d_ns)) {
          require(v > 0, ErrorCode::InvalidArgument, "N must be positive");
          dopt.ns.push_back(static_cast<std::uint64_t>(v));
        }
      } else {
        dopt.ns = log_grid(d_lo, d_hi, d_per);
      }
      SiteTensor t = d_in.empty() ? fixtures::g_family(fixtures::g_for_xi(d_xi)) : need_tensor(load_input(d_in), "depth-scan");
      cfg.params.update({{"input", d_in.empty() ? json(nullptr) : json(d_in)},
                         {"xi", d_in.empty() ? json(d_xi) : json(nullptr)},
                         {"fidelity", d_fid},
                         {"N", dopt.ns},
                         {"q_max", d_qmax}});
      DepthScan scan = depth_scan(t, dopt);
      std::vector<DepthReport> rows;
      json per_n = json::array();
      for (const auto& r : scan.rows) {
        rows.insert(rows.end(), r.reports.begin(), r.reports.end());
        per_n.push_back({{"N", r.n}, {"q", r.q}, {"epsilon", r.epsilon}});
      }
      emit(d_out, cfg.header() + io::depth_csv(rows), out);
      json summary = {{"config", cfg.to_json()}, {"xi", scan.xi}, {"rows", per_n}};
      if (!d_summary.empty())
        io::write_text_file(d_summary, pretty(summary));
      else if (!d_out.empty())
        out << pretty(summary);
    } else if (*ens) {
      cfg.command = "ensemble";
      if (n_full) en.count = 1000;
      en.qs = parse_int_list(n_q);
      en.seed = g.seed;
      en.jobs = g.jobs;
      en.variational.tol = g.tol;
      cfg.params.update({{"count", en.count},
                         {"N", en.n},
                         {"q", en.qs},
                         {"d", en.d},
                         {"D", en.bond},
                         {"max_sweeps", en.variational.max_sweeps},
                         {"restarts", en.variational.seeds}});
      EnsembleResult res = random_mps_ensemble(en);
      std::vector<const ErrorScan*> scans;
      json samples = json::array();
      int monotone = 0;
      double drop = 0.0;
      for (const auto& s : res.samples) {
        scans.push_back(&s.scan);
        monotone += s.scan.monotone();
        drop = std::max(drop, s.max_sweep_drop);
        samples.push_back({{"sample_id", s.scan.rows.empty() ? 0 : s.scan.rows.front().sample_id},
                           {"xi", s.xi},
                           {"c_q", s.scan.fit_q.valid() ? json(s.scan.fit_q.rate) : json(nullptr)},
                           {"c_q_over_xi", s.scan.fit.valid() ? json(s.scan.fit.rate) : json(nullptr)}});
      }
      emit(n_out, cfg.header() + io::error_scan_csv(scans), out);
      json summary = {{"config", cfg.to_json()},
                      {"rate_per_q", rate_json(res.per_q)},
                      {"rate_per_q_over_xi", rate_json(res.per_q_over_xi)},
                      {"monotone_samples", monotone},
                      {"max_sweep_drop", drop},
                      {"samples", samples}};
      if (!n_summary.empty())
        io::write_text_file(n_summary, pretty(summary));
      else if (!n_out.empty())
        out << pretty(summary);
    } else if (*vfit) {
      cfg.command = "variational-fit";
      vo.tol = g.tol;
      vo.seed = g.seed;
      cfg.params.update({{"input", v_in},
                         {"N", v_n},
                         {"q", v_q},
                         {"max_sweeps", vo.max_sweeps},
                         {"restarts", vo.seeds}});
      Input in = load_input(v_in);
      MpsChain chain;
      if (in.chain) {
        chain = *in.chain;
      } else {
        require(v_n >= 2, ErrorCode::InvalidArgument, "a tensor input needs --N >= 2");
        chain = MpsChain::uniform(need_tensor(in, "variational-fit"), v_n, Boundary::Open);
      }
      PositiveChain pc = positive_chain(chain, v_q);
      VariationalResult res = optimize_positive(pc.chain, vo);
      emit(v_out, cfg.header() + io::sweep_csv(res.report), out);
      if (!v_gates.empty()) io::write_text_file(v_gates, pretty(io::to_json(res.gates)));
      const auto m = static_cast<double>(pc.blocks.size());
      json summary = {{"config", cfg.to_json()},
                      {"M", pc.blocks.size()},
                      {"fidelity", res.fidelity},
                      {"epsilon", res.epsilon()},
                      {"epsilon_per_block", res.epsilon() / m},
                      {"converged", res.report.converged},
                      {"sweeps_used", res.report.sweeps_used},
                      {"best_run", res.best_run}};
      if (!v_summary.empty())
        io::write_text_file(v_summary, pretty(summary));
      else if (!v_out.empty())
        out << pretty(summary);
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_numerical() ? kExitNumerical : kExitValidation;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace mpsrg::cli
