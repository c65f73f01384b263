#include "mpsrg/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mpsrg/error.hpp"

namespace mpsrg::io {

namespace {

[[noreturn]] void fail(std::string_view where, const std::string& msg) {
  throw Error(ErrorCode::ParseError, std::string(where) + ": " + msg);
}

const json& field(const json& j, const char* key, std::string_view where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

template <class T>
T get(const json& j, std::string_view where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(where, std::string("wrong type (") + e.what() + ")");
  }
}

std::string sub(std::string_view where, const std::string& key) { return std::string(where) + "." + key; }

std::string idx(std::string_view where, std::size_t i) { return std::string(where) + "[" + std::to_string(i) + "]"; }

void flatten(const json& j, std::vector<double>& out, std::string_view where) {
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], out, idx(where, i));
  } else if (j.is_number()) {
    out.push_back(j.get<double>());
  } else {
    fail(where, "expected a number");
  }
}

json real_rows(const Matrix& m, bool imag) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index k = 0; k < m.cols(); ++k) r.push_back(imag ? m(i, k).imag() : m(i, k).real());
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<int> int_list(const json& j, std::string_view where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get<int>(j[i], idx(where, i)));
  return out;
}

json complex_list(const std::vector<cplx>& v) {
  Vector x(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Index>(i)) = v[i];
  return to_json(x);
}

std::vector<cplx> complex_list_from(const json& j, std::string_view where) {
  Vector x = vector_from_json(j, where);
  return {x.data(), x.data() + x.size()};
}

}  // namespace

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte offset -> line and column
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto p = what.find("; last read"); p != std::string::npos) what = what.substr(p + 2);
    throw Error(ErrorCode::ParseError,
                std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------

json to_json(const Matrix& m) { return {{"re", real_rows(m, false)}, {"im", real_rows(m, true)}}; }

Matrix matrix_from_json(const json& j, std::string_view where) {
  const json& re = field(j, "re", where);
  if (!re.is_array() || re.empty() || !re[0].is_array()) fail(sub(where, "re"), "expected a nonempty array of rows");
  const std::size_t rows = re.size(), cols = re[0].size();
  Matrix m = Matrix::Zero(static_cast<Index>(rows), static_cast<Index>(cols));
  auto fill = [&](const json& part, bool imag, const std::string& w) {
    if (!part.is_array() || part.size() != rows) fail(w, "expected " + std::to_string(rows) + " rows");
    for (std::size_t i = 0; i < rows; ++i) {
      if (!part[i].is_array() || part[i].size() != cols) fail(idx(w, i), "expected " + std::to_string(cols) + " entries");
      for (std::size_t k = 0; k < cols; ++k) {
        const double v = get<double>(part[i][k], idx(idx(w, i), k));
        if (imag)
          m(static_cast<Index>(i), static_cast<Index>(k)).imag(v);
        else
          m(static_cast<Index>(i), static_cast<Index>(k)).real(v);
      }
    }
  };
  fill(re, false, sub(where, "re"));
  if (j.contains("im")) fill(j["im"], true, sub(where, "im"));
  return m;
}

json to_json(const Vector& v) {
  json re = json::array(), im = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

Vector vector_from_json(const json& j, std::string_view where) {
  std::vector<double> re, im;
  flatten(field(j, "re", where), re, sub(where, "re"));
  if (j.contains("im")) {
    flatten(j["im"], im, sub(where, "im"));
    if (im.size() != re.size()) fail(sub(where, "im"), "length differs from re");
  }
  Vector v(static_cast<Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = cplx(re[i], im.empty() ? 0.0 : im[i]);
  return v;
}

json to_json(const SiteTensor& t) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < t.phys_dim(); ++i)
    for (int a = 0; a < t.left_dim(); ++a)
      for (int b = 0; b < t.right_dim(); ++b) {
        re.push_back(t[i](a, b).real());
        im.push_back(t[i](a, b).imag());
      }
  return {{"d", t.phys_dim()}, {"D_l", t.left_dim()}, {"D_r", t.right_dim()}, {"re", re}, {"im", im}};
}

SiteTensor tensor_from_json(const json& j, std::string_view where) {
  const int d = get<int>(field(j, "d", where), sub(where, "d"));
  const int dl = get<int>(field(j, "D_l", where), sub(where, "D_l"));
  const int dr = get<int>(field(j, "D_r", where), sub(where, "D_r"));
  if (d < 1 || dl < 1 || dr < 1) fail(where, "dimensions must be positive");
  Vector v = vector_from_json(j, where);
  const Index n = static_cast<Index>(d) * dl * dr;
  if (v.size() != n)
    fail(sub(where, "re"), "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  SiteTensor t(d, dl, dr);
  Index k = 0;
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < dl; ++a)
      for (int b = 0; b < dr; ++b) t[i](a, b) = v(k++);
  return t;
}

json to_json(const MpsChain& c) {
  json sites = json::array();
  for (const auto& s : c.segments()) {
    json t = to_json(s.tensor);
    if (s.repeat != 1) t["repeat"] = s.repeat;
    sites.push_back(std::move(t));
  }
  json j = {{"boundary", c.boundary() == Boundary::Periodic ? "periodic" : "open"}, {"sites", sites}};
  if (c.boundary() == Boundary::Open) {
    j["left"] = to_json(c.left());
    j["right"] = to_json(c.right());
  }
  return j;
}

MpsChain chain_from_json(const json& j) {
  const std::string b = get<std::string>(field(j, "boundary", "chain"), "chain.boundary");
  if (b != "periodic" && b != "open") fail("chain.boundary", "expected \"periodic\" or \"open\"");
  const json& sites = field(j, "sites", "chain");
  if (!sites.is_array() || sites.empty()) fail("chain.sites", "expected a nonempty array");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const std::string w = idx("chain.sites", i);
    std::uint64_t rep = sites[i].contains("repeat") ? get<std::uint64_t>(sites[i]["repeat"], sub(w, "repeat")) : 1;
    if (rep == 0) fail(sub(w, "repeat"), "must be positive");
    segs.push_back({tensor_from_json(sites[i], w), rep});
  }
  if (b == "periodic") return MpsChain::from_segments(std::move(segs), Boundary::Periodic);
  Vector left, right;
  if (j.contains("left")) {
    left = vector_from_json(j["left"], "chain.left");
  } else {
    left = Vector::Zero(segs.front().tensor.left_dim());
    left(0) = 1.0;
  }
  if (j.contains("right")) {
    right = vector_from_json(j["right"], "chain.right");
  } else {
    right = Vector::Zero(segs.back().tensor.right_dim());
    right(0) = 1.0;
  }
  return MpsChain::from_segments(std::move(segs), Boundary::Open, left, right);
}

// ---------------------------------------------------------------------------

json to_json(const CircuitIR& c) {
  json layers = json::array();
  for (const auto& layer : c.layers) {
    json l = json::array();
    for (const auto& g : layer) {
      json x = {{"kind", std::string(to_string(g.kind))}, {"support", g.support}};
      switch (g.kind) {
        case GateKind::Isometry:
          x["unitary"] = to_json(g.unitary);
          x["input_basis"] = g.input_basis;
          x["ancillas"] = g.ancillas;
          break;
        case GateKind::Swap:
          x["unitary"] = "swap";
          break;
        case GateKind::PairPrep:
          x["pair"] = to_json(g.state);
          break;
        case GateKind::GhzPrep: {
          x["state"] = to_json(g.state);
          x["alpha"] = complex_list(g.alpha);
          json bp = json::array();
          for (const auto& p : g.branch_pairs) bp.push_back(to_json(p));
          x["branch_pairs"] = bp;
          break;
        }
      }
      if (g.nonlocal) x["nonlocal"] = true;
      if (!g.label.empty()) x["label"] = g.label;
      l.push_back(std::move(x));
    }
    layers.push_back(std::move(l));
  }
  json meta = {{"scheme", std::string(to_string(c.meta.scheme))},
               {"N", c.meta.n},
               {"q", c.meta.q},
               {"d", c.meta.d},
               {"leg_dim", c.meta.leg_dim},
               {"blocks", c.meta.blocks},
               {"depth", c.depth()}};
  if (!c.meta.notes.empty()) meta["notes"] = c.meta.notes;
  return {{"registers", c.registers}, {"layers", layers}, {"metadata", meta}};
}

CircuitIR circuit_from_json(const json& j) {
  CircuitIR c;
  c.registers = int_list(field(j, "registers", "circuit"), "circuit.registers");
  const json& layers = field(j, "layers", "circuit");
  if (!layers.is_array()) fail("circuit.layers", "expected an array");
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const std::string lw = idx("circuit.layers", li);
    if (!layers[li].is_array()) fail(lw, "expected an array of gates");
    std::vector<Gate> layer;
    for (std::size_t gi = 0; gi < layers[li].size(); ++gi) {
      const json& x = layers[li][gi];
      const std::string w = idx(lw, gi);
      Gate g;
      const std::string kind = get<std::string>(field(x, "kind", w), sub(w, "kind"));
      g.support = int_list(field(x, "support", w), sub(w, "support"));
      if (kind == "isometry") {
        g.kind = GateKind::Isometry;
        g.unitary = matrix_from_json(field(x, "unitary", w), sub(w, "unitary"));
        if (x.contains("input_basis")) g.input_basis = get<std::vector<std::uint64_t>>(x["input_basis"], sub(w, "input_basis"));
        if (x.contains("ancillas")) g.ancillas = int_list(x["ancillas"], sub(w, "ancillas"));
      } else if (kind == "swap") {
        g.kind = GateKind::Swap;
      } else if (kind == "pair") {
        g.kind = GateKind::PairPrep;
        g.state = vector_from_json(field(x, "pair", w), sub(w, "pair"));
      } else if (kind == "ghz") {
        g.kind = GateKind::GhzPrep;
        g.state = vector_from_json(field(x, "state", w), sub(w, "state"));
        if (x.contains("alpha")) g.alpha = complex_list_from(x["alpha"], sub(w, "alpha"));
        if (x.contains("branch_pairs"))
          for (std::size_t k = 0; k < x["branch_pairs"].size(); ++k)
            g.branch_pairs.push_back(vector_from_json(x["branch_pairs"][k], idx(sub(w, "branch_pairs"), k)));
      } else {
        fail(sub(w, "kind"), "unknown gate kind \"" + kind + "\"");
      }
      g.nonlocal = x.value("nonlocal", false);
      g.label = x.value("label", std::string());
      layer.push_back(std::move(g));
    }
    c.layers.push_back(std::move(layer));
  }
  if (j.contains("metadata")) {
    const json& m = j["metadata"];
    if (m.contains("scheme")) {
      try {
        c.meta.scheme = scheme_from_string(get<std::string>(m["scheme"], "circuit.metadata.scheme"));
      } catch (const Error& e) {
        fail("circuit.metadata.scheme", e.what());
      }
    }
    c.meta.n = m.value("N", std::uint64_t{0});
    c.meta.q = m.value("q", 0);
    c.meta.d = m.value("d", 0);
    c.meta.leg_dim = m.value("leg_dim", 0);
    if (m.contains("blocks")) c.meta.blocks = int_list(m["blocks"], "circuit.metadata.blocks");
    c.meta.notes = m.value("notes", std::string());
  }
  return c;
}

// ---------------------------------------------------------------------------

json to_json(const CanonicalDecomposition& d) {
  json br = json::array();
  for (const auto& b : d.branches) br.push_back({{"mu", complex_list(b.mu)}, {"tensor", to_json(b.tensor)}});
  return {{"branches", br}};
}

CanonicalDecomposition decomposition_from_json(const json& j) {
  const json& br = field(j, "branches", "decomposition");
  if (!br.is_array() || br.empty()) fail("decomposition.branches", "expected a nonempty array");
  CanonicalDecomposition d;
  for (std::size_t i = 0; i < br.size(); ++i) {
    const std::string w = idx("decomposition.branches", i);
    const json& mu = field(br[i], "mu", w);
    Branch b;
    if (mu.is_array()) {
      // plain list of reals, or [re, im] pairs
      for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu[k].is_array() && mu[k].size() == 2)
          b.mu.emplace_back(get<double>(mu[k][0], idx(sub(w, "mu"), k)), get<double>(mu[k][1], idx(sub(w, "mu"), k)));
        else
          b.mu.emplace_back(get<double>(mu[k], idx(sub(w, "mu"), k)));
      }
    } else {
      b.mu = complex_list_from(mu, sub(w, "mu"));
    }
    b.tensor = tensor_from_json(field(br[i], "tensor", w), sub(w, "tensor"));
    d.branches.push_back(std::move(b));
  }
  return d;
}

json to_json(const PairGateSet& g) {
  json gates = json::array();
  for (const auto& w : g.gates) gates.push_back(to_json(w));
  return {{"seed", g.seed}, {"gates", gates}};
}

PairGateSet gates_from_json(const json& j) {
  PairGateSet g;
  g.seed = j.value("seed", std::uint64_t{0});
  const json& gates = field(j, "gates", "pair_gates");
  if (!gates.is_array()) fail("pair_gates.gates", "expected an array");
  for (std::size_t i = 0; i < gates.size(); ++i) g.gates.push_back(matrix_from_json(gates[i], idx("pair_gates.gates", i)));
  return g;
}

json to_json(const SpectralReport& r) {
  json ev = json::array();
  for (const auto& e : r.eigenvalues) ev.push_back({e.real(), e.imag()});
  json j = {{"eigenvalues", ev},
            {"lambda1", {r.lambda1.real(), r.lambda1.imag()}},
            {"is_normal", r.is_normal},
            {"degeneracy_b", r.degeneracy_b}};
  j["xi"] = std::isfinite(r.xi) ? json(r.xi) : json("inf");
  if (r.rho.size() > 0) {
    j["rho"] = to_json(r.rho);
    j["left_fixed"] = to_json(r.left_fixed);
  }
  return j;
}

json to_json(const ErrorFit& f) {
  if (!f.valid()) return {{"points", f.points}, {"rate", nullptr}};
  return {{"rate", f.rate}, {"prefactor", f.prefactor}, {"residual", f.residual}, {"points", f.points}};
}

json to_json(const DepthReport& r) {
  json b = json::object();
  for (const auto& [k, v] : r.breakdown) b[k] = v;
  return {{"scheme", std::string(to_string(r.scheme))},
          {"N", r.n},
          {"q", r.q},
          {"layer_depth", r.layer_depth},
          {"cnot_depth", r.cnot_depth},
          {"breakdown", b}};
}

// ---------------------------------------------------------------------------

json RunConfig::to_json() const { return {{"command", command}, {"params", params}}; }

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.command = get<std::string>(field(j, "command", "config"), "config.command");
  c.params = field(j, "params", "config");
  return c;
}

std::string RunConfig::header() const { return "# config " + to_json().dump() + "\n"; }

RunConfig RunConfig::from_report(std::string_view text) {
  constexpr std::string_view tag = "# config ";
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (line.substr(0, tag.size()) == tag) return from_json(parse_json(line.substr(tag.size()), "config header"));
    pos = end + 1;
  }
  throw Error(ErrorCode::ParseError, "report has no config header");
}

std::string depth_csv(const std::vector<DepthReport>& rows) {
  std::string out = "scheme,N,q,layer_depth,cnot_depth\n";
  for (const auto& r : rows)
    out += std::string(to_string(r.scheme)) + "," + std::to_string(r.n) + "," + std::to_string(r.q) + "," +
           std::to_string(r.layer_depth) + "," + std::to_string(r.cnot_depth) + "\n";
  return out;
}

std::string error_scan_csv(const std::vector<const ErrorScan*>& scans) {
  std::string out = "q,xi,M,epsilon,epsilon_per_block,scheme,sample_id\n";
  for (const ErrorScan* s : scans)
    for (const auto& r : s->rows)
      out += std::to_string(r.q) + "," + format_double(r.xi) + "," + std::to_string(r.m) + "," +
             format_double(r.epsilon) + "," + format_double(r.epsilon_per_block) + "," + r.scheme + "," +
             std::to_string(r.sample_id) + "\n";
  return out;
}

std::string sweep_csv(const SweepReport& r) {
  std::string out = "sweep,fidelity,gain\n";
  for (std::size_t i = 0; i < r.fidelities.size(); ++i)
    out += std::to_string(i) + "," + format_double(r.fidelities[i]) + "," +
           format_double(i == 0 ? 0.0 : r.fidelities[i] - r.fidelities[i - 1]) + "\n";
  return out;
}

}  // namespace mpsrg::io
