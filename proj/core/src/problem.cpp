#include "pilekit/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pilekit {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw SpecError("spec line " + std::to_string(line) + ": " + msg);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits "( ... ) ( ... )" into inner strings.
std::vector<std::string> paren_groups(const std::string& s, int line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    if (s[i] != '(') fail(line, "expected '('");
    int depth = 1;
    bool quoted = false;
    std::size_t j = i + 1;
    for (; j < s.size(); ++j) {
      if (s[j] == '"') quoted = !quoted;
      if (quoted) continue;
      if (s[j] == '(') ++depth;
      if (s[j] == ')' && --depth == 0) break;
    }
    if (depth != 0) fail(line, "unbalanced parentheses");
    out.push_back(s.substr(i + 1, j - i - 1));
    i = j + 1;
  }
  return out;
}

// Splits on top-level commas (quotes respected).
std::vector<std::string> comma_fields(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string unquote(const std::string& s, int line) {
  std::string t = trim(s);
  if (t.size() < 2 || t.front() != '"' || t.back() != '"')
    fail(line, "expected a quoted expression, got '" + s + "'");
  return t.substr(1, t.size() - 2);
}

std::vector<double> parse_reals(const std::string& s, int line) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      fail(line, "expected a real number, got '" + tok + "'");
    }
  }
  return out;
}

// key=value pairs separated by whitespace
std::vector<std::pair<std::string, std::string>> kv_pairs(const std::string& s, int line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) fail(line, "expected key=value, got '" + tok + "'");
    out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return out;
}

double to_real(const std::string& v, int line) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    fail(line, "expected a real number, got '" + v + "'");
  }
}

int to_int(const std::string& v, int line) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    fail(line, "expected an integer, got '" + v + "'");
  }
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  ProblemSpec spec;
  bool saw_domain = false, saw_op = false, saw_kernel = false;
  TermList interior;
  std::vector<BcDecl> bcs;
  BoundaryData bdata;
  std::string forcing_text;
  bool has_forcing = false;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::string rest = trim(line.substr(key.size()));

    if (key == "domain") {
      std::vector<double> vals = parse_reals(rest, lineno);
      if (vals.empty() || vals.size() % 2 != 0) fail(lineno, "domain needs lower/upper pairs");
      const int d = static_cast<int>(vals.size()) / 2;
      Vector lo(d), hi(d);
      for (int i = 0; i < d; ++i) {
        lo[i] = vals[2 * i];
        hi[i] = vals[2 * i + 1];
      }
      try {
        spec.domain = DomainSpec(lo, hi);
      } catch (const SpecError& e) {
        fail(lineno, e.what());
      }
      saw_domain = true;
    } else if (key == "op") {
      if (!saw_domain) fail(lineno, "domain must precede op");
      for (const auto& group : paren_groups(rest, lineno)) {
        auto fields = comma_fields(group);
        if (fields.size() != 2) fail(lineno, "op term needs (alpha..., \"expr\")");
        std::vector<double> a = parse_reals(fields[0], lineno);
        if (static_cast<int>(a.size()) != spec.domain.dim())
          fail(lineno, "multi-index length does not match domain dimension");
        std::vector<int> ai(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
          ai[i] = static_cast<int>(a[i]);
          if (ai[i] != a[i] || ai[i] < 0) fail(lineno, "multi-index entries must be non-negative integers");
        }
        std::string expr_text = unquote(fields[1], lineno);
        CoefficientFn c;
        try {
          c = CoefficientFn::parse(expr_text);
        } catch (const ExprParseError& e) {
          fail(lineno, e.what());
        }
        interior.push_back({MultiIndex(ai), c});
      }
      if (interior.empty()) fail(lineno, "op needs at least one term");
      saw_op = true;
    } else if (key == "forcing") {
      try {
        spec.forcing_expr = CoefficientFn::parse(unquote(rest, lineno));
      } catch (const ExprParseError& e) {
        fail(lineno, e.what());
      }
      has_forcing = true;
    } else if (key == "bc") {
      if (!saw_domain) fail(lineno, "domain must precede bc");
      auto groups = paren_groups(rest, lineno);
      if (groups.size() != 1) fail(lineno, "bc needs one (segment, kind[, params]) group");
      auto fields = comma_fields(groups[0]);
      if (fields.size() < 2) fail(lineno, "bc needs (segment, kind[, params])");
      BcDecl decl;
      try {
        decl.segment = SegmentId::parse(fields[0]);
        spec.domain.validate_segment(decl.segment);
        decl.kind = boundary_kind_from(fields[1]);
      } catch (const SpecError& e) {
        fail(lineno, e.what());
      }
      if (fields.size() > 2) decl.params = parse_reals(fields[2], lineno);
      bcs.push_back(std::move(decl));
    } else if (key == "bcdata") {
      auto groups = paren_groups(rest, lineno);
      if (groups.size() != 1) fail(lineno, "bcdata needs one (segment, \"expr\") group");
      auto fields = comma_fields(groups[0]);
      if (fields.size() != 2) fail(lineno, "bcdata needs (segment, \"expr\")");
      try {
        SegmentId seg = SegmentId::parse(fields[0]);
        spec.domain.validate_segment(seg);
        bdata.emplace_back(seg, CoefficientFn::parse(unquote(fields[1], lineno)));
      } catch (const SpecError& e) {
        fail(lineno, e.what());
      }
    } else if (key == "kernel") {
      std::istringstream ks(rest);
      std::string family;
      ks >> family;
      std::string params = trim(rest.substr(family.size() + (rest.size() > family.size() ? 1 : 0)));
      if (family == "rbf") {
        double h = 0.0;
        for (auto& [k, v] : kv_pairs(params, lineno)) {
          if (k == "h") h = to_real(v, lineno);
          else fail(lineno, "unknown rbf key '" + k + "'");
        }
        if (!saw_domain) fail(lineno, "domain must precede kernel");
        try {
          spec.kernel = KernelSpec::rbf(h, spec.domain.dim());
        } catch (const SpecError& e) {
          fail(lineno, e.what());
        }
      } else if (family == "aniso") {
        double theta = 0.0, s = 0.0;
        for (auto& [k, v] : kv_pairs(params, lineno)) {
          if (k == "theta") theta = to_real(v, lineno);
          else if (k == "s") s = to_real(v, lineno);
          else fail(lineno, "unknown aniso key '" + k + "'");
        }
        try {
          spec.kernel = KernelSpec::anisotropic(theta, s);
        } catch (const SpecError& e) {
          fail(lineno, e.what());
        }
        if (saw_domain && spec.domain.dim() != 2)
          fail(lineno, "anisotropic kernel requires a 2-D domain");
      } else {
        fail(lineno, "unknown kernel family '" + family + "'");
      }
      saw_kernel = true;
    } else if (key == "temps") {
      for (auto& [k, v] : kv_pairs(rest, lineno)) {
        if (k == "eta") spec.temps.eta = to_real(v, lineno);
        else if (k == "gamma") spec.temps.gamma = to_real(v, lineno);
        else if (k == "rho") spec.temps.rho = to_real(v, lineno);
        else fail(lineno, "unknown temps key '" + k + "'");
      }
      try {
        spec.temps.validate();
      } catch (const SpecError& e) {
        fail(lineno, e.what());
      }
    } else if (key == "quad") {
      for (auto& [k, v] : kv_pairs(rest, lineno)) {
        if (k == "m") spec.quad.m = to_int(v, lineno);
        else if (k == "boundary_m") spec.quad.boundary_m = to_int(v, lineno);
        else if (k == "mode") {
          if (v == "paper") spec.quad.mode = ChebyshevWeights::Paper;
          else if (v == "corrected") spec.quad.mode = ChebyshevWeights::Corrected;
          else fail(lineno, "quad mode must be paper or corrected");
        } else if (k == "cauchy") {
          if (v == "full") spec.quad.split_cauchy = false;
          else if (v == "split") spec.quad.split_cauchy = true;
          else fail(lineno, "cauchy must be full or split");
        } else {
          fail(lineno, "unknown quad key '" + k + "'");
        }
      }
      if (spec.quad.m < 1) fail(lineno, "quad m must be >= 1");
    } else if (key == "obs") {
      for (auto& [k, v] : kv_pairs(rest, lineno)) {
        if (k == "n") spec.obs.n = to_int(v, lineno);
        else if (k == "sigma") spec.obs.sigma = to_real(v, lineno);
        else if (k == "seed") spec.obs.seed = static_cast<std::uint64_t>(to_int(v, lineno));
        else fail(lineno, "unknown obs key '" + k + "'");
      }
      if (spec.obs.n < 0) fail(lineno, "obs n must be >= 0");
      if (spec.obs.sigma < 0) fail(lineno, "obs sigma must be >= 0");
    } else {
      fail(lineno, "unknown stanza '" + key + "'");
    }
  }

  if (!saw_domain) throw SpecError("problem spec is missing a domain stanza");
  if (!saw_op) throw SpecError("problem spec is missing an op stanza");
  if (!saw_kernel) throw SpecError("problem spec is missing a kernel stanza");

  // expressions must fit the domain dimension
  const int d = spec.domain.dim();
  for (const auto& t : interior)
    if (t.coefficient.min_dimension() > d)
      throw SpecError("operator coefficient references a coordinate beyond the domain dimension");
  if (has_forcing && spec.forcing_expr.min_dimension() > d)
    throw SpecError("forcing references a coordinate beyond the domain dimension");

  std::vector<BoundaryOperator> boundary;
  for (const auto& decl : bcs) {
    auto ops = make_boundary_operator(decl.kind, decl.params, decl.segment, spec.domain);
    for (auto& b : ops) boundary.push_back(std::move(b));
  }
  spec.op = OperatorSpec(std::move(interior), std::move(boundary));
  if (has_forcing) spec.op = absorb_forcing(spec.op, spec.forcing_expr);
  spec.has_forcing = has_forcing;
  spec.bc = std::move(bcs);
  spec.boundary_data = std::move(bdata);
  if (spec.kernel.family == KernelFamily::Rbf) spec.kernel.dim = d;
  return spec;
}

std::string serialize(const ProblemSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "domain";
  for (int i = 0; i < spec.domain.dim(); ++i)
    os << ' ' << spec.domain.lower()[i] << ' ' << spec.domain.upper()[i];
  os << '\n';
  os << "op";
  for (std::size_t t = 0; t < spec.op.interior().size(); ++t) {
    const auto& term = spec.op.interior()[t];
    os << " (";
    for (int i = 0; i < term.index.dim(); ++i) os << (i ? " " : "") << term.index[i];
    os << ", \"" << term.coefficient.print() << "\")";
  }
  os << '\n';
  if (spec.has_forcing) os << "forcing \"" << spec.forcing_expr.print() << "\"\n";
  for (const auto& decl : spec.bc) {
    os << "bc (" << decl.segment.name() << ", " << to_string(decl.kind);
    if (!decl.params.empty()) {
      os << ",";
      for (double p : decl.params) os << ' ' << p;
    }
    os << ")\n";
  }
  for (const auto& [seg, fn] : spec.boundary_data)
    os << "bcdata (" << seg.name() << ", \"" << fn.print() << "\")\n";
  os << spec.kernel.serialize() << '\n';
  os << "temps eta=" << spec.temps.eta << " gamma=" << spec.temps.gamma
     << " rho=" << spec.temps.rho << '\n';
  os << "quad m=" << spec.quad.m
     << " mode=" << (spec.quad.mode == ChebyshevWeights::Paper ? "paper" : "corrected")
     << " boundary_m=" << spec.quad.boundary_m
     << " cauchy=" << (spec.quad.split_cauchy ? "split" : "full") << '\n';
  os << "obs n=" << spec.obs.n << " sigma=" << spec.obs.sigma << " seed=" << spec.obs.seed << '\n';
  return os.str();
}

QuadratureRule tensor_box(const DomainSpec& domain, int m_per_axis, ChebyshevWeights mode) {
  const int d = domain.dim();
  if (d == 1) return chebyshev1_1d(m_per_axis, domain.lower()[0], domain.upper()[0], mode);
  if (d == 2)
    return tensor2d(chebyshev1_1d(m_per_axis, domain.lower()[0], domain.upper()[0], mode),
                    chebyshev1_1d(m_per_axis, domain.lower()[1], domain.upper()[1], mode));
  if (d == 3) {
    QuadratureRule xy =
        tensor2d(chebyshev1_1d(m_per_axis, domain.lower()[0], domain.upper()[0], mode),
                 chebyshev1_1d(m_per_axis, domain.lower()[1], domain.upper()[1], mode));
    QuadratureRule z = chebyshev1_1d(m_per_axis, domain.lower()[2], domain.upper()[2], mode);
    QuadratureRule out;
    out.points.resize(xy.count() * z.count(), 3);
    out.weights.resize(xy.count() * z.count());
    for (int i = 0; i < xy.count(); ++i)
      for (int j = 0; j < z.count(); ++j) {
        int idx = i * z.count() + j;
        out.points(idx, 0) = xy.points(i, 0);
        out.points(idx, 1) = xy.points(i, 1);
        out.points(idx, 2) = z.points(j, 0);
        out.weights[idx] = xy.weights[i] * z.weights[j];
      }
    out.kind = xy.kind + "*" + z.kind;
    return out;
  }
  throw SpecError("tensor rules support d <= 3");
}

std::vector<QuadratureRule> ProblemSpec::build_rules() const {
  std::vector<QuadratureRule> rules;
  rules.push_back(tensor_box(domain, quad.m, quad.mode));
  if (quad.boundary_m > 0) {
    std::vector<SegmentId> seen;
    for (const auto& decl : bc) {
      if (std::find(seen.begin(), seen.end(), decl.segment) != seen.end()) continue;
      seen.push_back(decl.segment);
      rules.push_back(boundary_rule(decl.segment, quad.boundary_m, domain, quad.mode));
    }
  }
  return rules;
}

}  // namespace pilekit
