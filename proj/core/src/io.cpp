#include "pilekit/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pilekit {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw SpecError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw SpecError("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt17(row[i]);
    os << '\n';
  }
  if (!os) throw SpecError("failed writing " + path.string());
}

void write_rule_csv(const std::filesystem::path& path, const QuadratureRule& rule) {
  std::vector<std::string> header;
  for (int i = 0; i < rule.dim(); ++i) header.push_back("z_" + std::to_string(i + 1));
  header.push_back("w");
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < rule.count(); ++i) {
    std::vector<double> row;
    for (int j = 0; j < rule.dim(); ++j) row.push_back(rule.points(i, j));
    row.push_back(rule.weights[i]);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

ObservationCsv read_observations_csv(const std::filesystem::path& path, int dim) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw SpecError(path.string() + " is empty");
  auto header = split_csv_line(line);
  std::vector<int> xcol(dim, -1);
  int ycol = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      ycol = static_cast<int>(c);
      continue;
    }
    if (name.rfind("x_", 0) == 0) {
      int idx = std::stoi(name.substr(2));
      if (idx >= 1 && idx <= dim) xcol[idx - 1] = static_cast<int>(c);
      else throw SpecError("unexpected column '" + name + "' for dimension " + std::to_string(dim));
    } else {
      throw SpecError("unexpected column '" + name + "'");
    }
  }
  if (ycol < 0) throw SpecError(path.string() + " has no y column");
  for (int i = 0; i < dim; ++i)
    if (xcol[i] < 0) throw SpecError(path.string() + " is missing column x_" + std::to_string(i + 1));

  std::vector<std::vector<double>> pts;
  std::vector<double> ys;
  int rejected = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw SpecError("csv row width mismatch in " + path.string());
    std::vector<double> vals(fields.size());
    bool ok = true;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      try {
        vals[c] = std::stod(fields[c]);
      } catch (const std::exception&) {
        ok = false;
        break;
      }
      if (!std::isfinite(vals[c])) ok = false;
    }
    if (!ok) {
      ++rejected;
      continue;
    }
    std::vector<double> p(dim);
    for (int i = 0; i < dim; ++i) p[i] = vals[xcol[i]];
    pts.push_back(std::move(p));
    ys.push_back(vals[ycol]);
  }
  ObservationCsv out;
  out.rejected = rejected;
  out.obs.X.resize(static_cast<Eigen::Index>(pts.size()), dim);
  out.obs.Y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int j = 0; j < dim; ++j) out.obs.X(static_cast<Eigen::Index>(i), j) = pts[i][j];
    out.obs.Y[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return out;
}

Matrix read_points_csv(const std::filesystem::path& path, int dim) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw SpecError(path.string() + " is empty");
  auto header = split_csv_line(line);
  std::vector<int> xcol(dim, -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind("x_", 0) == 0) {
      int idx = std::stoi(header[c].substr(2));
      if (idx >= 1 && idx <= dim) xcol[idx - 1] = static_cast<int>(c);
    }
  }
  for (int i = 0; i < dim; ++i)
    if (xcol[i] < 0) throw SpecError(path.string() + " is missing column x_" + std::to_string(i + 1));
  std::vector<std::vector<double>> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> p(dim);
    for (int i = 0; i < dim; ++i) p[i] = std::stod(fields[xcol[i]]);
    pts.push_back(std::move(p));
  }
  Matrix X(static_cast<Eigen::Index>(pts.size()), dim);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int j = 0; j < dim; ++j) X(static_cast<Eigen::Index>(i), j) = pts[i][j];
  return X;
}

void write_matrix(const std::filesystem::path& path, const Matrix& M) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SpecError("cannot open " + path.string() + " for writing");
  const char magic[4] = {'P', 'K', 'M', 'B'};
  const std::uint32_t version = 1;
  const std::uint64_t rows = static_cast<std::uint64_t>(M.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(M.cols());
  os.write(magic, 4);
  os.write(reinterpret_cast<const char*>(&version), sizeof(version));
  os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      double v = M(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!os) throw SpecError("failed writing " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SpecError("cannot open " + path.string());
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!is || std::memcmp(magic, "PKMB", 4) != 0 || version != 1)
    throw SpecError(path.string() + " is not a matrix dump");
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof(v));
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  if (!is) throw SpecError("truncated matrix dump " + path.string());
  return M;
}

std::string fnv1a_hex(const std::string& content) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const std::string& spec_text,
                    const std::vector<std::uint64_t>& seeds, const std::string& command) {
  nlohmann::json j;
  j["spec_hash"] = fnv1a_hex(spec_text);
  j["seeds"] = seeds;
  j["versions"] = {{"pile-kit", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  j["command"] = command;
  write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

nlohmann::json kernel_json(const KernelSpec& k) {
  nlohmann::json j;
  j["family"] = k.family == KernelFamily::Rbf ? "rbf" : "aniso";
  j["dim"] = k.dim;
  if (k.family == KernelFamily::Rbf) {
    j["h"] = k.h;
  } else {
    j["theta"] = k.theta;
    j["s"] = k.s;
  }
  return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (j.at("family") == "rbf") return KernelSpec::rbf(j.at("h"), j.at("dim"));
  return KernelSpec::anisotropic(j.at("theta"), j.at("s"));
}

nlohmann::json temps_json(const Temperatures& t) {
  return {{"eta", t.eta}, {"gamma", t.gamma}, {"rho", t.rho}};
}

Temperatures temps_from_json(const nlohmann::json& j) {
  Temperatures t;
  t.eta = j.at("eta");
  t.gamma = j.at("gamma");
  t.rho = j.at("rho");
  return t;
}

nlohmann::json matrix_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, int cols_hint) {
  if (j.empty()) return Matrix(0, cols_hint);
  Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    for (std::size_t c = 0; c < j[i].size(); ++c) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c];
  return M;
}

}  // namespace

void save_model_json(const std::filesystem::path& path, const FitCoefficients& fit) {
  if (!fit.gram) throw SpecError("fit has no conditioning system attached");
  const GramSystem& g = *fit.gram;
  nlohmann::json j;
  j["kernel"] = kernel_json(g.kernel().spec());
  j["max_order"] = g.kernel().max_order();
  j["temps"] = temps_json(fit.temps);
  j["route"] = fit.route == FitRoute::Krr ? "krr" : "gp";
  j["jitter"] = fit.jitter;
  j["alpha"] = std::vector<double>(fit.alpha.data(), fit.alpha.data() + fit.alpha.size());
  j["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
  j["X"] = matrix_json(g.X());
  j["Z"] = matrix_json(g.Z());
  j["W"] = std::vector<double>(g.W().data(), g.W().data() + g.W().size());
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : g.nodes()) nodes.push_back({{"set", node.term_set}, {"shift", node.shift}});
  j["nodes"] = nodes;
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& terms : g.term_sets()) {
    nlohmann::json set = nlohmann::json::array();
    for (const auto& t : terms)
      set.push_back({{"alpha", t.index.entries()}, {"coeff", t.coefficient.print()}});
    sets.push_back(std::move(set));
  }
  j["term_sets"] = sets;
  write_text_file(path, j.dump(2) + "\n");
}

FitCoefficients load_model_json(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  KernelSpec kernel = kernel_from_json(j.at("kernel"));
  const int d = kernel.dim;
  Matrix X = matrix_from_json(j.at("X"), d);
  Matrix Z = matrix_from_json(j.at("Z"), d);
  std::vector<double> wv = j.at("W").get<std::vector<double>>();
  Vector W = Eigen::Map<Vector>(wv.data(), static_cast<Eigen::Index>(wv.size()));
  std::vector<NodeOperator> nodes;
  for (const auto& nj : j.at("nodes")) nodes.push_back({nj.at("set"), nj.at("shift")});
  std::vector<TermList> sets;
  for (const auto& sj : j.at("term_sets")) {
    TermList terms;
    for (const auto& tj : sj) {
      terms.push_back({MultiIndex(tj.at("alpha").get<std::vector<int>>()),
                       CoefficientFn::parse(tj.at("coeff").get<std::string>())});
    }
    sets.push_back(std::move(terms));
  }
  auto gram = std::make_shared<GramSystem>(
      assemble_from_nodes(kernel, j.at("max_order"), X, Z, W, std::move(nodes), std::move(sets)));
  FitCoefficients fit;
  std::vector<double> av = j.at("alpha").get<std::vector<double>>();
  std::vector<double> bv = j.at("beta").get<std::vector<double>>();
  fit.alpha = Eigen::Map<Vector>(av.data(), static_cast<Eigen::Index>(av.size()));
  fit.beta = Eigen::Map<Vector>(bv.data(), static_cast<Eigen::Index>(bv.size()));
  fit.route = j.at("route") == "krr" ? FitRoute::Krr : FitRoute::Gp;
  fit.temps = temps_from_json(j.at("temps"));
  fit.jitter = j.at("jitter");
  fit.gram = gram;
  return fit;
}

std::string pile_report_json(const PileReport& report) {
  nlohmann::json j;
  j["pile"] = report.pile;
  j["quad_term"] = report.quad_term;
  j["logdet_term"] = report.logdet_term;
  j["const_term"] = report.const_term;
  j["n"] = report.n;
  j["m"] = report.m;
  j["temps"] = temps_json(report.temps);
  j["jitter"] = report.jitter;
  j["free_energy"] = free_energy(report);
  return j.dump(2);
}

std::string data_free_report_json(const DataFreeReport& report) {
  nlohmann::json j;
  j["normalized_score"] = report.normalized_score;
  j["c_m"] = report.c_m;
  j["m"] = report.m;
  j["jitter"] = report.jitter;
  return j.dump(2);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SpecError("cannot open " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SpecError("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw SpecError("failed writing " + path.string());
}

}  // namespace pilekit
