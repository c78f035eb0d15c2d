#include <doctest.h>

#include "helpers.hpp"
#include "pilekit/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace pilekit;
using namespace pilekit::testing;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pilekit-test-" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("empty table writes a header-only csv") {
  TempDir dir;
  write_csv(dir.path / "empty.csv", {"a", "b"}, {});
  std::string text = read_text_file(dir.path / "empty.csv");
  CHECK(text == "a,b\n");
}

TEST_CASE("csv floats survive at full precision") {
  TempDir dir;
  double v = 0.12345678901234567;
  write_csv(dir.path / "prec.csv", {"v"}, {{v}});
  std::string text = read_text_file(dir.path / "prec.csv");
  CHECK(text.find("0.12345678901234566") != std::string::npos);  // 17 significant digits
}

TEST_CASE("observation csv ingestion tolerates column reordering and drops NaN rows") {
  TempDir dir;
  write_text_file(dir.path / "obs.csv",
                  "y,x_2,x_1\n"
                  "1.5,0.2,0.1\n"
                  "nan,0.4,0.3\n"
                  "2.5,0.6,0.5\n"
                  "3.5,inf,0.7\n");
  ObservationCsv csv = read_observations_csv(dir.path / "obs.csv", 2);
  CHECK(csv.rejected == 2);
  REQUIRE(csv.obs.X.rows() == 2);
  CHECK(csv.obs.X(0, 0) == doctest::Approx(0.1));
  CHECK(csv.obs.X(0, 1) == doctest::Approx(0.2));
  CHECK(csv.obs.Y[1] == doctest::Approx(2.5));
  CHECK_THROWS_AS(read_observations_csv(dir.path / "missing.csv", 2), SpecError);
}

TEST_CASE("quadrature rule csv export") {
  TempDir dir;
  auto rule = chebyshev1_1d(3, 0.0, 1.0);
  write_rule_csv(dir.path / "rule.csv", rule);
  std::string text = read_text_file(dir.path / "rule.csv");
  CHECK(text.rfind("z_1,w\n", 0) == 0);
}

TEST_CASE("binary matrix dumps round-trip bit-exactly") {
  TempDir dir;
  CounterRng rng(301);
  Matrix M = random_points(rng, 7, 5);
  write_matrix(dir.path / "m.bin", M);
  Matrix back = read_matrix(dir.path / "m.bin");
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 5);
  CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
  // header sanity: magic + version + dims + payload
  CHECK(fs::file_size(dir.path / "m.bin") == 4u + 4u + 8u + 8u + 7u * 5u * 8u);
}

TEST_CASE("manifest hash changes iff the spec text changes") {
  TempDir dir;
  write_manifest(dir.path, "spec-one", {1, 2}, "fit");
  std::string a = read_text_file(dir.path / "manifest.json");
  write_manifest(dir.path, "spec-one", {1, 2}, "fit");
  std::string b = read_text_file(dir.path / "manifest.json");
  CHECK(a == b);
  write_manifest(dir.path, "spec-two", {1, 2}, "fit");
  std::string c = read_text_file(dir.path / "manifest.json");
  CHECK(a != c);
  CHECK(fnv1a_hex("spec-one") != fnv1a_hex("spec-two"));
}

TEST_CASE("model json reloads to identical predictions") {
  TempDir dir;
  CounterRng rng(307);
  // a small physics-informed fit with a boundary segment
  DomainSpec box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  SegmentId face{0, false};
  TermList lap = {{MultiIndex({2, 0}), CoefficientFn::constant(1.0)},
                  {MultiIndex({0, 2}), CoefficientFn::constant(1.0)}};
  OperatorSpec op(lap, make_boundary_operator(BoundaryKind::Dirichlet, {}, face, box));
  std::vector<QuadratureRule> rules = {
      tensor2d(chebyshev1_1d(4, -1, 1), chebyshev1_1d(4, -1, 1)),
      boundary_rule(face, 5, box)};
  Matrix X = random_points(rng, 9, 2);
  auto gram = std::make_shared<GramSystem>(assemble(KernelSpec::rbf(0.7, 2), op, X, rules));
  ObservationSet obs{X, Vector::Zero(9)};
  for (int i = 0; i < 9; ++i) obs.Y[i] = rng.normal();
  PhysicsTargets targets = PhysicsTargets::zeros(gram->m());
  Temperatures t{0.3, 0.5, 1.1};
  FitCoefficients fit = fit_krr(gram, obs, targets, t);

  save_model_json(dir.path / "model.json", fit);
  FitCoefficients loaded = load_model_json(dir.path / "model.json");

  CHECK(loaded.route == FitRoute::Krr);
  CHECK(loaded.temps.eta == doctest::Approx(t.eta));
  for (int i = 0; i < 100; ++i) {
    auto p = random_point(rng, 2);
    CHECK(predict(loaded, p, Channel::F) ==
          doctest::Approx(predict(fit, p, Channel::F)).epsilon(1e-12));
    CHECK(predict(loaded, p, Channel::Af) ==
          doctest::Approx(predict(fit, p, Channel::Af)).epsilon(1e-12));
  }
}
