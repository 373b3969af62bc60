#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "birkhoff/loop_io.hpp"
#include "birkhoff/loops.hpp"

using namespace birkhoff;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

MatrixLoop random_loop(std::mt19937_64& rng, int n, int kmin, int kmax) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<CMatrix> coeffs;
  for (int k = kmin; k <= kmax; ++k) {
    CMatrix c(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) c(i, j) = Complex(gauss(rng), gauss(rng));
    }
    coeffs.push_back(std::move(c));
  }
  return MatrixLoop(kmin, std::move(coeffs));
}

}  // namespace

TEST_CASE("spec round trip is bit exact") {
  std::mt19937_64 rng(411556621u);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int kmin = -static_cast<int>(rng() % 4);
    const int kmax = static_cast<int>(rng() % 4);
    LoopSpec spec = to_spec(random_loop(rng, n, kmin, kmax));
    const std::string text = emit_loop_spec(spec);
    LoopSpec back = parse_loop_spec(text);
    CHECK(back == spec);
    CHECK(emit_loop_spec(back) == text);
  }
}

TEST_CASE("loop conversion preserves coefficients") {
  MatrixLoop g = diag_powers({2, -1});
  LoopSpec spec = to_spec(g);
  CHECK(spec.n == 2);
  CHECK(spec.kmin == -1);
  CHECK(spec.kmax == 2);
  MatrixLoop back = to_loop(parse_loop_spec(emit_loop_spec(spec)));
  CHECK(coeff_distance(g, back) == 0.0);
}

TEST_CASE("minimal scalar spec parses to the constant loop") {
  const std::string text = R"({
    "version": 1, "n": 1, "kmin": 0, "kmax": 0,
    "entries": [[[[1, 0]]]]
  })";
  LoopSpec spec = parse_loop_spec(text);
  MatrixLoop g = to_loop(spec);
  CHECK(loop_dim(g) == 1);
  CHECK(coeff_distance(as_scalar(g), constant_series(1.0)) == 0.0);
}

TEST_CASE("lie basis survives the round trip") {
  LoopSpec spec = to_spec(identity_loop(2));
  CMatrix e = CMatrix::Zero(2, 2);
  e(0, 1) = Complex(1.0, -0.5);
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  spec.lie_basis = {e, h};
  LoopSpec back = parse_loop_spec(emit_loop_spec(spec));
  CHECK(back == spec);
  REQUIRE(back.lie_basis.size() == 2);
  CHECK(back.lie_basis[0](0, 1) == Complex(1.0, -0.5));
}

TEST_CASE("malformed input names the offending field") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_loop_spec(text);
      FAIL("expected a parse error for ", text);
    } catch (const ParseError& e) {
      const std::string what = e.what();
      CHECK_MESSAGE(what.find(needle) != std::string::npos, what);
    }
  };

  expect_error("{", "invalid JSON");
  expect_error("[1, 2]", "JSON object");
  expect_error(R"({"n": 1})", "version");
  expect_error(R"({"version": 2, "n": 1, "kmin": 0, "kmax": 0,
                   "entries": [[[[1, 0]]]]})",
               "unsupported version");
  expect_error(R"({"version": 1, "n": 0, "kmin": 0, "kmax": 0,
                   "entries": []})",
               "dimension");
  expect_error(R"({"version": 1, "n": 1, "kmin": 1, "kmax": 0,
                   "entries": [[[[1, 0]]]]})",
               "band");
  expect_error(R"({"version": 1, "n": 1, "kmin": 0, "kmax": 2,
                   "entries": [[[[1, 0], [2, 0]]]]})",
               "entries[0][0]");
  expect_error(R"({"version": 1, "n": 2, "kmin": 0, "kmax": 0,
                   "entries": [[[[1, 0]]]]})",
               "rows");
  expect_error(R"({"version": 1, "n": 1, "kmin": 0, "kmax": 0,
                   "entries": [[[[1]]]]})",
               "pair");
  expect_error(R"({"version": 1, "n": 1, "kmin": 0, "kmax": 0,
                   "entries": [[[[1e999, 0]]]]})",
               "overflow");
  expect_error(R"({"version": 1, "n": 1, "kmin": 0, "kmax": 0,
                   "entries": [[[[1, 0]]]], "lie_basis": [[[1, 0]]]})",
               "lie_basis[0]");
  expect_error(R"({"version": 1, "n": 1.5, "kmin": 0, "kmax": 0,
                   "entries": [[[[1, 0]]]]})",
               "integer");
}

TEST_CASE("digest is stable") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("abc") == 0xe71fa2190541574bull);
  CHECK(digest_string("abc") == "fnv1a64:e71fa2190541574b");
  CHECK(digest_string("abc") == digest_string("abc"));
  CHECK(digest_string("abc") != digest_string("abd"));
}

TEST_CASE("golden corpus re-emits byte for byte") {
  const std::filesystem::path dir(GOLDEN_DIR);
  REQUIRE(std::filesystem::is_directory(dir));
  int seen = 0;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (item.path().extension() != ".loop") continue;
    ++seen;
    INFO(item.path().filename().string());
    const std::string text = slurp(item.path());
    LoopSpec spec = parse_loop_spec(text);
    CHECK(emit_loop_spec(spec) == text);
    LoopSpec rebuilt = to_spec(to_loop(spec));
    rebuilt.lie_basis = spec.lie_basis;
    CHECK(emit_loop_spec(rebuilt) == text);
  }
  CHECK(seen >= 9);
}
