#include "birkhoff/loop_io.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "json.hpp"

namespace birkhoff {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

int int_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) {
    fail(where + "." + key, "expected an integer");
  }
  return v.get<int>();
}

Complex parse_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    fail(where, "expected a [re, im] pair");
  }
  const double re = v[0].get<double>();
  const double im = v[1].get<double>();
  if (!std::isfinite(re) || !std::isfinite(im)) {
    fail(where, "coefficient is not finite");
  }
  return Complex(re, im);
}

std::string entry_path(int i, int j) {
  return "entries[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

json pair_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

}  // namespace

bool operator==(const LoopSpec& a, const LoopSpec& b) {
  if (a.version != b.version || a.n != b.n || a.kmin != b.kmin ||
      a.kmax != b.kmax || a.entries != b.entries ||
      a.lie_basis.size() != b.lie_basis.size()) {
    return false;
  }
  for (std::size_t m = 0; m < a.lie_basis.size(); ++m) {
    const CMatrix& x = a.lie_basis[m];
    const CMatrix& y = b.lie_basis[m];
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (!(x.array() == y.array()).all()) return false;
  }
  return true;
}

LoopSpec parse_loop_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("document", "expected a JSON object");

  LoopSpec spec;
  spec.version = int_field(j, "version", "document");
  if (spec.version != 1) {
    fail("document.version",
         "unsupported version " + std::to_string(spec.version));
  }
  spec.n = int_field(j, "n", "document");
  if (spec.n < 1) fail("document.n", "matrix dimension must be positive");
  spec.kmin = int_field(j, "kmin", "document");
  spec.kmax = int_field(j, "kmax", "document");
  if (spec.kmax < spec.kmin) fail("document.kmax", "band ends before kmin");

  const json& entries = field(j, "entries", "document");
  const std::size_t n = static_cast<std::size_t>(spec.n);
  const std::size_t width = static_cast<std::size_t>(spec.kmax - spec.kmin + 1);
  if (!entries.is_array() || entries.size() != n) {
    fail("document.entries", "expected " + std::to_string(spec.n) + " rows");
  }
  spec.entries.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const json& row = entries[i];
    if (!row.is_array() || row.size() != n) {
      fail("entries[" + std::to_string(i) + "]",
           "expected " + std::to_string(spec.n) + " columns");
    }
    spec.entries[i].resize(n);
    for (std::size_t jc = 0; jc < n; ++jc) {
      const json& cell = row[jc];
      const std::string where = entry_path(static_cast<int>(i),
                                           static_cast<int>(jc));
      if (!cell.is_array() || cell.size() != width) {
        fail(where, "expected " + std::to_string(width) +
                        " coefficients covering the band");
      }
      auto& coeffs = spec.entries[i][jc];
      coeffs.reserve(width);
      for (std::size_t k = 0; k < width; ++k) {
        coeffs.push_back(parse_pair(
            cell[k], where + "[" + std::to_string(k) + "]"));
      }
    }
  }

  if (auto it = j.find("lie_basis"); it != j.end() && !it->is_null()) {
    const json& basis = *it;
    if (!basis.is_array()) {
      fail("document.lie_basis", "expected an array of matrices");
    }
    for (std::size_t m = 0; m < basis.size(); ++m) {
      const std::string where = "lie_basis[" + std::to_string(m) + "]";
      const json& mat = basis[m];
      if (!mat.is_array() || mat.size() != n) {
        fail(where, "expected " + std::to_string(spec.n) + " rows");
      }
      CMatrix b(spec.n, spec.n);
      for (std::size_t i = 0; i < n; ++i) {
        const json& row = mat[i];
        if (!row.is_array() || row.size() != n) {
          fail(where + "[" + std::to_string(i) + "]",
               "expected " + std::to_string(spec.n) + " columns");
        }
        for (std::size_t jc = 0; jc < n; ++jc) {
          b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jc)) =
              parse_pair(row[jc], where + "[" + std::to_string(i) + "][" +
                                      std::to_string(jc) + "]");
        }
      }
      spec.lie_basis.push_back(std::move(b));
    }
  }
  return spec;
}

std::string emit_loop_spec(const LoopSpec& spec) {
  json j;
  j["version"] = spec.version;
  j["n"] = spec.n;
  j["kmin"] = spec.kmin;
  j["kmax"] = spec.kmax;
  json entries = json::array();
  for (const auto& row : spec.entries) {
    json jrow = json::array();
    for (const auto& cell : row) {
      json jcell = json::array();
      for (const Complex& c : cell) jcell.push_back(pair_json(c));
      jrow.push_back(std::move(jcell));
    }
    entries.push_back(std::move(jrow));
  }
  j["entries"] = std::move(entries);
  if (!spec.lie_basis.empty()) {
    json basis = json::array();
    for (const CMatrix& b : spec.lie_basis) {
      json mat = json::array();
      for (Eigen::Index i = 0; i < b.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index jc = 0; jc < b.cols(); ++jc) {
          row.push_back(pair_json(b(i, jc)));
        }
        mat.push_back(std::move(row));
      }
      basis.push_back(std::move(mat));
    }
    j["lie_basis"] = std::move(basis);
  }
  return j.dump(2) + "\n";
}

LoopSpec to_spec(const MatrixLoop& g) {
  LoopSpec spec;
  const int n = loop_dim(g);
  spec.n = n;
  spec.kmin = g.kmin();
  spec.kmax = g.kmax();
  const std::size_t width = static_cast<std::size_t>(spec.kmax - spec.kmin + 1);
  spec.entries.assign(static_cast<std::size_t>(n),
                      std::vector<std::vector<Complex>>(
                          static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int jc = 0; jc < n; ++jc) {
      auto& coeffs = spec.entries[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(jc)];
      coeffs.resize(width);
      for (int k = spec.kmin; k <= spec.kmax; ++k) {
        coeffs[static_cast<std::size_t>(k - spec.kmin)] = g.coeff(k)(i, jc);
      }
    }
  }
  return spec;
}

MatrixLoop to_loop(const LoopSpec& spec) {
  std::vector<CMatrix> coeffs;
  const std::size_t width = static_cast<std::size_t>(spec.kmax - spec.kmin + 1);
  coeffs.reserve(width);
  for (std::size_t k = 0; k < width; ++k) {
    CMatrix c = CMatrix::Zero(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i) {
      for (int jc = 0; jc < spec.n; ++jc) {
        c(i, jc) = spec.entries[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(jc)][k];
      }
    }
    coeffs.push_back(std::move(c));
  }
  return MatrixLoop(spec.kmin, std::move(coeffs));
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_string(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

}  // namespace birkhoff
