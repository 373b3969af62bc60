#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "birkhoff/banded.hpp"
#include "birkhoff/bch.hpp"
#include "birkhoff/loop_io.hpp"
#include "birkhoff/loops.hpp"
#include "birkhoff/matrix_factor.hpp"
#include "birkhoff/norms.hpp"
#include "birkhoff/scalar_factor.hpp"
#include "birkhoff/types.hpp"

namespace {

using birkhoff::Budget;
using birkhoff::Complex;
using birkhoff::CMatrix;
using birkhoff::LoopSpec;
using birkhoff::MatrixFactorization;
using birkhoff::MatrixLoop;
using birkhoff::VerifyReport;
using nlohmann::json;

struct Options {
  std::string command;
  std::vector<std::string> inputs;
  std::string report_path;
  std::string trace_csv;
  std::string mode = "scalar";
  double tol = 1e-8;
  int band_cap = 512;
  int samples = 256;
  int order = 6;
  double radius = 0.125;
  int bound = 0;
  int jobs = 1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) {
    throw birkhoff::ParseError("cannot open input file \"" + path + "\"");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json spec_json(const LoopSpec& spec) {
  return json::parse(birkhoff::emit_loop_spec(spec));
}

json loop_json(const MatrixLoop& g) { return spec_json(birkhoff::to_spec(g)); }

json flags_json(const Options& opts) {
  json f;
  f["band_cap"] = opts.band_cap;
  f["bound"] = opts.bound;
  f["order"] = opts.order;
  f["radius"] = opts.radius;
  f["samples"] = opts.samples;
  f["tol"] = opts.tol;
  if (opts.command == "factor") f["mode"] = opts.mode;
  if (!opts.trace_csv.empty()) f["trace_csv"] = opts.trace_csv;
  if (!opts.report_path.empty()) f["report"] = opts.report_path;
  return f;
}

json verify_json(const VerifyReport& vr) {
  json v;
  v["residual"] = vr.residual;
  v["plus_analytic"] = vr.plus_analytic;
  v["minus_antianalytic"] = vr.minus_antianalytic;
  v["indices_sorted"] = vr.indices_sorted;
  v["plus_margin"] = vr.plus_margin;
  v["minus_margin"] = vr.minus_margin;
  v["normalization_defect"] = vr.normalization_defect;
  v["ok"] = vr.ok;
  return v;
}

double point_residual(const MatrixLoop& g, const MatrixFactorization& fact,
                      const Complex& z) {
  const int n = birkhoff::loop_dim(g);
  CMatrix d = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = birkhoff::detail::int_pow(z, fact.indices[i]);
  }
  CMatrix diff = birkhoff::eval_point(g, z) -
                 birkhoff::eval_point(fact.plus, z) * d *
                     birkhoff::eval_point(fact.minus, z);
  return birkhoff::matrix_norm(diff, birkhoff::MatNorm::Op2);
}

void write_trace(const std::string& path, const MatrixLoop& g,
                 const MatrixFactorization& fact, int samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) {
    throw birkhoff::ParseError("cannot open trace file \"" + path + "\"");
  }
  out << "sample_index,theta,residual\n";
  const int N = std::max(samples, 8);
  char line[96];
  for (int i = 0; i < N; ++i) {
    const double theta = 2.0 * M_PI * i / N;
    const Complex z(std::cos(theta), std::sin(theta));
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", i, theta,
                  point_residual(g, fact, z));
    out << line;
  }
}

MatrixFactorization as_matrix_factorization(
    const birkhoff::ScalarFactorization& f) {
  return MatrixFactorization{birkhoff::as_matrix_loop(f.plus),
                             {f.kappa},
                             birkhoff::as_matrix_loop(f.minus),
                             f.residual,
                             f.plus_margin,
                             f.minus_margin,
                             true};
}

int effective_bound(const Options& opts, const MatrixLoop& g) {
  if (opts.bound > 0) return opts.bound;
  return std::max({std::abs(g.kmin()), std::abs(g.kmax()), 1});
}

json run_factor(const Options& opts, const LoopSpec& spec, const MatrixLoop& g,
                bool& pass) {
  const Budget budget{opts.band_cap, 1e-10};
  json result;
  MatrixFactorization fact{birkhoff::identity_loop(1),
                           {0},
                           birkhoff::identity_loop(1),
                           0.0,
                           0.0,
                           0.0,
                           true};
  if (opts.mode == "scalar") {
    if (birkhoff::loop_dim(g) != 1) {
      throw birkhoff::ParseError("scalar mode requires a 1x1 loop, got n = " +
                                 std::to_string(birkhoff::loop_dim(g)));
    }
    birkhoff::ScalarFactorization f =
        birkhoff::scalar_factorize(birkhoff::as_scalar(g), budget, opts.tol);
    fact = as_matrix_factorization(f);
    result["kappa"] = f.kappa;
    result["route"] =
        f.route == birkhoff::ScalarRoute::ExpLog ? "exp_log" : "roots";
  } else if (opts.mode == "matrix") {
    birkhoff::SectionConfig cfg;
    cfg.residual_tol = opts.tol;
    cfg.verify_samples = opts.samples;
    cfg.budget = budget;
    if (opts.bound > 0) {
      fact = birkhoff::full_factorize(g, opts.bound,
                                      birkhoff::TupleOrder::BalancedFirst, cfg);
    } else {
      fact = birkhoff::canonical_factorize(g, cfg);
    }
    result["indices"] = fact.indices;
    result["canonical"] = fact.canonical;
  } else {
    if (spec.lie_basis.empty()) {
      throw birkhoff::ParseError(
          "group mode requires a lie_basis block in the input spec");
    }
    birkhoff::LieAlgebraRep rep = birkhoff::make_rep(spec.lie_basis);
    birkhoff::BchConfig cfg;
    cfg.order = opts.order;
    cfg.radius = opts.radius;
    cfg.budget = budget;
    birkhoff::LocalFactorization f = birkhoff::group_factorize_local(
        g, rep, cfg, opts.samples, opts.tol);
    fact = MatrixFactorization{std::move(f.plus),
                               std::vector<int>(birkhoff::loop_dim(g), 0),
                               std::move(f.minus),
                               f.residual,
                               0.0,
                               0.0,
                               true};
    json solve;
    solve["iterations"] = f.solve.iterations;
    solve["contraction"] = f.solve.contraction;
    solve["final_step"] = f.solve.final_step;
    solve["residual"] = f.solve.residual;
    result["solve"] = std::move(solve);
  }

  VerifyReport vr =
      birkhoff::verify_factorization(g, fact, opts.samples, opts.tol);
  if (!vr.ok) {
    throw birkhoff::NumericError(
        "factorization failed its embedded verification: residual " +
        std::to_string(vr.residual));
  }
  result["plus"] = loop_json(fact.plus);
  result["minus"] = loop_json(fact.minus);
  result["residual"] = fact.residual;
  result["plus_margin"] = vr.plus_margin;
  result["minus_margin"] = vr.minus_margin;
  result["verify"] = verify_json(vr);
  pass = vr.ok;
  if (!opts.trace_csv.empty()) {
    write_trace(opts.trace_csv, g, fact, opts.samples);
  }
  return result;
}

json run_winding(const Options& opts, const MatrixLoop& g, bool& pass) {
  const Budget budget{opts.band_cap, 1e-10};
  json result;
  if (birkhoff::loop_dim(g) == 1) {
    result["winding"] = birkhoff::winding_number(birkhoff::as_scalar(g));
    result["via_determinant"] = false;
  } else {
    result["winding"] =
        birkhoff::winding_number(birkhoff::det_loop(g, budget));
    result["via_determinant"] = true;
  }
  pass = true;
  return result;
}

json run_indices(const Options& opts, const MatrixLoop& g, bool& pass) {
  const Budget budget{opts.band_cap, 1e-10};
  birkhoff::SectionConfig cfg;
  cfg.residual_tol = opts.tol;
  cfg.verify_samples = opts.samples;
  cfg.budget = budget;
  const int bound = effective_bound(opts, g);
  std::vector<int> idx = birkhoff::partial_indices(
      g, bound, birkhoff::TupleOrder::BalancedFirst, cfg);
  json result;
  result["bound"] = bound;
  result["indices"] = idx;
  int total = 0;
  for (int k : idx) total += k;
  result["total_index"] = total;
  pass = true;
  return result;
}

json run_project(const MatrixLoop& g, bool& pass) {
  json result;
  result["plus"] = loop_json(birkhoff::project_plus(g));
  result["ominus"] = loop_json(birkhoff::project_ominus(g));
  pass = true;
  return result;
}

json run_norms(const Options& opts, const MatrixLoop& g, bool& pass) {
  json result;
  if (birkhoff::loop_dim(g) == 1) {
    birkhoff::NormReport nr =
        birkhoff::norm_report(birkhoff::as_scalar(g), {1.0, 2.0}, {2, 4, 8},
                              opts.samples);
    result["wiener"] = nr.wiener;
    result["sup"] = nr.sup;
    json weighted = json::array();
    for (const auto& [m, v] : nr.weighted) {
      weighted.push_back(json::array({m, v}));
    }
    result["weighted"] = std::move(weighted);
    json annulus = json::array();
    for (const auto& [n, v] : nr.annulus) {
      annulus.push_back(json::array({n, v}));
    }
    result["annulus"] = std::move(annulus);
  } else {
    result["wiener"] = birkhoff::wiener_norm(g, birkhoff::MatNorm::Op2);
    result["sup"] = birkhoff::sup_circle(g, opts.samples);
  }
  pass = true;
  return result;
}

json run_verify(const Options& opts, const LoopSpec& spec, const MatrixLoop& g,
                bool& pass) {
  json report;
  try {
    report = json::parse(slurp(opts.report_path));
  } catch (const json::exception& e) {
    throw birkhoff::ParseError(std::string("invalid report JSON: ") + e.what());
  }
  MatrixLoop plus = birkhoff::identity_loop(1);
  MatrixLoop minus = birkhoff::identity_loop(1);
  std::vector<int> indices;
  try {
    const json& payload = report.at("result");
    plus = birkhoff::to_loop(
        birkhoff::parse_loop_spec(payload.at("plus").dump()));
    minus = birkhoff::to_loop(
        birkhoff::parse_loop_spec(payload.at("minus").dump()));
    if (payload.contains("indices")) {
      indices = payload.at("indices").get<std::vector<int>>();
    } else if (payload.contains("kappa")) {
      indices = {payload.at("kappa").get<int>()};
    } else {
      indices.assign(birkhoff::loop_dim(g), 0);
    }
  } catch (const json::exception& e) {
    throw birkhoff::ParseError(
        std::string("report is missing factorization payload: ") + e.what());
  }
  MatrixFactorization fact{std::move(plus), std::move(indices),
                           std::move(minus), 0.0,  0.0,
                           0.0,              true};
  VerifyReport vr =
      birkhoff::verify_factorization(g, fact, opts.samples, opts.tol);
  if (!opts.trace_csv.empty()) {
    write_trace(opts.trace_csv, g, fact, opts.samples);
  }
  pass = vr.ok;
  (void)spec;
  return verify_json(vr);
}

json run_bch_check(const Options& opts, bool& pass) {
  const Budget budget{opts.band_cap, 1e-10};
  birkhoff::LieAlgebraRep rep = birkhoff::sl2_rep();
  birkhoff::BchConfig cfg;
  cfg.order = opts.order;
  cfg.radius = opts.radius;
  cfg.budget = budget;

  const double lip_remainder = birkhoff::lipschitz_estimate_pair(
      [&](const MatrixLoop& x, const MatrixLoop& y) {
        return birkhoff::bch_series(x, y, cfg.order, cfg.budget) - x - y;
      },
      rep, -2, 2, 0.125, 150);
  const double lip_solver = birkhoff::lipschitz_estimate(
      [&](const MatrixLoop& x) {
        return birkhoff::bch_series(birkhoff::project_plus(x),
                                    birkhoff::project_ominus(x), cfg.order,
                                    cfg.budget) -
               x;
      },
      rep, -2, 2, 0.0625, 150);

  std::mt19937_64 rng(20240817u);
  double exp_err = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    MatrixLoop x = birkhoff::random_loop_algebra_series(rep, -2, 2, 0.02, rng);
    MatrixLoop y = birkhoff::random_loop_algebra_series(rep, -2, 2, 0.02, rng);
    MatrixLoop lhs = birkhoff::multiply(birkhoff::exp_loop(x),
                                        birkhoff::exp_loop(y), budget);
    MatrixLoop rhs =
        birkhoff::exp_loop(birkhoff::bch_series(x, y, cfg.order, cfg.budget));
    const int N = std::max(opts.samples, 8);
    for (int i = 0; i < N; ++i) {
      const double theta = 2.0 * M_PI * i / N;
      const Complex z(std::cos(theta), std::sin(theta));
      const double d = birkhoff::matrix_norm(
          birkhoff::eval_point(lhs, z) - birkhoff::eval_point(rhs, z),
          birkhoff::MatNorm::Op2);
      exp_err = std::max(exp_err, d);
    }
  }

  json result;
  result["remainder_lipschitz"] = lip_remainder;
  result["remainder_bound"] = 0.27;
  result["solver_lipschitz"] = lip_solver;
  result["solver_bound"] = 0.52;
  result["exp_max_error"] = exp_err;
  result["exp_tol"] = 1e-10;
  result["exp_trials"] = trials;
  pass = lip_remainder <= 0.27 && lip_solver <= 0.52 && exp_err <= 1e-10;
  return result;
}

struct FileOutcome {
  int code = 0;
  std::string out;
  std::string err;
};

int exit_code_for(const std::exception& e, const Options& opts,
                  const std::string& file, const std::string& digest,
                  std::string& err) {
  std::ostringstream msg;
  int code = 4;
  try {
    throw;
  } catch (const birkhoff::ParseError& pe) {
    msg << "parse error";
    code = 2;
  } catch (const birkhoff::NotInvertibleError& ne) {
    msg << "not invertible on the circle";
    code = 3;
  } catch (const birkhoff::InvariantViolation& iv) {
    json dump;
    dump["bug_report"]["command"] = opts.command;
    dump["bug_report"]["error"] = iv.what();
    dump["bug_report"]["file"] = file;
    dump["bug_report"]["digest"] = digest;
    err += dump.dump(2) + "\n";
    msg << "internal invariant violation, please report the dump above";
    code = 5;
  } catch (const birkhoff::IndexObstructionError&) {
    msg << "factorization failed (index obstruction)";
    code = 4;
  } catch (const birkhoff::TruncationError&) {
    msg << "factorization failed (truncation budget)";
    code = 4;
  } catch (const birkhoff::NumericError&) {
    msg << "factorization failed";
    code = 4;
  } catch (const std::invalid_argument&) {
    msg << "invalid argument";
    code = 2;
  } catch (const std::exception&) {
    msg << "error";
    code = 4;
  }
  err += "birkhoff: " + (file.empty() ? std::string() : file + ": ") +
         msg.str() + ": " + e.what() + "\n";
  return code;
}

FileOutcome run_on_file(const Options& opts, const std::string& path) {
  FileOutcome outcome;
  std::string digest;
  const auto started = std::chrono::steady_clock::now();
  try {
    json envelope;
    envelope["command"] = opts.command;
    envelope["flags"] = flags_json(opts);
    bool pass = false;
    json result;
    if (opts.command == "bch-check") {
      result = run_bch_check(opts, pass);
    } else {
      const std::string text = slurp(path);
      digest = birkhoff::digest_string(text);
      LoopSpec spec = birkhoff::parse_loop_spec(text);
      MatrixLoop g = birkhoff::to_loop(spec);
      json input;
      input["file"] = path;
      input["digest"] = digest;
      input["n"] = spec.n;
      input["kmin"] = spec.kmin;
      input["kmax"] = spec.kmax;
      envelope["input"] = std::move(input);
      if (opts.command == "factor") {
        result = run_factor(opts, spec, g, pass);
      } else if (opts.command == "winding") {
        result = run_winding(opts, g, pass);
      } else if (opts.command == "indices") {
        result = run_indices(opts, g, pass);
      } else if (opts.command == "project") {
        result = run_project(g, pass);
      } else if (opts.command == "norms") {
        result = run_norms(opts, g, pass);
      } else if (opts.command == "verify") {
        result = run_verify(opts, spec, g, pass);
      } else {
        throw std::invalid_argument("unknown command " + opts.command);
      }
    }
    envelope["result"] = std::move(result);
    envelope["pass"] = pass;
    const auto stopped = std::chrono::steady_clock::now();
    envelope["timings_ms"] =
        std::chrono::duration<double, std::milli>(stopped - started).count();
    outcome.out = envelope.dump(2) + "\n";
    outcome.code = pass ? 0 : 4;
    if (opts.command == "verify" && !pass) outcome.code = 4;
  } catch (const std::exception& e) {
    outcome.code = exit_code_for(e, opts, path, digest, outcome.err);
  }
  return outcome;
}

int run_all(const Options& opts) {
  std::vector<std::string> files = opts.inputs;
  if (opts.command == "bch-check") files = {""};
  std::vector<FileOutcome> outcomes(files.size());
  const int jobs =
      std::max(1, std::min<int>(opts.jobs, static_cast<int>(files.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      outcomes[i] = run_on_file(opts, files[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= files.size()) return;
          outcomes[i] = run_on_file(opts, files[i]);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  int code = 0;
  for (const FileOutcome& o : outcomes) {
    std::cout << o.out;
    std::cerr << o.err;
    code = std::max(code, o.code);
  }
  std::cout.flush();
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options opts;
  CLI::App app{
      "Birkhoff factorization of scalar and matrix loops on the unit circle"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input) {
      cmd->add_option("--input", opts.inputs, "loop spec file(s)")
          ->required()
          ->expected(-1);
      cmd->add_option("--jobs", opts.jobs,
                      "process input files concurrently (output stays in "
                      "input order)")
          ->check(CLI::Range(1, 64));
    }
    cmd->add_option("--tol", opts.tol, "residual tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--band-cap", opts.band_cap,
                    "truncation budget band cap")
        ->check(CLI::Range(1, 1 << 20));
    cmd->add_option("--samples", opts.samples,
                    "circle sample count for verification")
        ->check(CLI::Range(8, 1 << 20));
  };

  CLI::App* factor = app.add_subcommand("factor", "factor a loop");
  add_common(factor, true);
  factor->add_option("--mode", opts.mode, "scalar, matrix, or group")
      ->check(CLI::IsMember({"scalar", "matrix", "group"}));
  factor->add_option("--order", opts.order, "series order for the group mode")
      ->check(CLI::Range(1, 8));
  factor->add_option("--radius", opts.radius,
                     "convergence ball radius for the group mode")
      ->check(CLI::PositiveNumber);
  factor->add_option("--bound", opts.bound,
                     "index bound; enables the index-trial route")
      ->check(CLI::Range(0, 64));
  factor->add_option("--trace-csv", opts.trace_csv,
                     "write per-sample residuals to this CSV file");

  CLI::App* winding = app.add_subcommand("winding", "winding number");
  add_common(winding, true);

  CLI::App* indices = app.add_subcommand("indices", "partial indices");
  add_common(indices, true);
  indices->add_option("--bound", opts.bound,
                      "index bound (default: the loop band)")
      ->check(CLI::Range(0, 64));

  CLI::App* project = app.add_subcommand(
      "project", "analytic and strictly co-analytic projections");
  add_common(project, true);

  CLI::App* norms = app.add_subcommand("norms", "norm report");
  add_common(norms, true);

  CLI::App* verify =
      app.add_subcommand("verify", "re-check a factor report against a loop");
  add_common(verify, true);
  verify->add_option("--report", opts.report_path, "factor report to check")
      ->required();
  verify->add_option("--trace-csv", opts.trace_csv,
                     "write per-sample residuals to this CSV file");

  CLI::App* bch = app.add_subcommand(
      "bch-check", "run the contraction and exponential-identity suites");
  add_common(bch, false);
  bch->add_option("--order", opts.order, "series truncation order")
      ->check(CLI::Range(1, 8));
  bch->add_option("--radius", opts.radius, "convergence ball radius")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  opts.command = app.get_subcommands().front()->get_name();
  if (!opts.trace_csv.empty() && opts.inputs.size() > 1) {
    std::cerr << "birkhoff: --trace-csv requires a single input file\n";
    return 2;
  }
  return run_all(opts);
}
