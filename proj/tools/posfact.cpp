#include "posfact/calculus.hpp"
#include "posfact/dilation.hpp"
#include "posfact/factorization.hpp"
#include "posfact/io.hpp"
#include "posfact/lab.hpp"
#include "posfact/linalg.hpp"
#include "posfact/membership.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace posfact;
using posfact::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 2;   // computed a negative verdict
constexpr int kExitInfeasible = 3; // instance outside the operator's domain
constexpr int kExitInput = 4;      // malformed input

struct Options {
  Tolerances tol;
  uint64_t seed = 0;
  std::string format = "json";
  std::string out_path;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Report {
 public:
  Report(const std::string& command, const Options& opt)
      : opt_(opt), start_(std::chrono::steady_clock::now()) {
    j_["schema"] = 1;
    j_["command"] = command;
    j_["verdicts"] = json::object();
    j_["witnesses"] = json::object();
    j_["residuals"] = json::object();
    j_["tolerances"] = io::tolerances_to_json(opt.tol);
    j_["seed"] = opt.seed;
  }

  void digest(const std::string& bytes) {
    j_["input_digest"] = io::digest_hex(bytes);
  }
  void verdict(const std::string& key, const json& v) {
    j_["verdicts"][key] = v;
  }
  void witness(const std::string& key, const CMatrix& M) {
    j_["witnesses"][key] = io::matrix_to_json(M);
  }
  void residual(const std::string& key, double value, double tolerance) {
    j_["residuals"][key] = {{"value", value}, {"tolerance", tolerance}};
  }
  void extra(const std::string& key, const json& v) { j_[key] = v; }

  json finish() {
    const auto dt = std::chrono::steady_clock::now() - start_;
    j_["runtime_ms"] =
        std::chrono::duration<double, std::milli>(dt).count();
    return j_;
  }

  void emit(int exit_code) {
    json j = finish();
    j["exit_code"] = exit_code;
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!opt_.out_path.empty()) {
      file.open(opt_.out_path);
      if (!file) throw Error("cannot write '" + opt_.out_path + "'");
      out = &file;
    }
    if (opt_.format == "json") {
      *out << j.dump(2) << "\n";
    } else {
      emit_text(*out, j);
    }
  }

 private:
  static void emit_text(std::ostream& out, const json& j) {
    out << "command: " << j["command"].get<std::string>() << "\n";
    if (j.contains("input_digest")) {
      out << "input: " << j["input_digest"].get<std::string>() << "\n";
    }
    for (auto& [k, v] : j["verdicts"].items()) {
      out << "verdict " << k << ": " << v.dump() << "\n";
    }
    for (auto& [k, v] : j["residuals"].items()) {
      out << "residual " << k << ": " << v["value"].get<double>()
          << " (tolerance " << v["tolerance"].get<double>() << ")\n";
    }
    for (auto& [k, v] : j["witnesses"].items()) {
      out << "witness " << k << " (" << v["rows"] << "x" << v["cols"] << ")\n";
      for (auto& row : v["data"]) {
        out << " ";
        for (auto& entry : row) {
          const double re = entry[0].get<double>();
          const double im = entry[1].get<double>();
          if (im == 0.0) {
            out << " " << io::format_double(re);
          } else {
            out << " (" << io::format_double(re) << ","
                << io::format_double(im) << ")";
          }
        }
        out << "\n";
      }
    }
    if (j.contains("metrics")) {
      for (auto& row : j["metrics"]) {
        out << "metric " << row["dim"] << " " << row["metric"].get<std::string>()
            << " = " << row["value"].get<double>() << "\n";
      }
    }
    out << "runtime_ms: " << j["runtime_ms"].get<double>() << "\n";
  }

  Options opt_;
  json j_;
  std::chrono::steady_clock::time_point start_;
};

json membership_json(const MembershipVerdict& v) {
  return json{{"in_l2p", v.in_l2p},
              {"subclass", to_string(v.subclass)},
              {"confidence", to_string(v.confidence)},
              {"reason", v.reason}};
}

int run_analyze_one(const std::string& path, const Options& opt,
                    Report& report) {
  const std::string bytes = slurp(path);
  report.digest(bytes);
  std::istringstream in(bytes);
  const CMatrix T = io::read_matrix(in);
  ensure_square(T, "analyze");
  const MembershipVerdict v = classify_subclass(T, opt.tol);
  report.verdict("membership", membership_json(v));
  report.extra("spectrum", io::spectrum_to_json(v.spectrum));
  if (v.witness) {
    report.witness("A", v.witness->A);
    report.witness("B", v.witness->B);
    report.residual("factor", v.witness->residual,
                    opt.tol.tol_eq * T.norm());
  }
  return v.in_l2p ? kExitOk : kExitNegative;
}

int cmd_analyze(const std::string& file, const std::string& batch_dir,
                const Options& opt) {
  if (!batch_dir.empty()) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(batch_dir)) {
      if (e.is_regular_file()) files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    int worst = kExitOk;
    for (const auto& f : files) {
      Options per = opt;
      per.out_path.clear();
      Report r("analyze " + f, per);
      int code;
      try {
        code = run_analyze_one(f, per, r);
      } catch (const ParseError& e) {
        r.verdict("error", e.what());
        code = kExitInput;
      }
      r.emit(code);
      worst = std::max(worst, code);
    }
    return worst;
  }
  Report report("analyze", opt);
  const int code = run_analyze_one(file, opt, report);
  report.emit(code);
  return code;
}

int cmd_factor(const std::string& file, bool invertible_b, const Options& opt) {
  Report report(invertible_b ? "factor --invertible-b" : "factor", opt);
  const std::string bytes = slurp(file);
  report.digest(bytes);
  std::istringstream in(bytes);
  const CMatrix T = io::read_matrix(in);
  Factorization f;
  try {
    f = invertible_b ? invertible_factor_pair(T, opt.tol)
                     : optimal_pair(T, opt.tol);
  } catch (const NotInClassError& e) {
    report.verdict("in_l2p", false);
    report.verdict("error", e.what());
    report.emit(kExitNegative);
    return kExitNegative;
  }
  report.verdict("in_l2p", true);
  report.verdict("optimal", f.optimal);
  report.witness("A", f.A);
  report.witness("B", f.B);
  report.residual("factor", f.residual, opt.tol.tol_eq * T.norm());
  report.residual("range_match", f.range_match, kTolAngle);
  report.residual("kernel_match", f.kernel_match, kTolAngle);
  report.emit(kExitOk);
  return kExitOk;
}

int cmd_solve(const std::string& fileA, const std::string& fileT,
              const Options& opt) {
  Report report("solve", opt);
  const std::string bytes = slurp(fileA) + slurp(fileT);
  report.digest(bytes);
  const CMatrix A = io::read_matrix_file(fileA);
  const CMatrix T = io::read_matrix_file(fileT);
  const double lambda = feasibility_lambda(A, T, opt.tol);
  const CMatrix X = sebestyen_solve(A, T, opt.tol);
  report.verdict("feasibility_lambda", lambda);
  report.witness("X", X);
  const double scale = opt.tol.tol_eq * (A.norm() + T.norm());
  report.residual("solution", (A * X - T).norm(), scale);
  const Subspace kerX = range_kernel(X, opt.tol).kernel;
  const Subspace kerT = range_kernel(T, opt.tol).kernel;
  report.residual("kernel_match", subspace_gap(kerX, kerT), kTolAngle);
  const Subspace ranT = column_space(T, opt.tol);
  const SchurPair sp = schur_complement(X, ranT, opt.tol);
  report.residual("schur_to_ran_T", sp.complement.norm(),
                  opt.tol.tol_eq * std::max(X.norm(), 1.0));
  report.emit(kExitOk);
  return kExitOk;
}

int cmd_schur(const std::string& file, const std::string& subspace_file,
              const Options& opt) {
  Report report("schur", opt);
  const std::string bytes = slurp(file) + slurp(subspace_file);
  report.digest(bytes);
  const CMatrix B = io::read_matrix_file(file);
  const CMatrix Sspan = io::read_matrix_file(subspace_file);
  if (Sspan.rows() != B.rows()) {
    throw DimensionMismatchError("schur: subspace ambient dim mismatch");
  }
  const Subspace S = column_space(Sspan, opt.tol);
  const SchurPair sp = schur_complement(B, S, opt.tol);
  report.witness("complement", sp.complement);
  report.witness("compression", sp.compression);
  report.verdict("contraction_norm", sp.contraction_norm);
  report.residual("sum", (sp.complement + sp.compression - herm(B)).norm(),
                  opt.tol.tol_eq * B.norm());
  report.emit(kExitOk);
  return kExitOk;
}

std::function<double(double)> named_function(const std::string& name) {
  if (name == "x" || name == "identity") return [](double x) { return x; };
  if (name == "x2" || name == "square") return [](double x) { return x * x; };
  if (name == "sqrt") return [](double x) { return std::sqrt(x); };
  if (name == "exp") return [](double x) { return std::exp(x); };
  if (name == "log") return [](double x) { return std::log(x); };
  throw InvalidParamsError("calc: unknown function '" + name + "'");
}

int cmd_calc(const std::string& file, const std::string& op,
             const std::string& fn, const Options& opt) {
  Report report("calc --op " + op, opt);
  const std::string bytes = slurp(file);
  report.digest(bytes);
  std::istringstream in(bytes);
  const CMatrix T = io::read_matrix(in);
  try {
    if (op == "sqrt") {
      const CMatrix R = sqrt_l2p(T, opt.tol);
      report.witness("sqrt", R);
      report.residual("square", (R * R - T).norm(),
                      opt.tol.tol_eq * std::max(T.norm(), 1.0));
    } else if (op == "pinv") {
      const CMatrix P = pinv(T, opt.tol);
      report.witness("pinv", P);
      report.residual("penrose_1", (T * P * T - T).norm(),
                      opt.tol.tol_eq * std::max(T.norm(), 1.0));
      const MembershipVerdict v = is_l2p(T, opt.tol);
      report.verdict("in_l2p", v.in_l2p);
      if (v.in_l2p) {
        const MpInverse mp = mp_inverse_l2p(T, opt.tol);
        report.witness("dagger", mp.dagger);
        report.witness("one_two_inverse", mp.one_two_inverse);
        report.residual("formula_vs_svd", (mp.dagger - P).norm(),
                        opt.tol.tol_eq * std::max(P.norm(), 1.0));
      }
    } else if (op == "fn") {
      const CMatrix R = borel_calculus(T, named_function(fn), opt.tol);
      report.verdict("fn", fn);
      report.witness("f_of_T", R);
    } else {
      throw InvalidParamsError("calc: --op must be sqrt|pinv|fn");
    }
  } catch (const NotInClassError& e) {
    report.verdict("in_l2p", false);
    report.verdict("error", e.what());
    report.emit(kExitNegative);
    return kExitNegative;
  }
  report.emit(kExitOk);
  return kExitOk;
}

int cmd_dilate(const std::string& file, int stage, const Options& opt) {
  Report report("dilate --stage " + std::to_string(stage), opt);
  const std::string bytes = slurp(file);
  report.digest(bytes);
  std::istringstream in(bytes);
  const CMatrix T = io::read_matrix(in);
  Dilation d;
  try {
    d = stage == 1 ? dilate_pos_proj(T, opt.tol) : dilate_proj_proj(T, opt.tol);
  } catch (const NotInClassError& e) {
    report.verdict("in_l2p", false);
    report.verdict("error", e.what());
    report.emit(kExitNegative);
    return kExitNegative;
  }
  report.verdict("stage", stage == 1 ? "PosProj" : "ProjProj");
  report.verdict("scale", d.scale);
  report.witness("ambient", d.ambient);
  report.witness("factor_a", d.factor_a);
  report.witness("factor_b", d.factor_b);
  const Index n = T.rows();
  const CMatrix corner = d.ambient.topLeftCorner(n, n);
  report.residual("corner", (d.scale * corner - T).norm(),
                  opt.tol.tol_eq * std::max(T.norm(), 1.0));
  const CMatrix& P = stage == 1 ? d.factor_b : d.factor_a;
  report.residual("projection",
                  std::max((P * P - P).norm(), (P - P.adjoint()).norm()),
                  opt.tol.tol_eq * std::max(1.0, P.norm()));
  report.emit(kExitOk);
  return kExitOk;
}

int cmd_gallery(const std::string& name, const GalleryParams& params,
                const std::string& matrix_out, const Options& opt) {
  Report report("gallery " + name, opt);
  const GalleryItem item = gallery(name, params, opt.tol);
  report.digest(name);
  report.verdict("certificate", item.certificate);
  report.witness("matrix", item.matrix);
  for (const auto& [k, M] : item.witnesses) report.witness(k, M);
  if (!matrix_out.empty()) io::write_matrix_file(matrix_out, item.matrix);
  report.emit(kExitOk);
  return kExitOk;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InvalidParamsError("bad integer '" + tok + "'");
    }
  }
  if (out.empty()) throw InvalidParamsError("empty list '" + s + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidParamsError("bad number '" + tok + "'");
    }
  }
  if (out.empty()) throw InvalidParamsError("empty list '" + s + "'");
  return out;
}

int cmd_lab(const std::string& experiment, const std::string& dims_str,
            const std::string& schedule, const std::string& lambdas_str,
            const std::string& block_dims_str, const std::string& angles_str,
            const std::string& csv_path, const Options& opt) {
  Report report("lab " + experiment, opt);
  report.digest(experiment + dims_str + schedule + lambdas_str +
                block_dims_str + angles_str);
  LabResult lab;
  if (experiment == "qs_not_sim") {
    const auto dims = parse_int_list(dims_str.empty() ? "4,8,16,32" : dims_str);
    int half = 0;
    for (int n : dims) half = std::max(half, n / 2);
    std::vector<double> angles;
    if (schedule.empty() || schedule == "pow2") {
      angles = default_angle_schedule(half);
    } else if (schedule.rfind("const:", 0) == 0) {
      angles.assign(half, std::stod(schedule.substr(6)));
    } else {
      throw InvalidParamsError("lab: schedule must be pow2 or const:<v>");
    }
    lab = qs_not_sim_truncation(dims, angles, opt.tol);
  } else if (experiment == "sqrtless") {
    const auto dims = parse_int_list(dims_str.empty() ? "2,4,8" : dims_str);
    int maxn = 0;
    for (int n : dims) maxn = std::max(maxn, n);
    std::vector<double> sched;
    if (schedule.empty() || schedule == "pow4") {
      sched = default_s_schedule(maxn);
    } else if (schedule.rfind("const:", 0) == 0) {
      sched.assign(maxn, std::stod(schedule.substr(6)));
    } else {
      throw InvalidParamsError("lab: schedule must be pow4 or const:<v>");
    }
    lab = sqrtless_truncation(dims, sched, opt.tol);
  } else if (experiment == "compact_factor") {
    const auto lambdas =
        parse_double_list(lambdas_str.empty() ? "1,0.25" : lambdas_str);
    const auto bdims =
        parse_int_list(block_dims_str.empty() ? "1,1" : block_dims_str);
    std::vector<double> angles;
    if (!angles_str.empty()) {
      angles = parse_double_list(angles_str);
    } else if (lambdas.size() > 1) {
      angles.assign(lambdas.size() - 1, 45.0);
    }
    lab = compact_factor_truncation(lambdas, bdims, angles, opt.tol);
  } else {
    throw UnknownNameError("lab: unknown experiment '" + experiment + "'");
  }

  json metrics = json::array();
  for (const auto& row : lab.metrics) {
    metrics.push_back(
        {{"dim", row.dim}, {"metric", row.metric}, {"value", row.value}});
  }
  report.extra("metrics", metrics);
  report.verdict("summary", lab.verdicts);
  for (const auto& [k, M] : lab.matrices) report.witness(k, M);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot write '" + csv_path + "'");
    io::write_lab_csv(csv, lab);
  }
  report.emit(kExitOk);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"membership, factorization and spectral toolkit for products "
               "of two positive matrices"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--tol-rank", opt.tol.tol_rank, "relative rank cutoff")
      ->envname("POSFACT_TOL_RANK");
  app.add_option("--tol-psd", opt.tol.tol_psd, "relative PSD floor")
      ->envname("POSFACT_TOL_PSD");
  app.add_option("--tol-eq", opt.tol.tol_eq, "residual tolerance")
      ->envname("POSFACT_TOL_EQ");
  app.add_option("--tol-cluster", opt.tol.tol_cluster,
                 "eigenvalue clustering width")
      ->envname("POSFACT_TOL_CLUSTER");
  app.add_option("--cond-max", opt.tol.cond_max,
                 "diagonalizability condition cap")
      ->envname("POSFACT_COND_MAX");
  app.add_option("--seed", opt.seed, "RNG seed")->envname("POSFACT_SEED");
  app.add_option("--format", opt.format, "json|text")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--out", opt.out_path, "write the report to a file");

  std::string file, file2, batch_dir, subspace_file, op = "sqrt", fn = "x";
  bool invertible_b = false;
  int stage = 1;
  std::string gallery_name, basis_m_file, basis_n_file, matrix_out;
  double gallery_r = 2.0;
  std::string experiment, dims_str, schedule, lambdas_str, block_dims_str,
      angles_str, csv_path;

  auto* analyze = app.add_subcommand("analyze", "spectrum + membership")->fallthrough();
  analyze->add_option("file", file);
  analyze->add_option("--batch", batch_dir, "analyze every file in a dir");

  auto* factor = app.add_subcommand("factor", "optimal pair")->fallthrough();
  factor->add_option("file", file)->required();
  factor->add_flag("--invertible-b", invertible_b);

  auto* solve = app.add_subcommand("solve", "positive solution of A X = T")->fallthrough();
  solve->add_option("fileA", file)->required();
  solve->add_option("fileT", file2)->required();

  auto* schur = app.add_subcommand("schur", "Schur complement to a subspace")->fallthrough();
  schur->add_option("file", file)->required();
  schur->add_option("--subspace", subspace_file)->required();

  auto* calc = app.add_subcommand("calc", "sqrt / pinv / functional calculus")->fallthrough();
  calc->add_option("file", file)->required();
  calc->add_option("--op", op)->check(CLI::IsMember({"sqrt", "pinv", "fn"}));
  calc->add_option("--fn", fn);

  auto* dilate = app.add_subcommand("dilate", "L+·P and P·P dilations")->fallthrough();
  dilate->add_option("file", file)->required();
  dilate->add_option("--stage", stage)->check(CLI::IsMember({1, 2}));

  auto* gal = app.add_subcommand("gallery", "named example operators")->fallthrough();
  gal->add_option("name", gallery_name)->required();
  gal->add_option("--basis-m", basis_m_file);
  gal->add_option("--basis-n", basis_n_file);
  gal->add_option("--r", gallery_r);
  gal->add_option("--matrix-out", matrix_out);

  auto* lab = app.add_subcommand("lab", "truncated counterexample sweeps")->fallthrough();
  lab->add_option("experiment", experiment)->required();
  lab->add_option("--dims", dims_str);
  lab->add_option("--schedule", schedule);
  lab->add_option("--lambdas", lambdas_str);
  lab->add_option("--block-dims", block_dims_str);
  lab->add_option("--angles", angles_str);
  lab->add_option("--csv", csv_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (analyze->parsed()) {
      if (file.empty() && batch_dir.empty()) {
        std::cerr << "analyze: need a file or --batch\n";
        return kExitInput;
      }
      return cmd_analyze(file, batch_dir, opt);
    }
    if (factor->parsed()) return cmd_factor(file, invertible_b, opt);
    if (solve->parsed()) return cmd_solve(file, file2, opt);
    if (schur->parsed()) return cmd_schur(file, subspace_file, opt);
    if (calc->parsed()) return cmd_calc(file, op, fn, opt);
    if (dilate->parsed()) return cmd_dilate(file, stage, opt);
    if (gal->parsed()) {
      GalleryParams params;
      if (!basis_m_file.empty()) {
        params.basis_m = io::read_matrix_file(basis_m_file);
      }
      if (!basis_n_file.empty()) {
        params.basis_n = io::read_matrix_file(basis_n_file);
      }
      params.r = gallery_r;
      return cmd_gallery(gallery_name, params, matrix_out, opt);
    }
    if (lab->parsed()) {
      return cmd_lab(experiment, dims_str, schedule, lambdas_str,
                     block_dims_str, angles_str, csv_path, opt);
    }
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NotSquareError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DimensionMismatchError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NotFiniteError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const UnknownNameError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidParamsError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NotInClassError& e) {
    std::cerr << "verdict: " << e.what() << "\n";
    return kExitNegative;
  } catch (const CertificateError& e) {
    std::cerr << "internal certificate failure: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    // Infeasible, NotPsd, NotInvertible, RangeNotContained, RangeMismatch,
    // InvalidPerturbation, NotHermitian, DomainError.
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitInput;
}
