#include "posfact/io.hpp"

#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using posfact::io::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

// Drives the installed binary end to end; stderr passes through.
RunResult run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() /
                       ("posfact_cli_out_" + std::to_string(::getpid()) + ".txt");
  const std::string cmd =
      std::string(POSFACT_CLI_PATH) + " " + args + " > " + out.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  fs::remove(out);
  return r;
}

fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << body;
  return p;
}

json parse_report(const std::string& text) { return json::parse(text); }

}  // namespace

TEST_CASE("cli analyze: member vs nilpotent exit codes") {
  const fs::path member = write_temp("posfact_member.mat", "2 2\n1 1\n0 0\n");
  const fs::path nil = write_temp("posfact_nil.mat", "2 2\n0 1\n0 0\n");

  const RunResult ok = run_cli("analyze " + member.string());
  CHECK(ok.exit_code == 0);
  const json jok = parse_report(ok.stdout_text);
  CHECK(jok["schema"] == 1);
  CHECK(jok["verdicts"]["membership"]["in_l2p"] == true);
  CHECK(jok["verdicts"]["membership"]["subclass"] == "PosProj");
  CHECK(jok["witnesses"].contains("A"));
  CHECK(jok["residuals"]["factor"].contains("tolerance"));

  const RunResult neg = run_cli("analyze " + nil.string());
  CHECK(neg.exit_code == 2);
  const json jneg = parse_report(neg.stdout_text);
  CHECK(jneg["verdicts"]["membership"]["in_l2p"] == false);

  fs::remove(member);
  fs::remove(nil);
}

TEST_CASE("cli factor on the oblique projection") {
  const fs::path member = write_temp("posfact_factor.mat", "2 2\n1 1\n0 0\n");
  const RunResult r = run_cli("factor " + member.string());
  CHECK(r.exit_code == 0);
  const json j = parse_report(r.stdout_text);
  CHECK(j["verdicts"]["optimal"] == true);
  CHECK(j["witnesses"]["A"]["data"][0][0][0] == 1.0);
  CHECK(j["witnesses"]["B"]["data"][1][0][0] == doctest::Approx(1.0));
  CHECK(j["residuals"]["factor"]["value"].get<double>() <= 1e-10);
  const RunResult inv = run_cli("factor --invertible-b " + member.string());
  CHECK(inv.exit_code == 0);
  const json ji = parse_report(inv.stdout_text);
  CHECK(ji["witnesses"]["B"]["data"][1][1][0] == doctest::Approx(2.0));
  fs::remove(member);
}

TEST_CASE("cli calc pinv matches the hand value") {
  const fs::path member = write_temp("posfact_calc.mat", "2 2\n1 1\n0 0\n");
  const RunResult r = run_cli("calc " + member.string() + " --op pinv");
  CHECK(r.exit_code == 0);
  const json j = parse_report(r.stdout_text);
  CHECK(j["witnesses"]["pinv"]["data"][0][0][0] == doctest::Approx(0.5));
  CHECK(j["witnesses"]["pinv"]["data"][1][0][0] == doctest::Approx(0.5));
  CHECK(j["witnesses"]["pinv"]["data"][0][1][0] == doctest::Approx(0.0));
  fs::remove(member);
}

TEST_CASE("cli solve reports lambda and the Sebestyen witness") {
  const fs::path A = write_temp("posfact_A.mat", "2 2\n1 0\n0 0\n");
  const fs::path T = write_temp("posfact_T.mat", "2 2\n1 1\n0 0\n");
  const RunResult r = run_cli("solve " + A.string() + " " + T.string());
  CHECK(r.exit_code == 0);
  const json j = parse_report(r.stdout_text);
  CHECK(j["verdicts"]["feasibility_lambda"].get<double>() ==
        doctest::Approx(2.0));
  CHECK(j["witnesses"]["X"]["data"][1][1][0] == doctest::Approx(1.0));
  fs::remove(A);
  fs::remove(T);
}

TEST_CASE("cli exit codes: infeasible and input errors") {
  const fs::path A = write_temp("posfact_iA.mat", "2 2\n1 0\n0 0\n");
  const fs::path T = write_temp("posfact_iT.mat", "2 2\n0 0\n0 1\n");
  CHECK(run_cli("solve " + A.string() + " " + T.string()).exit_code == 3);

  const fs::path bad = write_temp("posfact_bad.mat", "2 2\n1 2 3\n");
  CHECK(run_cli("analyze " + bad.string()).exit_code == 4);
  CHECK(run_cli("analyze /no/such/file.mat").exit_code == 4);
  CHECK(run_cli("gallery no_such_name").exit_code == 4);

  const fs::path nil = write_temp("posfact_nil2.mat", "2 2\n0 1\n0 0\n");
  CHECK(run_cli("calc " + nil.string() + " --op sqrt").exit_code == 2);
  fs::remove(A);
  fs::remove(T);
  fs::remove(bad);
  fs::remove(nil);
}

TEST_CASE("cli gallery writes a matrix usable downstream") {
  const fs::path mat = fs::temp_directory_path() / "posfact_gal.mat";
  const RunResult g =
      run_cli("gallery three_positive_nilpotent --matrix-out " + mat.string());
  CHECK(g.exit_code == 0);
  const RunResult a = run_cli("analyze " + mat.string());
  CHECK(a.exit_code == 2);  // the nilpotent is outside the class
  fs::remove(mat);
}

TEST_CASE("cli dilate stage 2 passes the subclass test") {
  const fs::path member = write_temp("posfact_dil.mat", "2 2\n1 1\n0 0\n");
  const RunResult r = run_cli("dilate " + member.string() + " --stage 2");
  CHECK(r.exit_code == 0);
  const json j = parse_report(r.stdout_text);
  CHECK(j["witnesses"]["ambient"]["rows"] == 8);
  CHECK(j["residuals"]["projection"]["value"].get<double>() <= 1e-10);
  fs::remove(member);
}

TEST_CASE("cli schur on the identity") {
  const fs::path B = write_temp("posfact_B.mat", "2 2\n1 0\n0 1\n");
  const fs::path S = write_temp("posfact_S.mat", "2 1\n1\n0\n");
  const RunResult r =
      run_cli("schur " + B.string() + " --subspace " + S.string());
  CHECK(r.exit_code == 0);
  const json j = parse_report(r.stdout_text);
  CHECK(j["witnesses"]["complement"]["data"][1][1][0] == doctest::Approx(1.0));
  CHECK(j["witnesses"]["complement"]["data"][0][0][0] == doctest::Approx(0.0));
  fs::remove(B);
  fs::remove(S);
}

TEST_CASE("cli lab emits metrics and csv") {
  const fs::path csv = fs::temp_directory_path() / "posfact_lab.csv";
  const RunResult r = run_cli("lab sqrtless --dims 2,4 --csv " + csv.string());
  CHECK(r.exit_code == 0);
  const json j = parse_report(r.stdout_text);
  CHECK(j["metrics"].size() >= 4);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "dim,metric,value");
  fs::remove(csv);
}

TEST_CASE("cli reports are deterministic and respect --format text and --out") {
  const fs::path member = write_temp("posfact_det.mat", "2 2\n2 0\n0 3\n");
  const RunResult a = run_cli("analyze " + member.string());
  const RunResult b = run_cli("analyze " + member.string());
  // runtime differs; verdicts and witnesses must not
  json ja = parse_report(a.stdout_text);
  json jb = parse_report(b.stdout_text);
  ja.erase("runtime_ms");
  jb.erase("runtime_ms");
  CHECK(ja == jb);

  const fs::path out = fs::temp_directory_path() / "posfact_rep.json";
  const RunResult c =
      run_cli("analyze " + member.string() + " --out " + out.string());
  CHECK(c.exit_code == 0);
  CHECK(c.stdout_text.empty());
  CHECK(fs::exists(out));

  const RunResult t = run_cli("--format text analyze " + member.string());
  CHECK(t.stdout_text.find("verdict membership") != std::string::npos);
  fs::remove(member);
  fs::remove(out);
}

TEST_CASE("cli env var tolerance defaults") {
  const fs::path member = write_temp("posfact_env.mat", "2 2\n2 0\n0 3\n");
  const RunResult r = run_cli("analyze " + member.string());
  const json j = parse_report(r.stdout_text);
  CHECK(j["tolerances"]["tol_eq"].get<double>() == 1e-8);
  ::setenv("POSFACT_TOL_EQ", "1e-6", 1);
  const RunResult r2 = run_cli("analyze " + member.string());
  ::unsetenv("POSFACT_TOL_EQ");
  const json j2 = parse_report(r2.stdout_text);
  CHECK(j2["tolerances"]["tol_eq"].get<double>() == 1e-6);
  fs::remove(member);
}

TEST_CASE("cli batch mode orders reports by filename") {
  const fs::path dir = fs::temp_directory_path() / "posfact_batch";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "a.mat") << "1 1\n2\n";
    std::ofstream(dir / "b.mat") << "2 2\n0 1\n0 0\n";
  }
  const RunResult r = run_cli("analyze --batch " + dir.string());
  CHECK(r.exit_code == 2);  // worst per-file verdict
  const auto pos_a = r.stdout_text.find("a.mat");
  const auto pos_b = r.stdout_text.find("b.mat");
  CHECK(pos_a != std::string::npos);
  CHECK(pos_b != std::string::npos);
  CHECK(pos_a < pos_b);
  fs::remove_all(dir);
}
