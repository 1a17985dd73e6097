#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mcurve/report.hpp"

using namespace mcurve;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(MCURVE_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Json payload(const Run& r) { return Json::parse(r.out).at("payload"); }

}  // namespace

TEST_CASE("mean-value examples") {
  Run a = run("mean-value --k 2 --s 2 --N 1 --weights unit");
  CHECK(a.code == 0);
  CHECK(payload(a)["raw_moment"] == "15");
  Run b = run("mean-value --k 2 --s 1 --N 7 --weights unit");
  CHECK(payload(b)["raw_moment"] == "15");
  Run c = run("mean-value --exponents 1,3 --s 2 --N 3");
  CHECK(payload(c)["raw_moment"] == "127");
}

TEST_CASE("lemma51 example") {
  Run r = run("congruence-audit lemma51 --k 2 --prime 3 --a 0 --b 1");
  CHECK(r.code == 0);
  Json p = payload(r);
  CHECK(p["max_cardinality"] == 6);
  CHECK(p["bound"] == "6");
  CHECK(p["pass"] == true);
  Json q = payload(run("congruence-audit lemma51 --k 2 --params 0,1,,3"));
  CHECK(q == p);
}

TEST_CASE("exit codes and one-line errors") {
  Run bad = run("mean-value --k 2 --s 0 --N 1");
  CHECK(bad.code == 2);
  CHECK(bad.out.rfind("error: parameter:", 0) == 0);
  CHECK(bad.out.find('\n') == bad.out.size() - 1);
  CHECK(run("mean-value --k 2 --N 1").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("mean-value --k 2 --s 2 --N 1 --weights gaussian").code == 2);
  Run cap = run("mean-value --k 2 --s 6 --N 50 --method sparse --entry-cap 1000");
  CHECK(cap.code == 3);
  CHECK(cap.out.rfind("error: resource:", 0) == 0);
  CHECK(run("circle weyl --X 10 --alpha 0.1,0.2").code == 0);
}

TEST_CASE("dry run validates without computing") {
  Run r = run("--dry-run mean-value --k 2 --s 40 --N 100000");
  CHECK(r.code == 0);
  Json doc = Json::parse(r.out);
  CHECK(doc["payload"].is_null());
  CHECK(doc["header"]["dry_run"] == true);
  CHECK(doc["header"]["config"]["s"] == "40");
  CHECK(run("mean-value --dry-run --k 0 --s 2 --N 1").code == 2);
}

TEST_CASE("config file merges under flags") {
  auto path = std::filesystem::temp_directory_path() / "mcurve_cli_test.cfg";
  {
    std::ofstream cfg(path);
    cfg << "# defaults\nk = 2\ns = 3\nN = 1\n";
  }
  Run r = run("mean-value --config " + path.string() + " --s 2");
  CHECK(r.code == 0);
  CHECK(payload(r)["raw_moment"] == "15");
  CHECK(Json::parse(r.out)["header"]["config"]["s"] == "2");
  std::filesystem::remove(path);
}

TEST_CASE("csv output and output files") {
  Run r = run("exponent-fit --k 2 --s 2 --N-list 1,2,3 --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.find("N,raw,normalized,target_power,ratio\n1,15,5/3,") != std::string::npos);
  auto path = std::filesystem::temp_directory_path() / "mcurve_cli_test.json";
  CHECK(run("primes --X 100 --theta 1/4 --k 2 --output " + path.string()).out.empty());
  std::ifstream in(path);
  Json doc = Json::parse(in);
  CHECK(doc["payload"]["prime"] == 5);
  std::filesystem::remove(path);
}

TEST_CASE("witness weights are written in the weight-file format") {
  auto path = std::filesystem::temp_directory_path() / "mcurve_witness.txt";
  Run r = run("extremal-search --k 2 --s 2 --N 2 --restarts 2 --iters 2 --seed 3 --witness-out " + path.string());
  CHECK(r.code == 0);
  WeightSequence w = read_weights(path);
  CHECK(w.N() == 2);
  CHECK(Json::parse(r.out)["payload"]["weights"] == to_json(w));
  std::filesystem::remove(path);
}
