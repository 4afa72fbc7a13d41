#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "nnfir/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(NNFIR_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("nnfir_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

json without_wall_time(json doc) {
  doc.erase("wall_time_seconds");
  return doc;
}

}  // namespace

TEST_CASE("check reports conditions with the documented exit codes") {
  TempDir dir;
  const auto u = dir.write("u.csv", "1\n1\n");
  const auto y = dir.write("y.csv", "1\n2\n");
  Result ok = run("check " + u + " " + y);
  CHECK(ok.status == 0);
  const json doc = json::parse(ok.out);
  CHECK(doc["schema_version"] == "1");
  CHECK(doc["well_posed"] == true);
  CHECK(doc["strictly_convex"] == true);

  const auto u_late = dir.write("u_late.csv", "0\n1\n");
  Result bad = run("check " + u_late + " " + y);
  CHECK(bad.status == 2);
  const json bad_doc = json::parse(bad.out);
  CHECK(bad_doc["well_posed"] == false);
  CHECK(bad_doc["condition_1"]["witnesses"][0]["row"] == 0);

  const auto ragged = dir.write("ragged.csv", "1,2\n3\n");
  CHECK(run("check " + ragged + " " + ragged).status == 1);
  const auto wide = dir.write("wide.csv", "1,1\n1,1\n");
  CHECK(run("check " + u + " " + wide).status == 1);
  CHECK(run("check " + u + " " + dir.file("missing.csv")).status == 1);
  CHECK(run("frobnicate").status == 1);
}

TEST_CASE("estimate on the toy files") {
  TempDir dir;
  const auto u = dir.write("u.csv", "u\n1\n1\n");
  const auto y_int = dir.write("y_int.csv", "1\n2\n");
  const auto y_bnd = dir.write("y_bnd.csv", "2\n1\n");

  Result interior = run("estimate " + u + " " + y_int);
  REQUIRE(interior.status == 0);
  const json a = json::parse(interior.out);
  CHECK(a["h_final"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a["h_final"][1].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a["termination"] == "kkt_satisfied");
  CHECK(a["inputs"]["u"]["sha256"].get<std::string>().size() == 64);
  CHECK(a["config"]["max_iters"] == 100000);

  const auto out = dir.file("report.json");
  Result boundary = run("estimate " + u + " " + y_bnd + " --verify --history --out " + out);
  REQUIRE(boundary.status == 0);
  CHECK(boundary.out.empty());
  std::ifstream in(out);
  const json b = json::parse(in);
  CHECK(b["invariants"]["all_pass"] == true);
  CHECK(b["invariants"]["steps_checked"].get<std::size_t>() == b["iterations_used"].get<std::size_t>());
  CHECK(b["h_final"][0].get<double>() == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(b.contains("lyapunov_trace"));
  CHECK(b["possibly_suboptimal"] == false);

  const nnfir::ReportValidation v =
      nnfir::revalidate_run_report(b, nnfir::read_matrix_csv(y_bnd), nnfir::read_matrix_csv(u));
  CHECK(v.ok);
}

TEST_CASE("estimate flags a frozen start coordinate") {
  TempDir dir;
  const auto u = dir.write("u.csv", "1\n1\n");
  const auto y = dir.write("y.csv", "1\n2\n");
  const auto init = dir.write("h0.csv", "1\n0\n");
  Result r = run("estimate " + u + " " + y + " --max-iters 200 --init file:" + init);
  REQUIRE(r.status == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["h_final"][1] == 0.0);
  CHECK(doc["possibly_suboptimal"] == true);
  CHECK(doc["suspect_active_set"][0] == 1);
  CHECK(doc["frozen_coordinates"][0] == 1);
}

TEST_CASE("estimate exit codes") {
  TempDir dir;
  const auto u = dir.write("u.csv", "0\n1\n");
  const auto y = dir.write("y.csv", "1\n1\n");
  CHECK(run("estimate " + u + " " + y).status == 2);
  const auto good_u = dir.write("gu.csv", "1\n1\n");
  CHECK(run("estimate " + good_u + " " + y + " --tol-kkt 0").status == 1);
  CHECK(run("estimate " + good_u + " " + y + " --init sideways").status == 1);
  const auto bad_init = dir.write("h0.csv", "1\n1\n1\n");
  CHECK(run("estimate " + good_u + " " + y + " --init file:" + bad_init).status == 1);
}

TEST_CASE("oracle agrees with the solver") {
  TempDir dir;
  const auto u = dir.write("u.csv", "1,0.5\n0.3,1\n0.7,0.2\n");
  const auto y = dir.write("y.csv", "1.2,0.4\n0.9,1.5\n1.1,0.8\n");
  Result r = run("oracle " + u + " " + y);
  REQUIRE(r.status == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["agree"] == true);
  CHECK(doc["objective_gap"].get<double>() <= 1e-6);

  const auto big_u = dir.write("bu.csv", "1\n1\n1\n1\n1\n");
  CHECK(run("oracle " + big_u + " " + big_u).status == 2);
}

TEST_CASE("simulate is reproducible from its seed") {
  const std::string args = "simulate --m-grid 8,32 --replicates 4 --seed 11 --normality-m 16 "
                           "--normality-replicates 10 --decomposition-samples 200";
  Result a = run(args);
  Result b = run(args + " --threads 2");
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  CHECK(without_wall_time(json::parse(a.out)).dump() == without_wall_time(json::parse(b.out)).dump());
  const json doc = json::parse(a.out);
  CHECK(doc["consistency"]["median_error"].size() == 2);
  CHECK(doc.contains("normality"));
  CHECK(doc.contains("decomposition"));

  Result exact = run("simulate --noise point-mass --m-grid 4,8 --replicates 2");
  REQUIRE(exact.status == 0);
  for (const auto& row : json::parse(exact.out)["consistency"]["errors"])
    for (const auto& e : row) CHECK(e.get<double>() <= 1e-5);

  CHECK(run("simulate --noise cauchy:1").status == 1);
  CHECK(run("simulate --m-grid 32,8").status == 1);
  CHECK(run("simulate --h-true 1,0").status == 1);
}
