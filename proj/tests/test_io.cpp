#include <clocale>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "nnfir/errors.hpp"
#include "nnfir/io.hpp"
#include "nnfir/solver.hpp"

using namespace nnfir;

TEST_CASE("CSV parsing with and without a header") {
  const NonnegMatrix a = parse_matrix_csv("1,2\n3.5,4e-1\n");
  CHECK(a == NonnegMatrix{{1.0, 2.0}, {3.5, 0.4}});
  const NonnegMatrix b = parse_matrix_csv("exp0, exp1\r\n1, 2\r\n\r\n3.5 ,0.4\r\n");
  CHECK(b == a);
  CHECK(parse_matrix_csv("7") == NonnegMatrix{{7.0}});
  CHECK(parse_matrix_csv(format_matrix_csv(a)) == a);
}

TEST_CASE("CSV errors name the line and column") {
  try {
    parse_matrix_csv("1,2\n3\n", "u.csv");
    FAIL("ragged input accepted");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("u.csv") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
  }
  try {
    parse_matrix_csv("1,2\n3,x\n");
    FAIL("non-numeric cell accepted");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_matrix_csv("1,-2\n"), InputError);
  CHECK_THROWS_AS(parse_matrix_csv("1,inf\n"), InputError);
  CHECK_THROWS_AS(parse_matrix_csv("1,nan\n"), InputError);
  CHECK_THROWS_AS(parse_matrix_csv("a,b\nc,d\n"), InputError);
  CHECK_THROWS_AS(parse_matrix_csv("\n\n"), InputError);
  CHECK_THROWS_AS(parse_matrix_csv("1,000.5\n2,1\n3\n"), InputError);
}

TEST_CASE("CSV parsing ignores the locale") {
  const char* previous = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = previous ? previous : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
    CHECK(parse_matrix_csv("1.5\n") == NonnegMatrix{{1.5}});
    CHECK_THROWS_AS(parse_matrix_csv("1,5\n2\n"), InputError);
  }
  std::setlocale(LC_NUMERIC, saved.c_str());
  CHECK(parse_matrix_csv("0.25\n") == NonnegMatrix{{0.25}});
}

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("downsampling keeps the endpoints and the limit") {
  std::vector<double> trace(25000);
  for (std::size_t i = 0; i < trace.size(); ++i) trace[i] = static_cast<double>(i);
  const DownsampledTrace d = downsample(trace);
  CHECK(d.length == 25000);
  CHECK(d.values.size() <= kMaxTraceEntries);
  CHECK(d.iterations.front() == 0);
  CHECK(d.iterations.back() == 24999);
  CHECK(d.values.back() == 24999.0);
  for (std::size_t i = 1; i < d.iterations.size(); ++i) CHECK(d.iterations[i] > d.iterations[i - 1]);
  const DownsampledTrace small = downsample({3.0, 2.0, 1.0});
  CHECK(small.values == std::vector<double>{3.0, 2.0, 1.0});
}

TEST_CASE("run reports round-trip and revalidate") {
  const NonnegMatrix U{{1.0}, {1.0}};
  const NonnegMatrix Y{{2.0}, {1.0}};
  const SolverReport rep = solve(Y, U);
  nlohmann::json doc = run_report_body(Y, U, rep);
  doc["schema_version"] = kSchemaVersion;
  const nlohmann::json reparsed = nlohmann::json::parse(doc.dump());
  CHECK(reparsed["termination"] == "kkt_satisfied");
  const ReportValidation ok = revalidate_run_report(reparsed, Y, U);
  CHECK(ok.ok);
  nlohmann::json tampered = reparsed;
  tampered["h_final"][1] = 0.5;
  CHECK_FALSE(revalidate_run_report(tampered, Y, U).ok);
  nlohmann::json wrong_version = reparsed;
  wrong_version["schema_version"] = "0";
  CHECK_FALSE(revalidate_run_report(wrong_version, Y, U).ok);
}

TEST_CASE("noise specifications") {
  CHECK(parse_noise("gamma:4").describe() == "gamma:4");
  CHECK(parse_noise("lognormal:0.5").sigma == 0.5);
  CHECK(parse_noise("two-point:0.5,1.5").high == 1.5);
  CHECK(parse_noise("point-mass").family == NoiseFamily::point_mass);
  CHECK_THROWS_AS(parse_noise("cauchy:1"), ConfigError);
  CHECK_THROWS_AS(parse_noise("gamma:abc"), ConfigError);
  CHECK_THROWS_AS(parse_noise("two-point:2,3"), ConfigError);
}
