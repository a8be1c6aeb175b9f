#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"
#include "potbayes/io/csv.hpp"

using namespace potbayes;
using json = nlohmann::json;

namespace {

std::filesystem::path scratch_dir() {
  auto d = std::filesystem::temp_directory_path() / "potbayes_test_io_cli";
  std::filesystem::create_directories(d);
  return d;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

struct CliRun {
  int code;
  std::string out, err;
  json report() const { return json::parse(out); }
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "potbayes");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string simulated_csv(const std::string& model, std::size_t n, std::uint64_t seed) {
  const auto path = (scratch_dir() / (model + "_" + std::to_string(n) + "_" + std::to_string(seed) + ".csv")).string();
  const auto r = run_cli({"simulate", "--model", model, "--n", std::to_string(n), "--seed", std::to_string(seed), "--csv",
                      path});
  REQUIRE(r.code == 0);
  return path;
}

}  // namespace

TEST_CASE("three-row file loads in order", "[csv]") {
  const auto p = write_file("three.csv", "x\n1\n2\n3");
  io::LoadOptions lo;
  lo.min_rows = 1;
  CHECK(io::ingest_csv(p, lo).values == std::vector<double>{1, 2, 3});
  // the default floor of ten rows applies otherwise
  CHECK_THROWS_AS(io::ingest_csv(p), DataError);
}

TEST_CASE("blank cell under each na policy", "[csv]") {
  std::string text = "a,b\n";
  for (int i = 1; i <= 12; ++i) text += std::to_string(i) + "," + (i == 5 ? "" : std::to_string(10 * i)) + "\n";
  const auto p = write_file("blank.csv", text);
  io::LoadOptions lo;
  lo.column = "b";
  lo.na_policy = io::na_policy_from_string("drop-with-warning");
  const auto s = io::ingest_csv(p, lo);
  CHECK(s.values.size() == 11);
  CHECK(s.dropped == 1);
  CHECK(s.warnings.size() == 1);

  lo.na_policy = io::NaPolicy::kError;
  try {
    io::ingest_csv(p, lo);
    FAIL("expected a load error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 5") != std::string::npos);
    CHECK(e.code() == ErrorCode::kData);
  }
}

TEST_CASE("quoted fields, CRLF and column selection", "[csv]") {
  const auto t = io::parse_csv("\xEF\xBB\xBF\"name, with comma\",v\r\n\"a \"\"q\"\"\",1.5\r\n\"b\",-2e3\r\n\r\n");
  REQUIRE(t.header.size() == 2);
  CHECK(t.header[0] == "name, with comma");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "a \"q\"");
  CHECK(io::select_column(t, "v", "t") == 1);
  CHECK(io::select_column(t, "2", "t") == 1);
  CHECK_THROWS_AS(io::select_column(t, "w", "t"), DataError);
  double v = 0;
  CHECK(io::parse_number(t.rows[1][1], v));
  CHECK(v == -2000.0);
  CHECK_FALSE(io::parse_number("nan", v));
  CHECK_FALSE(io::parse_number("1.5x", v));
}

TEST_CASE("malformed csv input", "[csv]") {
  CHECK_THROWS_AS(io::parse_csv("x\n\"open\n"), DataError);
  CHECK_THROWS_AS(io::parse_csv("x\nab\"c\n"), DataError);
  CHECK_THROWS_AS(io::parse_csv(""), DataError);
  CHECK_THROWS_AS(io::parse_csv("x\n\xff\xfe\n"), DataError);
  CHECK_THROWS_AS(io::na_policy_from_string("skip"), InvalidArgument);
  CHECK_THROWS_AS(io::ingest_csv((scratch_dir() / "missing.csv").string()), DataError);
}

TEST_CASE("exogenous matrix loader", "[csv]") {
  const auto p = write_file("exog.csv", "z1,z2\n1,2\n3,4\n5,6\n");
  const auto m = io::ingest_matrix(p);
  CHECK(m.rows() == 3);
  CHECK(m(2, 1) == 6.0);
  const auto bad = write_file("exog_bad.csv", "z1,z2\n1,2\n3\n");
  CHECK_THROWS_AS(io::ingest_matrix(bad), DataError);
}

TEST_CASE("marginal mode reports all six set types", "[cli]") {
  const auto data = simulated_csv("ar1_t1", 2000, 17);
  const auto r = run_cli({"quantile", "--input", data, "--column", "y", "--k", "100", "--tau-e", "0.9995", "--seed",
                      "3", "--deterministic"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["schema_version"] == "1.0");
  CHECK(j["status"] == "ok");
  const auto& res = j["result"];
  for (const char* key : {"FCR", "FCI_gamma", "FCI_sigma"}) CHECK(res["frequentist"].contains(key));
  for (const char* key : {"BCR", "BCI_gamma", "BCI_sigma", "BACR", "BACI_gamma", "BACI_sigma"}) {
    CHECK(res["bayes"].contains(key));
  }
  const auto& q = res["quantiles"][0];
  for (const char* key : {"BCI", "BACI", "FCI"}) CHECK(q.contains(key));
  CHECK(res["bayes"]["diagnostics"]["adjusted"]["rhat"].get<double>() < 1.05);
  CHECK(res["bayes"]["diagnostics"]["naive"]["rhat"].get<double>() < 1.05);
  for (const auto& [stage, t] : j["timings"].items()) CHECK(t.get<double>() == 0.0);
  // the resolved config is embedded with defaults filled in
  CHECK(j["config"]["m"] == 50);
  CHECK(j["config"]["prior_gamma"] == "flat:10");
  CHECK(j["config"]["iters"] == 20000);
}

TEST_CASE("reports are byte-identical for the same seed", "[cli]") {
  const auto data = simulated_csv("arch1", 1500, 5);
  const std::vector<std::string> args = {"posterior", "--input", data, "--k", "80",   "--tau-e",
                                         "0.999",     "--iters", "3000", "--seed", "11", "--deterministic"};
  const auto a = run_cli(args), b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("tau_E at or below the intermediate level is a config error", "[cli]") {
  const auto data = simulated_csv("ar1_t1", 2000, 17);
  const auto r = run_cli({"quantile", "--input", data, "--k", "100", "--tau-e", "0.95"});
  CHECK(r.code == 2);
  const auto j = r.report();
  CHECK(j["status"] == "error");
  CHECK(j["error"]["class"] == "config_error");
  // only the load ran; validation needs n
  CHECK_FALSE(j["timings"].contains("fit"));
  CHECK_FALSE(j["timings"].contains("covariance"));
}

TEST_CASE("error classes map to exit codes", "[cli]") {
  CHECK(run_cli({"fit", "--input", (scratch_dir() / "nope.csv").string(), "--k", "10"}).code == 3);
  CHECK(run_cli({"fit", "--unknown-flag"}).code == 2);
  CHECK(run_cli({}).code == 2);
  const auto data = simulated_csv("ar1_t1", 500, 1);
  CHECK(run_cli({"fit", "--input", data, "--k", "500"}).code == 2);
  CHECK(run_cli({"fit", "--input", data}).code == 2);
  CHECK(run_cli({"fit", "--input", data, "--k", "50", "--block", "overlapping"}).code == 2);
  CHECK(run_cli({"posterior", "--input", data, "--k", "50", "--prior-gamma", "beta:1:2"}).code == 2);
  CHECK(run_cli({"simulate", "--model", "nope", "--csv", (scratch_dir() / "x.csv").string()}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("coverage mode with zero replications", "[cli]") {
  const auto r = run_cli({"coverage", "--replications", "0", "--deterministic"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["status"] == "ok");
  CHECK(j["result"]["cells"].empty());
}

TEST_CASE("config file sections fill options and flags win", "[cli]") {
  const auto data = simulated_csv("arma11_t2", 1000, 2);
  const auto ini = write_file("run.ini", "[fit]\ninput = " + data + "\nk = 60\nalpha = 0.1\n");
  const auto r = run_cli({"fit", "--config", ini, "--k", "70", "--deterministic"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["config"]["k"] == 70);
  CHECK(j["config"]["alpha"] == 0.1);
  CHECK(j["result"]["exceedances"]["k"] == 70);
}

TEST_CASE("tau_I selects k", "[cli]") {
  const auto data = simulated_csv("arma11_t2", 1000, 2);
  const auto r = run_cli({"fit", "--input", data, "--tau-i", "0.95", "--deterministic"});
  REQUIRE(r.code == 0);
  CHECK(r.report()["config"]["k"] == 50);
}

TEST_CASE("draw dump and copula table", "[cli]") {
  const auto data = simulated_csv("arch1", 1500, 5);
  const auto draws = (scratch_dir() / "draws.csv").string();
  const auto table = (scratch_dir() / "table.csv").string();
  REQUIRE(run_cli({"quantile", "--input", data, "--k", "80", "--tau-e", "0.999", "--iters", "2000", "--draws-out",
               draws})
              .code == 0);
  std::ifstream d(draws);
  std::string head;
  std::getline(d, head);
  CHECK(head == "gamma,sigma,q_tauE");
  REQUIRE(run_cli({"covmat", "--input", data, "--k", "80", "--csv", table}).code == 0);
  std::ifstream t(table);
  std::getline(t, head);
  CHECK(head == "u,R_u1");
}

TEST_CASE("dynamic and forecast modes", "[cli]") {
  const auto data = simulated_csv("ar1_garch11", 2000, 8);
  const auto r = run_cli({"dynamic", "--input", data, "--column", "y", "--k", "50", "--tau-e", "0.9995", "--iters",
                      "3000", "--no-mean", "--deterministic"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK_THAT(j["result"]["arma"]["phi"][0].get<double>(), Catch::Matchers::WithinAbs(0.8, 0.05));
  const auto& q = j["result"]["quantiles"][0];
  CHECK(q["refined"]["lower"].get<double>() < q["refined"]["upper"].get<double>());

  const auto f = run_cli({"forecast", "--input", data, "--k", "50", "--tau-e", "0.9995", "--iters", "2000",
                      "--horizon", "2", "--deterministic"});
  REQUIRE(f.code == 0);
  CHECK(f.report()["result"]["forecasts"].size() == 2);
}
