#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "canon/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using canon::cli::run;

namespace {

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

nlohmann::json result_of(const CliResult& r) {
  return nlohmann::json::parse(r.out).at("result");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CliResult help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("commands: tilt, condition, divergence, ratefn, "
                      "experiment") != std::string::npos);

  CliResult none = invoke({});
  CHECK(none.code == 1);
  CHECK(none.err.find("error:") != std::string::npos);
  CHECK(none.err.find("usage: canontilt") != std::string::npos);

  CliResult missing = invoke({"condition", "--x", "exp:1"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("condition requires 'y'") != std::string::npos);

  CliResult badflag = invoke({"divergence", "--nope", "1"});
  CHECK(badflag.code == 1);
}

TEST_CASE("law grammar diagnostics") {
  CliResult unknown = invoke({"divergence", "--p", "bogus:1", "--q", "exp:1"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("unknown law family 'bogus'") != std::string::npos);
  CHECK(unknown.err.find("law grammar:") != std::string::npos);

  CliResult arity = invoke({"divergence", "--p", "exp:1,2", "--q", "exp:1"});
  CHECK(arity.code == 1);
  CHECK(arity.err.find("needs 1 parameters") != std::string::npos);

  CliResult notnum =
      invoke({"divergence", "--p", "normal:abc,1", "--q", "exp:1"});
  CHECK(notnum.code == 1);
  CHECK(notnum.err.find("cannot parse number 'abc'") != std::string::npos);
}

TEST_CASE("divergence command") {
  CliResult r = invoke({"divergence", "--p", "exp:2", "--q", "exp:1"});
  REQUIRE(r.code == 0);
  nlohmann::json res = result_of(r);
  CHECK(res.at("kl").get<double>() ==
        doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-8));
  CHECK(res.at("tv").get<double>() == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(res.at("pinsker_bound").get<double>() ==
        doctest::Approx(std::sqrt(res.at("kl").get<double>() / 2.0))
            .epsilon(1e-10));

  CliResult d = invoke({"divergence", "--p", "pois:1", "--q", "pois:2"});
  REQUIRE(d.code == 0);
  CHECK(result_of(d).at("kl").get<double>() ==
        doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-10));
  CHECK(result_of(d).contains("sup_dist"));
}

TEST_CASE("disjoint supports serialize as the infinity string") {
  write_file("cli_p_tmp.csv", "x,p\n0,1\n1,1\n");
  write_file("cli_q_tmp.csv", "x,p\n2,1\n3,1\n");
  CliResult r = invoke({"divergence", "--p", "table:cli_p_tmp.csv", "--q",
                        "table:cli_q_tmp.csv"});
  REQUIRE(r.code == 0);
  nlohmann::json res = result_of(r);
  CHECK(res.at("kl").is_string());
  CHECK(res.at("kl").get<std::string>() == "Infinity");
  std::remove("cli_p_tmp.csv");
  std::remove("cli_q_tmp.csv");
}

TEST_CASE("tilt command") {
  CliResult r = invoke({"tilt", "--family", "exponential", "--rate", "1",
                        "--lambda", "1", "--route", "rate-function"});
  REQUIRE(r.code == 0);
  nlohmann::json res = result_of(r);
  CHECK(res.at("mean").get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.at("normalizer").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(res.at("route").get<std::string>() == "rate-function");

  CliResult nolam = invoke({"tilt", "--family", "exponential", "--rate", "1"});
  CHECK(nolam.code == 1);
  CHECK(nolam.err.find("tilt requires 'lambda'") != std::string::npos);

  // law string form bypasses the per-family flags
  CliResult law = invoke({"tilt", "--family", "exp:1", "--lambda", "0.5"});
  REQUIRE(law.code == 0);
  CHECK(result_of(law).at("mean").get<double>() ==
        doctest::Approx(1.0 / 1.5).epsilon(1e-9));
}

TEST_CASE("condition command and seed precedence") {
  CliResult r = invoke({"condition", "--x", "exp:1", "--y", "exp:1", "--h", "2",
                        "--delta", "0.5"});
  REQUIRE(r.code == 0);
  nlohmann::json full = nlohmann::json::parse(r.out);
  CHECK(full.at("config").at("command").get<std::string>() == "condition");
  nlohmann::json res = full.at("result");
  CHECK(res.at("method").get<std::string>() == "bayes-exact");
  CHECK(res.at("mass_in_window").get<double>() > 0.0);

  CliResult mc = invoke({"condition", "--x", "exp:1", "--y", "exp:1", "--h",
                         "2", "--delta", "0.5", "--mc", "20000", "--seed", "9"});
  REQUIRE(mc.code == 0);
  nlohmann::json mj = nlohmann::json::parse(mc.out);
  CHECK(mj.at("config").at("seed").get<std::uint64_t>() == 9);
  CHECK(mj.at("result").at("method").get<std::string>() == "mc-rejection");
  CHECK(mj.at("result").at("mc").at("seed").get<std::uint64_t>() == 9);

  // config file seed applies when no flag is given, flag wins otherwise
  write_file("cli_seed_tmp.json",
             "{\"x\":\"exp:1\",\"y\":\"exp:1\",\"h\":2.0,\"delta\":0.5,"
             "\"mc\":20000,\"seed\":5}");
  CliResult fromfile = invoke({"condition", "--config", "cli_seed_tmp.json"});
  REQUIRE(fromfile.code == 0);
  CHECK(nlohmann::json::parse(fromfile.out).at("config").at("seed").get<int>() ==
        5);
  CliResult override_ =
      invoke({"condition", "--config", "cli_seed_tmp.json", "--seed", "9"});
  REQUIRE(override_.code == 0);
  CHECK(nlohmann::json::parse(override_.out).at("config").at("seed").get<int>() ==
        9);
  std::remove("cli_seed_tmp.json");
}

TEST_CASE("echoed config reproduces the run byte for byte") {
  CliResult direct = invoke({"condition", "--x", "exp:1", "--y", "exp:1",
                             "--h", "2", "--delta", "0.5"});
  REQUIRE(direct.code == 0);
  nlohmann::json cfg = nlohmann::json::parse(direct.out).at("config");
  nlohmann::json file = cfg.at("params");
  file["seed"] = cfg.at("seed");
  write_file("cli_echo_tmp.json", file.dump());
  CliResult replay = invoke({"condition", "--config", "cli_echo_tmp.json"});
  REQUIRE(replay.code == 0);
  CHECK(replay.out == direct.out);
  std::remove("cli_echo_tmp.json");
}

TEST_CASE("joint law configs are refused") {
  write_file("cli_joint_tmp.json",
             "{\"x\":\"exp:1\",\"y\":\"exp:1\",\"h\":2.0,\"delta\":0.5,"
             "\"joint\":\"bivariate\"}");
  CliResult r = invoke({"condition", "--config", "cli_joint_tmp.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("dependent-bath interface") != std::string::npos);
  std::remove("cli_joint_tmp.json");
}

TEST_CASE("ratefn command") {
  CliResult r = invoke({"ratefn", "--dist", "exp:1", "--points", "3", "--y-lo",
                        "0.4", "--y-hi", "0.6"});
  REQUIRE(r.code == 0);
  nlohmann::json res = result_of(r);
  CHECK(res.at("mean").get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  auto phi = res.at("phi");
  REQUIRE(phi.size() == 3);
  CHECK(phi[0].get<double>() ==
        doctest::Approx(0.4 - 1.0 - std::log(0.4)).epsilon(1e-9));
  CHECK(phi[2].get<double>() ==
        doctest::Approx(0.6 - 1.0 - std::log(0.6)).epsilon(1e-9));

  CliResult few = invoke({"ratefn", "--dist", "exp:1", "--points", "1"});
  CHECK(few.code == 1);
  CHECK(few.err.find("points must be in") != std::string::npos);

  CliResult half = invoke({"ratefn", "--dist", "exp:1", "--y-lo", "0.4"});
  CHECK(half.code == 1);
  CHECK(half.err.find("give both y_lo and y_hi") != std::string::npos);
}

TEST_CASE("csv output format") {
  CliResult r = invoke({"ratefn", "--dist", "exp:1", "--points", "3", "--y-lo",
                        "0.4", "--y-hi", "0.6", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# ", 0) == 0);
  CHECK(r.out.find("\r") == std::string::npos);
  CHECK(r.out.back() == '\n');
  CHECK(r.out.find("# command=ratefn\n") != std::string::npos);
  CHECK(r.out.find("# mean=1\n") != std::string::npos);

  // data rows round trip to the json values exactly
  CliResult j = invoke({"ratefn", "--dist", "exp:1", "--points", "3", "--y-lo",
                        "0.4", "--y-hi", "0.6"});
  double want = result_of(j).at("phi")[0].get<double>();
  std::istringstream lines(r.out);
  std::string line, header;
  bool found = false;
  while (std::getline(lines, line)) {
    if (line.rfind("# ", 0) == 0) continue;
    if (header.empty()) {
      header = line;
      CHECK(header.rfind("y,", 0) == 0);
      continue;
    }
    std::stringstream row(line);
    std::string yv, phiv;
    std::getline(row, yv, ',');
    std::getline(row, phiv, ',');
    if (std::stod(yv) == 0.4) {
      CHECK(std::stod(phiv) == want);
      found = true;
    }
  }
  CHECK(found);

  // `--out csv` is shorthand for csv on stdout
  CliResult shorthand = invoke({"divergence", "--p", "exp:2", "--q", "exp:1",
                                "--out", "csv"});
  REQUIRE(shorthand.code == 0);
  CHECK(shorthand.out.rfind("# ", 0) == 0);
  CHECK(shorthand.out.find("metric,value\n") != std::string::npos);
}

TEST_CASE("output path writes a file") {
  const char* path = "cli_out_tmp.json";
  CliResult direct = invoke({"divergence", "--p", "exp:2", "--q", "exp:1"});
  CliResult filed =
      invoke({"divergence", "--p", "exp:2", "--q", "exp:1", "--out", path});
  REQUIRE(filed.code == 0);
  CHECK(filed.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == direct.out);
  std::remove(path);
}

TEST_CASE("unknown config keys are rejected") {
  write_file("cli_bad_tmp.json", "{\"p\":\"exp:1\",\"q\":\"exp:2\",\"zzz\":1}");
  CliResult r = invoke({"divergence", "--config", "cli_bad_tmp.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("unknown key 'zzz'") != std::string::npos);
  std::remove("cli_bad_tmp.json");
}

TEST_CASE("experiment command and verdict exit codes") {
  write_file("cli_exp_tmp.json",
             "{\"name\":\"exp_heatbath_invariance\",\"seed\":1}");
  CliResult ok = invoke({"experiment", "--config", "cli_exp_tmp.json"});
  REQUIRE(ok.code == 0);
  nlohmann::json res = result_of(ok);
  CHECK(res.at("verdict").get<std::string>() == "pass");
  CHECK(res.at("summary").at("spread_exp_form").get<double>() < 1e-8);
  std::remove("cli_exp_tmp.json");

  // this study lands outside its requested slope band and reports failure
  CliResult red = invoke({"experiment", "--name", "exp_poisson_rate"});
  CHECK(red.code == 2);
  CHECK(result_of(red).at("verdict").get<std::string>() == "fail");

  CliResult unknown = invoke({"experiment", "--name", "exp_nothing"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("unknown experiment") != std::string::npos);
}
