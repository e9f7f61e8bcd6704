// End-to-end tests of the command-line surface. The binary path comes from
// the TASQ_BIN environment variable (ctest sets it).

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string tasq_bin() {
  const char* bin = std::getenv("TASQ_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "TASQ_BIN must point at the tasq binary");
  return bin;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string command = tasq_bin() + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) result.out += buffer;
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tasq_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("simulate subcommand reproduces the reference trace") {
  TempDir dir;
  {
    std::ofstream sky(dir.file("sky.csv"));
    sky << "second,tokens\n0,4\n1,4\n2,1\n3,4\n";
  }
  const auto result =
      run_cli("simulate --in " + dir.file("sky.csv") + " --tokens 2 --out " + dir.file("sim.csv"));
  CHECK(result.exit_code == 0);
  CHECK(slurp(dir.file("sim.csv")) == "second,tokens\n0,2\n1,2\n2,2\n3,2\n4,1\n5,2\n6,2\n");
}

TEST_CASE("fit-pcc subcommand recovers the inverse-proportional curve") {
  TempDir dir;
  {
    std::ofstream pts(dir.file("pts.csv"));
    pts << "allocation,runtime\n1,100\n2,50\n4,25\n";
  }
  const auto result =
      run_cli("fit-pcc --points " + dir.file("pts.csv") + " --out " + dir.file("fit.json") +
              " --curve " + dir.file("curve.csv") + " --svg " + dir.file("curve.svg"));
  CHECK(result.exit_code == 0);
  const auto fit = nlohmann::json::parse(slurp(dir.file("fit.json")));
  CHECK(fit.at("a").get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(fit.at("b").get<double>() == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(slurp(dir.file("curve.csv")).rfind("allocation,predicted_runtime\n", 0) == 0);
  CHECK(slurp(dir.file("curve.svg")).rfind("<svg", 0) == 0);
}

TEST_CASE("gen-workload is byte-reproducible per seed") {
  TempDir dir;
  const std::string flags = " --seed 99 --n-jobs 20 --out ";
  CHECK(run_cli("gen-workload" + flags + dir.file("a.jsonl")).exit_code == 0);
  CHECK(run_cli("gen-workload" + flags + dir.file("b.jsonl")).exit_code == 0);
  CHECK(run_cli("gen-workload --seed 100 --n-jobs 20 --out " + dir.file("c.jsonl")).exit_code == 0);
  CHECK(slurp(dir.file("a.jsonl")) == slurp(dir.file("b.jsonl")));
  CHECK(slurp(dir.file("a.jsonl")) != slurp(dir.file("c.jsonl")));
}

TEST_CASE("exit codes distinguish the failure families") {
  TempDir dir;
  SUBCASE("unknown flag") {
    CHECK(run_cli("simulate --no-such-flag 1").exit_code == 2);
  }
  SUBCASE("unknown subcommand") {
    CHECK(run_cli("frobnicate").exit_code == 2);
  }
  SUBCASE("parse failure") {
    std::ofstream(dir.file("bad.csv")) << "second,tokens\n0,4\n7,1\n";
    const auto result = run_cli("simulate --in " + dir.file("bad.csv") + " --tokens 2 --out " +
                                dir.file("x.csv"));
    CHECK(result.exit_code == 3);
    CHECK(result.out.find("error: parse-error") != std::string::npos);
  }
  SUBCASE("domain error") {
    std::ofstream(dir.file("sky.csv")) << "second,tokens\n0,4\n";
    CHECK(run_cli("simulate --in " + dir.file("sky.csv") + " --tokens 0 --out " +
                  dir.file("x.csv"))
              .exit_code == 7);
  }
  SUBCASE("missing file") {
    CHECK(run_cli("simulate --in /no/such/file.csv --tokens 2 --out " + dir.file("x.csv"))
              .exit_code == 8);
  }
  SUBCASE("version mismatch") {
    CHECK(run_cli("gen-workload --seed 1 --n-jobs 6 --out " + dir.file("w.jsonl")).exit_code == 0);
    CHECK(run_cli("train --data " + dir.file("w.jsonl") +
                  " --model mlp --loss lf2 --seed 1 --config /dev/null --out " +
                  dir.file("m.json"))
              .exit_code == 3);  // /dev/null is not a config
    std::ofstream(dir.file("cfg.json")) << R"({"epochs": 2, "hidden": [4]})";
    CHECK(run_cli("train --data " + dir.file("w.jsonl") + " --model mlp --loss lf2 --seed 1" +
                  " --config " + dir.file("cfg.json") + " --out " + dir.file("m.json"))
              .exit_code == 0);
    auto artifact = nlohmann::json::parse(slurp(dir.file("m.json")));
    artifact["format_version"] = 9;
    std::ofstream(dir.file("m9.json")) << artifact.dump();
    const auto result = run_cli("predict --artifact " + dir.file("m9.json") + " --jobs " +
                                dir.file("w.jsonl") + " --out " + dir.file("p.csv"));
    CHECK(result.exit_code == 4);
    CHECK(result.out.find("version-mismatch") != std::string::npos);
  }
  SUBCASE("config error") {
    CHECK(run_cli("gen-workload --seed 1 --n-jobs 4 --out " + dir.file("w.jsonl")).exit_code == 0);
    std::ofstream(dir.file("cfg.json")) << R"({"epochs": 1, "hidden": [4]})";
    CHECK(run_cli("train --data " + dir.file("w.jsonl") + " --model mlp --loss lf2 --config " +
                  dir.file("cfg.json") + " --out " + dir.file("m.json"))
              .exit_code == 0);
    CHECK(run_cli("recommend --artifact " + dir.file("m.json") + " --jobs " + dir.file("w.jsonl") +
                  " --threshold 0.01 --max-loss 0.05 --out " + dir.file("r.csv"))
              .exit_code == 5);
  }
}

TEST_CASE("pipeline subcommands run end to end") {
  TempDir dir;
  REQUIRE(run_cli("gen-workload --seed 6 --n-jobs 30 --out " + dir.file("w.jsonl")).exit_code == 0);

  SUBCASE("augment writes points and targets") {
    CHECK(run_cli("augment --workload " + dir.file("w.jsonl") + " --out " + dir.file("pts.csv") +
                  " --targets " + dir.file("tgt.csv"))
              .exit_code == 0);
    CHECK(slurp(dir.file("pts.csv")).rfind("job_id,allocation,runtime\n", 0) == 0);
    CHECK(slurp(dir.file("tgt.csv")).rfind("job_id,a,b\n", 0) == 0);
  }
  SUBCASE("select emits a subset and a report") {
    std::ofstream(dir.file("sel.json")) << R"({"k": 3, "subset_size": 10, "per_template_cap": 8})";
    const auto result =
        run_cli("select --workload " + dir.file("w.jsonl") + " --config " + dir.file("sel.json") +
                " --out " + dir.file("subset.jsonl") + " --report " + dir.file("rep.json"));
    CHECK(result.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir.file("rep.json")));
    CHECK(report.at("subset_proportions").size() == 3);
    std::ifstream subset(dir.file("subset.jsonl"));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(subset, line)) ++lines;
    CHECK(lines == 11);  // meta line + 10 jobs
  }
  SUBCASE("evaluate and validate-sim and savings-cdf") {
    std::ofstream(dir.file("cfg.json")) << R"({"epochs": 3, "hidden": [8], "gbrt": {"rounds": 20}})";
    REQUIRE(run_cli("train --data " + dir.file("w.jsonl") + " --model gbrt --seed 1 --config " +
                    dir.file("cfg.json") + " --out " + dir.file("t.json"))
                .exit_code == 0);
    REQUIRE(run_cli("train --data " + dir.file("w.jsonl") + " --model mlp --loss lf2 --seed 1" +
                    " --config " + dir.file("cfg.json") + " --out " + dir.file("m.json"))
                .exit_code == 0);
    const auto eval_result =
        run_cli("evaluate --artifact " + dir.file("t.json") + " --artifact " + dir.file("m.json") +
                " --truth " + dir.file("w.jsonl") + " --out " + dir.file("eval.json") + " --csv " +
                dir.file("eval.csv"));
    CHECK(eval_result.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir.file("eval.json")));
    CHECK(report.at("models").size() == 3);  // gbrt_ss, gbrt_pl, mlp
    const std::string csv = slurp(dir.file("eval.csv"));
    CHECK(csv.rfind("model,pattern_non_increasing,mae_curve_params,median_ae_runtime,n_jobs\n",
                    0) == 0);
    CHECK(csv.find("gbrt_ss") != std::string::npos);
    CHECK(csv.find(",NA,") != std::string::npos);  // the smoothed curve has no parameters

    CHECK(run_cli("validate-sim --workload " + dir.file("w.jsonl") + " --out " +
                  dir.file("vs.json"))
              .exit_code == 0);
    const auto vs = nlohmann::json::parse(slurp(dir.file("vs.json")));
    CHECK(vs.at("n_jobs").get<int>() == 30);

    CHECK(run_cli("savings-cdf --artifact " + dir.file("m.json") + " --workload " +
                  dir.file("w.jsonl") + " --loss 0.05 --out " + dir.file("cdf.csv") + " --svg " +
                  dir.file("cdf.svg"))
              .exit_code == 0);
    CHECK(slurp(dir.file("cdf.csv")).rfind("reduction,cumulative_fraction\n", 0) == 0);
    CHECK(slurp(dir.file("cdf.svg")).rfind("<svg", 0) == 0);

    // LF3 requires a tree-model artifact on the command line
    CHECK(run_cli("train --data " + dir.file("w.jsonl") + " --model mlp --loss lf3 --seed 1" +
                  " --config " + dir.file("cfg.json") + " --out " + dir.file("m3.json"))
              .exit_code == 5);
    CHECK(run_cli("train --data " + dir.file("w.jsonl") + " --model mlp --loss lf3 --seed 1" +
                  " --config " + dir.file("cfg.json") + " --gbrt " + dir.file("t.json") +
                  " --out " + dir.file("m3.json"))
              .exit_code == 0);
  }
}

TEST_CASE("serve answers with the same parameters as predict") {
  TempDir dir;
  REQUIRE(run_cli("gen-workload --seed 3 --n-jobs 8 --out " + dir.file("w.jsonl")).exit_code == 0);
  std::ofstream(dir.file("cfg.json")) << R"({"epochs": 3, "hidden": [8]})";
  REQUIRE(run_cli("train --data " + dir.file("w.jsonl") + " --model mlp --loss lf2 --seed 2" +
                  " --config " + dir.file("cfg.json") + " --out " + dir.file("m.json"))
              .exit_code == 0);
  REQUIRE(run_cli("predict --artifact " + dir.file("m.json") + " --jobs " + dir.file("w.jsonl") +
                  " --out " + dir.file("p.csv"))
              .exit_code == 0);

  // first prediction row for the first job
  double predicted_a = 0.0;
  double predicted_b = 0.0;
  std::string first_job_line;
  {
    std::ifstream preds(dir.file("p.csv"));
    std::string header;
    std::string row;
    std::getline(preds, header);
    std::getline(preds, row);
    const auto c1 = row.find(',');
    const auto c2 = row.find(',', c1 + 1);
    predicted_a = std::stod(row.substr(c1 + 1, c2 - c1 - 1));
    predicted_b = std::stod(row.substr(c2 + 1));
    std::ifstream jobs(dir.file("w.jsonl"));
    std::getline(jobs, first_job_line);  // meta line
    std::getline(jobs, first_job_line);
  }

  // launch the server on an ephemeral port
  int out_pipe[2];
  REQUIRE(pipe(out_pipe) == 0);
  const pid_t pid = fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    const std::string bin = tasq_bin();
    execl(bin.c_str(), bin.c_str(), "serve", "--artifact", dir.file("m.json").c_str(), "--port",
          "0", static_cast<char*>(nullptr));
    _exit(127);
  }
  close(out_pipe[1]);
  std::string banner;
  {
    char c = 0;
    while (read(out_pipe[0], &c, 1) == 1 && c != '\n') banner += c;
  }
  const auto colon = banner.rfind(':');
  REQUIRE(colon != std::string::npos);
  const int port = std::stoi(banner.substr(colon + 1));

  {
    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5, 0);
    const auto response = client.Post("/predict", first_job_line, "application/json");
    REQUIRE(response);
    CHECK(response->status == 200);
    const auto body = nlohmann::json::parse(response->body);
    CHECK(body.at("a").get<double>() == doctest::Approx(predicted_a).epsilon(1e-9));
    CHECK(body.at("b").get<double>() == doctest::Approx(predicted_b).epsilon(1e-9));
    CHECK(body.at("recommended_tokens").get<int>() >= 1);
    CHECK(body.at("model_version").get<std::string>().find("mlp") != std::string::npos);

    const auto bad = client.Post("/predict", "{not json}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
  }

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  close(out_pipe[0]);
}
