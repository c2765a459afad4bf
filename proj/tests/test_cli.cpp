#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef SEPOLML_BIN
#error "SEPOLML_BIN must point at the command-line binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

// Runs the CLI through the shell and captures the real process exit code.
// Exit codes are part of the tool's contract: 0 success, 1 configuration
// or usage problems, 2 data/processing errors, 3 internal errors.
RunResult run_cli(const std::string& args) {
  const auto capture = std::filesystem::temp_directory_path() / "sepolml_cli_capture.txt";
  const std::string command =
      std::string(SEPOLML_BIN) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(command.c_str());
  RunResult result;
#ifdef _WIN32
  result.exit_code = status;
#else
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
  std::ifstream file(capture);
  result.output.assign(std::istreambuf_iterator<char>(file), {});
  std::filesystem::remove(capture);
  return result;
}

std::filesystem::path write_fixture(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream file(path);
  file << text;
  return path;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
  const RunResult version = run_cli("--version");
  CHECK(version.exit_code == 0);
  CHECK(version.output.find('.') != std::string::npos);
}

TEST_CASE("parse echoes a canonical policy and exits 0") {
  const auto fixture = write_fixture("cli_parse_ok.te",
                                     "type httpd_t;\ntype httpd_log_t;\n"
                                     "allow httpd_t httpd_log_t:file { read write };\n");
  const RunResult result = run_cli("parse " + fixture.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("allow httpd_t httpd_log_t:file { read write };") !=
        std::string::npos);
}

TEST_CASE("parse reports syntax errors with exit code 2") {
  const auto fixture = write_fixture("cli_parse_bad.te", "allow a b file read;\n");
  const RunResult result = run_cli("parse " + fixture.string());
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("parse error at") != std::string::npos);
  CHECK(result.output.find("1:11") != std::string::npos);
}

TEST_CASE("strict mode rejects undeclared types; lenient mode warns") {
  const auto fixture = write_fixture("cli_parse_undeclared.te", "allow a b:file read;\n");
  CHECK(run_cli("parse " + fixture.string()).exit_code == 2);
  const RunResult lenient = run_cli("parse --mode lenient " + fixture.string());
  CHECK(lenient.exit_code == 0);
  CHECK(lenient.output.find("allow a b:file { read };") != std::string::npos);
}

TEST_CASE("graph emits JSON and Cypher") {
  const auto fixture = write_fixture("cli_graph.te",
                                     "type a_t;\ntype b_t;\nallow a_t b_t:file read;\n");
  const RunResult json = run_cli("graph " + fixture.string());
  CHECK(json.exit_code == 0);
  CHECK(json.output.find("\"nodes\"") != std::string::npos);
  const RunResult cypher = run_cli("graph --format cypher " + fixture.string());
  CHECK(cypher.exit_code == 0);
  CHECK(cypher.output.find("CREATE (n0:Subject {name: 'a_t'})") != std::string::npos);
}

TEST_CASE("usage problems exit with code 1") {
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("parse /no/such/file.te").exit_code == 1);   // flagged by option validation
  CHECK(run_cli("generate").exit_code == 1);                 // seed is required
  const RunResult missing_seed = run_cli("generate");
  CHECK(missing_seed.output.find("seed") != std::string::npos);
}

TEST_CASE("a tiny end-to-end pipeline run succeeds from the command line") {
  const auto dir = std::filesystem::temp_directory_path() / "sepolml_cli_pipeline";
  std::filesystem::remove_all(dir);
  const RunResult result =
      run_cli("pipeline --seed 7 --output-dir " + dir.string() +
              " --examples-per-label 2 --test-fraction 0.5 --models random_forest"
              " --dimensions 8 --walks-per-node 2 --walk-length 10 --embed-epochs 2");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("Per-label recall") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "report.txt"));
  CHECK(std::filesystem::exists(dir / "model_random_forest.json"));

  // predict consumes the artifacts the pipeline just wrote.
  const RunResult predict =
      run_cli("predict " + (dir / "corpus.te").string() + " --model " +
              (dir / "model_random_forest.json").string() + " --embeddings " +
              (dir / "embeddings.txt").string());
  CHECK(predict.exit_code == 0);
  CHECK(predict.output.find("example_id,predicted_class,description") != std::string::npos);
}
