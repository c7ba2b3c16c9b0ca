#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kData = LAB_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ebmlab-test-cli" / name;
  fs::remove_all(dir);
  return dir;
}

int run_lab(const std::string& args) {
  const std::string command =
      std::string("\"") + LAB_EXECUTABLE + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char ch : text) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("config errors exit with 2") {
  const auto out = scratch("errors");
  CHECK(run_lab("evolve --config " + (kData / "bad_beta.json").string() + " --out " +
                out.string()) == 2);
  CHECK(run_lab("evolve --config " + (kData / "bad_key.json").string() + " --out " +
                out.string()) == 2);
  CHECK(run_lab("evolve --config " + (kData / "malformed.json").string() + " --out " +
                out.string()) == 2);
  CHECK(run_lab("evolve --config " + (kData / "missing.json").string()) == 2);
  CHECK(run_lab("no-such-experiment") == 2);
  CHECK(run_lab("") == 2);
  // The config names verify-db; only `all` may override it.
  CHECK(run_lab("evolve --config " + (kData / "verify7.json").string() + " --out " +
                out.string()) == 2);
}

TEST_CASE("verify-db passes and writes a manifest") {
  const auto out = scratch("verify");
  CHECK(run_lab("verify-db --config " + (kData / "verify7.json").string() + " --out " +
                out.string()) == 0);
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"verify-db/detailed-balance\"") != std::string::npos);
  CHECK(manifest.find("\"exit_code\": 0") != std::string::npos);
  CHECK(fs::exists(out / "verify-db.csv"));
}

TEST_CASE("evolve writes steps + 1 data rows") {
  const auto out = scratch("evolve");
  CHECK(run_lab("evolve --config " + (kData / "evolve.json").string() + " --out " +
                out.string()) == 0);
  const std::string csv = slurp(out / "evolve.csv");
  CHECK(csv.rfind("t,kl,expected_potential\n", 0) == 0);
  CHECK(count_lines(csv) == 202);
}

TEST_CASE("entropy trace on an all-correct family is non-applicable but passes") {
  const auto out = scratch("trace");
  CHECK(run_lab("entropy-trace --config " + (kData / "all_correct.json").string() + " --out " +
                out.string()) == 0);
  const std::string csv = slurp(out / "entropy-trace.csv");
  CHECK(csv.rfind("n,lambda,mean_R,mean_H,kl_mean,jensen_margin\n", 0) == 0);
  CHECK(slurp(out / "manifest.json").find("non-applicable") != std::string::npos);
}

TEST_CASE("seed override changes the digest") {
  const auto a = scratch("seed-a");
  const auto b = scratch("seed-b");
  CHECK(run_lab("verify-db --config " + (kData / "verify7.json").string() + " --out " +
                a.string()) == 0);
  CHECK(run_lab("verify-db --config " + (kData / "verify7.json").string() + " --seed 8 --out " +
                b.string()) == 0);
  CHECK(slurp(a / "verify-db.csv") != slurp(b / "verify-db.csv"));
}
