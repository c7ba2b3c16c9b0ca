#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ebmlab/error.hpp"
#include "ebmlab/lab/csv.hpp"
#include "ebmlab/lab/manifest.hpp"

namespace lab = ebmlab::lab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ebmlab-test-csv";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("reals use 17 significant digits and round-trip") {
  CHECK(lab::format_real(0.1) == "0.10000000000000001");
  CHECK(lab::format_real(1.0) == "1");
  CHECK(lab::format_real(-2.5e-300) == "-2.5e-300");
  CHECK(lab::format_real(1.0 / 3.0) == "0.33333333333333331");
  CHECK(lab::format_real(std::nan("")) == "nan");
  CHECK(lab::format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(lab::format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -0.0}) {
    CHECK(std::strtod(lab::format_real(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("quoting") {
  CHECK(lab::quote_field("plain") == "plain");
  CHECK(lab::quote_field("a,b") == "\"a,b\"");
  CHECK(lab::quote_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(lab::quote_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("table rendering") {
  lab::Table t;
  t.header = {"t", "kl", "expected_potential"};
  CHECK(lab::to_csv(t) == "t,kl,expected_potential\n");
  t.add_row({std::int64_t{0}, 0.5, std::string("x,y")});
  CHECK(lab::to_csv(t) == "t,kl,expected_potential\n0,0.5,\"x,y\"\n");
  CHECK_THROWS_AS(t.add_row({1.0}), ebmlab::Error);
}

TEST_CASE("emit_csv writes identical bytes and reports failures") {
  lab::Table t;
  t.header = {"a", "b"};
  for (int i = 0; i < 10; ++i) t.add_row({std::int64_t{i}, std::sqrt(static_cast<double>(i))});
  const auto p1 = scratch("one.csv");
  const auto p2 = scratch("two.csv");
  lab::emit_csv(t, p1);
  lab::emit_csv(t, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(slurp(p1).find('\r') == std::string::npos);

  lab::Table empty;
  empty.header = {"only", "header"};
  lab::emit_csv(empty, scratch("empty.csv"));
  CHECK(slurp(scratch("empty.csv")) == "only,header\n");

  try {
    lab::emit_csv(t, scratch("missing-dir") / "nested" / "x.csv");
    FAIL("expected IoFailure");
  } catch (const ebmlab::Error& e) {
    CHECK(e.kind() == ebmlab::ErrorKind::kIoFailure);
  }
}

TEST_CASE("manifest exit codes and uniqueness") {
  lab::RunManifest m;
  CHECK(m.exit_code() == 0);
  m.add({"a/x", true, 0.0, 1.0, "", lab::Failure::kNone});
  CHECK(m.exit_code() == 0);
  CHECK_THROWS_AS(m.add({"a/x", true, 0.0, 1.0, "", lab::Failure::kNone}), ebmlab::Error);
  m.add({"a/y", false, 2.0, 1.0, "", lab::Failure::kInvariant});
  CHECK(m.exit_code() == 3);
  m.add({"a/z", false, 0.0, 0.0, "", lab::Failure::kNumerical});
  CHECK(m.exit_code() == 4);
  const std::string json = lab::to_json(m);
  CHECK(json.find("\"a/y\"") != std::string::npos);
  CHECK(json.find("\"exit_code\": 4") != std::string::npos);
}
