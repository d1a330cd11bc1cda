#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "warpsim/corpus.hpp"
#include "warpsim_cli/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = warpsim::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_tmp(const std::string& name, const std::string& text) {
  fs::path p = fs::path(testing::TempDir()) / ("warpsim_cli_" + name);
  std::ofstream(p) << text;
  return p.string();
}

const std::string kFa2 = R"({"levels":[{"sets":1,"assoc":2,"line":64,"policy":"LRU"}]})";

}  // namespace

TEST(Cli, CompareStencilFullyAssociative) {
  std::string prog = write_tmp("stencil.json", warpsim::corpus_get("stencil1d"));
  std::string cache = write_tmp("fa2.json", kFa2);
  Outcome r = run({"--program", prog, "--cache", cache, "--mode", "compare", "--output", "json", "--self-check"});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"]["warp"]["levels"][0]["misses"], 1997);
  EXPECT_EQ(j["results"]["nowarp"]["levels"][0]["misses"], 1997);
  EXPECT_TRUE(j["compare"]["counts_equal"].get<bool>());
  EXPECT_TRUE(j["compare"]["states_equal"].get<bool>());
  EXPECT_GE(j["results"]["warp"]["warps"].get<int>(), 1);
  EXPECT_EQ(j["results"]["warp"]["self_check"]["failures"], 0);
  EXPECT_TRUE(j.contains("metadata"));
}

TEST(Cli, TrimatvecOnLargePlru) {
  std::string prog = write_tmp("trimatvec.json", warpsim::corpus_get("trimatvec"));
  std::string cache = write_tmp("plru.json", R"({"levels":[{"sets":64,"assoc":8,"line":64,"policy":"PLRU"}]})");
  Outcome r = run({"--program", prog, "--cache", cache, "--mode", "compare"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, BundledKernel) {
  std::string cache = write_tmp("fa2.json", kFa2);
  Outcome r = run({"--kernel", "stencil1d", "--cache", cache, "--mode", "warp"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["results"]["warp"]["levels"][0]["misses"], 1997);
  Outcome l = run({"--list-kernels"});
  EXPECT_EQ(l.code, 0);
  EXPECT_NE(l.out.find("stencil1d\n"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  std::string cache = write_tmp("fa2.json", kFa2);
  std::string bad_json = write_tmp("bad.json", "{\"arrays\": [");
  EXPECT_EQ(run({"--program", bad_json, "--cache", cache}).code, 1);
  EXPECT_EQ(run({"--program", bad_json}).code, 1);
  EXPECT_EQ(run({"--cache", cache, "--kernel", "stencil1d", "--mode", "fast"}).code, 1);
  EXPECT_EQ(run({"--cache", cache, "--kernel", "no-such-kernel"}).code, 1);
  EXPECT_EQ(run({"--cache", "/nonexistent/c.json", "--kernel", "stencil1d"}).code, 1);

  std::string oob = write_tmp("oob.json", R"({"arrays":[{"name":"A","elem_size":8,"dims":[4]}],
    "root":{"type":"loop","iter":"i","bounds":[{"expr":{"i":1},"rel":">=0"},{"expr":{"i":-1,"_const":9},"rel":">=0"}],
    "body":[{"type":"access","kind":"read","array":"A","idx":[{"i":1}]}]}})");
  Outcome r = run({"--program", oob, "--cache", cache});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());

  std::string bad_cache = write_tmp("c3.json", R"({"levels":[{"sets":3,"assoc":2,"line":64}]})");
  EXPECT_EQ(run({"--kernel", "stencil1d", "--cache", bad_cache}).code, 2);
}

TEST(Cli, CsvColumns) {
  std::string cache = write_tmp("two.json", R"({"levels":[{"sets":4,"assoc":2,"line":64,"policy":"FIFO"},
    {"sets":16,"assoc":4,"line":64,"policy":"FIFO"}]})");
  Outcome r = run({"--kernel", "stencil1d", "--cache", cache, "--output", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header,
            "engine,level,accesses,hits,misses,writebacks,explicit_accesses,warped_accesses,explicit_iterations,warps");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 4);  // two engines, two levels
}

TEST(Cli, WarpLogAndStateDump) {
  std::string cache = write_tmp("s4.json", R"({"levels":[{"sets":4,"assoc":2,"line":64,"policy":"LRU"}]})");
  std::string log = (fs::path(testing::TempDir()) / "warpsim_cli_log.jsonl").string();
  Outcome r = run({"--kernel", "stencil1d", "--cache", cache, "--mode", "warp", "--warp-log", log, "--dump-state"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(log);
  std::string line;
  int fired = 0, lines = 0;
  while (std::getline(in, line)) {
    json e = json::parse(line);
    ++lines;
    if (e["fired"].get<bool>()) {
      ++fired;
      EXPECT_EQ(e["n"], 993);
      EXPECT_EQ(e["rotation"], json::array({1}));
      EXPECT_EQ(e["misses"], json::array({1986}));
    } else {
      EXPECT_FALSE(e["reason"].get<std::string>().empty());
    }
  }
  EXPECT_EQ(fired, 1);
  EXPECT_GE(lines, 1);
  json j = json::parse(r.out);
  ASSERT_TRUE(j.contains("final_state"));
  EXPECT_EQ(j["final_state"][0].size(), 4u);
}
