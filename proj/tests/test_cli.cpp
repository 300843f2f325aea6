#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dage/cli.hpp"
#include "dage/error.hpp"

namespace fs = std::filesystem;
using namespace dage;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dage_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// The error line comes after any config echo.
std::string last_line(const std::string& text) {
  const auto end = text.find_last_not_of('\n');
  if (end == std::string::npos) return "";
  const auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, Answer) {
  const fs::path dir = scratch("answer");
  write(dir / "kg.tsv", "a\tr\tc\na\tr\tb\nd\ts\tb\n");
  const CliRun r = run({"answer", "--kg", (dir / "kg.tsv").string(), "--query", "exists (inv r) . {a}"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "b\nc\n");
  const CliRun bad = run({"answer", "--kg", (dir / "kg.tsv").string(), "--query", "exists r . "});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(last_line(bad.err).rfind("error: ParseError: ", 0), 0u) << bad.err;
  const CliRun missing = run({"answer", "--kg", (dir / "none.tsv").string(), "--query", "{a}"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(last_line(missing.err).rfind("error: IoError: ", 0), 0u) << missing.err;
}

TEST(Cli, Relax) {
  const CliRun r = run({"relax", "--query", "exists (inv (r1 ; (r2 & r3))) . {e1}"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "exists (inv r2 ; inv r1) . {e1} & exists (inv r3 ; inv r1) . {e1}\n");
}

TEST(Cli, Gradcheck) {
  for (const char* g : {"box", "beta", "cone"}) {
    const CliRun ok = run({"gradcheck", "--geometry", g, "--seed", "1"});
    EXPECT_EQ(ok.code, 0) << g << ok.out << ok.err;
    EXPECT_EQ(ok.out.rfind("operator,max_rel_error,checked,skipped,unresolved,status\n", 0), 0u);
  }
  const CliRun bad = run({"gradcheck", "--geometry", "box", "--seed", "1", "--inject-fault"});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.out.find(",FAIL"), std::string::npos) << bad.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  const CliRun geo = run({"gradcheck", "--geometry", "sphere"});
  EXPECT_EQ(geo.code, 1);
  EXPECT_EQ(last_line(geo.err).rfind("error: UsageError: ", 0), 0u) << geo.err;
  EXPECT_EQ(run({"gradcheck", "--points", "abc"}).code, 1);
  const fs::path dir = scratch("usage");
  write(dir / "c.cfg", "bogus = 1\n");
  const CliRun key = run({"synth", "--config", (dir / "c.cfg").string(), "--out", dir.string()});
  EXPECT_EQ(key.code, 1);
  EXPECT_NE(key.err.find("bogus"), std::string::npos);
}

TEST(Cli, ConfigText) {
  const auto c = parse_config_text("# comment\n  a = 1 \nb=two words # trailing\n\n");
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.at("a"), "1");
  EXPECT_EQ(c.at("b"), "two words");
  EXPECT_THROW(parse_config_text("a = 1\na = 2\n"), UsageError);
  EXPECT_THROW(parse_config_text("no equals sign\n"), UsageError);
  EXPECT_THROW(read_config_file("/nonexistent/dage.cfg"), IoError);
}

TEST(Cli, FlagsOverrideConfig) {
  const fs::path dir = scratch("override");
  write(dir / "c.cfg", "width = 4\nheight = 3\nseed = 9\nout = " + (dir / "ignored").string() + "\n");
  const CliRun r = run({"synth", "--config", (dir / "c.cfg").string(), "--out", (dir / "g").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "g" / kFullGraphFile));
  EXPECT_FALSE(fs::exists(dir / "ignored"));
  EXPECT_NE(r.err.find("# width = 4"), std::string::npos) << r.err;
}

TEST(Cli, PipelineIsDeterministic) {
  std::string model_bytes[2], split_bytes[2], report[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = scratch("pipe" + std::to_string(k));
    ASSERT_EQ(run({"synth", "--width", "8", "--height", "6", "--seed", "3", "--out", (dir / "g").string()}).code, 0);
    write(dir / "gen.cfg", "kg_train = " + (dir / "g" / kTrainGraphFile).string() + "\nkg_full = " +
                               (dir / "g" / kFullGraphFile).string() +
                               "\ntypes = 2s,is\nn_train = 20\nn_valid = 2\nn_test_easy = 2\nn_test_hard = 2\n"
                               "max_retries = 20000\nseed = 4\n");
    const CliRun gen = run({"generate", "--config", (dir / "gen.cfg").string(), "--out", (dir / "d").string()});
    ASSERT_EQ(gen.code, 0) << gen.err;
    EXPECT_EQ(gen.out.rfind("split,count\n", 0), 0u);
    const CliRun tr = run({"train", "--data", (dir / "d").string(), "--out", (dir / "m.bin").string(), "--steps", "5",
                        "--dim", "4", "--seed", "2"});
    ASSERT_EQ(tr.code, 0) << tr.err;
    EXPECT_TRUE(fs::exists(dir / "loss.csv"));
    const CliRun ev = run({"eval", "--model", (dir / "m.bin").string(), "--data", (dir / "d").string()});
    ASSERT_EQ(ev.code, 0) << ev.err;
    const CliRun an = run({"analyze", "--data", (dir / "d").string()});
    ASSERT_EQ(an.code, 0) << an.err;
    EXPECT_EQ(an.out.rfind("bucket,count\n", 0), 0u);
    model_bytes[k] = slurp(dir / "m.bin");
    split_bytes[k] = slurp(dir / "d" / "train.jsonl");
    report[k] = ev.out;
  }
  EXPECT_FALSE(model_bytes[0].empty());
  EXPECT_EQ(model_bytes[0], model_bytes[1]);
  EXPECT_EQ(split_bytes[0], split_bytes[1]);
  EXPECT_EQ(report[0], report[1]);
}
