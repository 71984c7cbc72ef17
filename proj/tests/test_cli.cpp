#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopix/image.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("geopix_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

class RemoveScratch : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(scratch()); }
};

[[maybe_unused]] auto* const remove_scratch = ::testing::AddGlobalTestEnvironment(new RemoveScratch);

Run cli(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = env + " '" GEOPIX_CLI "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Column value from the first data row of a report.
double report_value(const std::string& csv, const std::string& column, std::size_t row = 1) {
  const auto ls = lines(csv);
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    return cells;
  };
  const auto header = split(ls.at(0)), cells = split(ls.at(row));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) return std::stod(cells.at(i));
  }
  throw std::runtime_error("no column " + column);
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto r = cli("gen --task maxap --count 100 --points 7..12 --seed 1 --out " + data().string());
    ASSERT_EQ(r.code, 0) << r.err;
    gen_stdout() = r.out;
  }
  static fs::path data() { return scratch() / "maxap_data"; }
  static fs::path split_dir() { return data() / "maxap" / "train"; }
  static std::string& gen_stdout() {
    static std::string s;
    return s;
  }
};

}  // namespace

TEST_F(Cli, GenCountContract) {
  const auto shards = lines(gen_stdout());
  ASSERT_EQ(shards.size(), 1u);
  EXPECT_NE(shards[0].find("shard_00000\t100\t"), std::string::npos) << shards[0];
  EXPECT_TRUE(fs::exists(split_dir() / "shard_00000" / "SHA256SUMS"));
  EXPECT_FALSE(fs::exists(split_dir() / "shard_00001"));
  EXPECT_EQ(lines(slurp(split_dir() / "shard_00000" / "manifest.jsonl")).size(), 100u);
}

TEST_F(Cli, GenIsDeterministic) {
  const auto r = cli("gen --task maxap --count 100 --points 7..12 --seed 1 --out " + (scratch() / "again").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out)[0].substr(r.out.find('\t')), lines(gen_stdout())[0].substr(gen_stdout().find('\t')));
}

TEST_F(Cli, EvalOracleRoundTrip) {
  const auto r = cli("eval --shard " + split_dir().string() + " --out " + (scratch() / "eval").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(report_value(r.out, "valid_rate"), 1.0);
  EXPECT_DOUBLE_EQ(report_value(r.out, "ratio_mean"), 1.0);
  EXPECT_DOUBLE_EQ(report_value(r.out, "total"), 100.0);
  const auto report = nlohmann::json::parse(slurp(scratch() / "eval" / "report.json"));
  EXPECT_EQ(report.at("rows").at(0).at("valid_rate"), 1.0);
  EXPECT_EQ(lines(slurp(scratch() / "eval" / "records.jsonl")).size(), 100u);
}

TEST_F(Cli, ExtractEmitsOneLinePerImage) {
  const auto r = cli("extract --shard " + (split_dir() / "shard_00000").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 100u);
  const auto first = nlohmann::json::parse(ls[0]);
  EXPECT_TRUE(first.at("valid").get<bool>());
  EXPECT_TRUE(first.at("structure").contains("order"));
}

TEST_F(Cli, RandomBaselineThroughSamplesAndBestOf) {
  const fs::path exact = scratch() / "exact", random = scratch() / "random";
  ASSERT_EQ(cli("solve --shard " + split_dir().string() + " --mode random --seed 2 --out " + random.string()).code, 0);
  ASSERT_EQ(cli("solve --shard " + split_dir().string() + " --mode exact --seed 7 --out " + exact.string()).code, 0);

  const auto r = cli("eval --shard " + split_dir().string() + " --samples " + (random / "samples.jsonl").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(report_value(r.out, "valid_rate"), 1.0);
  EXPECT_LT(report_value(r.out, "ratio_mean"), 0.95);

  // Both sample sets in one manifest; seeds 2 (random) and 7 (exact).
  std::ofstream both(scratch() / "both.jsonl");
  for (const auto& [dir, name] : {std::pair{random, "random"}, std::pair{exact, "exact"}}) {
    for (const auto& l : lines(slurp(dir / "samples.jsonl"))) {
      auto j = nlohmann::json::parse(l);
      j["path"] = std::string(name) + "/" + j.at("path").get<std::string>();
      both << j.dump() << "\n";
    }
  }
  both.close();
  const auto best2 = cli("eval --best-of 2 --shard " + split_dir().string() + " --samples " +
                         (scratch() / "both.jsonl").string());
  ASSERT_EQ(best2.code, 0) << best2.err;
  EXPECT_DOUBLE_EQ(report_value(best2.out, "ratio_mean"), 1.0);
  EXPECT_DOUBLE_EQ(report_value(best2.out, "total"), 100.0);
  const auto best1 = cli("eval --best-of 1 --shard " + split_dir().string() + " --samples " +
                         (scratch() / "both.jsonl").string());
  EXPECT_DOUBLE_EQ(report_value(best1.out, "ratio_mean"), report_value(r.out, "ratio_mean"));
}

TEST_F(Cli, RenderWritesComparisonPanels) {
  const fs::path random = scratch() / "random_render";
  ASSERT_EQ(cli("solve --shard " + split_dir().string() + " --mode random --out " + random.string()).code, 0);
  const auto r = cli("render --shard " + split_dir().string() + " --samples " + (random / "samples.jsonl").string() +
                     " --instance maxap_train_00000003 --out " + (scratch() / "render").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 1u);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  ASSERT_TRUE(png_image_begin_read_from_file(&image, ls[0].c_str()));
  EXPECT_EQ(image.width, 3u * 128u + 8u);
  EXPECT_EQ(image.height, 128u);
  png_image_free(&image);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  const fs::path cfg = scratch() / "config.json";
  std::ofstream(cfg) << R"({"task": "maxap", "seed": 5, "points": "7..8", "splits": {"val": 3}})";
  const auto from_file = cli("gen --config " + cfg.string() + " --out " + (scratch() / "c1").string());
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_TRUE(fs::exists(scratch() / "c1" / "maxap" / "val" / "shard_00000"));
  const auto from_flags = cli("gen --task maxap --seed 5 --points 7..8 --count 3 --split val --out " +
                              (scratch() / "c2").string());
  ASSERT_EQ(from_flags.code, 0) << from_flags.err;
  auto checksum = [](const std::string& out) { return out.substr(out.rfind('\t') + 1); };
  EXPECT_EQ(checksum(from_file.out), checksum(from_flags.out));

  const auto overridden = cli("gen --config " + cfg.string() + " --seed 6 --out " + (scratch() / "c3").string());
  const auto direct = cli("gen --task maxap --seed 6 --points 7..8 --count 3 --split val --out " +
                          (scratch() / "c4").string());
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(checksum(overridden.out), checksum(direct.out));
  EXPECT_NE(checksum(overridden.out), checksum(from_file.out));
}

TEST(CliErrors, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("gen --task maxap --count 1 --points 2..3").code, 2);
  EXPECT_EQ(cli("gen --task maxap --count 1 --points 7..16").code, 2);
  EXPECT_EQ(cli("gen --task square --count 1 --points 1..6").code, 2);
  EXPECT_EQ(cli("gen --task steiner --count 1 --points 1..4").code, 2);
  EXPECT_EQ(cli("gen --task circle --count 1").code, 2);
  EXPECT_EQ(cli("gen --task maxap --count 1 --points 9..7").code, 2);
  EXPECT_EQ(cli("gen --task maxap --count 1 --thresholds '{\"edge_fraction\": 2}'").code, 2);
  EXPECT_EQ(cli("gen --task maxap --count 1 --thresholds '{\"bogus\": 1}'").code, 2);
  EXPECT_EQ(cli("eval --shard " + (scratch() / "nowhere").string()).code, 2);
  EXPECT_EQ(cli("gen --help").code, 0);
}

TEST(CliErrors, ExactSolveBeyondLimitFailsPerInstance) {
  const fs::path data = scratch() / "steiner9";
  const auto g = cli("gen --task steiner --count 2 --points 9..9 --seed 4 --out " + data.string());
  ASSERT_EQ(g.code, 0) << g.err;
  const auto r = cli("solve --task steiner --mode exact --shard " + (data / "steiner" / "train").string() +
                     " --out " + (scratch() / "solve9").string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("steiner_train_00000000"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("steiner_train_00000001"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("at most"), std::string::npos) << r.err;

  const auto heur = cli("solve --mode heuristic --shard " + (data / "steiner" / "train").string() + " --out " +
                        (scratch() / "solve9h").string());
  EXPECT_EQ(heur.code, 0) << heur.err;
  const auto wrong = cli("solve --task maxap --mode exact --shard " + (data / "steiner" / "train").string());
  EXPECT_EQ(wrong.code, 2);
}

TEST(CliErrors, LogLevelFromEnvironment) {
  const auto quiet = cli("gen --task maxap --count 1 --out " + (scratch() / "log1").string());
  EXPECT_EQ(quiet.err.find("gen config"), std::string::npos);
  const auto loud = cli("gen --task maxap --count 1 --out " + (scratch() / "log2").string(), "GEOPIX_LOG=info");
  EXPECT_NE(loud.err.find("gen config"), std::string::npos) << loud.err;
}
