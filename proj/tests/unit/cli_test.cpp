#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <random>

#include "cadenza/midi.h"
#include "fixtures.h"

namespace cadenza {
namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult RunCli(const std::string& args) {
  std::string command = std::string(CADENZA_CLI) + " " + args + " 2>&1";
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) result.output.append(buf.data(), n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string Quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng{std::random_device{}()};
    dir_ = std::filesystem::temp_directory_path() / ("cadenza-cli-test-" + std::to_string(rng()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path Fixture(const char* name) const { return testing::FixtureDir() / name; }

  std::filesystem::path dir_;
};

TEST_F(CliTest, AnalyzeWav) {
  RunResult r = RunCli("analyze --in " + Quote(Fixture("demo.wav")));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("Key: D major"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("Chords: D G"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("Degrees: I IV"), std::string::npos) << r.output;
}

TEST_F(CliTest, AnalyzeMidi) {
  RunResult r = RunCli("analyze --in " + Quote(Fixture("demo.mid")));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("Degrees: I IV"), std::string::npos) << r.output;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli("analyze --in " + Quote(dir_ / "missing.wav")).exit_code, 3);
  EXPECT_EQ(RunCli("analyze --bogus").exit_code, 2);
  EXPECT_EQ(RunCli("").exit_code, 2);
  EXPECT_EQ(RunCli("continue --in " + Quote(Fixture("demo.wav")) + " --level expert").exit_code, 2);
  std::ofstream(dir_ / "song.mp3") << "ID3\x03 not really audio";
  EXPECT_EQ(RunCli("analyze --in " + Quote(dir_ / "song.mp3")).exit_code, 3);
  RunResult help = RunCli("--help");
  EXPECT_EQ(help.exit_code, 0);
  EXPECT_NE(help.output.find("continue"), std::string::npos);
}

TEST_F(CliTest, ContinueMatchesGoldenFile) {
  auto out = dir_ / "out.mid";
  RunResult r = RunCli("continue --in " + Quote(Fixture("demo.wav")) + " --phrases 1 --seed 42 --out " + Quote(out));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("7 measures, 1 phrases"), std::string::npos) << r.output;
  EXPECT_EQ(testing::ReadBytes(out), testing::ReadBytes(Fixture("golden_out.mid")));
}

TEST_F(CliTest, ZeroPhrasesGivesInputAndCadence) {
  auto out = dir_ / "short.mid";
  RunResult r = RunCli("continue --in " + Quote(Fixture("demo.mid")) + " --phrases 0 --out " + Quote(out));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  Score score = midi::SmfToScore(midi::ParseSmf(testing::ReadBytes(out)), {.monophonic = false});
  EXPECT_EQ(score.measure_count(), 3u);
}

TEST_F(CliTest, ReportCoversEveryAspect) {
  auto report = dir_ / "report.md";
  RunResult r = RunCli("continue --in " + Quote(Fixture("demo.wav")) + " --phrases 2 --level advanced --out " +
                    Quote(dir_ / "o.mid") + " --report " + Quote(report));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::ifstream in(report);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (const char* heading : {"## Phrase 1", "## Phrase 2", "### Chords", "### Rhythm", "### Embellishment"}) {
    EXPECT_NE(text.find(heading), std::string::npos) << heading;
  }
}

TEST_F(CliTest, ServeFailsOnBusyPort) {
  int fd = socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(listen(fd, 1), 0);
  socklen_t len = sizeof addr;
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  RunResult r = RunCli("serve --port " + std::to_string(ntohs(addr.sin_port)) + " --data-dir " + Quote(dir_));
  close(fd);
  EXPECT_EQ(r.exit_code, 4) << r.output;
  EXPECT_EQ(RunCli("serve --port 70000").exit_code, 2);
}

}  // namespace
}  // namespace cadenza
