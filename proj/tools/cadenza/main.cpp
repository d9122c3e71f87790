// cadenza: batch front end for the composition engine, and the service launcher.
//
// Exit codes:
//   0  success
//   2  usage error (bad flags or values)
//   3  input format error (unreadable file, malformed WAV/SMF, unsupported media)
//   4  engine error (no notes, polyphonic input, corpus exhausted, bind failure...)

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

#include "CLI11.hpp"
#include "cadenza/corpus.h"
#include "cadenza/errors.h"
#include "cadenza/explainer.h"
#include "cadenza/service/server.h"
#include "cadenza/session.h"

namespace {

using namespace cadenza;

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitEngine = 4;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kParseError:
    case ErrorCode::kMalformedHeader:
    case ErrorCode::kTruncatedChunk:
    case ErrorCode::kUnmatchedNoteOn:
    case ErrorCode::kMalformedRiff:
    case ErrorCode::kUnsupportedEncoding:
    case ErrorCode::kUnsupportedMediaType:
      return kExitInput;
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    default:
      return kExitEngine;
  }
}

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

Session ProcessedSession(const std::filesystem::path& in, int bpm, const GenerationConfig& config,
                         const CorpusDb& db) {
  auto bytes = ReadFile(in);
  Session session("cli", config, db);
  UploadKind kind = DetectUploadKind(in.filename().string(), "", bytes);
  session.Upload(kind, std::move(bytes));
  session.Process(bpm);
  return session;
}

struct AnalyzeArgs {
  std::string in;
  int bpm = 120;
};

int RunAnalyze(const AnalyzeArgs& args) {
  CorpusDb db = LoadCorpusFromDir();
  Session session = ProcessedSession(args.in, args.bpm, {}, db);
  const MelodyAnalysis& a = session.piece().analysis;
  std::vector<std::string> chords;
  for (const auto& c : a.chords) chords.push_back(c ? c->Display() : "-");
  std::cout << "Key: " << a.key.Name() << (a.ranking.ambiguous ? " (ambiguous)" : "") << "\n";
  std::cout << "Chords:";
  for (const auto& c : chords) std::cout << ' ' << c;
  std::cout << "\nDegrees: " << JoinDegrees(a.degrees, " ") << "\n";
  std::cout << "Fitted rhythm: " << a.fitted_rhythm << " (" << db.Rhythm(a.fitted_rhythm).style << "), distance "
            << a.fit_distance << "\n";
  std::cout << "Measures: " << session.piece().input_measures << "\n";
  return 0;
}

struct ContinueArgs {
  std::string in;
  int phrases = 1;
  std::uint64_t seed = 42;
  int bpm = 120;
  std::string level = "beginner";
  std::string out = "out.mid";
  std::string report;
  double substitution_probability = GenerationConfig{}.substitution_probability;
  double ornament_rate = GenerationConfig{}.ornament_rate;
};

int RunContinue(const ContinueArgs& args) {
  Level level = ParseLevel(args.level);
  GenerationConfig config;
  config.seed = args.seed;
  config.substitution_probability = args.substitution_probability;
  config.ornament_rate = args.ornament_rate;
  CorpusDb db = LoadCorpusFromDir();
  Session session = ProcessedSession(args.in, args.bpm, config, db);
  for (int i = 0; i < args.phrases; ++i) session.Continue();
  session.End();
  auto midi = session.ExportMidi();
  WriteFile(args.out, std::string_view(reinterpret_cast<const char*>(midi.data()), midi.size()));
  if (!args.report.empty()) WriteFile(args.report, RenderReport(session.piece(), db, level));
  std::cout << "Wrote " << args.out << " (" << session.piece().score.measure_count() << " measures, "
            << session.piece().phrases.size() << " phrases)\n";
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
};

service::Server* g_server = nullptr;

void OnSignal(int) {
  if (g_server) g_server->Stop();
}

int RunServe(const ServeArgs& args) {
  CorpusDb db = LoadCorpusFromDir();
  CannedMentor canned = CannedMentor::Load(DefaultDataDir() / "mentor_responses.txt");
  service::ServerOptions options;
  options.host = args.host;
  options.port = args.port;
  options = service::ApplyEnvironment(options);
  if (!args.data_dir.empty()) options.data_dir = args.data_dir;
  service::Server server(options, db, std::move(canned));
  int port = 0;
  try {
    port = server.Bind();
  } catch (const Error& e) {
    std::cerr << "cadenza: " << e.what() << "\n";
    return kExitEngine;
  }
  std::cout << "cadenza listening on http://" << args.host << ":" << port << "/api/v1" << std::endl;
  g_server = &server;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  server.Run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cadenza: continue a hummed or MIDI melody into a two-hand piano piece"};
  app.set_config("--config", "", "Key-value config file; flags given on the command line win");
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Print key, chords, degrees and fitted rhythm of a melody");
  analyze_cmd->add_option("--in", analyze.in, "Input .wav or .mid file")->required();
  analyze_cmd->add_option("--bpm", analyze.bpm, "Tempo used to quantize audio")->capture_default_str();

  ContinueArgs cont;
  auto* continue_cmd = app.add_subcommand("continue", "Generate phrases, close the piece, write MIDI and a report");
  continue_cmd->add_option("--in", cont.in, "Input .wav or .mid file")->required();
  continue_cmd->add_option("--phrases", cont.phrases, "Number of phrases to add")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  continue_cmd->add_option("--seed", cont.seed, "Random seed")->capture_default_str();
  continue_cmd->add_option("--bpm", cont.bpm, "Tempo used to quantize audio")->capture_default_str();
  continue_cmd->add_option("--level", cont.level, "Report level")
      ->check(CLI::IsMember({"beginner", "intermediate", "advanced"}))
      ->capture_default_str();
  continue_cmd->add_option("--out", cont.out, "Output MIDI file")->capture_default_str();
  continue_cmd->add_option("--report", cont.report, "Markdown report file");
  continue_cmd->add_option("--substitution-probability", cont.substitution_probability)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  continue_cmd->add_option("--ornament-rate", cont.ornament_rate)->check(CLI::Range(0.0, 1.0))->capture_default_str();

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", serve.host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Listen port (0 picks a free one)")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  serve_cmd->add_option("--data-dir", serve.data_dir, "Session directory (default $CADENZA_DATA_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*analyze_cmd) return RunAnalyze(analyze);
    if (*continue_cmd) return RunContinue(cont);
    if (*serve_cmd) return RunServe(serve);
  } catch (const Error& e) {
    std::cerr << "cadenza: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "cadenza: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitUsage;
}
