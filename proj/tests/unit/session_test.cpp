#include "cadenza/session.h"

#include <gtest/gtest.h>

#include "cadenza/errors.h"
#include "cadenza/midi.h"
#include "fixtures.h"

namespace cadenza {
namespace {

using testing::ShippedCorpus;

std::vector<std::uint8_t> Bytes(std::string_view s) { return {s.begin(), s.end()}; }

template <class F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

Session Processed(GenerationConfig config = {}) {
  Session s("t", config, ShippedCorpus());
  s.Upload(UploadKind::kMidi, testing::DemoMidiBytes());
  s.Process(120);
  return s;
}

TEST(StateMachineTest, LegalityTable) {
  using enum SessionState;
  using enum Operation;
  EXPECT_TRUE(IsLegal(kEmpty, kUpload));
  EXPECT_TRUE(IsLegal(kUploaded, kUpload));
  EXPECT_FALSE(IsLegal(kAnalyzed, kUpload));
  EXPECT_TRUE(IsLegal(kUploaded, kProcess));
  EXPECT_FALSE(IsLegal(kAnalyzed, kProcess));
  EXPECT_TRUE(IsLegal(kAnalyzed, kContinue));
  EXPECT_FALSE(IsLegal(kEnded, kContinue));
  EXPECT_TRUE(IsLegal(kExtended, kEdit));
  EXPECT_FALSE(IsLegal(kAnalyzed, kEdit));
  EXPECT_FALSE(IsLegal(kEnded, kEdit));
  EXPECT_TRUE(IsLegal(kEnded, kExport));
  EXPECT_FALSE(IsLegal(kUploaded, kExplain));
}

TEST(StateMachineTest, NamesRoundTrip) {
  for (auto s : {SessionState::kEmpty, SessionState::kUploaded, SessionState::kAnalyzed, SessionState::kExtended,
                 SessionState::kEnded}) {
    EXPECT_EQ(ParseSessionState(SessionStateName(s)), s);
  }
  EXPECT_EQ(ParseEditField("rhythm"), EditField::kRhythm);
  EXPECT_THROW(ParseEditField("tempo"), Error);
}

TEST(SessionTest, Lifecycle) {
  Session s = Processed();
  EXPECT_EQ(s.state(), SessionState::kAnalyzed);
  s.Continue();
  EXPECT_EQ(s.state(), SessionState::kExtended);
  s.Edit(3, EditField::kDegree, "ii", 1000);
  EXPECT_EQ(s.edit_log().size(), 1u);
  EXPECT_EQ(s.edit_log()[0].old_value, "IV");
  EXPECT_EQ(s.edit_log()[0].new_value, "ii");
  s.End();
  EXPECT_EQ(s.state(), SessionState::kEnded);
  EXPECT_EQ(s.piece().score.measure_count(), 2u + 4u + 1u);
  EXPECT_EQ(CodeOf([&] { s.Continue(); }), ErrorCode::kIllegalState);
  EXPECT_EQ(CodeOf([&] { s.Edit(3, EditField::kDegree, "V"); }), ErrorCode::kIllegalState);
}

TEST(SessionTest, ProcessFailureKeepsUpload) {
  Session s("t", {}, ShippedCorpus());
  s.Upload(UploadKind::kMidi, Bytes("MThd garbage"));
  EXPECT_NE(CodeOf([&] { s.Process(120); }), ErrorCode::kIllegalState);
  EXPECT_EQ(s.state(), SessionState::kUploaded);
  s.Upload(UploadKind::kMidi, testing::DemoMidiBytes());
  s.Process(120);
  EXPECT_EQ(s.state(), SessionState::kAnalyzed);
}

TEST(SessionTest, BpmRange) {
  Session s("t", {}, ShippedCorpus());
  s.Upload(UploadKind::kMidi, testing::DemoMidiBytes());
  EXPECT_EQ(CodeOf([&] { s.Process(10); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { s.Process(301); }), ErrorCode::kInvalidArgument);
}

TEST(SessionTest, AlternativesOnlyForPhraseMeasures) {
  Session s = Processed();
  s.Continue();
  auto alt = s.GetAlternatives(3);
  EXPECT_EQ(alt.degrees.size(), 8u);
  EXPECT_EQ(alt.rhythms.size(), 16u);
  EXPECT_EQ(CodeOf([&] { s.GetAlternatives(0); }), ErrorCode::kForbidden);
  EXPECT_EQ(CodeOf([&] { s.GetAlternatives(40); }), ErrorCode::kScopeOutOfRange);
}

TEST(SessionTest, ExportIsDeterministic) {
  GenerationConfig config;
  config.seed = 7;
  Session a = Processed(config), b = Processed(config);
  for (Session* s : {&a, &b}) {
    s->Continue();
    s->Continue();
    s->Edit(5, EditField::kRhythm, "9");
    s->End();
  }
  EXPECT_EQ(a.ExportMidi(), b.ExportMidi());
  auto parsed = midi::SmfToScore(midi::ParseSmf(a.ExportMidi()), {.monophonic = false});
  EXPECT_TRUE(SameNoteContent(parsed, ExpandOrnaments(a.piece().score)));
}

TEST(SessionTest, ReplayReproducesExport) {
  Session s = Processed();
  s.Continue();
  s.Edit(4, EditField::kDegree, "vi", 5);
  s.End(9);
  Session r = Session::Replay("t", s.config(), ShippedCorpus(), s.created_ms(), s.upload_kind(), s.upload_bytes(),
                              s.bpm(), s.log(), s.updated_ms());
  EXPECT_EQ(r.state(), s.state());
  EXPECT_EQ(r.ExportMidi(), s.ExportMidi());
  EXPECT_EQ(r.edit_log(), s.edit_log());
}

TEST(DecodeInputTest, WavAndMidi) {
  Score wav = DecodeInput(UploadKind::kWav, testing::DemoWavBytes(), 120);
  Score mid = DecodeInput(UploadKind::kMidi, testing::DemoMidiBytes(), 120);
  EXPECT_TRUE(SameNoteContent(wav, mid));
}

TEST(DetectUploadKindTest, ExtensionTypeAndMagic) {
  auto wav = testing::DemoWavBytes();
  auto mid = testing::DemoMidiBytes();
  EXPECT_EQ(DetectUploadKind("a.wav", "", wav), UploadKind::kWav);
  EXPECT_EQ(DetectUploadKind("a.MID", "", mid), UploadKind::kMidi);
  EXPECT_EQ(DetectUploadKind("", "audio/midi", mid), UploadKind::kMidi);
  EXPECT_EQ(DetectUploadKind("", "application/octet-stream", wav), UploadKind::kWav);
  EXPECT_EQ(CodeOf([&] { DetectUploadKind("song.mp3", "", Bytes("xx")); }), ErrorCode::kUnsupportedMediaType);
  EXPECT_EQ(CodeOf([&] { DetectUploadKind("", "audio/mpeg", Bytes("xx")); }), ErrorCode::kUnsupportedMediaType);
  EXPECT_EQ(CodeOf([&] { DetectUploadKind("", "", Bytes("ID3\x03")); }), ErrorCode::kUnsupportedMediaType);
  EXPECT_EQ(CodeOf([&] { DetectUploadKind("notes.txt", "text/plain", Bytes("hello")); }),
            ErrorCode::kUnsupportedMediaType);
}

}  // namespace
}  // namespace cadenza
