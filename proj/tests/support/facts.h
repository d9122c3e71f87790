/// @file
/// @brief Fact-extraction harness: reads the fixed phrases an explanation
/// uses for musical facts back out of its plain text with std::regex and
/// checks each one against the piece.

#pragma once

#include <string>
#include <vector>

#include "cadenza/corpus.h"
#include "cadenza/explainer.h"
#include "cadenza/generator.h"

namespace cadenza::testing {

struct FactReport {
  int facts_checked = 0;
  std::vector<std::string> violations;
};

/// Structural checks (three non-empty aspects, every term in the glossary)
/// plus every extractable fact.
FactReport CheckExplanation(const Piece& piece, const CorpusDb& db, const ExplanationDoc& doc);

/// Independent syncopation rule: a note starting off the beat that is held
/// past the next beat, or a silent downbeat with sound later in the measure.
bool SyncopatedOracle(const Measure& measure);

}  // namespace cadenza::testing
