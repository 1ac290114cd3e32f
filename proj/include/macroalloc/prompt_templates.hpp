#pragma once

#include <string_view>

/// Agent prompt templates, kept byte-exact. Rendering code in each module fills the slots.
namespace macroalloc::templates {

/// News aspect-sentiment extraction; the article is appended after the template.
extern const std::string_view kSentimentAnalysis;
/// FOMC minutes summary; slot `{text}`.
extern const std::string_view kFomcSummary;
/// Top-down ranking; slots `{value}` x5 (CPI, PPI, PCE, NFP, PMI), `{key_points}`,
/// two `[(TICKER, weight)]` lists, and stock rows after the `Format:` line.
extern const std::string_view kTopDownRanking;
/// Cross-sectional ranking; slots `{value}` x5, `{key_points}`, the tradable list after the
/// "same score" line, and stock rows after the `Sample format:` line.
extern const std::string_view kCrossSectionalRanking;

}  // namespace macroalloc::templates
