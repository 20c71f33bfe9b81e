#pragma once

// JSON and CSV serialization of tokens, fits, ensembles and summary tables.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsindy/analysis.hpp"
#include "gsindy/kinematics.hpp"
#include "gsindy/pipeline.hpp"

namespace gsindy {

using Json = nlohmann::ordered_json;

/// Finite numbers as is, non-finite ones as null.
Json number_or_null(double v);
double number_or(const Json& j, double fallback);

// Fits -----------------------------------------------------------------------

/// Model dump: {equations: [{lhs, terms: [{name, coefficient}]}], threshold,
/// optimizer, iterations, converged, ...}. A non-finite r2 is written as
/// null.
Json to_json(const TokenFit& fit);
TokenFit fit_from_json(const Json& j);

/// One fit per line.
void write_fits_jsonl(const std::filesystem::path& path, std::span<const TokenFit> fits);
std::vector<TokenFit> read_fits_jsonl(const std::filesystem::path& path);

Json to_json(const EnsembleModel& model);

// Tokens ---------------------------------------------------------------------

/// Manifest entry; `file` is relative to the manifest directory.
Json token_entry(const GestureToken& token, const std::string& file);

/// Writes `<dir>/tokens/<id>.csv` per token plus `<dir>/manifest.json`.
void write_token_set(const std::filesystem::path& dir, std::span<const GestureToken> tokens,
                     const Json& extra = Json::object());
std::vector<GestureToken> read_token_set(const std::filesystem::path& dir);

Json to_json(const GroundTruth& truth);

// Tables ---------------------------------------------------------------------

/// Long form: one row per (library, channel).
void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows);
/// Wide form: libraries down, channels across, cells "mean (sd)".
void write_comparison_table(std::ostream& os, std::span<const ComparisonRow> rows);

/// Wide form: mean/sd/min/max of R^2 down, channels across.
void write_fit_summary_table(std::ostream& os, std::span<const FitSummaryRow> rows);
void write_fit_summary_csv(std::ostream& os, const std::string& set, std::span<const FitSummaryRow> rows,
                           bool header);

/// Two-decimal rendering used in the wide tables ("-inf" for flagged rows).
std::string format_2dp(double v);

Json to_json(std::span<const CensusRow> rows);
Json to_json(std::span<const CorrelationRow> rows);
Json to_json(const HookeScore& score);

}  // namespace gsindy
