#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctqkd/analysis.hpp"
#include "ctqkd/format.hpp"
#include "ctqkd/session.hpp"

namespace ctqkd {

// Serialized forms. All floats carry six significant digits; field order is
// fixed so equal inputs give byte-identical documents.
//
// Session JSON (schema "ctqkd.session/1"):
//   schema, config{...}, attack{type, ...params, eve_detector{eta,p_d}},
//   counts{sent,clicked,sifted,disclosed,double_clicks}, qber (null when no
//   key), full_key_error_rate, key_length, key_error, alice_monitor{...},
//   bob_monitor{...} | null, alarm, eve{...}
// Monitor rows: observed_stat, expected_stat, z_score, pass, n_gates.

using Json = nlohmann::ordered_json;

enum class ReportFormat { Csv, Json };

Json to_json(const SessionConfig& cfg);
Json to_json(const AttackConfig& attack);
Json to_json(const PowerTestOutcome& outcome);
Json to_json(const EveReport& report);
Json to_json(const SessionResult& result);

std::string session_json(const SessionResult& result);

std::string session_csv_header();
std::string session_csv_row(const SessionResult& result);

/// Throws std::invalid_argument on empty input.
std::string export_report(std::span<const CurvePoint> points, ReportFormat format);
std::string export_report(std::span<const SessionResult> results, ReportFormat format);

std::vector<CurvePoint> curve_points_from_json(const std::string& text);

std::string distinguish_csv(const DistinguishCurve& curve);

/// Writes through a temporary sibling and renames it into place. Throws
/// std::runtime_error when the file cannot be written.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// "<command>_<UTC timestamp>_<seed>.<ext>"
std::string output_file_name(const std::string& command, std::uint64_t seed,
                             const std::string& ext);

}  // namespace ctqkd
