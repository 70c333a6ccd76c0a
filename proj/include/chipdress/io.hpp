#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chipdress/config.hpp"

namespace chipdress::io {

/// Columnar numeric results; column names carry their unit (e.g. "s_um").
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

/// "%.9g"; non-finite values print as nan / inf / -inf.
std::string format_number(double x);

/// x rounded to 9 significant digits (identity for non-finite values).
double round9(double x);

std::string to_csv(const Table& t);
/// {"columns": [...], "rows": [[...], ...]} with values rounded to 9 digits.
nlohmann::ordered_json to_json(const Table& t);
Table table_from_json(const nlohmann::json& j);

/// Rounds every number in `j` to 9 significant digits.
nlohmann::ordered_json round_numbers(const nlohmann::ordered_json& j);

/// Write text; throws std::runtime_error on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

std::uint64_t fnv1a64(std::string_view data);

/// Hash of the canonical (key-sorted) JSON form of the configuration.
std::string config_hash(const ExperimentConfig& cfg);

struct Manifest {
  std::string subcommand;
  std::string config_hash;
  std::vector<std::string> outputs;
  double wall_time = 0.0;  // s
};

nlohmann::ordered_json to_json(const Manifest& m);

}  // namespace chipdress::io
