#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mfldp/densities.hpp"
#include "mfldp/ldp_harness.hpp"
#include "mfldp/measures.hpp"
#include "mfldp/sampler.hpp"
#include "mfldp/spt.hpp"

namespace mfldp::io {

inline constexpr int schema_version = 1;

// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

// Every CSV starts with "# mfldp <kind> v<schema> [key=value ...]" followed by
// a column header row.
struct CsvTable {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  const std::string& meta_value(const std::string& key) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& t);
CsvTable read_csv(const std::filesystem::path& path, std::string_view expected_kind = {});

void write_measure(const std::filesystem::path& path, const EmpiricalMeasure& m);
EmpiricalMeasure read_measure(const std::filesystem::path& path);

// samples CSV plus a JSON sidecar (path + ".json") with dimensions and diagnostics
void write_samples(const std::filesystem::path& path, const SampleSet& s, const std::string& model_id);
SampleSet read_samples(const std::filesystem::path& path);

void write_density(const std::filesystem::path& path, const GridDensity& p);
GridDensity read_density(const std::filesystem::path& path);

void write_curve(const std::filesystem::path& path, const CapitalCurve& c);
CapitalCurve read_curve(const std::filesystem::path& path);
// one weight per line, optional header; for plotting external data
MarketState read_weights(const std::filesystem::path& path);

void write_ldp(const std::filesystem::path& path, const LdpEstimate& e);
LdpEstimate read_ldp(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mfldp::io
