#pragma once

#include "ipevo/depois.hpp"
#include "ipevo/partition.hpp"
#include "ipevo/stats.hpp"
#include "ipevo/trace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ipevo::io {

inline constexpr const char* kVersion = "0.1.0";

// {"alpha":..,"total_mass":..,"truncation_mass":..,"blocks":[[l,r],..],
//  "diversity":[..]|null} (+ "total_diversity" when tracked)
std::string partition_to_json(const IntervalPartition& p, double alpha);
IntervalPartition partition_from_json(const std::string& text, double* alpha_out = nullptr);

// one row per block: index,left,right,length,diversity
std::string partition_to_csv(const IntervalPartition& p);

// trace CSV: replicate,level,total_mass,block_count,leftmost_mass,
// largest_mass,diversity_total (de-Poissonized traces gain u,level_at_u)
std::string trace_header(const std::string& config_hash, std::uint64_t seed);
void append_trace_rows(std::string& csv, std::size_t replicate, const EvolutionTrace& tr);
void append_summary_row(std::string& csv, std::size_t replicate, const LevelSummary& s);
void append_dp_rows(std::string& csv, std::size_t replicate, const DepoissonizedTrace& tr);

std::string report_to_json(const stats::TestReport& r);
std::string reports_summary_csv(const std::vector<stats::TestReport>& reports,
                                const std::string& config_hash, std::uint64_t seed);

// FNV-1a hash of a canonical config string, hex-encoded
std::string config_hash(const std::string& canonical);

// "start:stop:step" or comma-separated values
std::vector<double> parse_level_grid(const std::string& spec);

// temp file + rename
void atomic_write(const std::string& path, const std::string& content);

// minimal SVG histogram (axes + polyline)
std::string svg_histogram(const std::vector<double>& sample, std::size_t bins,
                          const std::string& title);

} // namespace ipevo::io
