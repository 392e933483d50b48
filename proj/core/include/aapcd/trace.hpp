#pragma once

#include "aapcd/solver.hpp"

#include <filesystem>
#include <istream>
#include <ostream>
#include <string_view>

namespace aapcd {

inline constexpr std::string_view kTraceHeader =
    "k,j_k,d_k,beta_k,branch,F,xi,G,step_sq,wallclock_ns";

/// Writes `# F0=<value>` followed by the header and one row per record.
/// Doubles use the shortest round-trip form, so reading back is exact.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace);

/// Parses what write_trace_csv produces. The F0 line is optional; without it
/// the initial objective is NaN. Throws std::runtime_error on malformed rows.
IterationTrace read_trace_csv(std::istream& in);
IterationTrace read_trace_csv(const std::filesystem::path& path);

/// FNV-1a of a file's bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

} // namespace aapcd
