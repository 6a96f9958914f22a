#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace membrane {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);

std::string hex64(std::uint64_t v);

/// "# config_hash=<16 hex> seed=<seed>" followed by a newline. Every output file starts with it.
void write_provenance(std::ostream& out, std::uint64_t config_hash, std::uint64_t seed);

/// Shortest round-trip decimal form; files stay byte-stable across runs.
std::string format_double(double v);

}  // namespace membrane
