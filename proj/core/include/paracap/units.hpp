#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace paracap {

/// Parses a SPICE number with an optional engineering suffix
/// (a f p n u m k meg g t, case-insensitive). Trailing unit letters after the
/// suffix are ignored, so "1.5FF" and "1.5f" are both 1.5e-15. Returns nullopt
/// when the token does not start with a number.
std::optional<double> parse_spice_number(std::string_view token);

/// Shortest scientific representation that round-trips to the same double.
std::string format_number(double value);

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

constexpr double kFemto = 1e-15;

enum class CapUnit { Farad, Femtofarad };

/// "f" or "ff"; throws UsageError otherwise.
CapUnit cap_unit_from_name(std::string_view name);
const char* cap_unit_name(CapUnit unit);

/// format_number in farads, or in femtofarads with an "f" suffix so that
/// parse_spice_number reads it back as farads.
std::string format_capacitance(double farads, CapUnit unit);

} // namespace paracap
