#include "paracap/units.hpp"
#include "paracap/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace paracap {

const char* error_code_name(ErrorCode code)
{
  switch (code) {
  case ErrorCode::Ok: return "OK";
  case ErrorCode::Usage: return "E_USAGE";
  case ErrorCode::Parse: return "E_PARSE";
  case ErrorCode::DataMismatch: return "E_DATA";
  case ErrorCode::Numeric: return "E_NUMERIC";
  }
  return "E_UNKNOWN";
}

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column,
                       const std::string& message)
    : Error(ErrorCode::Parse,
            source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      source_(source), line_(line), column_(column), message_(message)
{
}

std::string to_lower(std::string_view s)
{
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b)
{
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::optional<double> parse_spice_number(std::string_view token)
{
  if (token.empty())
    return std::nullopt;
  std::size_t start = 0;
  if (token[0] == '+')
    start = 1;
  double value = 0.0;
  const char* first = token.data() + start;
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr == first)
    return std::nullopt;
  std::string_view rest(ptr, static_cast<std::size_t>(last - ptr));
  if (rest.empty())
    return value;
  for (char c : rest) {
    if (!std::isalpha(static_cast<unsigned char>(c)))
      return std::nullopt;
  }
  const std::string lower = to_lower(rest);
  if (lower.starts_with("meg"))
    return value * 1e6;
  if (lower.starts_with("mil"))
    return value * 25.4e-6;
  double scale = 1.0;
  switch (lower[0]) {
  case 'a': scale = 1e-18; break;
  case 'f': scale = 1e-15; break;
  case 'p': scale = 1e-12; break;
  case 'n': scale = 1e-9; break;
  case 'u': scale = 1e-6; break;
  case 'm': scale = 1e-3; break;
  case 'k': scale = 1e3; break;
  case 'g': scale = 1e9; break;
  case 't': scale = 1e12; break;
  default: return value; // bare unit such as "V" or "ohm"
  }
  return value * scale;
}

std::string format_number(double value)
{
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::scientific);
  if (ec != std::errc{})
    throw NumericError("cannot format number");
  return std::string(buf.data(), ptr);
}

} // namespace paracap

namespace paracap {

CapUnit cap_unit_from_name(std::string_view name)
{
  if (iequals(name, "f"))
    return CapUnit::Farad;
  if (iequals(name, "ff"))
    return CapUnit::Femtofarad;
  throw UsageError("unknown capacitance unit '" + std::string(name) + "' (expected f or ff)");
}

const char* cap_unit_name(CapUnit unit)
{
  return unit == CapUnit::Farad ? "f" : "ff";
}

std::string format_capacitance(double farads, CapUnit unit)
{
  if (unit == CapUnit::Farad)
    return format_number(farads);
  return format_number(farads / kFemto) + "f";
}

} // namespace paracap
