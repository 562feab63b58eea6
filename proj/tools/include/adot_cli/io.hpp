#pragma once

#include "adot/types.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace adot::cli {

/// Unreadable or unwritable file, or malformed input.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; parses back to the same double.
std::string format_double(double value);

/// One point per row, comma separated. A first row that does not parse as
/// numbers is taken as a header.
SampleSet read_samples(const std::string& path);
SampleSet parse_samples(std::string_view text, const std::string& origin);

std::string format_samples(const SampleSet& points, bool header);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace adot::cli
