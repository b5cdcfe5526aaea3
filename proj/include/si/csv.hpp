#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "si/types.hpp"

namespace si {

// CSV contract: UTF-8, comma separated, decimal point '.', mandatory header
// with columns exactly x1..xp,y1..yp, no missing values.

/// Loads a paired sample; p is taken from the header. When declared_p is
/// given it must match the header.
PairedSample load_csv(const std::string& path, std::optional<Index> declared_p = std::nullopt);

PairedSample parse_csv(std::istream& in, std::optional<Index> declared_p = std::nullopt);

/// Shortest round-trip formatting: save then load reproduces the sample
/// bit-exactly for finite doubles.
void save_csv(const PairedSample& sample, const std::string& path);
std::string to_csv(const PairedSample& sample);

}  // namespace si
