#pragma once

#include <map>
#include <string>
#include <vector>

#include "kfm/errors.hpp"

// Named float32 tensors (flattened) plus the elementwise interpolation used
// to blend a fine-tuned parameter set back toward its base:
//     merged = (1 - alpha) * pre + alpha * ft
// and a little-endian binary container for bit-exact round trips.

namespace kfm {

/// Ordered name -> flat values. Names are unique and non-empty; a usable map
/// holds at least one entry.
using WeightMap = std::map<std::string, std::vector<float>>;

/// Elementwise convex blend. Throws SchemaMismatch unless both maps carry
/// identical names and per-name element counts, NonFiniteInput on any NaN or
/// infinity in either input, ConfigError when alpha is outside [0, 1].
WeightMap merge(const WeightMap& pre, const WeightMap& ft, double alpha);

/// Serializes to the binary container:
///   magic "WMAP" | u32 entry count | entries
///   entry: u16 name length | name bytes | u64 element count | f32 values
/// All integers and floats little-endian. Throws CorruptFile on an empty map
/// or an empty name, IoFailure when the file cannot be written.
void save_weights(const WeightMap& w, const std::string& path);

/// Reads the container back. Byte-truncations, bad magic, and trailing bytes
/// all throw CorruptFile; unreadable paths throw IoFailure.
WeightMap load_weights(const std::string& path);

}  // namespace kfm
