#pragma once

#include "fms/function_space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fms {

//! Pen trajectory from a plain-text signature file: a point-count line, then
//! one "x y t ..." line per point. Columns after the timestamp are ignored.
struct SignatureRecord {
  std::vector<double> x, y, t;
  std::size_t duplicate_timestamps = 0;  // consecutive points sharing a timestamp

  std::size_t size() const { return t.size(); }
};

SignatureRecord parse_signature(const std::string& text, const std::string& source = "<input>");
SignatureRecord read_signature(const std::string& path);
std::string format_signature(const SignatureRecord& sig);

struct NamedSignature {
  std::string name;  // file stem
  std::string path;
  SignatureRecord record;
};

//! Signature files in `dir` (regular files, sorted by name).
std::vector<NamedSignature> read_signature_dir(const std::string& dir);

//! S(t) = (x'' x' + y'' y') / |(x', y')| on `grid` over time rescaled to [0, 1],
//! normalized to unit L2 norm. Appends a message to `warnings` when the
//! direction had to be carried over a near-zero speed.
Curve tangential_acceleration(const SignatureRecord& sig, const GridPtr& grid, const DerivativeMethod& method,
                              std::vector<std::string>* warnings = nullptr);

//! The same feature without the final normalization.
Curve tangential_acceleration_raw(const SignatureRecord& sig, const GridPtr& grid, const DerivativeMethod& method,
                                  std::vector<std::string>* warnings = nullptr);

//! Synthetic writer: `author` selects one of two stroke templates; each call
//! varies timing, size and sensor quantization.
SignatureRecord synthetic_signature(int author, std::uint64_t seed, std::size_t points = 180);

}  // namespace fms
