#pragma once

#include <filesystem>
#include <variant>

#include "qst/state.hpp"

namespace qst {

// Binary ".qst" container, all fields little-endian:
//
//   offset  size  field
//   0       4     magic "QST\0"
//   4       4     version (u32, currently 1)
//   8       4     kind (u32: 0 = factor state, 1 = ground truth)
//   12      4     n (u32)
//   16      4     r (u32)
//   20      4     normalization (u32: 0 = none, 1 = trace_one, 2 = spectral_one)
//   24      ...   ground truth only: r spectrum values (f64)
//   ...     ...   d x r complex matrix, row-major, each entry (re f64, im f64)

inline constexpr std::uint32_t kQstVersion = 1;

struct QstFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void save_qst(const std::filesystem::path& path, const FactorState& state);
void save_qst(const std::filesystem::path& path, const GroundTruth& truth);

using QstObject = std::variant<FactorState, GroundTruth>;
QstObject load_qst(const std::filesystem::path& path);

}  // namespace qst
