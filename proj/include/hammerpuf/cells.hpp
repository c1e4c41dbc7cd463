#pragma once

#include <cstdint>

namespace hammerpuf {

/// DRAM cells come in two flavors that encode charge with opposite logic.
enum class CellPolarity { TrueCell, AntiCell };

/// Polarity alternates with bit position inside each byte (MSB-first):
/// even positions 0,2,4,6 are true-cells, odd positions are anti-cells.
/// The layout is byte-periodic, so only index % 8 matters.
inline constexpr CellPolarity cell_polarity(std::uint64_t global_bit_index) {
  return (global_bit_index % 2 == 0) ? CellPolarity::TrueCell
                                     : CellPolarity::AntiCell;
}

/// A true-cell is charged when it stores 1; an anti-cell when it stores 0.
inline constexpr bool is_charged(CellPolarity polarity, int stored_bit) {
  return polarity == CellPolarity::TrueCell ? stored_bit == 1 : stored_bit == 0;
}

/// Bit of the byte pattern `iv` tiled across memory, MSB-first within
/// each byte: initial_bit(0xAA, 0) == 1, initial_bit(0xAA, 1) == 0.
inline constexpr int initial_bit(std::uint8_t iv, std::uint64_t global_bit_index) {
  return (iv >> (7 - (global_bit_index % 8))) & 1;
}

/// Charge state of a cell initialized from the tiled byte pattern `iv`.
inline constexpr bool initial_charged(std::uint8_t iv,
                                      std::uint64_t global_bit_index) {
  return is_charged(cell_polarity(global_bit_index),
                    initial_bit(iv, global_bit_index));
}

}  // namespace hammerpuf
