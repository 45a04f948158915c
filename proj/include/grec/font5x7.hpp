#pragma once

#include <cstdint>

namespace grec {

inline constexpr int kFontCols = 5;
inline constexpr int kFontRows = 7;

// Returns the 7-row bitmap for an uppercase letter or digit; each row holds
// 5 bits, MSB = leftmost column. Unknown characters map to a filled box.
const std::uint8_t* font5x7(char c);

// True when the font lights cell (col, row) of character c.
bool font_cell(char c, int col, int row);

}  // namespace grec
