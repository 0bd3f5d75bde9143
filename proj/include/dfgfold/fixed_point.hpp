/*!
  \file fixed_point.hpp
  \brief 32-bit two's-complement fixed-point arithmetic shared by all simulations.
*/

#pragma once

#include <dfgfold/graph.hpp>

#include <cstdint>
#include <span>
#include <stdexcept>

namespace dfgfold
{

enum class rounding_mode
{
  floor,  /*!< truncate toward minus infinity */
  nearest /*!< round half up */
};

enum class overflow_mode
{
  wrap,
  saturate
};

struct fixed_format
{
  uint32_t frac_bits{16};
  rounding_mode rounding{rounding_mode::floor};
  overflow_mode overflow{overflow_mode::wrap};
};

/*! \brief Raw word closest to `value` (saturating at the word limits). */
int32_t to_raw( double value, fixed_format const& fmt );
double to_real( int32_t raw, fixed_format const& fmt );

/*! \brief Number of entries in the sine table. */
inline constexpr uint32_t sine_table_size = 1024;

/*! \brief Table index for a phase given in turns: the top 10 fractional bits. */
uint32_t sine_index( int32_t phase, uint32_t frac_bits );

/*! \brief Full-period sine table quantized to `frac_bits`, built once per format. */
std::span<int32_t const> sine_table( uint32_t frac_bits );

/*! \brief Evaluates one arithmetic operator on raw words.

  Supports add, sub, mult, negate and sine-lut; throws `std::invalid_argument`
  for other kinds or a wrong operand count.
*/
int32_t fx_apply( node_kind kind, std::span<int32_t const> operands, fixed_format const& fmt );

} // namespace dfgfold
