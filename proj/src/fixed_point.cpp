#include <dfgfold/fixed_point.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include <fmt/format.h>

namespace dfgfold
{

namespace
{

constexpr int64_t word_min = std::numeric_limits<int32_t>::min();
constexpr int64_t word_max = std::numeric_limits<int32_t>::max();

int32_t narrow( int64_t v, overflow_mode mode )
{
  if ( mode == overflow_mode::saturate )
    return static_cast<int32_t>( std::clamp( v, word_min, word_max ) );
  return static_cast<int32_t>( static_cast<uint32_t>( static_cast<uint64_t>( v ) ) );
}

} // namespace

int32_t to_raw( double value, fixed_format const& fmt )
{
  auto scaled = std::llround( std::ldexp( value, static_cast<int>( fmt.frac_bits ) ) );
  return static_cast<int32_t>( std::clamp<int64_t>( scaled, word_min, word_max ) );
}

double to_real( int32_t raw, fixed_format const& fmt )
{
  return std::ldexp( static_cast<double>( raw ), -static_cast<int>( fmt.frac_bits ) );
}

uint32_t sine_index( int32_t phase, uint32_t frac_bits )
{
  auto bits = static_cast<uint32_t>( phase );
  if ( frac_bits >= 10 )
    return ( bits >> ( frac_bits - 10 ) ) & ( sine_table_size - 1 );
  return ( bits << ( 10 - frac_bits ) ) & ( sine_table_size - 1 );
}

std::span<int32_t const> sine_table( uint32_t frac_bits )
{
  static std::array<std::unique_ptr<std::array<int32_t, sine_table_size>>, 32> tables;
  static std::mutex lock;
  if ( frac_bits > 31 )
    throw std::invalid_argument( fmt::format( "frac_bits {} out of range [0,31]", frac_bits ) );

  std::lock_guard guard( lock );
  auto& t = tables[frac_bits];
  if ( !t )
  {
    t = std::make_unique<std::array<int32_t, sine_table_size>>();
    fixed_format fmt{ frac_bits };
    for ( uint32_t i = 0; i < sine_table_size; ++i )
    {
      /* exact zeros and extrema at the quarter points */
      double s = 0.0;
      switch ( i % 256 == 0 ? i / 256 : 4 )
      {
      case 0:
      case 2:
        s = 0.0;
        break;
      case 1:
        s = 1.0;
        break;
      case 3:
        s = -1.0;
        break;
      default:
        s = std::sin( 2.0 * std::numbers::pi * i / sine_table_size );
      }
      ( *t )[i] = to_raw( s, fmt );
    }
  }
  return *t;
}

int32_t fx_apply( node_kind kind, std::span<int32_t const> operands, fixed_format const& fmt )
{
  auto expect = [&]( size_t n ) {
    if ( operands.size() != n )
      throw std::invalid_argument( fmt::format( "{} expects {} operand(s), got {}", kind_name( kind ), n, operands.size() ) );
  };
  switch ( kind )
  {
  case node_kind::add:
    expect( 2 );
    return narrow( int64_t{ operands[0] } + operands[1], fmt.overflow );
  case node_kind::sub:
    expect( 2 );
    return narrow( int64_t{ operands[0] } - operands[1], fmt.overflow );
  case node_kind::negate:
    expect( 1 );
    return narrow( -int64_t{ operands[0] }, fmt.overflow );
  case node_kind::mult:
  {
    expect( 2 );
    auto product = int64_t{ operands[0] } * int64_t{ operands[1] };
    if ( fmt.rounding == rounding_mode::nearest && fmt.frac_bits > 0 )
      product += int64_t{ 1 } << ( fmt.frac_bits - 1 );
    return narrow( product >> fmt.frac_bits, fmt.overflow );
  }
  case node_kind::sine_lut:
    expect( 1 );
    return sine_table( fmt.frac_bits )[sine_index( operands[0], fmt.frac_bits )];
  default:
    throw std::invalid_argument( fmt::format( "fx_apply: '{}' is not an arithmetic kind", kind_name( kind ) ) );
  }
}

} // namespace dfgfold
