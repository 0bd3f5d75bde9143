#include <dfgfold/bench.hpp>

#include <dfgfold/config_io.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace dfgfold
{

namespace
{

void add_const( graph_builder& b, std::string const& id, double value )
{
  b.add_node( id, node_kind::const_input, { { "value", value } } );
}

void add_in( graph_builder& b, std::string const& id )
{
  b.add_node( id, node_kind::input );
  b.add_input( id );
}

void add_out( graph_builder& b, std::string const& id )
{
  b.add_node( id, node_kind::output );
  b.add_output( id );
}

std::string padded( uint32_t i, uint32_t digits )
{
  return fmt::format( "{:0{}}", i, digits );
}

} // namespace

std::vector<double> default_fir_coefficients( uint32_t taps )
{
  std::vector<double> c( taps );
  double const cutoff = 0.25;
  double const mid = ( taps - 1 ) / 2.0;
  for ( uint32_t i = 0; i < taps; ++i )
  {
    double t = i - mid;
    double sinc = t == 0.0 ? 2 * cutoff : std::sin( 2 * std::numbers::pi * cutoff * t ) / ( std::numbers::pi * t );
    double window = taps == 1 ? 1.0 : 0.54 - 0.46 * std::cos( 2 * std::numbers::pi * i / ( taps - 1 ) );
    c[i] = std::round( sinc * window * 1024.0 ) / 1024.0;
  }
  return c;
}

dataflow_graph gen_fir( uint32_t taps, std::vector<double> const& coefficients )
{
  if ( taps == 0 )
    throw std::invalid_argument( "FIR needs at least one tap" );
  if ( coefficients.size() != taps )
    throw std::invalid_argument( fmt::format( "FIR with {} taps needs {} coefficients, got {}", taps, taps, coefficients.size() ) );
  uint32_t digits = std::max<uint32_t>( 2, static_cast<uint32_t>( fmt::format( "{}", taps - 1 ).size() ) );
  auto id = [&]( char prefix, uint32_t i ) { return fmt::format( "{}{}", prefix, padded( i, digits ) ); };

  graph_builder b( fmt::format( "fir{}", taps ) );
  add_in( b, "x" );
  add_out( b, "y" );
  for ( uint32_t i = 0; i < taps; ++i )
  {
    add_const( b, id( 'c', i ), coefficients[i] );
    b.add_node( id( 'm', i ), node_kind::mult );
    b.add_edge( i == 0 ? "x" : id( 'd', i ), id( 'm', i ), 0 );
    b.add_edge( id( 'c', i ), id( 'm', i ), 1 );
    if ( i > 0 )
    {
      b.add_node( id( 'd', i ), node_kind::delay );
      b.add_edge( i == 1 ? "x" : id( 'd', i - 1 ), id( 'd', i ), 0 );
      b.add_node( id( 's', i ), node_kind::add );
      b.add_edge( i == 1 ? id( 'm', 0 ) : id( 's', i - 1 ), id( 's', i ), 0 );
      b.add_edge( id( 'm', i ), id( 's', i ), 1 );
    }
  }
  b.add_edge( taps == 1 ? id( 'm', 0 ) : id( 's', taps - 1 ), "y", 0 );
  return b.build();
}

dataflow_graph gen_iir( iir_coefficients const& k )
{
  graph_builder b( "iir" );
  add_in( b, "x" );
  add_out( b, "y" );
  b.add_node( "d1", node_kind::delay );
  b.add_node( "d2", node_kind::delay );
  b.add_edge( "add_f2", "d1" );
  b.add_edge( "d1", "d2" );

  auto product = [&]( std::string const& m, std::string const& c, double value, std::string const& state ) {
    add_const( b, c, value );
    b.add_node( m, node_kind::mult );
    b.add_edge( state, m, 0 );
    b.add_edge( c, m, 1 );
  };
  product( "m_a1", "k_a1", k.a1, "d1" );
  product( "m_a2", "k_a2", k.a2, "d2" );
  product( "m_b1", "k_b1", k.b1, "d1" );
  product( "m_b2", "k_b2", k.b2, "d2" );

  auto sum = [&]( std::string const& a, std::string const& lhs, std::string const& rhs ) {
    b.add_node( a, node_kind::add );
    b.add_edge( lhs, a, 0 );
    b.add_edge( rhs, a, 1 );
  };
  sum( "add_f1", "x", "m_a1" );
  sum( "add_f2", "add_f1", "m_a2" );
  sum( "add_y1", "add_f2", "m_b1" );
  sum( "add_y2", "add_y1", "m_b2" );
  b.add_edge( "add_y2", "y" );
  return b.build();
}

dataflow_graph gen_pct()
{
  graph_builder b( "pct" );
  for ( auto in : { "theta", "ia", "ib", "ic" } )
    add_in( b, in );
  add_out( b, "d" );
  add_out( b, "q" );

  /* offsets in turns: cos(t - phi) = sin(t - (phi - 1/4)); a half turn negates */
  double const third = 1.0 / 3.0;
  struct term
  {
    double offset;
    char const* current;
  };
  std::array<term, 6> terms{ { { -0.25, "ia" },
                               { third - 0.25 + 0.5, "ib" },
                               { -third - 0.25 + 0.5, "ic" },
                               { 0.0, "ia" },
                               { third + 0.5, "ib" },
                               { -third + 0.5, "ic" } } };
  for ( uint32_t k = 0; k < terms.size(); ++k )
  {
    auto ch = fmt::format( "ch{}", k );
    add_const( b, ch + "_off", terms[k].offset - std::floor( terms[k].offset ) );
    b.add_node( ch + "_sub", node_kind::sub );
    b.add_edge( "theta", ch + "_sub", 0 );
    b.add_edge( ch + "_off", ch + "_sub", 1 );
    b.add_node( ch + "_sin", node_kind::sine_lut );
    b.add_edge( ch + "_sub", ch + "_sin", 0 );
    b.add_node( ch + "_mul", node_kind::mult );
    b.add_edge( ch + "_sin", ch + "_mul", 0 );
    b.add_edge( terms[k].current, ch + "_mul", 1 );
  }
  for ( auto [axis, first, scale] : { std::tuple{ "d", 0u, 2.0 / 3.0 }, std::tuple{ "q", 3u, -2.0 / 3.0 } } )
  {
    auto s0 = fmt::format( "dq_sub_{}0", axis ), s1 = fmt::format( "dq_sub_{}1", axis );
    b.add_node( s0, node_kind::sub );
    b.add_edge( fmt::format( "ch{}_mul", first ), s0, 0 );
    b.add_edge( fmt::format( "ch{}_mul", first + 1 ), s0, 1 );
    b.add_node( s1, node_kind::sub );
    b.add_edge( s0, s1, 0 );
    b.add_edge( fmt::format( "ch{}_mul", first + 2 ), s1, 1 );
    auto m = fmt::format( "dq_mul_{}", axis ), k = fmt::format( "dq_k_{}", axis );
    add_const( b, k, scale );
    b.add_node( m, node_kind::mult );
    b.add_edge( s1, m, 0 );
    b.add_edge( k, m, 1 );
    b.add_edge( m, axis );
  }
  return b.build();
}

dataflow_graph gen_tpid( std::array<pid_gains, 3> const& gains )
{
  graph_builder b( "tpid" );
  for ( uint32_t j = 0; j < 3; ++j )
  {
    auto p = [j]( std::string_view s ) { return fmt::format( "pid{}_{}", j, s ); };
    auto r = fmt::format( "r{}", j ), y = fmt::format( "y{}", j ), u = fmt::format( "u{}", j );
    add_in( b, r );
    add_in( b, y );
    add_out( b, u );
    add_const( b, p( "kp" ), gains[j].kp );
    add_const( b, p( "ki" ), gains[j].ki );
    add_const( b, p( "kd" ), gains[j].kd );

    b.add_node( p( "sub_e" ), node_kind::sub );
    b.add_edge( r, p( "sub_e" ), 0 );
    b.add_edge( y, p( "sub_e" ), 1 );

    b.add_node( p( "mult_p" ), node_kind::mult );
    b.add_edge( p( "sub_e" ), p( "mult_p" ), 0 );
    b.add_edge( p( "kp" ), p( "mult_p" ), 1 );

    b.add_node( p( "mult_i" ), node_kind::mult );
    b.add_edge( p( "sub_e" ), p( "mult_i" ), 0 );
    b.add_edge( p( "ki" ), p( "mult_i" ), 1 );
    b.add_node( p( "delay_i" ), node_kind::delay );
    b.add_node( p( "add_i" ), node_kind::add );
    b.add_edge( p( "delay_i" ), p( "add_i" ), 0 );
    b.add_edge( p( "mult_i" ), p( "add_i" ), 1 );
    b.add_edge( p( "add_i" ), p( "delay_i" ), 0 );

    b.add_node( p( "delay_d" ), node_kind::delay );
    b.add_edge( p( "sub_e" ), p( "delay_d" ), 0 );
    b.add_node( p( "sub_d" ), node_kind::sub );
    b.add_edge( p( "sub_e" ), p( "sub_d" ), 0 );
    b.add_edge( p( "delay_d" ), p( "sub_d" ), 1 );
    b.add_node( p( "mult_d" ), node_kind::mult );
    b.add_edge( p( "sub_d" ), p( "mult_d" ), 0 );
    b.add_edge( p( "kd" ), p( "mult_d" ), 1 );

    b.add_node( p( "add_s1" ), node_kind::add );
    b.add_edge( p( "add_i" ), p( "add_s1" ), 0 );
    b.add_edge( p( "mult_p" ), p( "add_s1" ), 1 );
    b.add_node( p( "add_s2" ), node_kind::add );
    b.add_edge( p( "add_s1" ), p( "add_s2" ), 0 );
    b.add_edge( p( "mult_d" ), p( "add_s2" ), 1 );
    b.add_edge( p( "add_s2" ), u );
  }
  return b.build();
}

dataflow_graph gen_pi( double kp, double ki )
{
  graph_builder b( "pi" );
  add_in( b, "e" );
  add_out( b, "u" );
  add_const( b, "kp", kp );
  add_const( b, "ki", ki );
  b.add_node( "mult_p", node_kind::mult );
  b.add_edge( "e", "mult_p", 0 );
  b.add_edge( "kp", "mult_p", 1 );
  b.add_node( "mult_i", node_kind::mult );
  b.add_edge( "e", "mult_i", 0 );
  b.add_edge( "ki", "mult_i", 1 );
  b.add_node( "delay_i", node_kind::delay );
  b.add_node( "add_i", node_kind::add );
  b.add_edge( "delay_i", "add_i", 0 );
  b.add_edge( "mult_i", "add_i", 1 );
  b.add_edge( "add_i", "delay_i" );
  b.add_node( "add_o", node_kind::add );
  b.add_edge( "add_i", "add_o", 0 );
  b.add_edge( "mult_p", "add_o", 1 );
  b.add_edge( "add_o", "u" );
  return b.build();
}

std::vector<std::string> bench_names()
{
  return { "fir", "iir", "pct", "tpid", "pi" };
}

std::optional<dataflow_graph> gen_bench( std::string_view name )
{
  if ( name == "fir" )
    return gen_fir( 16, default_fir_coefficients( 16 ) );
  if ( name == "iir" )
    return gen_iir();
  if ( name == "pct" )
    return gen_pct();
  if ( name == "tpid" )
    return gen_tpid();
  if ( name == "pi" )
    return gen_pi();
  return std::nullopt;
}

namespace
{

using pattern_builder = std::function<void( graph_builder& )>;

core_pattern build_pattern( std::string const& name, pattern_builder const& f )
{
  graph_builder b( name );
  f( b );
  return make_pattern( name, b.build() );
}

void single( graph_builder& b, node_kind k )
{
  b.add_node( "n", k );
}

/* k chained {delay, prod, add} stages of the direct-form FIR */
void delay_prod_add_chain( graph_builder& b, uint32_t k )
{
  for ( uint32_t i = 0; i < k; ++i )
  {
    auto d = fmt::format( "d{}", i ), m = fmt::format( "m{}", i ), s = fmt::format( "s{}", i );
    b.add_node( d, node_kind::delay );
    b.add_node( m, node_kind::mult );
    b.add_node( s, node_kind::add );
    b.add_edge( d, m, 0 );
    b.add_edge( m, s, 1 );
    if ( i > 0 )
    {
      b.add_edge( fmt::format( "d{}", i - 1 ), d, 0 );
      b.add_edge( fmt::format( "s{}", i - 1 ), s, 0 );
    }
  }
}

void sub_sin_prod( graph_builder& b, std::string const& p )
{
  b.add_node( p + "sub", node_kind::sub );
  b.add_node( p + "sin", node_kind::sine_lut );
  b.add_node( p + "mul", node_kind::mult );
  b.add_edge( p + "sub", p + "sin", 0 );
  b.add_edge( p + "sin", p + "mul", 0 );
}

std::map<std::string, pattern_builder, std::less<>> const& pattern_table()
{
  static std::map<std::string, pattern_builder, std::less<>> const table = {
      { "prod", []( graph_builder& b ) { single( b, node_kind::mult ); } },
      { "add", []( graph_builder& b ) { single( b, node_kind::add ); } },
      { "sub", []( graph_builder& b ) { single( b, node_kind::sub ); } },
      { "sin", []( graph_builder& b ) { single( b, node_kind::sine_lut ); } },
      { "prod_add",
        []( graph_builder& b ) {
          b.add_node( "m", node_kind::mult );
          b.add_node( "a", node_kind::add );
          b.add_edge( "m", "a", 1 );
        } },
      { "delay_prod",
        []( graph_builder& b ) {
          b.add_node( "d", node_kind::delay );
          b.add_node( "m", node_kind::mult );
          b.add_edge( "d", "m", 0 );
        } },
      { "delay_prod_add", []( graph_builder& b ) { delay_prod_add_chain( b, 1 ); } },
      { "delay_prod_add_x2", []( graph_builder& b ) { delay_prod_add_chain( b, 2 ); } },
      { "delay_prod_add_x3", []( graph_builder& b ) { delay_prod_add_chain( b, 3 ); } },
      { "delay_prod_add_x4", []( graph_builder& b ) { delay_prod_add_chain( b, 4 ); } },
      { "delay_prod_add_x7", []( graph_builder& b ) { delay_prod_add_chain( b, 7 ); } },
      { "prod_add_add",
        []( graph_builder& b ) {
          b.add_node( "m", node_kind::mult );
          b.add_node( "a0", node_kind::add );
          b.add_node( "a1", node_kind::add );
          b.add_edge( "m", "a0", 1 );
          b.add_edge( "a0", "a1", 0 );
        } },
      { "prod_add_prod_add",
        []( graph_builder& b ) {
          b.add_node( "m0", node_kind::mult );
          b.add_node( "a0", node_kind::add );
          b.add_node( "m1", node_kind::mult );
          b.add_node( "a1", node_kind::add );
          b.add_edge( "m0", "a0", 1 );
          b.add_edge( "a0", "a1", 0 );
          b.add_edge( "m1", "a1", 1 );
        } },
      { "sin_prod",
        []( graph_builder& b ) {
          b.add_node( "sin", node_kind::sine_lut );
          b.add_node( "mul", node_kind::mult );
          b.add_edge( "sin", "mul", 0 );
        } },
      { "sub_sin_prod", []( graph_builder& b ) { sub_sin_prod( b, "" ); } },
      { "const_sub_sin_prod",
        []( graph_builder& b ) {
          sub_sin_prod( b, "" );
          b.add_node( "off", node_kind::const_input );
          b.add_edge( "off", "sub", 1 );
        } },
      { "pct_axis",
        []( graph_builder& b ) {
          for ( int k = 0; k < 3; ++k )
            sub_sin_prod( b, fmt::format( "t{}_", k ) );
          b.add_node( "s0", node_kind::sub );
          b.add_node( "s1", node_kind::sub );
          b.add_edge( "t0_mul", "s0", 0 );
          b.add_edge( "t1_mul", "s0", 1 );
          b.add_edge( "s0", "s1", 0 );
          b.add_edge( "t2_mul", "s1", 1 );
        } },
      { "sub_prod",
        []( graph_builder& b ) {
          b.add_node( "s", node_kind::sub );
          b.add_node( "m", node_kind::mult );
          b.add_edge( "s", "m", 0 );
        } },
      { "sub_prod_add",
        []( graph_builder& b ) {
          b.add_node( "s", node_kind::sub );
          b.add_node( "m", node_kind::mult );
          b.add_node( "a", node_kind::add );
          b.add_edge( "s", "m", 0 );
          b.add_edge( "m", "a", 1 );
        } },
      { "pid_i",
        []( graph_builder& b ) {
          b.add_node( "m", node_kind::mult );
          b.add_node( "a", node_kind::add );
          b.add_node( "z", node_kind::delay );
          b.add_edge( "z", "a", 0 );
          b.add_edge( "m", "a", 1 );
          b.add_edge( "a", "z", 0 );
        } },
      { "pid_d",
        []( graph_builder& b ) {
          b.add_node( "z", node_kind::delay );
          b.add_node( "s", node_kind::sub );
          b.add_node( "m", node_kind::mult );
          b.add_edge( "z", "s", 1 );
          b.add_edge( "s", "m", 0 );
        } },
      { "pid",
        []( graph_builder& b ) {
          for ( auto [id, k] : { std::pair{ "sub_e", node_kind::sub }, std::pair{ "mult_p", node_kind::mult },
                                 std::pair{ "mult_i", node_kind::mult }, std::pair{ "add_i", node_kind::add },
                                 std::pair{ "delay_i", node_kind::delay }, std::pair{ "delay_d", node_kind::delay },
                                 std::pair{ "sub_d", node_kind::sub }, std::pair{ "mult_d", node_kind::mult },
                                 std::pair{ "add_s1", node_kind::add }, std::pair{ "add_s2", node_kind::add } } )
            b.add_node( id, k );
          b.add_edge( "sub_e", "mult_p", 0 );
          b.add_edge( "sub_e", "mult_i", 0 );
          b.add_edge( "sub_e", "delay_d", 0 );
          b.add_edge( "sub_e", "sub_d", 0 );
          b.add_edge( "delay_d", "sub_d", 1 );
          b.add_edge( "sub_d", "mult_d", 0 );
          b.add_edge( "delay_i", "add_i", 0 );
          b.add_edge( "mult_i", "add_i", 1 );
          b.add_edge( "add_i", "delay_i", 0 );
          b.add_edge( "add_i", "add_s1", 0 );
          b.add_edge( "mult_p", "add_s1", 1 );
          b.add_edge( "add_s1", "add_s2", 0 );
          b.add_edge( "mult_d", "add_s2", 1 );
        } },
  };
  return table;
}

} // namespace

std::vector<std::string> builtin_pattern_names()
{
  std::vector<std::string> names;
  for ( auto const& [name, f] : pattern_table() )
    names.push_back( name );
  return names;
}

std::optional<core_pattern> builtin_pattern( std::string_view name )
{
  auto it = pattern_table().find( name );
  if ( it == pattern_table().end() )
    return std::nullopt;
  return build_pattern( it->first, it->second );
}

std::vector<config_request> reference_configs( std::string_view bench )
{
  if ( bench == "fir" )
  {
    /* triples {d_i, m_i, s_i} of the 16-tap filter, i in [first, first + k) */
    auto chain = []( uint32_t first, uint32_t k ) {
      std::map<std::string, std::string> m;
      for ( uint32_t j = 0; j < k; ++j )
      {
        m[fmt::format( "d{}", j )] = fmt::format( "d{:02}", first + j );
        m[fmt::format( "m{}", j )] = fmt::format( "m{:02}", first + j );
        m[fmt::format( "s{}", j )] = fmt::format( "s{:02}", first + j );
      }
      return m;
    };
    auto prod_add_at = []( uint32_t i ) {
      return std::map<std::string, std::string>{ { "m", fmt::format( "m{:02}", i ) }, { "a", fmt::format( "s{:02}", i ) } };
    };
    std::vector<std::map<std::string, std::string>> prods;
    for ( uint32_t i = 1; i <= 15; ++i )
      prods.push_back( { { "n", fmt::format( "m{:02}", i ) } } );

    return { { "fir_n2_7dpa", { { "delay_prod_add_x7", 2 } } },
             { "fir_n2_dp", { { "delay_prod", 2 } } },
             { "fir_n3_4dpa_dpa", { { "delay_prod_add_x4", 3 }, { "delay_prod_add", 2 } } },
             { "fir_n4_3dpa_pa",
               { { "delay_prod_add_x3", 4, { chain( 1, 3 ), chain( 5, 3 ), chain( 9, 3 ), chain( 13, 3 ) } },
                 { "prod_add", 3, { prod_add_at( 4 ), prod_add_at( 8 ), prod_add_at( 12 ) } } } },
             { "fir_n5_2dpa_dpa", { { "delay_prod_add_x2", 5 }, { "delay_prod_add", 2 } } },
             { "fir_n7_2dpa", { { "delay_prod_add_x2", 7 } } },
             { "fir_n14_dpa", { { "delay_prod_add", 14 } } },
             { "fir_n14_dp", { { "delay_prod", 14 } } },
             { "fir_n15_p", { { "prod", 15 } } },
             { "fir_n15_a_p", { { "add", 15 }, { "prod", 15, prods } } },
             { "fir_n15_pa", { { "prod_add", 15 } } },
             { "fir_n16_p", { { "prod", 16 } } } };
  }
  if ( bench == "iir" )
    return { { "iir_n2_paa", { { "prod_add_add", 2 } } },
             { "iir_n2_papa", { { "prod_add_prod_add", 2 } } },
             { "iir_n2_pa", { { "prod_add", 2 } } },
             { "iir_n4_a_p", { { "add", 4 }, { "prod", 4 } } },
             { "iir_n4_p", { { "prod", 4 } } } };
  if ( bench == "pct" )
    return { { "pct_n2_axis", { { "pct_axis", 2 } } },
             { "pct_n2_ssp_x3", { { "sub_sin_prod", 2 }, { "sub_sin_prod", 2 }, { "sub_sin_prod", 2 } } },
             { "pct_n3_cssp_ssp", { { "const_sub_sin_prod", 3 }, { "sub_sin_prod", 3 } } },
             { "pct_n6_sp", { { "sin_prod", 6 } } },
             { "pct_n6_s_p_p", { { "sin", 6 }, { "prod", 6 }, { "prod", 2 } } },
             { "pct_n6_s_p_p_u_u", { { "sin", 6 }, { "prod", 6 }, { "prod", 2 }, { "sub", 6 }, { "sub", 4 } } },
             { "pct_n6_s_p_p_u_u_u_u",
               { { "sin", 6 }, { "prod", 6 }, { "prod", 2 }, { "sub", 3 }, { "sub", 3 }, { "sub", 2 }, { "sub", 2 } } },
             { "pct_n6_ssp_p_u", { { "sub_sin_prod", 6 }, { "prod", 2 }, { "sub", 4 } } },
             { "pct_n6_s", { { "sin", 6 } } },
             { "pct_n6_ssp", { { "sub_sin_prod", 6 } } } };
  if ( bench == "tpid" )
    return { { "tpid_n3_spa", { { "sub_prod_add", 3 } } },
             { "tpid_n3_pid", { { "pid", 3 } } },
             { "tpid_n3_p_i_d", { { "sub_prod", 3 }, { "pid_i", 3 }, { "pid_d", 3 } } },
             { "tpid_n6_sp", { { "sub_prod", 6 } } },
             { "tpid_n9_p", { { "prod", 9 } } },
             { "tpid_n9_p_a_s", { { "prod", 9 }, { "add", 9 }, { "sub", 6 } } },
             { "tpid_n9_pa", { { "prod_add", 9 } } } };
  if ( bench == "pi" )
    return { { "pi_n2_pa", { { "prod_add", 2 } } } };
  return {};
}

folding_config instantiate( dataflow_graph const& g, config_request const& request )
{
  config_document doc;
  doc.name = request.name;
  for ( auto const& c : request.classes )
  {
    auto p = builtin_pattern( c.pattern );
    if ( !p )
      throw std::invalid_argument( fmt::format( "unknown pattern '{}'", c.pattern ) );
    class_entry e{ *p, c.count, std::nullopt };
    if ( !c.instances.empty() )
      e.instances = c.instances;
    doc.classes.push_back( std::move( e ) );
  }
  return instantiate( g, doc );
}

nlohmann::json request_to_json( config_request const& request )
{
  nlohmann::json j = { { "name", request.name }, { "classes", nlohmann::json::array() } };
  for ( auto const& c : request.classes )
  {
    nlohmann::json jc = { { "pattern", c.pattern }, { "count", c.count } };
    if ( !c.instances.empty() )
      jc["instances"] = c.instances;
    j["classes"].push_back( jc );
  }
  return j;
}

} // namespace dfgfold
