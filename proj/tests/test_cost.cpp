#include <doctest.h>

#include "test_util.hpp"

#include <dfgfold/cost.hpp>
#include <dfgfold/fold.hpp>
#include <dfgfold/graph_io.hpp>

using namespace dfgfold;
using namespace dfgfold::test;

namespace
{

dataflow_graph single_adder( uint32_t delay = 0 )
{
  graph_builder b( "adder" );
  b.add_node( "a", node_kind::input );
  b.add_node( "b", node_kind::input );
  b.add_node( "s", node_kind::add );
  b.add_node( "y", node_kind::output );
  b.add_input( "a" ).add_input( "b" ).add_output( "y" );
  b.add_edge( "a", "s", 0 ).add_edge( "b", "s", 1 ).add_edge( "s", "y", 0, delay );
  return b.build();
}

folding_config config_of( dataflow_graph const& g, std::string const& pattern, uint32_t count )
{
  return instantiate( g, config_request{ "t", { class_request{ pattern, count } } } );
}

cost_estimate folded_with( uint32_t n, uint64_t core, uint64_t remain, uint64_t overhead )
{
  cost_estimate c;
  c.folding_factor = n;
  c.lut_units = core + remain + overhead;
  c.breakdown = cost_breakdown{ core, remain, overhead };
  return c;
}

cost_estimate original_with( uint64_t lut )
{
  cost_estimate c;
  c.lut_units = lut;
  return c;
}

} // namespace

TEST_CASE( "weight-table census of small graphs" )
{
  auto c = estimate_cost( single_adder() );
  CHECK( c.lut_units == 32 );
  CHECK( c.mult_units == 0 );
  CHECK( c.reg_bits == 0 );
  CHECK( c.tmin_proxy == doctest::Approx( 2.5 ) );

  auto r = estimate_cost( single_adder( 2 ) );
  CHECK( r.reg_bits == 64 );
  CHECK( r.lut_units == 32 + 64 );

  auto w = parse_weights( R"({"add": 40})" );
  CHECK( estimate_cost( single_adder(), w ).lut_units == 40 );
}

TEST_CASE( "FIR census before and after folding the multipliers" )
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  auto c = estimate_cost( g );
  CHECK( c.mult_units == 16 );
  CHECK( c.reg_bits == 15 * 32 );
  CHECK( c.lut_units == 15 * 32 + 15 * 32 );
  CHECK( c.tmin_proxy == doctest::Approx( 6.0 + 15 * 2.5 ) );

  auto folded = fold_with_schedule( g, config_of( g, "prod", 15 ) ).design;
  auto f = estimate_cost( folded );
  CHECK( f.mult_units == 2 );
  CHECK( f.folding_factor == folded.meta.folding_factor );
  REQUIRE( f.breakdown.has_value() );
}

TEST_CASE( "mult_units never increases with the multiplier folding count" )
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  uint32_t previous = estimate_cost( g ).mult_units;
  for ( uint32_t k = 1; k <= 16; ++k )
  {
    auto f = estimate_cost( fold_with_schedule( g, config_of( g, "prod", k ) ).design );
    CHECK( f.mult_units == 17 - k );
    CHECK( f.mult_units <= previous );
    previous = f.mult_units;
  }
}

TEST_CASE( "overhead_below_saving and folding_benefit" )
{
  CHECK( overhead_below_saving( 120, 14, 100 ) );
  CHECK_FALSE( overhead_below_saving( 0, 1, 100 ) );
  CHECK_FALSE( overhead_below_saving( 500, 2, 100 ) );

  auto b = folding_benefit( original_with( 14 * 100 + 50 ), folded_with( 14, 100, 50, 120 ) );
  CHECK( b.beneficial );
  CHECK( b.overhead_below_saving );
  CHECK( b.precondition );
  CHECK( b.agree );
  CHECK( b.margin == 1450 - 270 );

  auto one = folding_benefit( original_with( 150 ), folded_with( 1, 100, 50, 0 ) );
  CHECK_FALSE( one.beneficial );
  CHECK_FALSE( one.overhead_below_saving );
  CHECK( one.agree );

  auto heavy = folding_benefit( original_with( 2 * 100 ), folded_with( 2, 100, 0, 500 ) );
  CHECK_FALSE( heavy.beneficial );
  CHECK_FALSE( heavy.overhead_below_saving );
  CHECK( heavy.precondition );
  CHECK( heavy.agree );

  auto off = folding_benefit( original_with( 999 ), folded_with( 2, 100, 0, 50 ) );
  CHECK_FALSE( off.precondition );

  CHECK_THROWS_AS( folding_benefit( original_with( 10 ), original_with( 10 ) ), cost_error );
}

TEST_CASE( "breakdown sums to lut_units on every shipped configuration" )
{
  uint32_t with_precondition = 0;
  for ( auto const& bc : shipped_configs() )
  {
    INFO( bc.bench << "/" << bc.name );
    auto original = estimate_cost( bc.graph );
    auto folded = estimate_cost( fold_with_schedule( bc.graph, bc.config ).design );
    REQUIRE( folded.breakdown.has_value() );
    auto const& p = *folded.breakdown;
    CHECK( p.core + p.remain + p.overhead == folded.lut_units );

    auto b = folding_benefit( original, folded );
    CHECK( b.precondition == ( folded.folding_factor * p.core + p.remain == original.lut_units ) );
    if ( b.precondition )
    {
      ++with_precondition;
      CHECK( b.agree );
      CHECK( b.beneficial == b.overhead_below_saving );
    }
  }
  CHECK( with_precondition > 0 );
}

TEST_CASE( "weight and delay tables" )
{
  CHECK_THROWS_AS( parse_weights( "[1, 2]" ), parse_error );
  CHECK_THROWS_AS( parse_weights( R"({"adder": 3})" ), parse_error );
  CHECK_THROWS_AS( parse_weights( R"({"add": -3})" ), parse_error );
  CHECK_THROWS_AS( parse_weights( R"({"add": 1.5})" ), parse_error );
  CHECK_THROWS_AS( parse_delays( R"({"mult": -1})" ), parse_error );
  CHECK_THROWS_AS( parse_weights( "{" ), parse_error );
  CHECK( parse_delays( R"({"mult": 4.5})" ).at( "mult" ) == doctest::Approx( 4.5 ) );

  auto w = default_weights();
  w.erase( "add" );
  CHECK_THROWS_AS( estimate_cost( single_adder(), w ), cost_error );

  auto j = cost_to_json( estimate_cost( single_adder() ) );
  CHECK( j["lut_units"] == 32 );
}
