#include <doctest.h>

#include "test_util.hpp"

#include <dfgfold/explore.hpp>

#include <random>
#include <sstream>

using namespace dfgfold;
using namespace dfgfold::test;

namespace
{

exploration_row point( std::string name, uint64_t lut, double latency, bool equivalent = true )
{
  exploration_row r;
  r.name = name;
  r.notation = name;
  r.cost.lut_units = lut;
  r.latency_proxy = latency;
  r.equivalent = equivalent;
  return r;
}

std::vector<named_config> shipped_named( std::string const& bench )
{
  std::vector<named_config> out;
  for ( auto const& bc : shipped_configs() )
  {
    if ( bc.bench == bench )
      out.push_back( { bc.name, bc.config } );
  }
  return out;
}

} // namespace

TEST_CASE( "pareto on the textbook example" )
{
  std::vector<exploration_row> rows{ point( "a", 10, 5 ), point( "b", 8, 7 ), point( "c", 12, 4 ), point( "d", 11, 6 ) };
  auto front = pareto( rows );
  CHECK( coordinates( front ) == std::vector<coords>{ { 12, 4 }, { 10, 5 }, { 8, 7 } } );

  CHECK( coordinates( pareto( { point( "only", 3, 3 ) } ) ) == std::vector<coords>{ { 3, 3 } } );
  CHECK( pareto( {} ).empty() );
  CHECK( pareto( { point( "x", 1, 1, false ) } ).empty() );

  auto dup = pareto( { point( "z", 5, 5 ), point( "y", 5, 5 ) } );
  REQUIRE( dup.size() == 1 );
  CHECK( dup[0].name == "y" );

  mark_pareto( rows );
  CHECK( rows[0].pareto );
  CHECK( rows[1].pareto );
  CHECK( rows[2].pareto );
  CHECK_FALSE( rows[3].pareto );
}

TEST_CASE( "pareto agrees with brute-force dominance" )
{
  std::mt19937 rng( 8 );
  for ( int k = 0; k < 100; ++k )
  {
    auto n = std::uniform_int_distribution<int>( 0, 1000 )( rng );
    std::vector<exploration_row> rows;
    std::uniform_int_distribution<uint64_t> lut( 0, 60 );
    std::uniform_int_distribution<int> lat( 0, 60 ), pass( 0, 9 );
    for ( int i = 0; i < n; ++i )
      rows.push_back( point( "r" + std::to_string( i ), lut( rng ), lat( rng ) * 0.5, pass( rng ) != 0 ) );
    auto front = pareto( rows );
    CHECK( coordinates( front ) == brute_force_front( rows ) );
    for ( size_t i = 1; i < front.size(); ++i )
    {
      CHECK( front[i].latency_proxy > front[i - 1].latency_proxy );
      CHECK( front[i].cost.lut_units < front[i - 1].cost.lut_units );
    }
  }
}

TEST_CASE( "explore" )
{
  explore_options opts;
  opts.samples = 200;

  CHECK( explore( gen_fir( 16, default_fir_coefficients( 16 ) ), {}, opts ).empty() );

  SUBCASE( "IIR 4{prod} shares one multiplier" )
  {
    auto g = gen_iir();
    auto cfg = instantiate( g, config_request{ "p", { class_request{ "prod", 4 } } } );
    auto rows = explore( g, { { "iir_p", cfg } }, opts );
    REQUIRE( rows.size() == 1 );
    CHECK( rows[0].equivalent );
    CHECK( rows[0].cost.mult_units == 1 );
    CHECK( estimate_cost( g ).mult_units == 4 );
    CHECK( rows[0].negative_arcs == 0 );
    CHECK( rows[0].arcs_checked > 0 );
  }

  SUBCASE( "FIR table configurations" )
  {
    auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
    auto configs = shipped_named( "fir" );
    REQUIRE( configs.size() == 12 );
    auto rows = explore( g, configs, opts );
    REQUIRE( rows.size() == 12 );
    for ( size_t i = 0; i < rows.size(); ++i )
    {
      CHECK( rows[i].equivalent );
      CHECK( rows[i].failure.empty() );
      CHECK( rows[i].latency_proxy == doctest::Approx( rows[i].folding_factor * rows[i].cost.tmin_proxy ) );
      if ( i > 0 )
        CHECK( std::pair{ rows[i - 1].cost.lut_units, rows[i - 1].latency_proxy } <= std::pair{ rows[i].cost.lut_units, rows[i].latency_proxy } );
    }
    auto front = pareto( rows );
    CHECK_FALSE( front.empty() );
    CHECK( coordinates( front ) == brute_force_front( rows ) );

    std::vector<std::string> names;
    for ( auto const& r : rows )
      names.push_back( r.name );
    opts.threads = 1;
    auto serial = explore( g, configs, opts );
    for ( size_t i = 0; i < rows.size(); ++i )
    {
      CHECK( serial[i].name == names[i] );
      CHECK( serial[i].cost.lut_units == rows[i].cost.lut_units );
    }

    auto csv = rows_to_csv( rows );
    std::istringstream in( csv );
    std::string line;
    std::getline( in, line );
    CHECK( line == "config,N,mult_units,lut_units,reg_bits,mux_inputs,tmin_proxy_ns,latency_proxy_ns,equivalent,pareto,name" );
    int lines = 0;
    while ( std::getline( in, line ) )
      ++lines;
    CHECK( lines == 12 );

    auto j = rows_to_json( rows );
    CHECK( j.size() == 12 );
    CHECK( gnuplot_script( "fir.csv", "FIR" ).find( "fir.csv" ) != std::string::npos );
  }
}

TEST_CASE( "failed rows sort last and stay off the front" )
{
  auto rows = std::vector<exploration_row>{ point( "ok", 10, 1 ), failed_row( "broken", "no schedule" ) };
  CHECK_FALSE( rows[1].equivalent );
  CHECK( rows[1].failure == "no schedule" );
  CHECK( pareto( rows ).size() == 1 );
  CHECK( rows_to_csv( rows ).find( "fail" ) != std::string::npos );
}
