#include <doctest.h>

#include "test_util.hpp"

#include <dfgfold/fold.hpp>
#include <dfgfold/simulate.hpp>

#include <map>
#include <regex>
#include <set>

using namespace dfgfold;
using namespace dfgfold::test;

namespace
{

dataflow_graph fir16()
{
  return gen_fir( 16, default_fir_coefficients( 16 ) );
}

folding_config config_of( dataflow_graph const& g, std::string const& pattern, uint32_t count )
{
  return instantiate( g, config_request{ "t", { class_request{ pattern, count } } } );
}

/* The graph with node `drop` removed and its consumers reading its driver. */
dataflow_graph bypass_node( dataflow_graph const& g, std::string const& drop )
{
  graph_builder b( g.name() );
  auto victim = *g.find( drop );
  auto driver = g.at( g.edges()[g.fanin( victim )[0]].src ).id;
  for ( auto const& n : g.nodes() )
  {
    if ( n.id != drop )
      b.add_node( n );
  }
  for ( auto const& e : g.edges() )
  {
    if ( e.dst == victim )
      continue;
    auto src = e.src == victim ? driver : g.at( e.src ).id;
    b.add_edge( src, e.src_port, g.at( e.dst ).id, e.dst_port, e.delay );
  }
  for ( auto i : g.inputs() )
    b.add_input( g.at( i ).id );
  for ( auto o : g.outputs() )
    b.add_output( g.at( o ).id );
  return b.build();
}

} // namespace

TEST_CASE( "PI folds onto one shared unit with a mod-2 counter" )
{
  auto g = gen_pi();
  auto r = fold_with_schedule( g, instantiate( g, reference_configs( "pi" ).front() ) );
  auto const& d = r.design;
  CHECK( d.meta.folding_factor == 2 );
  CHECK( d.meta.latency_offset == 1 );
  CHECK( nodes_in_class( d, node_kind::mult, 0 ).size() == 1 );
  CHECK( nodes_in_class( d, node_kind::add, 0 ).size() == 1 );
  CHECK( d.graph.nodes_of_kind( node_kind::mult ).size() == 1 );
  auto counters = d.graph.nodes_of_kind( node_kind::counter );
  REQUIRE( counters.size() == 1 );
  CHECK( d.graph.at( counters[0] ).params["modulus"] == 2 );
  CHECK( !nodes_in_class( d, node_kind::mux, 0 ).empty() );
  CHECK( validate( d.graph ).empty() );

  auto stim = random_stimuli( g, 200, 3, 1.0 );
  CHECK( check_equivalence( g, d, stim, 200 ).pass );
}

TEST_CASE( "folding without classes is the identity up to the controller" )
{
  auto g = gen_iir();
  auto r = fold_with_schedule( g, folding_config{} );
  CHECK( r.design.meta.folding_factor == 1 );
  CHECK( r.design.meta.select_table.empty() );
  CHECK( r.design.graph.nodes_of_kind( node_kind::mux ).empty() );
  CHECK( r.design.graph.nodes_of_kind( node_kind::counter ).size() == 1 );
  auto stim = random_stimuli( g, 100, 1, 1.0 );
  auto a = simulate( g, stim, 100 );
  auto b = simulate( r.design.graph, stim, 100 );
  CHECK( a.values == b.values );
}

TEST_CASE( "FIR 15{prod} leaves exactly two multipliers" )
{
  auto g = fir16();
  auto r = fold_with_schedule( g, config_of( g, "prod", 15 ) );
  CHECK( r.design.graph.nodes_of_kind( node_kind::mult ).size() == 2 );
  CHECK( nodes_in_class( r.design, node_kind::mult, 0 ).size() == 1 );
}

TEST_CASE( "interleave_registers" )
{
  auto p = *builtin_pattern( "delay_prod_add" );
  auto delays = p.templ.nodes_of_kind( node_kind::delay ).size();
  REQUIRE( delays == 1 );

  auto i1 = interleave_registers( p, 1 );
  CHECK( i1.templ.size() == p.templ.size() );

  auto i4 = interleave_registers( p, 4 );
  CHECK( i4.templ.size() == p.templ.size() + 3 );
  CHECK( i4.templ.nodes_of_kind( node_kind::delay ).size() == 4 );
  auto d = p.templ.at( p.templ.nodes_of_kind( node_kind::delay )[0] ).id;
  for ( uint32_t k = 1; k < 4; ++k )
    CHECK( i4.templ.find( d + "_r" + std::to_string( k ) ).has_value() );

  graph_builder b( "edge_reg" );
  b.add_node( "a", node_kind::add );
  b.add_node( "n", node_kind::negate );
  b.add_edge( "n", "a", 0, 2 );
  auto ep = make_pattern( "edge_reg", b.build() );
  auto e3 = interleave_registers( ep, 3 );
  REQUIRE( e3.templ.edges().size() == 1 );
  CHECK( e3.templ.edges()[0].delay == 6 );

  CHECK_THROWS_AS( interleave_registers( p, 0 ), std::invalid_argument );
}

TEST_CASE( "build_controller" )
{
  SUBCASE( "rejects malformed select tables" )
  {
    graph_builder b;
    b.add_node( "m", node_kind::mux, { { "data_inputs", 2 } } );
    CHECK_THROWS_AS( build_controller( b, 3, { { "m", { 0, 1 } } } ), std::invalid_argument );
    CHECK_THROWS_AS( build_controller( b, 2, { { "m", { 0, 2 } } } ), std::invalid_argument );
    CHECK_THROWS_AS( build_controller( b, 0, {} ), std::invalid_argument );
  }

  SUBCASE( "counts modulo N" )
  {
    graph_builder b( "count" );
    b.add_node( "x", node_kind::input );
    b.add_input( "x" );
    b.add_node( "y", node_kind::output );
    b.add_output( "y" );
    build_controller( b, 3, {} );
    b.add_edge( controller_id, "y" );
    auto g = b.build();
    fixed_format raw{ 0 };
    stimuli stim{ { "x" }, { { 0 } } };
    auto t = simulate( g, stim, 7, raw );
    CHECK( t.values[0] == std::vector<int32_t>{ 0, 1, 2, 0, 1, 2, 0 } );
  }
}

TEST_CASE( "structural invariants on every shipped configuration" )
{
  for ( auto const& bc : shipped_configs() )
  {
    INFO( bc.bench << "/" << bc.name );
    auto r = fold_with_schedule( bc.graph, bc.config );
    auto const& d = r.design;
    auto n = r.sched.folding_factor;

    CHECK( d.graph.nodes_of_kind( node_kind::counter ).size() == 1 );
    for ( auto m : d.graph.nodes_of_kind( node_kind::mux ) )
    {
      auto inputs = d.graph.at( m ).params["data_inputs"].get<uint32_t>();
      CHECK( inputs >= 2 );
      CHECK( inputs <= std::max( n, 2u ) );
    }

    for ( uint32_t c = 0; c < r.problem.config.classes.size(); ++c )
    {
      CHECK( nodes_in_class( d, node_kind::mux, c ).size() == multi_source_inputs( r.problem, r.sched, c ) );

      auto const& t = r.problem.config.classes[c].pattern.templ;
      std::regex pipeline( "_p[0-9]+$" );
      uint32_t unit_delays = 0;
      for ( auto x : nodes_in_class( d, node_kind::delay, c ) )
        unit_delays += std::regex_search( d.graph.at( x ).id, pipeline ) ? 0 : 1;
      CHECK( unit_delays == n * t.nodes_of_kind( node_kind::delay ).size() );

      for ( auto const& e : t.edges() )
      {
        if ( e.delay == 0 || t.at( e.src ).kind == node_kind::const_input )
          continue;
        auto dst = *d.graph.find( "u" + std::to_string( c ) + "_" + t.at( e.dst ).id );
        auto ei = d.graph.driver( dst, e.dst_port );
        REQUIRE( ei.has_value() );
        CHECK( d.graph.edges()[*ei].delay == n * e.delay );
      }
    }
  }
}

TEST_CASE( "single-input cores need no multiplexers" )
{
  auto g = gen_pct();
  auto r = fold_with_schedule( g, instantiate( g, config_request{ "s", { class_request{ "sin", 6 } } } ) );
  CHECK( r.sched.folding_factor == 6 );
  CHECK( multi_source_inputs( r.problem, r.sched, 0 ) == nodes_in_class( r.design, node_kind::mux, 0 ).size() );
}

TEST_CASE( "fold rejects invalid schedules and controller graphs" )
{
  auto g = gen_pi();
  auto cfg = instantiate( g, reference_configs( "pi" ).front() );
  auto p = prepare_fold( g, cfg );
  schedule bad{ 2, std::vector<uint32_t>( p.cores.vertices.size(), 0 ) };
  CHECK_THROWS_AS( fold( p, bad ), schedule_error );

  auto folded = fold_with_schedule( g, cfg ).design;
  CHECK_THROWS_AS( prepare_fold( folded.graph, folding_config{} ), graph_error );
}

TEST_CASE( "shortening an interleaved register chain breaks equivalence" )
{
  auto g = fir16();
  auto r = fold_with_schedule( g, config_of( g, "delay_prod_add", 14 ) );
  auto n = r.sched.folding_factor;
  REQUIRE( n == 14 );
  auto const& t = r.problem.config.classes[0].pattern.templ;
  auto d = t.at( t.nodes_of_kind( node_kind::delay )[0] ).id;
  auto victim = "u0_" + d + "_r" + std::to_string( n - 1 );

  folded_design broken{ bypass_node( r.design.graph, victim ), r.design.meta };
  REQUIRE( validate( broken.graph ).empty() );

  uint64_t samples = 64;
  auto stim = random_stimuli( g, samples, 11, 1.0 );
  auto report = check_equivalence( g, broken, stim, samples );
  CHECK_FALSE( report.pass );
  REQUIRE( report.first_mismatch.has_value() );

  /* first differing frame found by driving both circuits by hand */
  simulator ref( g ), dut( broken.graph );
  std::optional<uint64_t> first;
  std::vector<int32_t> zeros( g.inputs().size(), 0 );
  std::vector<std::vector<int32_t>> folded_out;
  for ( uint64_t cycle = 0; cycle < samples * n; ++cycle )
  {
    std::vector<int32_t> in = zeros;
    if ( cycle % n == 0 )
    {
      for ( size_t i = 0; i < in.size(); ++i )
        in[i] = stim.at( i, cycle / n );
    }
    dut.step( in );
    folded_out.push_back( dut.outputs() );
  }
  for ( uint64_t k = 0; k < samples && !first; ++k )
  {
    std::vector<int32_t> in( g.inputs().size() );
    for ( size_t i = 0; i < in.size(); ++i )
      in[i] = stim.at( i, k );
    ref.step( in );
    auto at = k * n + broken.meta.latency_offset;
    if ( at < folded_out.size() && folded_out[at] != ref.outputs() )
      first = k;
  }
  REQUIRE( first.has_value() );
  CHECK( report.first_mismatch->sample == *first );

  CHECK( check_equivalence( g, r.design, stim, samples ).pass );
}
