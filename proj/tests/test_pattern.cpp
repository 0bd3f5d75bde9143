#include <doctest.h>

#include <dfgfold/bench.hpp>
#include <dfgfold/config_io.hpp>
#include <dfgfold/graph_io.hpp>
#include <dfgfold/pattern.hpp>

#include "test_util.hpp"

#include <map>

using namespace dfgfold;

namespace
{

core_pattern two_node( std::string name, node_kind a, node_kind b, uint32_t port )
{
  graph_builder t( name );
  t.add_node( "m", a );
  t.add_node( "a", b );
  t.add_edge( "m", "a", port );
  return make_pattern( name, t.build() );
}

dataflow_graph fir4()
{
  return gen_fir( 4, default_fir_coefficients( 4 ) );
}

/* induced template on `nodes` of `g`, or nothing when it is not connected */
bool has_kind( std::vector<config_violation> const& v, config_violation_kind k )
{
  return std::any_of( v.begin(), v.end(), [k]( auto const& x ) { return x.kind == k; } );
}

/* size of a maximum set of pairwise disjoint candidates */
uint32_t max_disjoint( std::vector<core_instance> const& c )
{
  uint32_t best = 0;
  for ( uint32_t mask = 0; mask < ( 1u << c.size() ); ++mask )
  {
    std::set<uint32_t> used;
    bool ok = true;
    uint32_t count = 0;
    for ( uint32_t i = 0; i < c.size() && ok; ++i )
    {
      if ( !( mask >> i & 1u ) )
        continue;
      ++count;
      for ( auto n : c[i].nodes )
        ok = ok && used.insert( n ).second;
    }
    if ( ok )
      best = std::max( best, count );
  }
  return best;
}

} // namespace

TEST_CASE( "single multiplier pattern on the 16-tap FIR" )
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  CHECK( match_pattern( g, *builtin_pattern( "prod" ) ).size() == 16 );
}

TEST_CASE( "mult to add on the 4-tap FIR" )
{
  auto g = fir4();
  /* m00 feeds the first adder on port 0, every other product on port 1 */
  auto p1 = two_node( "ma1", node_kind::mult, node_kind::add, 1 );
  auto p0 = two_node( "ma0", node_kind::mult, node_kind::add, 0 );
  auto m1 = match_pattern( g, p1 );
  auto m0 = match_pattern( g, p0 );
  CHECK( test::embedding_set( m1 ) == test::brute_force_embeddings( g, p1 ) );
  CHECK( test::embedding_set( m0 ) == test::brute_force_embeddings( g, p0 ) );
  CHECK( m1.size() + m0.size() == 4 );

  std::vector<core_instance> all = m1;
  all.insert( all.end(), m0.begin(), m0.end() );
  std::map<uint32_t, int> adder_use;
  auto adder = p1.templ.index_of( "a" );
  for ( auto const& i : all )
    ++adder_use[i.nodes[adder]];
  CHECK( std::any_of( adder_use.begin(), adder_use.end(), []( auto const& kv ) { return kv.second > 1; } ) );

  SUBCASE( "greedy cover of three" )
  {
    CHECK( max_disjoint( all ) == 3 );
    auto cfg = select_cover( { cover_request{ p1, all, 3 } } );
    REQUIRE( cfg.classes.size() == 1 );
    CHECK( cfg.classes[0].instances.size() == 3 );
    std::set<uint32_t> used;
    for ( auto const& i : cfg.classes[0].instances )
      for ( auto n : i.nodes )
        CHECK( used.insert( n ).second );
    CHECK_THROWS_AS( select_cover( { cover_request{ p1, all, 4 } } ), cover_error );
  }
}

TEST_CASE( "PI controller mult/add instances" )
{
  auto g = gen_pi();
  auto p = *builtin_pattern( "prod_add" );
  auto m = match_pattern( g, p );
  REQUIRE( m.size() == 2 );
  auto cfg = select_cover( { cover_request{ p, m, 2 } } );
  CHECK( cfg.classes[0].instances.size() == 2 );
  CHECK( check_config( g, cfg ).empty() );
  std::set<std::string> adders;
  for ( auto const& i : m )
    adders.insert( g.at( i.nodes[p.templ.index_of( "a" )] ).id );
  CHECK( adders == std::set<std::string>{ "add_i", "add_o" } );
}

TEST_CASE( "infeasible count names the class" )
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  auto add = *builtin_pattern( "add" );
  auto prod = *builtin_pattern( "prod" );
  try
  {
    select_cover( { cover_request{ add, match_pattern( g, add ), 2 }, cover_request{ prod, match_pattern( g, prod ), 17 } } );
    FAIL( "expected cover_error" );
  }
  catch ( cover_error const& e )
  {
    CHECK( e.class_index == 1 );
  }
}

TEST_CASE( "check_config" )
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  SUBCASE( "table configurations are valid" )
  {
    for ( auto const& req : reference_configs( "fir" ) )
      CHECK_MESSAGE( check_config( g, instantiate( g, req ) ).empty(), req.name );
  }
  SUBCASE( "shared multiplier" )
  {
    auto prod = *builtin_pattern( "prod" );
    auto pa = *builtin_pattern( "prod_add" );
    auto m01 = g.index_of( "m01" ), s01 = g.index_of( "s01" );
    folding_config cfg;
    cfg.classes.push_back( { prod, { core_instance{ { m01 } } } } );
    cfg.classes.push_back( { pa, { core_instance{ { s01, m01 } } } } );
    CHECK( embedding_errors( g, pa, cfg.classes[1].instances[0] ).empty() );
    CHECK( has_kind( check_config( g, cfg ), config_violation_kind::overlap ) );
  }
  SUBCASE( "mixed shapes in one class" )
  {
    graph_builder b;
    b.add_node( "x", node_kind::input ).add_input( "x" );
    b.add_node( "y", node_kind::output ).add_output( "y" );
    b.add_node( "m0", node_kind::mult );
    b.add_node( "m1", node_kind::mult );
    b.add_node( "a", node_kind::add );
    b.add_node( "s", node_kind::sub );
    b.add_edge( "x", "m0", 0 );
    b.add_edge( "x", "m0", 1 );
    b.add_edge( "x", "m1", 0 );
    b.add_edge( "x", "m1", 1 );
    b.add_edge( "x", "a", 0 );
    b.add_edge( "m0", "a", 1 );
    b.add_edge( "a", "s", 0 );
    b.add_edge( "m1", "s", 1 );
    b.add_edge( "s", "y" );
    auto h = b.build();
    auto pa = two_node( "ma", node_kind::mult, node_kind::add, 1 );
    folding_config cfg;
    /* template order is (a, m) */
    core_instance good{ { h.index_of( "a" ), h.index_of( "m0" ) } };
    core_instance bad{ { h.index_of( "s" ), h.index_of( "m1" ) } };
    CHECK( embedding_errors( h, pa, good ).empty() );
    cfg.classes.push_back( { pa, { good, bad } } );
    CHECK( has_kind( check_config( h, cfg ), config_violation_kind::isomorphism ) );
  }
  SUBCASE( "empty class" )
  {
    folding_config cfg;
    cfg.classes.push_back( { *builtin_pattern( "prod" ), {} } );
    CHECK( has_kind( check_config( g, cfg ), config_violation_kind::empty_class ) );
  }
}

TEST_CASE( "internal edge delays must match" )
{
  graph_builder b;
  b.add_node( "x", node_kind::input ).add_input( "x" );
  b.add_node( "n0", node_kind::negate );
  b.add_node( "n1", node_kind::negate );
  b.add_node( "n2", node_kind::negate );
  b.add_edge( "x", "n0" );
  b.add_edge( "n0", "n1", 0, 1 );
  b.add_edge( "n1", "n2", 0, 0 );
  auto g = b.build();
  graph_builder t;
  t.add_node( "a", node_kind::negate );
  t.add_node( "b", node_kind::negate );
  t.add_edge( "a", "b", 0, 1 );
  auto p = make_pattern( "nn", t.build() );
  auto m = match_pattern( g, p );
  REQUIRE( m.size() == 1 );
  CHECK( g.at( m[0].nodes[0] ).id == "n0" );
}

TEST_CASE( "matcher agrees with brute force on random graphs" )
{
  std::mt19937 rng( 2024 );
  int compared = 0;
  for ( int trial = 0; compared < 100; ++trial )
  {
    REQUIRE( trial < 1000 );
    auto g = test::random_graph( rng, std::uniform_int_distribution<uint32_t>( 5, 9 )( rng ) );
    REQUIRE( g.size() <= 12 );
    std::vector<uint32_t> ops;
    for ( uint32_t n = 0; n < g.size(); ++n )
    {
      if ( g.at( n ).kind != node_kind::input && g.at( n ).kind != node_kind::output )
        ops.push_back( n );
    }
    std::shuffle( ops.begin(), ops.end(), rng );
    ops.resize( std::uniform_int_distribution<size_t>( 1, std::min<size_t>( 3, ops.size() ) )( rng ) );
    std::sort( ops.begin(), ops.end() );
    auto p = test::induced_pattern( g, ops );
    if ( !p )
      continue;
    ++compared;
    auto found = match_pattern( g, *p );
    CHECK( test::embedding_set( found ) == test::brute_force_embeddings( g, *p ) );
    CHECK( std::is_sorted( found.begin(), found.end() ) );
    for ( auto const& inst : found )
      CHECK( embedding_errors( g, *p, inst ).empty() );
  }
}

TEST_CASE( "pattern larger than graph" )
{
  auto g = gen_pi();
  CHECK( match_pattern( g, *builtin_pattern( "pid" ) ).empty() );
}

TEST_CASE( "exact cover finds selections greedy misses" )
{
  std::mt19937 rng( 99 );
  for ( int trial = 0; trial < 40; ++trial )
  {
    auto g = test::random_graph( rng, 10, 2, false );
    auto pa = two_node( "ma", node_kind::mult, node_kind::add, 1 );
    auto sa = two_node( "sa", node_kind::sub, node_kind::add, 0 );
    auto c1 = match_pattern( g, pa );
    auto c2 = match_pattern( g, sa );
    if ( c1.empty() )
      continue;
    auto k = max_disjoint( c1 );
    auto cfg = select_cover_exact( { cover_request{ pa, c1, k } }, g.size() );
    CHECK( cfg.classes[0].instances.size() == k );
    CHECK( check_config( g, cfg ).empty() );
    CHECK_THROWS_AS( select_cover_exact( { cover_request{ pa, c1, k + 1 } }, g.size() ), cover_error );
    if ( !c2.empty() )
    {
      try
      {
        auto greedy = select_cover( { cover_request{ pa, c1, 1 }, cover_request{ sa, c2, 1 } } );
        CHECK( check_config( g, greedy ).empty() );
      }
      catch ( cover_error const& )
      {
      }
    }
  }
}

TEST_CASE( "cover selection under order-preserving relabeling" )
{
  auto g = gen_fir( 8, default_fir_coefficients( 8 ) );
  auto text = serialize_graph( g );
  /* prefixing every id keeps the id order */
  auto j = nlohmann::json::parse( text );
  for ( auto& n : j["nodes"] )
    n["id"] = "q_" + n["id"].get<std::string>();
  for ( auto& e : j["edges"] )
  {
    e["from"][0] = "q_" + e["from"][0].get<std::string>();
    e["to"][0] = "q_" + e["to"][0].get<std::string>();
  }
  for ( auto& i : j["inputs"] )
    i = "q_" + i.get<std::string>();
  for ( auto& o : j["outputs"] )
    o = "q_" + o.get<std::string>();
  auto h = graph_from_json( j );
  auto p = *builtin_pattern( "delay_prod_add_x2" );
  auto a = select_cover( { cover_request{ p, match_pattern( g, p ), 3 } } );
  auto b = select_cover( { cover_request{ p, match_pattern( h, p ), 3 } } );
  REQUIRE( a.classes[0].instances.size() == b.classes[0].instances.size() );
  for ( size_t i = 0; i < a.classes[0].instances.size(); ++i )
  {
    for ( size_t k = 0; k < p.size(); ++k )
      CHECK( "q_" + g.at( a.classes[0].instances[i].nodes[k] ).id == h.at( b.classes[0].instances[i].nodes[k] ).id );
  }
}

TEST_CASE( "notation" )
{
  auto g = gen_fir( 16, default_fir_coefficients( 16 ) );
  config_request r{ "x", { { "delay_prod_add_x2", 5 }, { "delay_prod_add", 2 } } };
  CHECK( instantiate( g, r ).notation() == "5{2add,2delay,2prod}, 2{add,delay,prod}" );
  CHECK( builtin_pattern( "pid" )->notation() == "{3add,2delay,3prod,2sub}" );
}

TEST_CASE( "pattern documents" )
{
  auto p = *builtin_pattern( "delay_prod_add_x2" );
  auto text = pattern_to_json( p ).dump();
  auto back = parse_pattern( text );
  CHECK( back.notation() == p.notation() );
  CHECK( back.boundary_inputs == p.boundary_inputs );
  CHECK( back.boundary_outputs == p.boundary_outputs );

  auto j = pattern_to_json( p );
  j["boundary_inputs"] = nlohmann::json::array();
  CHECK_THROWS_AS( parse_pattern( j.dump() ), graph_error );
}

TEST_CASE( "config documents with explicit instances" )
{
  auto g = gen_pi();
  auto doc = parse_config_document( R"({"name":"pi","classes":[{"pattern":"prod_add","count":2,
      "instances":[{"m":"mult_p","a":"add_o"},{"m":"mult_i","a":"add_i"}]}]})" );
  auto cfg = instantiate( g, doc );
  CHECK( cfg.classes[0].instances.size() == 2 );
  CHECK( check_config( g, cfg ).empty() );

  auto bad = parse_config_document( R"({"classes":[{"pattern":"prod_add","count":1,"instances":[{"m":"mult_p","a":"add_i"}]}]})" );
  CHECK_THROWS_AS( instantiate( g, bad ), parse_error );
  CHECK_THROWS_AS( parse_config_document( R"({"classes":[{"pattern":"nonexistent","count":1}]})" ), parse_error );

  auto round = parse_config_document( config_to_json( g, cfg, "pi" ).dump() );
  CHECK( instantiate( g, round ).notation() == cfg.notation() );
}
