#include <dfgfold/graph.hpp>

#include <algorithm>
#include <array>
#include <functional>
#include <queue>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

namespace dfgfold
{

namespace
{

struct kind_entry
{
  node_kind kind;
  std::string_view name;
  std::string_view short_name;
};

constexpr std::array<kind_entry, 11> kind_table{ {
    { node_kind::add, "add", "add" },
    { node_kind::sub, "sub", "sub" },
    { node_kind::mult, "mult", "prod" },
    { node_kind::negate, "negate", "neg" },
    { node_kind::const_input, "const-input", "const" },
    { node_kind::sine_lut, "sine-lut", "sin" },
    { node_kind::delay, "delay", "delay" },
    { node_kind::mux, "mux", "mux" },
    { node_kind::counter, "counter", "counter" },
    { node_kind::input, "input", "input" },
    { node_kind::output, "output", "output" },
} };

} // namespace

std::string_view kind_name( node_kind kind )
{
  return kind_table[static_cast<size_t>( kind )].name;
}

std::string_view kind_short_name( node_kind kind )
{
  return kind_table[static_cast<size_t>( kind )].short_name;
}

std::optional<node_kind> kind_from_name( std::string_view name )
{
  for ( auto const& e : kind_table )
  {
    if ( e.name == name || e.short_name == name )
      return e.kind;
  }
  if ( name == "mul" )
    return node_kind::mult;
  if ( name == "const" )
    return node_kind::const_input;
  return std::nullopt;
}

bool is_combinational( node_kind kind )
{
  switch ( kind )
  {
  case node_kind::add:
  case node_kind::sub:
  case node_kind::mult:
  case node_kind::negate:
  case node_kind::sine_lut:
  case node_kind::mux:
  case node_kind::output:
    return true;
  default:
    return false;
  }
}

uint32_t num_inputs( node const& n )
{
  switch ( n.kind )
  {
  case node_kind::add:
  case node_kind::sub:
  case node_kind::mult:
    return 2;
  case node_kind::negate:
  case node_kind::sine_lut:
  case node_kind::delay:
  case node_kind::output:
    return 1;
  case node_kind::mux:
    return 1u + n.params.value( "data_inputs", 0u );
  default:
    return 0;
  }
}

uint32_t num_outputs( node const& n )
{
  return n.kind == node_kind::output ? 0u : 1u;
}

std::optional<uint32_t> dataflow_graph::find( std::string_view id ) const
{
  if ( auto it = index_.find( std::string( id ) ); it != index_.end() )
    return it->second;
  return std::nullopt;
}

uint32_t dataflow_graph::index_of( std::string_view id ) const
{
  if ( auto idx = find( id ) )
    return *idx;
  throw graph_error( fmt::format( "unknown node '{}'", id ) );
}

std::optional<uint32_t> dataflow_graph::driver( uint32_t node, uint32_t port ) const
{
  for ( auto e : fanin_[node] )
  {
    if ( edges_[e].dst_port == port )
      return e;
  }
  return std::nullopt;
}

std::vector<uint32_t> dataflow_graph::nodes_of_kind( node_kind kind ) const
{
  std::vector<uint32_t> result;
  for ( uint32_t i = 0; i < size(); ++i )
  {
    if ( nodes_[i].kind == kind )
      result.push_back( i );
  }
  return result;
}

graph_builder& graph_builder::add_node( node n )
{
  if ( ids_.contains( n.id ) )
    throw graph_error( fmt::format( "duplicate node id '{}'", n.id ) );
  ids_.emplace( n.id, nodes_.size() );
  nodes_.push_back( std::move( n ) );
  return *this;
}

graph_builder& graph_builder::add_node( std::string id, node_kind kind, nlohmann::json params )
{
  node n;
  n.id = std::move( id );
  n.kind = kind;
  n.params = std::move( params );
  return add_node( std::move( n ) );
}

graph_builder& graph_builder::add_edge( std::string src, uint32_t src_port, std::string dst, uint32_t dst_port, uint32_t delay )
{
  edges_.push_back( { std::move( src ), src_port, std::move( dst ), dst_port, delay } );
  return *this;
}

graph_builder& graph_builder::add_input( std::string id )
{
  inputs_.push_back( std::move( id ) );
  return *this;
}

graph_builder& graph_builder::add_output( std::string id )
{
  outputs_.push_back( std::move( id ) );
  return *this;
}

bool graph_builder::has_node( std::string_view id ) const
{
  return ids_.contains( std::string( id ) );
}

dataflow_graph graph_builder::build() const
{
  dataflow_graph g;
  g.name_ = name_;
  g.nodes_ = nodes_;
  std::sort( g.nodes_.begin(), g.nodes_.end(), []( auto const& a, auto const& b ) { return a.id < b.id; } );
  for ( uint32_t i = 0; i < g.nodes_.size(); ++i )
    g.index_.emplace( g.nodes_[i].id, i );

  auto resolve = [&]( std::string const& id, std::string_view what ) {
    auto it = g.index_.find( id );
    if ( it == g.index_.end() )
      throw graph_error( fmt::format( "dangling reference: {} names unknown node '{}'", what, id ) );
    return it->second;
  };

  for ( auto const& pe : edges_ )
  {
    edge e;
    e.src = resolve( pe.src, fmt::format( "edge {} -> {}", pe.src, pe.dst ) );
    e.dst = resolve( pe.dst, fmt::format( "edge {} -> {}", pe.src, pe.dst ) );
    e.src_port = pe.src_port;
    e.dst_port = pe.dst_port;
    e.delay = pe.delay;
    g.edges_.push_back( e );
  }
  std::sort( g.edges_.begin(), g.edges_.end(), []( edge const& a, edge const& b ) {
    return std::tie( a.dst, a.dst_port, a.src, a.src_port, a.delay ) < std::tie( b.dst, b.dst_port, b.src, b.src_port, b.delay );
  } );

  for ( auto const& id : inputs_ )
    g.inputs_.push_back( resolve( id, "input list" ) );
  for ( auto const& id : outputs_ )
    g.outputs_.push_back( resolve( id, "output list" ) );

  g.fanin_.resize( g.nodes_.size() );
  g.fanout_.resize( g.nodes_.size() );
  for ( uint32_t i = 0; i < g.edges_.size(); ++i )
  {
    g.fanin_[g.edges_[i].dst].push_back( i );
    g.fanout_[g.edges_[i].src].push_back( i );
  }
  return g;
}

graph_builder to_builder( dataflow_graph const& g )
{
  graph_builder b( g.name() );
  for ( auto const& n : g.nodes() )
    b.add_node( n );
  for ( auto const& e : g.edges() )
    b.add_edge( g.at( e.src ).id, e.src_port, g.at( e.dst ).id, e.dst_port, e.delay );
  for ( auto i : g.inputs() )
    b.add_input( g.at( i ).id );
  for ( auto o : g.outputs() )
    b.add_output( g.at( o ).id );
  return b;
}

std::string_view violation_name( violation_kind kind )
{
  switch ( kind )
  {
  case violation_kind::bad_port:
    return "bad-port";
  case violation_kind::multiply_driven:
    return "multiply-driven";
  case violation_kind::unconnected_port:
    return "unconnected-port";
  case violation_kind::zero_delay_cycle:
    return "zero-delay-cycle";
  case violation_kind::width_mismatch:
    return "width-mismatch";
  case violation_kind::bad_params:
    return "bad-params";
  case violation_kind::bad_io_list:
    return "bad-io-list";
  }
  return "unknown";
}

bool is_combinational_edge( dataflow_graph const& g, edge const& e )
{
  if ( e.delay > 0 )
    return false;
  auto k = g.at( e.src ).kind;
  return k != node_kind::delay && k != node_kind::counter;
}

namespace
{

/* Kahn's algorithm with an id-ordered ready set; returns a partial order if a cycle exists. */
std::vector<uint32_t> kahn( dataflow_graph const& g )
{
  std::vector<uint32_t> indegree( g.size(), 0 );
  for ( auto const& e : g.edges() )
  {
    if ( is_combinational_edge( g, e ) )
      ++indegree[e.dst];
  }
  std::priority_queue<uint32_t, std::vector<uint32_t>, std::greater<>> ready;
  for ( uint32_t i = 0; i < g.size(); ++i )
  {
    if ( indegree[i] == 0 )
      ready.push( i );
  }
  std::vector<uint32_t> order;
  order.reserve( g.size() );
  while ( !ready.empty() )
  {
    auto n = ready.top();
    ready.pop();
    order.push_back( n );
    for ( auto ei : g.fanout( n ) )
    {
      auto const& e = g.edges()[ei];
      if ( is_combinational_edge( g, e ) && --indegree[e.dst] == 0 )
        ready.push( e.dst );
    }
  }
  return order;
}

} // namespace

std::vector<uint32_t> topo_order( dataflow_graph const& g )
{
  auto order = kahn( g );
  if ( order.size() != g.size() )
    throw graph_error( "zero-delay cycle: graph has no topological order" );
  return order;
}

std::vector<violation> validate( dataflow_graph const& g )
{
  std::vector<violation> result;
  auto add = [&]( violation_kind k, std::string msg, std::vector<std::string> nodes ) {
    result.push_back( { k, std::move( msg ), std::move( nodes ) } );
  };

  for ( auto const& e : g.edges() )
  {
    auto const& s = g.at( e.src );
    auto const& d = g.at( e.dst );
    if ( e.src_port >= num_outputs( s ) )
      add( violation_kind::bad_port, fmt::format( "edge {} -> {}: source port {} out of range for {}", s.id, d.id, e.src_port, kind_name( s.kind ) ),
           { s.id, d.id } );
    if ( e.dst_port >= num_inputs( d ) )
      add( violation_kind::bad_port, fmt::format( "edge {} -> {}: input port {} out of range for {}", s.id, d.id, e.dst_port, kind_name( d.kind ) ),
           { s.id, d.id } );
  }

  for ( uint32_t i = 0; i < g.size(); ++i )
  {
    auto const& n = g.at( i );
    std::vector<uint32_t> drivers( num_inputs( n ), 0 );
    for ( auto ei : g.fanin( i ) )
    {
      auto p = g.edges()[ei].dst_port;
      if ( p < drivers.size() )
        ++drivers[p];
    }
    for ( uint32_t p = 0; p < drivers.size(); ++p )
    {
      if ( drivers[p] == 0 )
        add( violation_kind::unconnected_port, fmt::format( "input port {} of {} is unconnected", p, n.id ), { n.id } );
      else if ( drivers[p] > 1 )
        add( violation_kind::multiply_driven, fmt::format( "input port {} of {} has {} drivers", p, n.id, drivers[p] ), { n.id } );
    }

    if ( n.width != g.at( 0 ).width )
      add( violation_kind::width_mismatch, fmt::format( "{} has width {}, expected {}", n.id, n.width, g.at( 0 ).width ), { n.id } );
    if ( n.width == 0 || n.width > 32 )
      add( violation_kind::bad_params, fmt::format( "{} has unsupported width {}", n.id, n.width ), { n.id } );

    if ( n.kind == node_kind::mux )
    {
      auto k = n.params.value( "data_inputs", 0u );
      auto const& sel = n.params.contains( "select" ) ? n.params["select"] : nlohmann::json();
      if ( k == 0 || !sel.is_array() || sel.empty() )
        add( violation_kind::bad_params, fmt::format( "mux {} needs data_inputs > 0 and a non-empty select table", n.id ), { n.id } );
      else
      {
        for ( auto const& s : sel )
        {
          if ( !s.is_number_unsigned() || s.get<uint32_t>() >= k )
          {
            add( violation_kind::bad_params, fmt::format( "mux {} select entry {} out of range", n.id, s.dump() ), { n.id } );
            break;
          }
        }
      }
    }
    if ( n.kind == node_kind::counter && n.params.value( "modulus", 0u ) == 0 )
      add( violation_kind::bad_params, fmt::format( "counter {} needs modulus >= 1", n.id ), { n.id } );
  }

  std::unordered_set<uint32_t> listed_in( g.inputs().begin(), g.inputs().end() );
  std::unordered_set<uint32_t> listed_out( g.outputs().begin(), g.outputs().end() );
  if ( listed_in.size() != g.inputs().size() || listed_out.size() != g.outputs().size() )
    add( violation_kind::bad_io_list, "input/output list contains duplicates", {} );
  for ( uint32_t i = 0; i < g.size(); ++i )
  {
    auto const& n = g.at( i );
    if ( ( n.kind == node_kind::input ) != listed_in.contains( i ) )
      add( violation_kind::bad_io_list, fmt::format( "{}: input nodes and the input list must coincide", n.id ), { n.id } );
    if ( ( n.kind == node_kind::output ) != listed_out.contains( i ) )
      add( violation_kind::bad_io_list, fmt::format( "{}: output nodes and the output list must coincide", n.id ), { n.id } );
  }

  auto order = kahn( g );
  if ( order.size() != g.size() )
  {
    std::vector<bool> placed( g.size(), false );
    for ( auto n : order )
      placed[n] = true;
    std::vector<std::string> cyc;
    for ( uint32_t i = 0; i < g.size(); ++i )
    {
      if ( !placed[i] )
        cyc.push_back( g.at( i ).id );
    }
    add( violation_kind::zero_delay_cycle, fmt::format( "zero-delay cycle through {} node(s)", cyc.size() ), std::move( cyc ) );
  }
  return result;
}

dataflow_graph canonicalize( dataflow_graph const& g, std::vector<std::string> const& protected_ids )
{
  std::unordered_set<std::string> keep( protected_ids.begin(), protected_ids.end() );
  auto removable = [&]( uint32_t n ) {
    return g.at( n ).kind == node_kind::delay && !keep.contains( g.at( n ).id );
  };

  graph_builder b( g.name() );
  std::vector<bool> removed( g.size(), false );

  /* delay nodes reachable from a non-removable source are dropped */
  std::function<void( uint32_t, uint32_t, uint32_t, uint32_t )> walk;
  std::vector<std::tuple<uint32_t, uint32_t, uint32_t, uint32_t, uint32_t>> new_edges;
  walk = [&]( uint32_t src, uint32_t src_port, uint32_t delay_node, uint32_t acc ) {
    removed[delay_node] = true;
    for ( auto ei : g.fanout( delay_node ) )
    {
      auto const& e = g.edges()[ei];
      auto total = acc + 1 + e.delay;
      if ( removable( e.dst ) )
      {
        if ( !removed[e.dst] )
          walk( src, src_port, e.dst, total );
      }
      else
        new_edges.emplace_back( src, src_port, e.dst, e.dst_port, total );
    }
  };

  for ( auto const& e : g.edges() )
  {
    if ( removable( e.src ) )
      continue;
    if ( removable( e.dst ) )
      walk( e.src, e.src_port, e.dst, e.delay );
    else
      new_edges.emplace_back( e.src, e.src_port, e.dst, e.dst_port, e.delay );
  }
  /* edges among delay-only loops survive untouched */
  for ( auto const& e : g.edges() )
  {
    if ( removable( e.src ) && !removed[e.src] )
      new_edges.emplace_back( e.src, e.src_port, e.dst, e.dst_port, e.delay );
  }

  for ( uint32_t i = 0; i < g.size(); ++i )
  {
    if ( !removed[i] )
      b.add_node( g.at( i ) );
  }
  for ( auto const& [s, sp, d, dp, w] : new_edges )
    b.add_edge( g.at( s ).id, sp, g.at( d ).id, dp, w );
  for ( auto i : g.inputs() )
    b.add_input( g.at( i ).id );
  for ( auto o : g.outputs() )
    b.add_output( g.at( o ).id );
  return b.build();
}

std::unordered_map<std::string, uint32_t> census( dataflow_graph const& g )
{
  std::unordered_map<std::string, uint32_t> result;
  for ( auto const& n : g.nodes() )
    ++result[std::string( kind_name( n.kind ) )];
  return result;
}

} // namespace dfgfold
