#include <dfgfold/pattern.hpp>

#include <dfgfold/graph_io.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace dfgfold
{

namespace
{

std::string multiset_notation( std::map<std::string, uint32_t> const& counts )
{
  std::string out = "{";
  bool first = true;
  for ( auto const& [name, count] : counts )
  {
    if ( !first )
      out += ",";
    first = false;
    out += count == 1 ? name : fmt::format( "{}{}", count, name );
  }
  return out + "}";
}

} // namespace

std::string core_pattern::notation() const
{
  std::map<std::string, uint32_t> counts;
  for ( auto const& n : templ.nodes() )
    ++counts[std::string( kind_short_name( n.kind ) )];
  return multiset_notation( counts );
}

core_pattern make_pattern( std::string name, dataflow_graph templ )
{
  if ( templ.size() == 0 )
    throw graph_error( fmt::format( "pattern '{}' is empty", name ) );
  for ( auto const& n : templ.nodes() )
  {
    if ( n.kind == node_kind::input || n.kind == node_kind::output || n.kind == node_kind::counter || n.kind == node_kind::mux )
      throw graph_error( fmt::format( "pattern '{}': node '{}' of kind {} cannot be part of a folding core", name, n.id, kind_name( n.kind ) ) );
  }
  for ( auto const& v : validate( templ ) )
  {
    if ( v.kind != violation_kind::unconnected_port && v.kind != violation_kind::bad_io_list )
      throw graph_error( fmt::format( "pattern '{}': [{}] {}", name, violation_name( v.kind ), v.message ) );
  }

  /* weak connectivity */
  std::vector<uint32_t> comp( templ.size() );
  std::iota( comp.begin(), comp.end(), 0u );
  std::function<uint32_t( uint32_t )> root = [&]( uint32_t x ) { return comp[x] == x ? x : comp[x] = root( comp[x] ); };
  for ( auto const& e : templ.edges() )
    comp[root( e.src )] = root( e.dst );
  for ( uint32_t i = 1; i < templ.size(); ++i )
  {
    if ( root( i ) != root( 0 ) )
      throw graph_error( fmt::format( "pattern '{}' is not connected", name ) );
  }

  core_pattern p;
  p.name = std::move( name );
  for ( uint32_t i = 0; i < templ.size(); ++i )
  {
    auto const& n = templ.at( i );
    for ( uint32_t port = 0; port < num_inputs( n ); ++port )
    {
      if ( !templ.driver( i, port ) )
        p.boundary_inputs.push_back( { i, port } );
    }
    for ( uint32_t port = 0; port < num_outputs( n ); ++port )
    {
      bool used = std::any_of( templ.fanout( i ).begin(), templ.fanout( i ).end(),
                               [&]( auto ei ) { return templ.edges()[ei].src_port == port; } );
      if ( !used )
        p.boundary_outputs.push_back( { i, port } );
    }
  }
  p.templ = std::move( templ );
  return p;
}

core_pattern parse_pattern( std::string_view text )
{
  auto doc = parse_json_text( text );
  auto templ = graph_from_json( doc );
  auto p = make_pattern( doc.value( "name", templ.name() ), std::move( templ ) );

  auto read_ports = [&]( char const* key ) {
    std::vector<template_port> ports;
    for ( auto const& j : doc[key] )
    {
      if ( !j.is_array() || j.size() != 2 )
        throw parse_error( fmt::format( "{}: expected [\"id\", port] entries", key ) );
      auto idx = p.templ.find( j[0].get<std::string>() );
      if ( !idx )
        throw parse_error( fmt::format( "{}: unknown node '{}'", key, j[0].get<std::string>() ) );
      ports.push_back( { *idx, j[1].get<uint32_t>() } );
    }
    std::sort( ports.begin(), ports.end() );
    return ports;
  };
  if ( doc.contains( "boundary_inputs" ) && read_ports( "boundary_inputs" ) != p.boundary_inputs )
    throw parse_error( fmt::format( "pattern '{}': boundary_inputs must list exactly the undriven input ports", p.name ) );
  if ( doc.contains( "boundary_outputs" ) && read_ports( "boundary_outputs" ) != p.boundary_outputs )
    throw parse_error( fmt::format( "pattern '{}': boundary_outputs must list exactly the unconsumed output ports", p.name ) );
  return p;
}

nlohmann::json pattern_to_json( core_pattern const& p )
{
  auto j = graph_to_json( p.templ );
  j["name"] = p.name;
  j.erase( "inputs" );
  j.erase( "outputs" );
  j["boundary_inputs"] = nlohmann::json::array();
  for ( auto const& bp : p.boundary_inputs )
    j["boundary_inputs"].push_back( { p.templ.at( bp.node ).id, bp.port } );
  j["boundary_outputs"] = nlohmann::json::array();
  for ( auto const& bp : p.boundary_outputs )
    j["boundary_outputs"].push_back( { p.templ.at( bp.node ).id, bp.port } );
  return j;
}

std::string folding_config::notation() const
{
  std::string out;
  for ( auto const& c : classes )
  {
    if ( !out.empty() )
      out += ", ";
    out += fmt::format( "{}{}", c.instances.size(), c.pattern.notation() );
  }
  return out.empty() ? "original" : out;
}

std::vector<uint32_t> folding_config::covered_nodes() const
{
  std::vector<uint32_t> out;
  for ( auto const& c : classes )
    for ( auto const& inst : c.instances )
      out.insert( out.end(), inst.nodes.begin(), inst.nodes.end() );
  std::sort( out.begin(), out.end() );
  out.erase( std::unique( out.begin(), out.end() ), out.end() );
  return out;
}

namespace
{

constexpr uint32_t unmapped = std::numeric_limits<uint32_t>::max();

class matcher
{
public:
  matcher( dataflow_graph const& g, core_pattern const& p ) : g_( g ), t_( p.templ )
  {
    plan();
  }

  std::vector<core_instance> run()
  {
    if ( t_.size() > g_.size() )
      return {};
    map_.assign( t_.size(), unmapped );
    inverse_.assign( g_.size(), unmapped );
    extend( 0 );
    std::sort( results_.begin(), results_.end() );
    return std::move( results_ );
  }

private:
  struct step
  {
    uint32_t tnode;
    std::optional<uint32_t> anchor_edge; /* template edge linking tnode to an earlier step */
  };

  /* BFS over the undirected template starting at the rarest kind */
  void plan()
  {
    std::map<node_kind, uint32_t> freq;
    for ( auto const& n : g_.nodes() )
      ++freq[n.kind];
    uint32_t start = 0;
    for ( uint32_t i = 1; i < t_.size(); ++i )
    {
      auto fi = freq[t_.at( i ).kind], fs = freq[t_.at( start ).kind];
      if ( fi < fs || ( fi == fs && t_.fanin( i ).size() + t_.fanout( i ).size() > t_.fanin( start ).size() + t_.fanout( start ).size() ) )
        start = i;
    }
    std::vector<bool> seen( t_.size(), false );
    seen[start] = true;
    order_.push_back( { start, std::nullopt } );
    for ( size_t head = 0; head < order_.size(); ++head )
    {
      auto u = order_[head].tnode;
      auto visit = [&]( uint32_t ei, uint32_t other ) {
        if ( !seen[other] )
        {
          seen[other] = true;
          order_.push_back( { other, ei } );
        }
      };
      for ( auto ei : t_.fanout( u ) )
        visit( ei, t_.edges()[ei].dst );
      for ( auto ei : t_.fanin( u ) )
        visit( ei, t_.edges()[ei].src );
    }
  }

  std::vector<uint32_t> candidates( step const& s ) const
  {
    std::vector<uint32_t> out;
    auto const& tn = t_.at( s.tnode );
    if ( !s.anchor_edge )
    {
      for ( uint32_t v = 0; v < g_.size(); ++v )
      {
        if ( g_.at( v ).kind == tn.kind )
          out.push_back( v );
      }
      return out;
    }
    auto const& te = t_.edges()[*s.anchor_edge];
    if ( te.dst == s.tnode )
    {
      /* anchor is the source: follow its fanout */
      for ( auto ei : g_.fanout( map_[te.src] ) )
      {
        auto const& e = g_.edges()[ei];
        if ( e.src_port == te.src_port && e.dst_port == te.dst_port && e.delay == te.delay )
          out.push_back( e.dst );
      }
    }
    else if ( auto d = g_.driver( map_[te.dst], te.dst_port ) )
    {
      auto const& e = g_.edges()[*d];
      if ( e.src_port == te.src_port && e.delay == te.delay )
        out.push_back( e.src );
    }
    return out;
  }

  bool feasible( uint32_t tnode, uint32_t v ) const
  {
    auto const& tn = t_.at( tnode );
    auto const& gn = g_.at( v );
    if ( inverse_[v] != unmapped || tn.kind != gn.kind || tn.latency != gn.latency )
      return false;
    if ( tn.kind == node_kind::mux && num_inputs( tn ) != num_inputs( gn ) )
      return false;
    if ( g_.fanout( v ).size() < t_.fanout( tnode ).size() )
      return false;

    auto image = [&]( uint32_t t ) { return t == tnode ? v : map_[t]; };
    auto pre = [&]( uint32_t gnode ) { return gnode == v ? tnode : inverse_[gnode]; };

    /* template edges to already mapped nodes must exist in the circuit */
    for ( auto ei : t_.fanin( tnode ) )
    {
      auto const& te = t_.edges()[ei];
      if ( image( te.src ) == unmapped )
        continue;
      auto d = g_.driver( v, te.dst_port );
      if ( !d )
        return false;
      auto const& e = g_.edges()[*d];
      if ( e.src != image( te.src ) || e.src_port != te.src_port || e.delay != te.delay )
        return false;
    }
    for ( auto ei : t_.fanout( tnode ) )
    {
      auto const& te = t_.edges()[ei];
      if ( image( te.dst ) == unmapped )
        continue;
      auto d = g_.driver( image( te.dst ), te.dst_port );
      if ( !d )
        return false;
      auto const& e = g_.edges()[*d];
      if ( e.src != v || e.src_port != te.src_port || e.delay != te.delay )
        return false;
    }
    /* induced: circuit edges among matched nodes must be template edges */
    for ( auto ei : g_.fanin( v ) )
    {
      auto const& e = g_.edges()[ei];
      auto ts = pre( e.src );
      if ( ts == unmapped )
        continue;
      auto d = t_.driver( tnode, e.dst_port );
      if ( !d || t_.edges()[*d].src != ts || t_.edges()[*d].src_port != e.src_port || t_.edges()[*d].delay != e.delay )
        return false;
    }
    for ( auto ei : g_.fanout( v ) )
    {
      auto const& e = g_.edges()[ei];
      auto td = pre( e.dst );
      if ( td == unmapped )
        continue;
      auto d = t_.driver( td, e.dst_port );
      if ( !d || t_.edges()[*d].src != tnode || t_.edges()[*d].src_port != e.src_port || t_.edges()[*d].delay != e.delay )
        return false;
    }
    return true;
  }

  void extend( size_t depth )
  {
    if ( depth == order_.size() )
    {
      results_.push_back( { map_ } );
      return;
    }
    auto const& s = order_[depth];
    for ( auto v : candidates( s ) )
    {
      if ( !feasible( s.tnode, v ) )
        continue;
      map_[s.tnode] = v;
      inverse_[v] = s.tnode;
      extend( depth + 1 );
      map_[s.tnode] = unmapped;
      inverse_[v] = unmapped;
    }
  }

  dataflow_graph const& g_;
  dataflow_graph const& t_;
  std::vector<step> order_;
  std::vector<uint32_t> map_;
  std::vector<uint32_t> inverse_;
  std::vector<core_instance> results_;
};

} // namespace

std::vector<core_instance> match_pattern( dataflow_graph const& g, core_pattern const& pattern )
{
  return matcher( g, pattern ).run();
}

std::vector<std::string> embedding_errors( dataflow_graph const& g, core_pattern const& pattern, core_instance const& inst )
{
  std::vector<std::string> errors;
  auto const& t = pattern.templ;
  if ( inst.nodes.size() != t.size() )
  {
    errors.push_back( fmt::format( "embedding has {} nodes, pattern {} has {}", inst.nodes.size(), pattern.name, t.size() ) );
    return errors;
  }
  std::map<uint32_t, uint32_t> inverse;
  for ( uint32_t i = 0; i < t.size(); ++i )
  {
    if ( inst.nodes[i] >= g.size() )
    {
      errors.push_back( fmt::format( "template node {} maps outside the graph", t.at( i ).id ) );
      return errors;
    }
    if ( !inverse.emplace( inst.nodes[i], i ).second )
      errors.push_back( fmt::format( "node {} is used twice", g.at( inst.nodes[i] ).id ) );
    auto const& gn = g.at( inst.nodes[i] );
    if ( gn.kind != t.at( i ).kind || gn.latency != t.at( i ).latency )
      errors.push_back( fmt::format( "{} ({}) cannot play template node {} ({})", gn.id, kind_name( gn.kind ), t.at( i ).id, kind_name( t.at( i ).kind ) ) );
  }
  if ( !errors.empty() )
    return errors;

  auto same = [&]( edge const& te, edge const& ge ) {
    return inst.nodes[te.src] == ge.src && inst.nodes[te.dst] == ge.dst && te.src_port == ge.src_port && te.dst_port == ge.dst_port && te.delay == ge.delay;
  };
  for ( auto const& te : t.edges() )
  {
    auto d = g.driver( inst.nodes[te.dst], te.dst_port );
    if ( !d || !same( te, g.edges()[*d] ) )
      errors.push_back( fmt::format( "template edge {} -> {} has no matching circuit edge", t.at( te.src ).id, t.at( te.dst ).id ) );
  }
  for ( auto const& ge : g.edges() )
  {
    auto s = inverse.find( ge.src ), d = inverse.find( ge.dst );
    if ( s == inverse.end() || d == inverse.end() )
      continue;
    auto td = t.driver( d->second, ge.dst_port );
    if ( !td || !same( t.edges()[*td], ge ) )
      errors.push_back( fmt::format( "circuit edge {} -> {} is not part of pattern {}", g.at( ge.src ).id, g.at( ge.dst ).id, pattern.name ) );
  }
  return errors;
}

namespace
{

std::vector<size_t> fill_order( std::vector<cover_request> const& requests )
{
  std::vector<size_t> order( requests.size() );
  std::iota( order.begin(), order.end(), size_t{ 0 } );
  std::stable_sort( order.begin(), order.end(), [&]( size_t a, size_t b ) { return requests[a].pattern.size() > requests[b].pattern.size(); } );
  return order;
}

bool disjoint( core_instance const& inst, std::vector<bool> const& used )
{
  return std::none_of( inst.nodes.begin(), inst.nodes.end(), [&]( uint32_t n ) { return n < used.size() && used[n]; } );
}

void mark( core_instance const& inst, std::vector<bool>& used, bool value )
{
  for ( auto n : inst.nodes )
  {
    if ( n >= used.size() )
      used.resize( n + 1, false );
    used[n] = value;
  }
}

} // namespace

folding_config select_cover( std::vector<cover_request> const& requests )
{
  folding_config config;
  config.classes.resize( requests.size() );
  std::vector<bool> used;
  for ( auto ci : fill_order( requests ) )
  {
    auto const& r = requests[ci];
    auto& cls = config.classes[ci];
    cls.pattern = r.pattern;
    for ( auto const& inst : r.candidates )
    {
      if ( cls.instances.size() == r.count )
        break;
      if ( disjoint( inst, used ) )
      {
        cls.instances.push_back( inst );
        mark( inst, used, true );
      }
    }
    if ( cls.instances.size() < r.count || r.count == 0 )
      throw cover_error( static_cast<uint32_t>( ci ),
                         fmt::format( "class {} ({}{}): only {} disjoint instance(s) available, {} requested", ci, r.count,
                                      r.pattern.notation(), cls.instances.size(), r.count ) );
  }
  return config;
}

folding_config select_cover_exact( std::vector<cover_request> const& requests, uint32_t graph_size )
{
  if ( graph_size > 20 )
    throw std::invalid_argument( "select_cover_exact is limited to graphs with at most 20 nodes" );
  auto order = fill_order( requests );
  std::vector<std::vector<core_instance>> chosen( requests.size() );
  std::vector<bool> used( graph_size, false );

  /* class-by-class, choose combinations in candidate order */
  std::function<bool( size_t, size_t )> search = [&]( size_t k, size_t from ) -> bool {
    if ( k == order.size() )
      return true;
    auto const& r = requests[order[k]];
    auto& pick = chosen[order[k]];
    if ( pick.size() == r.count )
      return search( k + 1, 0 );
    for ( size_t i = from; i < r.candidates.size(); ++i )
    {
      if ( r.candidates.size() - i < r.count - pick.size() )
        break;
      auto const& inst = r.candidates[i];
      if ( !disjoint( inst, used ) )
        continue;
      pick.push_back( inst );
      mark( inst, used, true );
      if ( search( k, i + 1 ) )
        return true;
      mark( inst, used, false );
      pick.pop_back();
    }
    return false;
  };
  for ( size_t i = 0; i < requests.size(); ++i )
  {
    if ( requests[i].count == 0 )
      throw cover_error( static_cast<uint32_t>( i ), fmt::format( "class {}: requested count must be positive", i ) );
  }
  if ( !search( 0, 0 ) )
    throw cover_error( static_cast<uint32_t>( order.empty() ? 0 : order.front() ), "no disjoint selection with the requested counts exists" );

  folding_config config;
  for ( size_t i = 0; i < requests.size(); ++i )
    config.classes.push_back( { requests[i].pattern, chosen[i] } );
  return config;
}

std::string_view config_violation_name( config_violation_kind k )
{
  switch ( k )
  {
  case config_violation_kind::empty_class:
    return "empty-class";
  case config_violation_kind::overlap:
    return "overlap";
  case config_violation_kind::isomorphism:
    return "isomorphism";
  }
  return "unknown";
}

std::vector<config_violation> check_config( dataflow_graph const& g, folding_config const& config )
{
  std::vector<config_violation> out;
  std::map<uint32_t, std::string> owner;
  for ( size_t c = 0; c < config.classes.size(); ++c )
  {
    auto const& cls = config.classes[c];
    if ( cls.instances.empty() )
      out.push_back( { config_violation_kind::empty_class, fmt::format( "class {} ({}) has no instances", c, cls.pattern.name ) } );
    for ( size_t i = 0; i < cls.instances.size(); ++i )
    {
      auto const& inst = cls.instances[i];
      for ( auto const& err : embedding_errors( g, cls.pattern, inst ) )
        out.push_back( { config_violation_kind::isomorphism, fmt::format( "class {} instance {}: {}", c, i, err ) } );
      auto label = fmt::format( "class {} instance {}", c, i );
      for ( auto n : inst.nodes )
      {
        if ( n >= g.size() )
          continue;
        auto [it, fresh] = owner.emplace( n, label );
        if ( !fresh && it->second != label )
          out.push_back( { config_violation_kind::overlap, fmt::format( "node {} is shared by {} and {}", g.at( n ).id, it->second, label ) } );
      }
    }
  }
  return out;
}

} // namespace dfgfold
