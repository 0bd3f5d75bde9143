#include <dfgfold/schedule.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace dfgfold
{

std::vector<uint32_t> core_graph::class_sizes() const
{
  std::vector<uint32_t> sizes( num_classes, 0 );
  for ( auto const& v : vertices )
  {
    if ( v.class_id )
      ++sizes[*v.class_id];
  }
  return sizes;
}

namespace
{

bool passes_through( node_kind k )
{
  return is_combinational( k );
}

} // namespace

uint32_t pattern_latency( core_pattern const& p )
{
  auto const& t = p.templ;
  auto order = topo_order( t );
  std::vector<uint32_t> finish( t.size(), 0 );
  uint32_t best = 0;
  for ( auto n : order )
  {
    uint32_t start = 0;
    for ( auto ei : t.fanin( n ) )
    {
      auto const& e = t.edges()[ei];
      if ( is_combinational_edge( t, e ) )
        start = std::max( start, finish[e.src] );
    }
    finish[n] = start + t.at( n ).latency;
    best = std::max( best, finish[n] );
  }
  return best;
}

core_graph build_core_graph( dataflow_graph const& g, folding_config const& config )
{
  constexpr auto none = std::numeric_limits<uint32_t>::max();
  core_graph cg;
  cg.num_classes = static_cast<uint32_t>( config.classes.size() );
  cg.vertex_of.assign( g.size(), none );
  cg.local_of.assign( g.size(), 0 );

  for ( uint32_t c = 0; c < config.classes.size(); ++c )
  {
    auto const& cls = config.classes[c];
    auto const& t = cls.pattern.templ;
    unit_info unit;
    unit.local_nodes = t.size();
    for ( auto const& e : t.edges() )
    {
      if ( is_combinational_edge( t, e ) && t.at( e.src ).kind != node_kind::const_input )
        unit.combinational.emplace_back( e.src, e.dst );
    }
    cg.units.push_back( std::move( unit ) );
    auto latency = pattern_latency( cls.pattern );

    for ( uint32_t i = 0; i < cls.instances.size(); ++i )
    {
      core_vertex v;
      v.name = fmt::format( "c{}.i{}", c, i );
      v.class_id = c;
      v.instance = i;
      v.latency = latency;
      v.unit = c;
      auto vi = static_cast<uint32_t>( cg.vertices.size() );
      for ( uint32_t k = 0; k < t.size(); ++k )
      {
        auto n = cls.instances[i].nodes[k];
        if ( g.at( n ).kind == node_kind::const_input )
          continue;
        v.nodes.push_back( n );
        cg.vertex_of[n] = vi;
        cg.local_of[n] = k;
      }
      cg.vertices.push_back( std::move( v ) );
    }
  }

  for ( uint32_t n = 0; n < g.size(); ++n )
  {
    if ( cg.vertex_of[n] != none )
      continue;
    core_vertex v;
    v.name = g.at( n ).id;
    v.latency = g.at( n ).latency;
    v.unit = static_cast<uint32_t>( cg.units.size() );
    v.nodes = { n };
    v.pinned = g.at( n ).kind == node_kind::input;
    cg.units.push_back( unit_info{} );
    cg.vertex_of[n] = static_cast<uint32_t>( cg.vertices.size() );
    cg.vertices.push_back( std::move( v ) );
  }

  for ( uint32_t ei = 0; ei < g.edges().size(); ++ei )
  {
    auto const& e = g.edges()[ei];
    auto vs = cg.vertex_of[e.src], vd = cg.vertex_of[e.dst];
    if ( vs == vd && cg.vertices[vs].class_id )
    {
      auto const& t = config.classes[*cg.vertices[vs].class_id].pattern.templ;
      auto d = t.driver( cg.local_of[e.dst], e.dst_port );
      if ( d && t.edges()[*d].src == cg.local_of[e.src] && t.edges()[*d].delay == e.delay )
        continue;
    }
    core_arc a;
    a.src = vs;
    a.dst = vd;
    a.src_local = cg.local_of[e.src];
    a.dst_local = cg.local_of[e.dst];
    a.dst_port = e.dst_port;
    a.delay = e.delay;
    a.latency = cg.vertices[vs].latency;
    a.combinational_source = passes_through( g.at( e.src ).kind );
    a.ordering = g.at( e.src ).kind != node_kind::delay;
    a.edge = ei;
    cg.arcs.push_back( a );
  }
  return cg;
}

int64_t folding_delay( uint32_t delay, uint32_t latency, uint32_t u, uint32_t v, uint32_t folding_factor )
{
  return int64_t{ folding_factor } * delay - int64_t{ latency } + int64_t{ v } - int64_t{ u };
}

std::string_view schedule_violation_name( schedule_violation_kind k )
{
  switch ( k )
  {
  case schedule_violation_kind::slot_range:
    return "slot-range";
  case schedule_violation_kind::resource:
    return "resource";
  case schedule_violation_kind::negative_delay:
    return "negative-delay";
  case schedule_violation_kind::pinned:
    return "pinned";
  case schedule_violation_kind::combinational_loop:
    return "combinational-loop";
  }
  return "unknown";
}

namespace
{

/* node-level graph of zero-register connections between units */
class wire_graph
{
public:
  explicit wire_graph( core_graph const& cg )
  {
    base_.resize( cg.units.size() );
    uint32_t total = 0;
    for ( size_t u = 0; u < cg.units.size(); ++u )
    {
      base_[u] = total;
      total += cg.units[u].local_nodes;
    }
    adj_.resize( total );
    for ( size_t u = 0; u < cg.units.size(); ++u )
    {
      for ( auto [s, d] : cg.units[u].combinational )
        adj_[base_[u] + s].push_back( base_[u] + d );
    }
  }

  static bool is_wire( core_arc const& a, int64_t d )
  {
    return d == 0 && a.latency == 0 && a.combinational_source;
  }

  void add( core_graph const& cg, core_arc const& a )
  {
    adj_[base_[cg.vertices[a.src].unit] + a.src_local].push_back( base_[cg.vertices[a.dst].unit] + a.dst_local );
  }

  void pop( core_graph const& cg, core_arc const& a )
  {
    auto& list = adj_[base_[cg.vertices[a.src].unit] + a.src_local];
    list.pop_back();
  }

  bool has_cycle() const
  {
    std::vector<uint8_t> color( adj_.size(), 0 );
    std::vector<std::pair<uint32_t, size_t>> stack;
    for ( uint32_t s = 0; s < adj_.size(); ++s )
    {
      if ( color[s] != 0 )
        continue;
      stack.push_back( { s, 0 } );
      color[s] = 1;
      while ( !stack.empty() )
      {
        auto& [n, i] = stack.back();
        if ( i < adj_[n].size() )
        {
          auto m = adj_[n][i++];
          if ( color[m] == 1 )
            return true;
          if ( color[m] == 0 )
          {
            color[m] = 1;
            stack.push_back( { m, 0 } );
          }
        }
        else
        {
          color[n] = 2;
          stack.pop_back();
        }
      }
    }
    return false;
  }

private:
  std::vector<uint32_t> base_;
  std::vector<std::vector<uint32_t>> adj_;
};

} // namespace

std::vector<schedule_violation> verify_schedule( core_graph const& cg, schedule const& s )
{
  std::vector<schedule_violation> out;
  auto n = s.folding_factor;
  if ( n == 0 )
  {
    out.push_back( { schedule_violation_kind::slot_range, "folding factor must be positive" } );
    return out;
  }
  if ( s.slots.size() != cg.vertices.size() )
  {
    out.push_back( { schedule_violation_kind::slot_range, fmt::format( "{} slots for {} vertices", s.slots.size(), cg.vertices.size() ) } );
    return out;
  }

  std::vector<std::vector<int>> owner( cg.num_classes, std::vector<int>( n, -1 ) );
  for ( uint32_t i = 0; i < cg.vertices.size(); ++i )
  {
    auto const& v = cg.vertices[i];
    auto u = s.slots[i];
    if ( u >= n )
    {
      out.push_back( { schedule_violation_kind::slot_range, fmt::format( "{} at slot {} outside [0,{})", v.name, u, n ) } );
      continue;
    }
    if ( v.pinned && u != 0 )
      out.push_back( { schedule_violation_kind::pinned, fmt::format( "input {} must be sampled at slot 0, got {}", v.name, u ) } );
    if ( !v.class_id )
      continue;
    if ( u + occupancy( v ) > n )
    {
      out.push_back( { schedule_violation_kind::slot_range,
                       fmt::format( "{} blocks slots [{},{}) beyond the frame of {}", v.name, u, u + occupancy( v ), n ) } );
      continue;
    }
    for ( uint32_t t = u; t < u + occupancy( v ); ++t )
    {
      auto& o = owner[*v.class_id][t];
      if ( o >= 0 )
        out.push_back( { schedule_violation_kind::resource,
                         fmt::format( "{} and {} both use class {} at slot {}", cg.vertices[o].name, v.name, *v.class_id, t ) } );
      else
        o = static_cast<int>( i );
    }
  }
  if ( !out.empty() )
    return out;

  wire_graph wires( cg );
  for ( auto const& a : cg.arcs )
  {
    auto d = folding_delay( a.delay, a.latency, s.slots[a.src], s.slots[a.dst], n );
    if ( d < 0 )
      out.push_back( { schedule_violation_kind::negative_delay,
                       fmt::format( "arc {} -> {}: D = {}*{} - {} + {} - {} = {} < 0", cg.vertices[a.src].name, cg.vertices[a.dst].name, n, a.delay,
                                    a.latency, s.slots[a.dst], s.slots[a.src], d ) } );
    else if ( wire_graph::is_wire( a, d ) )
      wires.add( cg, a );
  }
  if ( wires.has_cycle() )
    out.push_back( { schedule_violation_kind::combinational_loop, "zero-register connections between units form a combinational loop" } );
  return out;
}

uint32_t folding_factor_cap( core_graph const& cg )
{
  uint32_t total = 0, max_latency = 0;
  for ( auto const& v : cg.vertices )
  {
    total += occupancy( v );
    max_latency = std::max( max_latency, v.latency );
  }
  return std::max<uint32_t>( 1, total + max_latency );
}

namespace
{

class list_scheduler
{
public:
  explicit list_scheduler( core_graph const& cg ) : cg_( cg )
  {
    auto nv = cg.vertices.size();
    in_arcs_.resize( nv );
    out_arcs_.resize( nv );
    for ( uint32_t i = 0; i < cg.arcs.size(); ++i )
    {
      in_arcs_[cg.arcs[i].dst].push_back( i );
      out_arcs_[cg.arcs[i].src].push_back( i );
    }
    compute_priorities();
  }

  std::optional<schedule> run( uint32_t n )
  {
    constexpr auto unset = std::numeric_limits<uint32_t>::max();
    schedule s{ n, std::vector<uint32_t>( cg_.vertices.size(), unset ) };
    std::vector<std::vector<bool>> busy( cg_.num_classes, std::vector<bool>( n, false ) );
    wire_graph wires( cg_ );
    size_t placed = 0;

    auto ready_at = [&]( uint32_t v, uint32_t t ) {
      if ( cg_.vertices[v].pinned && t != 0 )
        return false;
      for ( auto ai : in_arcs_[v] )
      {
        auto const& a = cg_.arcs[ai];
        if ( a.delay != 0 || a.src == v || !a.ordering )
          continue;
        if ( s.slots[a.src] == unset || s.slots[a.src] + a.latency > t )
          return false;
      }
      return true;
    };

    auto try_place = [&]( uint32_t v, uint32_t t ) {
      auto const& vx = cg_.vertices[v];
      if ( vx.class_id )
      {
        if ( t + occupancy( vx ) > n )
          return false;
        for ( uint32_t k = t; k < t + occupancy( vx ); ++k )
        {
          if ( busy[*vx.class_id][k] )
            return false;
        }
      }
      s.slots[v] = t;
      std::vector<uint32_t> new_wires;
      bool ok = true;
      auto check = [&]( uint32_t ai ) {
        auto const& a = cg_.arcs[ai];
        if ( s.slots[a.src] == unset || s.slots[a.dst] == unset )
          return;
        auto d = folding_delay( a.delay, a.latency, s.slots[a.src], s.slots[a.dst], n );
        if ( d < 0 )
          ok = false;
        else if ( wire_graph::is_wire( a, d ) )
          new_wires.push_back( ai );
      };
      for ( auto ai : in_arcs_[v] )
        check( ai );
      for ( auto ai : out_arcs_[v] )
      {
        if ( cg_.arcs[ai].dst != v )
          check( ai );
      }
      if ( ok && !new_wires.empty() )
      {
        for ( auto ai : new_wires )
          wires.add( cg_, cg_.arcs[ai] );
        if ( wires.has_cycle() )
        {
          ok = false;
          for ( auto it = new_wires.rbegin(); it != new_wires.rend(); ++it )
            wires.pop( cg_, cg_.arcs[*it] );
        }
      }
      if ( !ok )
      {
        s.slots[v] = unset;
        return false;
      }
      if ( vx.class_id )
      {
        for ( uint32_t k = t; k < t + occupancy( vx ); ++k )
          busy[*vx.class_id][k] = true;
      }
      ++placed;
      return true;
    };

    for ( uint32_t t = 0; t < n && placed < cg_.vertices.size(); ++t )
    {
      bool progress = true;
      while ( progress )
      {
        progress = false;
        std::vector<uint32_t> ready;
        for ( uint32_t v = 0; v < cg_.vertices.size(); ++v )
        {
          if ( s.slots[v] == unset && ready_at( v, t ) )
            ready.push_back( v );
        }
        std::stable_sort( ready.begin(), ready.end(), [&]( uint32_t a, uint32_t b ) { return priority_[a] > priority_[b]; } );
        for ( auto v : ready )
        {
          if ( try_place( v, t ) )
            progress = true;
        }
      }
    }
    if ( placed < cg_.vertices.size() )
      return std::nullopt;
    return s;
  }

private:
  void compute_priorities()
  {
    auto nv = cg_.vertices.size();
    /* topological order over zero-delay arcs */
    std::vector<uint32_t> indeg( nv, 0 );
    for ( auto const& a : cg_.arcs )
    {
      if ( a.delay == 0 && a.ordering )
      {
        if ( a.src == a.dst )
          throw schedule_error( fmt::format( "vertex {} feeds itself without a register", cg_.vertices[a.src].name ) );
        ++indeg[a.dst];
      }
    }
    std::vector<uint32_t> order;
    for ( uint32_t v = 0; v < nv; ++v )
    {
      if ( indeg[v] == 0 )
        order.push_back( v );
    }
    for ( size_t h = 0; h < order.size(); ++h )
    {
      for ( auto ai : out_arcs_[order[h]] )
      {
        auto const& a = cg_.arcs[ai];
        if ( a.delay == 0 && a.ordering && --indeg[a.dst] == 0 )
          order.push_back( a.dst );
      }
    }
    if ( order.size() != nv )
      throw schedule_error( "core graph has a zero-delay cycle: the selected cores depend on each other within one sample" );

    priority_.assign( nv, 0 );
    for ( auto it = order.rbegin(); it != order.rend(); ++it )
    {
      uint32_t best = 0;
      for ( auto ai : out_arcs_[*it] )
      {
        auto const& a = cg_.arcs[ai];
        if ( a.delay == 0 && a.ordering )
          best = std::max( best, priority_[a.dst] );
      }
      priority_[*it] = best + occupancy( cg_.vertices[*it] );
    }
  }

  core_graph const& cg_;
  std::vector<std::vector<uint32_t>> in_arcs_;
  std::vector<std::vector<uint32_t>> out_arcs_;
  std::vector<uint32_t> priority_;
};

} // namespace

schedule list_schedule( core_graph const& cg, std::optional<uint32_t> folding_factor_hint )
{
  list_scheduler ls( cg );
  if ( folding_factor_hint )
  {
    if ( *folding_factor_hint == 0 )
      throw schedule_error( "folding factor must be positive" );
    if ( auto s = ls.run( *folding_factor_hint ) )
      return *s;
    throw schedule_error( fmt::format( "no valid schedule found for N = {}", *folding_factor_hint ) );
  }
  auto sizes = cg.class_sizes();
  uint32_t lower = std::max<uint32_t>( 1, sizes.empty() ? 1 : *std::max_element( sizes.begin(), sizes.end() ) );
  auto cap = std::max( lower, folding_factor_cap( cg ) );
  for ( auto n = lower; n <= cap; ++n )
  {
    if ( auto s = ls.run( n ) )
      return *s;
  }
  throw schedule_error( fmt::format( "no valid schedule for any N in [{}, {}]", lower, cap ) );
}

nlohmann::json schedule_to_json( core_graph const& cg, schedule const& s )
{
  nlohmann::json j;
  j["N"] = s.folding_factor;
  j["slots"] = nlohmann::json::object();
  for ( size_t v = 0; v < cg.vertices.size(); ++v )
    j["slots"][cg.vertices[v].name] = s.slots[v];
  j["arcs"] = nlohmann::json::array();
  for ( auto const& a : cg.arcs )
  {
    j["arcs"].push_back( { { "src", cg.vertices[a.src].name },
                           { "dst", cg.vertices[a.dst].name },
                           { "w_e", a.delay },
                           { "P_u", a.latency },
                           { "D", folding_delay( a.delay, a.latency, s.slots[a.src], s.slots[a.dst], s.folding_factor ) } } );
  }
  return j;
}

schedule schedule_from_json( core_graph const& cg, nlohmann::json const& j )
{
  if ( !j.is_object() || !j.contains( "N" ) || !j["N"].is_number_unsigned() || j["N"].get<uint32_t>() == 0 )
    throw schedule_error( "schedule report needs a positive integer \"N\"" );
  if ( !j.contains( "slots" ) || !j["slots"].is_object() )
    throw schedule_error( "schedule report needs a \"slots\" object" );
  schedule s;
  s.folding_factor = j["N"].get<uint32_t>();
  std::map<std::string, uint32_t> index;
  for ( uint32_t v = 0; v < cg.vertices.size(); ++v )
    index[cg.vertices[v].name] = v;
  s.slots.assign( cg.vertices.size(), 0 );
  std::vector<bool> seen( cg.vertices.size(), false );
  for ( auto const& [name, slot] : j["slots"].items() )
  {
    auto it = index.find( name );
    if ( it == index.end() )
      throw schedule_error( fmt::format( "schedule names unknown vertex '{}'", name ) );
    if ( !slot.is_number_unsigned() )
      throw schedule_error( fmt::format( "slot of '{}' must be a non-negative integer", name ) );
    s.slots[it->second] = slot.get<uint32_t>();
    seen[it->second] = true;
  }
  for ( uint32_t v = 0; v < cg.vertices.size(); ++v )
  {
    if ( !seen[v] )
      throw schedule_error( fmt::format( "schedule has no slot for vertex '{}'", cg.vertices[v].name ) );
  }
  return s;
}

} // namespace dfgfold
