#include <dfgfold/fold.hpp>

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace dfgfold
{

folding_config remap_config( folding_config const& config, dataflow_graph const& from, dataflow_graph const& to )
{
  folding_config out = config;
  for ( auto& cls : out.classes )
  {
    for ( auto& inst : cls.instances )
    {
      for ( auto& n : inst.nodes )
      {
        auto const& id = from.at( n ).id;
        auto m = to.find( id );
        if ( !m )
          throw graph_error( fmt::format( "instance node {} does not exist in the target graph", id ) );
        n = *m;
      }
    }
  }
  return out;
}

fold_problem prepare_fold( dataflow_graph const& g, folding_config const& config )
{
  for ( auto const& n : g.nodes() )
  {
    if ( n.kind == node_kind::mux || n.kind == node_kind::counter )
      throw graph_error( fmt::format( "cannot fold a graph that already contains {} node {}", kind_name( n.kind ), n.id ) );
  }
  if ( auto v = check_config( g, config ); !v.empty() )
  {
    std::string msg = "invalid folding config:";
    for ( auto const& x : v )
      msg += fmt::format( "\n  {}: {}", config_violation_name( x.kind ), x.message );
    throw graph_error( msg );
  }
  for ( auto const& cls : config.classes )
  {
    auto const& t = cls.pattern.templ;
    bool has_registers = !t.nodes_of_kind( node_kind::delay ).empty() ||
                         std::any_of( t.edges().begin(), t.edges().end(), []( auto const& e ) { return e.delay > 0; } );
    if ( has_registers && pattern_latency( cls.pattern ) > 0 )
      throw graph_error( fmt::format( "pattern {} combines internal registers with node latency, which folding does not support",
                                      cls.pattern.name ) );
  }

  std::vector<std::string> protected_ids;
  for ( auto const& cls : config.classes )
  {
    for ( auto const& inst : cls.instances )
    {
      for ( auto n : inst.nodes )
      {
        if ( g.at( n ).kind == node_kind::delay )
          protected_ids.push_back( g.at( n ).id );
      }
    }
  }

  fold_problem p;
  p.canonical = canonicalize( g, protected_ids );
  p.config = remap_config( config, g, p.canonical );
  p.cores = build_core_graph( p.canonical, p.config );
  return p;
}

core_pattern interleave_registers( core_pattern const& p, uint32_t folding_factor )
{
  if ( folding_factor == 0 )
    throw std::invalid_argument( "folding factor must be positive" );
  auto const& t = p.templ;
  graph_builder b( t.name() );
  auto tail = [&]( uint32_t n ) {
    auto const& id = t.at( n ).id;
    if ( t.at( n ).kind != node_kind::delay || folding_factor == 1 )
      return id;
    return fmt::format( "{}_r{}", id, folding_factor - 1 );
  };
  for ( auto const& n : t.nodes() )
  {
    b.add_node( n );
    if ( n.kind != node_kind::delay )
      continue;
    auto prev = n.id;
    for ( uint32_t k = 1; k < folding_factor; ++k )
    {
      auto id = fmt::format( "{}_r{}", n.id, k );
      auto copy = n;
      copy.id = id;
      b.add_node( copy );
      b.add_edge( prev, id );
      prev = id;
    }
  }
  for ( auto const& e : t.edges() )
    b.add_edge( tail( e.src ), e.src_port, t.at( e.dst ).id, e.dst_port, e.delay * folding_factor );
  return make_pattern( p.name, b.build() );
}

void build_controller( graph_builder& b, uint32_t folding_factor, std::map<std::string, std::vector<uint32_t>> const& select_table,
                       uint32_t width )
{
  if ( folding_factor == 0 )
    throw std::invalid_argument( "folding factor must be positive" );
  for ( auto const& [mux, table] : select_table )
  {
    if ( table.size() != folding_factor )
      throw std::invalid_argument( fmt::format( "select table of {} has {} entries, expected {}", mux, table.size(), folding_factor ) );
    for ( auto v : table )
    {
      if ( v >= folding_factor )
        throw std::invalid_argument( fmt::format( "select table of {} contains {} which is not below N = {}", mux, v, folding_factor ) );
    }
  }
  node ctl;
  ctl.id = controller_id;
  ctl.kind = node_kind::counter;
  ctl.width = width;
  ctl.params = { { "modulus", folding_factor } };
  b.add_node( std::move( ctl ) );
  for ( auto const& [mux, table] : select_table )
    b.add_edge( controller_id, mux, 0 );
}

namespace
{

void add_node_with_width( graph_builder& b, std::string id, node_kind kind, uint32_t width, nlohmann::json params = nlohmann::json::object() )
{
  node n;
  n.id = std::move( id );
  n.kind = kind;
  n.width = width;
  n.params = std::move( params );
  b.add_node( std::move( n ) );
}

void record_registers( fold_metadata& meta, std::string const& key, uint32_t delay, uint32_t original, uint32_t width )
{
  if ( delay == 0 )
    return;
  auto remain = std::min( delay, original );
  meta.edge_registers[key] = { 0, remain * width, ( delay - remain ) * width };
}

} // namespace

std::map<std::string, std::string> wrap_io( graph_builder& b, fold_metadata& meta, std::vector<std::string> const& inputs,
                                            std::vector<io_binding> const& outputs, uint32_t width )
{
  auto n = meta.folding_factor;
  meta.latency_offset = n - 1;
  std::map<std::string, std::string> held;
  for ( auto const& id : inputs )
  {
    if ( n == 1 )
    {
      held[id] = id;
      continue;
    }
    auto mux = fmt::format( "io_hold_{}", id );
    std::vector<uint32_t> table( n, 1 );
    table[0] = 0;
    add_node_with_width( b, mux, node_kind::mux, width, { { "data_inputs", 2 }, { "select", table } } );
    b.add_edge( id, mux, 1 );
    b.add_edge( mux, mux, 2, 1 );
    meta.select_table[mux] = table;
    meta.provenance[mux] = { cost_bucket::overhead, std::nullopt, {} };
    meta.edge_registers[port_key( mux, 2 )] = { 0, 0, width };
    held[id] = mux;
  }
  for ( auto const& o : outputs )
  {
    if ( n == 1 )
    {
      b.add_edge( o.signal, o.id, 0, o.delay );
      record_registers( meta, port_key( o.id, 0 ), o.delay, o.source_delay, width );
      continue;
    }
    auto mux = fmt::format( "io_latch_{}", o.id );
    std::vector<uint32_t> table( n, 0 );
    table[o.slot % n] = 1;
    add_node_with_width( b, mux, node_kind::mux, width, { { "data_inputs", 2 }, { "select", table } } );
    b.add_edge( mux, mux, 1, 1 );
    b.add_edge( o.signal, mux, 2, o.delay );
    b.add_edge( mux, o.id, 0 );
    meta.select_table[mux] = table;
    meta.provenance[mux] = { cost_bucket::overhead, std::nullopt, {} };
    meta.edge_registers[port_key( mux, 1 )] = { 0, 0, width };
    record_registers( meta, port_key( mux, 2 ), o.delay, o.source_delay, width );
  }
  return held;
}

namespace
{

struct unit_layout
{
  std::vector<std::string> head;    /* per template node: node receiving external inputs */
  std::vector<std::string> tail;    /* per template node: node whose output leaves the unit */
  std::vector<uint32_t> start;      /* cycles after the slot at which inputs are read */
  std::vector<uint32_t> finish;     /* cycles after the slot at which the output is valid */
};

/* Start and finish times of each template node relative to the unit's slot. */
void compute_timing( dataflow_graph const& t, unit_layout& l )
{
  l.start.assign( t.size(), 0 );
  l.finish.assign( t.size(), 0 );
  for ( auto n : topo_order( t ) )
  {
    for ( auto ei : t.fanin( n ) )
    {
      auto const& e = t.edges()[ei];
      if ( is_combinational_edge( t, e ) )
        l.start[n] = std::max( l.start[n], l.finish[e.src] );
    }
    l.finish[n] = l.start[n] + t.at( n ).latency;
  }
}

std::string add_pipeline( graph_builder& b, fold_metadata& meta, std::string const& base, uint32_t stages, uint32_t width,
                          node_provenance const& prov )
{
  auto prev = base;
  for ( uint32_t k = 1; k <= stages; ++k )
  {
    auto id = fmt::format( "{}_p{}", base, k );
    add_node_with_width( b, id, node_kind::delay, width );
    b.add_edge( prev, id );
    meta.provenance[id] = prov;
    prev = id;
  }
  return prev;
}

struct port_source
{
  std::string signal;
  uint32_t delay;
  uint32_t original;
  uint32_t time;
};

} // namespace

folded_design fold( fold_problem const& p, schedule const& s )
{
  auto const& g = p.canonical;
  auto const& cg = p.cores;
  if ( auto v = verify_schedule( cg, s ); !v.empty() )
  {
    std::string msg = "invalid schedule:";
    for ( auto const& x : v )
      msg += fmt::format( "\n  {}: {}", schedule_violation_name( x.kind ), x.message );
    throw schedule_error( msg );
  }

  auto const n = s.folding_factor;
  auto const width = g.size() > 0 ? g.at( 0 ).width : 32u;
  folded_design out;
  auto& meta = out.meta;
  meta.folding_factor = n;
  graph_builder b( g.name() );

  /* shared units */
  std::vector<unit_layout> layouts( p.config.classes.size() );
  for ( uint32_t c = 0; c < p.config.classes.size(); ++c )
  {
    auto const& pat = p.config.classes[c].pattern;
    auto const& t = pat.templ;
    auto& l = layouts[c];
    compute_timing( t, l );
    l.head.resize( t.size() );
    l.tail.resize( t.size() );

    auto ip = interleave_registers( pat, n );
    auto const& it = ip.templ;
    auto prefix = [c]( std::string const& id ) { return fmt::format( "u{}_{}", c, id ); };
    std::vector<std::string> outs( it.size() );
    for ( uint32_t k = 0; k < it.size(); ++k )
    {
      auto nd = it.at( k );
      if ( nd.kind == node_kind::const_input )
        continue;
      bool chain_extra = !t.find( nd.id ).has_value();
      auto id = prefix( nd.id );
      auto latency = nd.latency;
      nd.id = id;
      nd.latency = 0;
      nd.width = width;
      b.add_node( nd );
      node_provenance prov{ chain_extra ? cost_bucket::overhead : cost_bucket::core, c, {} };
      meta.provenance[id] = prov;
      outs[k] = add_pipeline( b, meta, id, latency, width, { cost_bucket::core, c, {} } );
    }
    for ( auto const& e : it.edges() )
    {
      if ( it.at( e.src ).kind == node_kind::const_input )
        continue;
      auto dst = prefix( it.at( e.dst ).id );
      b.add_edge( outs[e.src], 0, dst, e.dst_port, e.delay );
      if ( e.delay > 0 )
        meta.edge_registers[port_key( dst, e.dst_port )] = { e.delay / n * width, 0, ( e.delay - e.delay / n ) * width };
    }
    for ( uint32_t k = 0; k < t.size(); ++k )
    {
      auto const& id = t.at( k ).id;
      l.head[k] = prefix( id );
      if ( t.at( k ).kind == node_kind::const_input )
        continue;
      std::vector<std::string> origins;
      for ( auto const& inst : p.config.classes[c].instances )
        origins.push_back( g.at( inst.nodes[k] ).id );
      meta.provenance[l.head[k]].origin = fmt::format( "{}", fmt::join( origins, "," ) );
      auto last = t.at( k ).kind == node_kind::delay && n > 1 ? fmt::format( "{}_r{}", id, n - 1 ) : id;
      l.tail[k] = outs[*it.find( last )];
    }
  }

  /* unfolded nodes */
  std::vector<std::string> singleton_head( cg.vertices.size() ), singleton_tail( cg.vertices.size() );
  std::vector<std::string> inputs;
  for ( uint32_t vi = 0; vi < cg.vertices.size(); ++vi )
  {
    auto const& v = cg.vertices[vi];
    if ( v.class_id )
      continue;
    auto nd = g.at( v.nodes[0] );
    auto origin = nd.id;
    node_provenance prov{ cost_bucket::remain, std::nullopt, origin };
    singleton_head[vi] = origin;
    if ( nd.kind == node_kind::input || nd.kind == node_kind::output )
    {
      b.add_node( nd );
      meta.provenance[origin] = prov;
      continue;
    }
    if ( nd.kind == node_kind::delay )
    {
      b.add_node( nd );
      meta.provenance[origin] = prov;
      auto prev = origin;
      for ( uint32_t k = 1; k < n; ++k )
      {
        auto id = fmt::format( "{}_r{}", origin, k );
        add_node_with_width( b, id, node_kind::delay, nd.width );
        b.add_edge( prev, id );
        meta.provenance[id] = { cost_bucket::overhead, std::nullopt, origin };
        prev = id;
      }
      singleton_tail[vi] = prev;
      continue;
    }
    auto latency = nd.latency;
    nd.latency = 0;
    b.add_node( nd );
    meta.provenance[origin] = prov;
    singleton_tail[vi] = add_pipeline( b, meta, origin, latency, nd.width, prov );
  }
  for ( auto i : g.inputs() )
  {
    b.add_input( g.at( i ).id );
    inputs.push_back( g.at( i ).id );
  }
  for ( auto o : g.outputs() )
    b.add_output( g.at( o ).id );

  /* arcs */
  std::vector<io_binding> output_bindings;
  std::map<std::tuple<uint32_t, uint32_t, uint32_t>, std::vector<port_source>> unit_ports;
  struct direct_edge
  {
    std::string src;
    uint32_t vertex;
    uint32_t port;
    uint32_t delay;
    uint32_t original;
  };
  std::vector<direct_edge> direct;
  for ( auto const& a : cg.arcs )
  {
    auto const& vs = cg.vertices[a.src];
    auto const& vd = cg.vertices[a.dst];
    auto u = s.slots[a.src], v = s.slots[a.dst];
    auto d = folding_delay( a.delay, a.latency, u, v, n );
    uint32_t finish = vs.class_id ? layouts[*vs.class_id].finish[a.src_local] : vs.latency;
    uint32_t start = vd.class_id ? layouts[*vd.class_id].start[a.dst_local] : 0;
    auto total = static_cast<uint32_t>( d + ( a.latency - finish ) + start );

    std::string signal;
    if ( vs.class_id )
      signal = layouts[*vs.class_id].tail[a.src_local];
    else if ( g.at( vs.nodes[0] ).kind == node_kind::input )
      signal = n > 1 ? fmt::format( "io_hold_{}", vs.name ) : vs.name;
    else
      signal = singleton_tail[a.src];

    if ( vd.class_id )
    {
      unit_ports[{ *vd.class_id, a.dst_local, a.dst_port }].push_back( { signal, total, a.delay, ( v + start ) % n } );
    }
    else if ( g.at( vd.nodes[0] ).kind == node_kind::output )
    {
      output_bindings.push_back( { vd.name, signal, total, v, a.delay } );
    }
    else
    {
      direct.push_back( { signal, a.dst, a.dst_port, total, a.delay } );
    }
  }

  wrap_io( b, meta, inputs, output_bindings, width );

  for ( auto const& e : direct )
  {
    auto const& dst = singleton_head[e.vertex];
    b.add_edge( e.src, 0, dst, e.port, e.delay );
    record_registers( meta, port_key( dst, e.port ), e.delay, e.original, width );
  }

  for ( auto const& [key, sources] : unit_ports )
  {
    auto [c, local, port] = key;
    auto const& dst = layouts[c].head[local];
    /* distinct (signal, delay) pairs in order of first use within the frame */
    std::vector<port_source> groups;
    std::vector<uint32_t> group_of( sources.size() );
    std::vector<size_t> order( sources.size() );
    for ( size_t i = 0; i < order.size(); ++i )
      order[i] = i;
    std::stable_sort( order.begin(), order.end(), [&]( size_t x, size_t y ) { return sources[x].time < sources[y].time; } );
    for ( auto i : order )
    {
      auto const& src = sources[i];
      auto it = std::find_if( groups.begin(), groups.end(),
                              [&]( port_source const& gs ) { return gs.signal == src.signal && gs.delay == src.delay; } );
      if ( it == groups.end() )
      {
        group_of[i] = static_cast<uint32_t>( groups.size() );
        groups.push_back( src );
      }
      else
      {
        group_of[i] = static_cast<uint32_t>( it - groups.begin() );
        it->original = std::max( it->original, src.original );
      }
    }
    if ( groups.size() == 1 )
    {
      b.add_edge( groups[0].signal, 0, dst, port, groups[0].delay );
      record_registers( meta, port_key( dst, port ), groups[0].delay, groups[0].original, width );
      continue;
    }
    auto mux = fmt::format( "u{}_mux_{}_{}", c, p.config.classes[c].pattern.templ.at( local ).id, port );
    std::vector<uint32_t> table( n, 0 );
    std::vector<bool> used( n, false );
    for ( size_t i = 0; i < sources.size(); ++i )
    {
      auto t = sources[i].time;
      if ( used[t] && table[t] != group_of[i] )
        throw std::logic_error( fmt::format( "two sources of {} port {} are selected at counter value {}", dst, port, t ) );
      used[t] = true;
      table[t] = group_of[i];
    }
    add_node_with_width( b, mux, node_kind::mux, width, { { "data_inputs", groups.size() }, { "select", table } } );
    for ( uint32_t gi = 0; gi < groups.size(); ++gi )
    {
      b.add_edge( groups[gi].signal, 0, mux, gi + 1, groups[gi].delay );
      record_registers( meta, port_key( mux, gi + 1 ), groups[gi].delay, groups[gi].original, width );
    }
    b.add_edge( mux, dst, port );
    meta.select_table[mux] = table;
    meta.provenance[mux] = { cost_bucket::overhead, c, {} };
  }

  build_controller( b, n, meta.select_table, width );
  meta.provenance[controller_id] = { cost_bucket::overhead, std::nullopt, {} };

  out.graph = b.build();
  if ( auto v = validate( out.graph ); !v.empty() )
  {
    std::string msg = "folded graph is inconsistent:";
    for ( auto const& x : v )
      msg += fmt::format( "\n  {}: {}", violation_name( x.kind ), x.message );
    throw std::logic_error( msg );
  }
  return out;
}

folded_design fold( dataflow_graph const& g, folding_config const& config, schedule const& s )
{
  return fold( prepare_fold( g, config ), s );
}

fold_result fold_with_schedule( dataflow_graph const& g, folding_config const& config, std::optional<uint32_t> folding_factor_hint )
{
  fold_result r;
  r.problem = prepare_fold( g, config );
  r.sched = list_schedule( r.problem.cores, folding_factor_hint );
  r.design = fold( r.problem, r.sched );
  return r;
}

} // namespace dfgfold
