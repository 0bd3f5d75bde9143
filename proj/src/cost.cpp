#include <dfgfold/cost.hpp>

#include <dfgfold/graph_io.hpp>

#include <algorithm>

#include <fmt/format.h>

namespace dfgfold
{

weight_table default_weights()
{
  return { { "add", 32 },        { "sub", 32 },   { "negate", 32 }, { "mult", 0 },   { "sine-lut", 256 }, { "mux", 16 },
           { "counter", 8 },     { "delay", 0 },  { "input", 0 },   { "output", 0 }, { "const-input", 0 } };
}

delay_table default_delays()
{
  return { { "add", 2.5 },     { "sub", 2.5 },  { "negate", 1.0 }, { "mult", 6.0 },  { "sine-lut", 3.0 },   { "mux", 1.0 },
           { "counter", 0.0 }, { "delay", 0.0 }, { "input", 0.0 },  { "output", 0.0 }, { "const-input", 0.0 } };
}

namespace
{

template<class Table, class Get>
Table overlay( Table table, std::string_view text, Get get )
{
  auto j = parse_json_text( text );
  if ( !j.is_object() )
    throw parse_error( "table must be a JSON object mapping node kinds to numbers" );
  for ( auto const& [key, value] : j.items() )
  {
    if ( !kind_from_name( key ) )
      throw parse_error( fmt::format( "unknown node kind '{}' in table", key ) );
    table[key] = get( key, value );
  }
  return table;
}

template<class Table>
auto lookup( Table const& t, node_kind k, char const* what )
{
  auto it = t.find( kind_name( k ) );
  if ( it == t.end() )
    throw cost_error( fmt::format( "node kind {} is missing from the {} table", kind_name( k ), what ) );
  return it->second;
}

uint64_t node_weight( node const& n, weight_table const& w )
{
  auto base = lookup( w, n.kind, "weight" );
  if ( n.kind == node_kind::mux )
    return base * n.params.value( "data_inputs", 0u );
  return base;
}

void add_to( cost_breakdown& b, cost_bucket bucket, uint64_t v )
{
  switch ( bucket )
  {
  case cost_bucket::core:
    b.core += v;
    break;
  case cost_bucket::remain:
    b.remain += v;
    break;
  case cost_bucket::overhead:
    b.overhead += v;
    break;
  }
}

cost_estimate census_cost( dataflow_graph const& g, fold_metadata const* meta, weight_table const& weights, delay_table const& delays )
{
  cost_estimate c;
  c.folding_factor = meta ? meta->folding_factor : 1;
  cost_breakdown parts;
  for ( auto const& n : g.nodes() )
  {
    auto bucket = cost_bucket::remain;
    if ( meta )
    {
      auto it = meta->provenance.find( n.id );
      bucket = it == meta->provenance.end() ? cost_bucket::overhead : it->second.bucket;
    }
    uint64_t v = node_weight( n, weights );
    if ( n.kind == node_kind::mult )
      ++c.mult_units;
    if ( n.kind == node_kind::mux )
      c.mux_inputs += n.params.value( "data_inputs", 0u );
    if ( n.kind == node_kind::delay )
    {
      c.reg_bits += n.width;
      v += n.width;
    }
    c.lut_units += v;
    add_to( parts, bucket, v );
  }
  for ( auto const& e : g.edges() )
  {
    if ( e.delay == 0 )
      continue;
    auto const& dst = g.at( e.dst );
    uint64_t bits = uint64_t{ e.delay } * g.at( e.src ).width;
    c.reg_bits += bits;
    c.lut_units += bits;
    if ( !meta )
    {
      parts.remain += bits;
      continue;
    }
    auto it = meta->edge_registers.find( port_key( dst.id, e.dst_port ) );
    if ( it == meta->edge_registers.end() )
    {
      parts.overhead += bits;
      continue;
    }
    auto const& r = it->second;
    /* clamp so that the split always accounts for exactly `bits` */
    auto core = std::min<uint64_t>( r.core, bits );
    auto remain = std::min<uint64_t>( r.remain, bits - core );
    parts.core += core;
    parts.remain += remain;
    parts.overhead += bits - core - remain;
  }
  c.tmin_proxy = tmin_proxy( g, delays );
  c.breakdown = parts;
  return c;
}

} // namespace

weight_table parse_weights( std::string_view text )
{
  return overlay( default_weights(), text, []( std::string const& key, nlohmann::json const& v ) {
    if ( !v.is_number_unsigned() )
      throw parse_error( fmt::format( "weight for '{}' must be a non-negative integer", key ) );
    return v.get<uint64_t>();
  } );
}

delay_table parse_delays( std::string_view text )
{
  return overlay( default_delays(), text, []( std::string const& key, nlohmann::json const& v ) {
    if ( !v.is_number() || v.get<double>() < 0 )
      throw parse_error( fmt::format( "delay for '{}' must be a non-negative number", key ) );
    return v.get<double>();
  } );
}

double tmin_proxy( dataflow_graph const& g, delay_table const& delays )
{
  std::vector<double> arrival( g.size(), 0.0 );
  double best = 0.0;
  for ( auto n : topo_order( g ) )
  {
    double start = 0.0;
    for ( auto ei : g.fanin( n ) )
    {
      auto const& e = g.edges()[ei];
      if ( is_combinational_edge( g, e ) )
        start = std::max( start, arrival[e.src] );
    }
    arrival[n] = start + lookup( delays, g.at( n ).kind, "delay" );
    best = std::max( best, arrival[n] );
  }
  return best;
}

cost_estimate estimate_cost( dataflow_graph const& g, weight_table const& weights, delay_table const& delays )
{
  return census_cost( g, nullptr, weights, delays );
}

cost_estimate estimate_cost( folded_design const& d, weight_table const& weights, delay_table const& delays )
{
  return census_cost( d.graph, &d.meta, weights, delays );
}

bool overhead_below_saving( uint64_t overhead, uint32_t folding_factor, uint64_t core )
{
  return overhead < uint64_t{ folding_factor > 0 ? folding_factor - 1u : 0u } * core;
}

benefit_report folding_benefit( cost_estimate const& original, cost_estimate const& folded )
{
  if ( !folded.breakdown )
    throw cost_error( "folded cost carries no core/remain/overhead breakdown" );
  benefit_report r;
  r.parts = *folded.breakdown;
  r.folding_factor = folded.folding_factor;
  r.original = original.lut_units;
  r.folded = folded.lut_units;
  r.beneficial = r.folded < r.original;
  r.margin = static_cast<int64_t>( r.original ) - static_cast<int64_t>( r.folded );
  r.overhead_below_saving = overhead_below_saving( r.parts.overhead, r.folding_factor, r.parts.core );
  r.precondition = uint64_t{ r.folding_factor } * r.parts.core + r.parts.remain == r.original;
  r.agree = !r.precondition || r.beneficial == r.overhead_below_saving;
  return r;
}

nlohmann::json cost_to_json( cost_estimate const& c )
{
  nlohmann::json j = { { "N", c.folding_factor },
                       { "mult_units", c.mult_units },
                       { "lut_units", c.lut_units },
                       { "reg_bits", c.reg_bits },
                       { "mux_inputs", c.mux_inputs },
                       { "tmin_proxy_ns", c.tmin_proxy },
                       { "latency_proxy_ns", c.latency_proxy() } };
  if ( c.breakdown )
    j["breakdown"] = { { "S_folding_core", c.breakdown->core }, { "S_remain", c.breakdown->remain }, { "S_overhead", c.breakdown->overhead } };
  return j;
}

} // namespace dfgfold
