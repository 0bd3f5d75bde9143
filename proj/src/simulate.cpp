#include <dfgfold/simulate.hpp>

#include <dfgfold/graph_io.hpp>

#include <algorithm>
#include <array>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace dfgfold
{

int32_t stimuli::at( size_t input, uint64_t cycle ) const
{
  auto const& v = values.at( input );
  if ( v.empty() )
    return 0;
  return cycle < v.size() ? v[cycle] : v.back();
}

uint64_t stimuli::length() const
{
  uint64_t n = 0;
  for ( auto const& v : values )
    n = std::max<uint64_t>( n, v.size() );
  return n;
}

namespace
{

int32_t const_value( node const& n, fixed_format const& fmt )
{
  if ( n.params.contains( "raw" ) )
    return n.params["raw"].get<int32_t>();
  if ( n.params.contains( "value" ) )
    return to_raw( n.params["value"].get<double>(), fmt );
  return 0;
}

} // namespace

simulator::simulator( dataflow_graph const& g, fixed_format fmt ) : g_( g ), fmt_( fmt )
{
  if ( fmt_.frac_bits > 31 )
    throw graph_error( fmt::format( "frac_bits {} out of range [0,31]", fmt_.frac_bits ) );
  auto violations = validate( g );
  if ( !violations.empty() )
    throw graph_error( fmt::format( "cannot simulate '{}': [{}] {}", g.name(), violation_name( violations.front().kind ),
                                    violations.front().message ) );
  order_ = topo_order( g );
  port_edges_.resize( g.size() );
  consts_.assign( g.size(), 0 );
  selects_.resize( g.size() );
  for ( uint32_t i = 0; i < g.size(); ++i )
  {
    auto const& n = g.at( i );
    port_edges_[i].assign( num_inputs( n ), 0 );
    for ( auto ei : g.fanin( i ) )
      port_edges_[i][g.edges()[ei].dst_port] = ei;
    if ( n.kind == node_kind::const_input )
      consts_[i] = const_value( n, fmt_ );
    if ( n.kind == node_kind::mux )
      selects_[i] = n.params["select"].get<std::vector<uint32_t>>();
  }
  lines_.resize( g.edges().size() );
  for ( uint32_t e = 0; e < g.edges().size(); ++e )
    lines_[e].assign( g.edges()[e].delay, 0 );
  reset();
}

void simulator::reset()
{
  values_.assign( g_.size(), 0 );
  state_.assign( g_.size(), 0 );
  for ( auto& l : lines_ )
    std::fill( l.begin(), l.end(), 0 );
  heads_.assign( lines_.size(), 0 );
  outputs_.assign( g_.outputs().size(), 0 );
  cycle_ = 0;
}

int32_t simulator::read( uint32_t edge_index ) const
{
  auto const& e = g_.edges()[edge_index];
  if ( e.delay == 0 )
    return values_[e.src];
  return lines_[edge_index][heads_[edge_index]];
}

void simulator::step( std::span<int32_t const> inputs )
{
  if ( inputs.size() != g_.inputs().size() )
    throw std::invalid_argument( fmt::format( "expected {} input values, got {}", g_.inputs().size(), inputs.size() ) );

  for ( uint32_t k = 0; k < g_.inputs().size(); ++k )
    values_[g_.inputs()[k]] = inputs[k];
  for ( uint32_t i = 0; i < g_.size(); ++i )
  {
    auto k = g_.at( i ).kind;
    if ( k == node_kind::delay || k == node_kind::counter )
      values_[i] = state_[i];
  }

  std::array<int32_t, 2> ops{};
  for ( auto i : order_ )
  {
    auto const& n = g_.at( i );
    auto const& ports = port_edges_[i];
    switch ( n.kind )
    {
    case node_kind::input:
      break;
    case node_kind::const_input:
      values_[i] = consts_[i];
      break;
    case node_kind::delay:
    case node_kind::counter:
      break;
    case node_kind::output:
      values_[i] = read( ports[0] );
      break;
    case node_kind::mux:
    {
      auto sel = static_cast<uint32_t>( read( ports[0] ) );
      auto const& table = selects_[i];
      values_[i] = read( ports[1 + table[sel % table.size()]] );
      break;
    }
    default:
    {
      auto arity = ports.size();
      for ( size_t p = 0; p < arity; ++p )
        ops[p] = read( ports[p] );
      values_[i] = fx_apply( n.kind, std::span<int32_t const>( ops.data(), arity ), fmt_ );
    }
    }
  }

  for ( uint32_t k = 0; k < g_.outputs().size(); ++k )
    outputs_[k] = values_[g_.outputs()[k]];

  /* clock edge: delay nodes latch the value on their input this cycle */
  for ( uint32_t i = 0; i < g_.size(); ++i )
  {
    auto const& n = g_.at( i );
    if ( n.kind == node_kind::delay )
      state_[i] = read( port_edges_[i][0] );
    else if ( n.kind == node_kind::counter )
      state_[i] = static_cast<int32_t>( ( static_cast<uint32_t>( state_[i] ) + 1 ) % n.params["modulus"].get<uint32_t>() );
  }
  for ( uint32_t e = 0; e < lines_.size(); ++e )
  {
    if ( lines_[e].empty() )
      continue;
    lines_[e][heads_[e]] = values_[g_.edges()[e].src];
    heads_[e] = ( heads_[e] + 1 ) % lines_[e].size();
  }
  ++cycle_;
}

trace simulate( dataflow_graph const& g, stimuli const& stim, uint64_t cycles, fixed_format const& fmt )
{
  if ( stim.values.size() != g.inputs().size() )
    throw std::invalid_argument( fmt::format( "stimuli cover {} input(s), graph has {}", stim.values.size(), g.inputs().size() ) );
  simulator sim( g, fmt );
  trace t;
  for ( auto o : g.outputs() )
    t.names.push_back( g.at( o ).id );
  t.values.resize( g.outputs().size() );
  std::vector<int32_t> in( g.inputs().size() );
  for ( uint64_t c = 0; c < cycles; ++c )
  {
    for ( size_t k = 0; k < in.size(); ++k )
      in[k] = stim.at( k, c );
    sim.step( in );
    t.cycles.push_back( c );
    for ( size_t k = 0; k < t.values.size(); ++k )
      t.values[k].push_back( sim.outputs()[k] );
  }
  return t;
}

equivalence_report check_equivalence( dataflow_graph const& original, folded_design const& folded, stimuli const& stim,
                                      uint64_t samples, fixed_format const& fmt )
{
  auto const n = folded.meta.folding_factor;
  if ( n == 0 )
    throw graph_error( "folded design carries no folding factor" );
  if ( folded.meta.latency_offset >= n )
    throw graph_error( "latency_offset must lie inside the frame" );
  if ( original.inputs().size() != folded.graph.inputs().size() || original.outputs().size() != folded.graph.outputs().size() )
    throw graph_error( "original and folded designs have different interfaces" );

  equivalence_report report;
  report.latency_offset_used = folded.meta.latency_offset;
  report.samples = samples;

  /* folded port position for each original port, matched by id */
  auto match_ports = [&]( std::vector<uint32_t> const& a, std::vector<uint32_t> const& b ) {
    std::vector<size_t> pos( a.size() );
    for ( size_t i = 0; i < a.size(); ++i )
    {
      auto const& id = original.at( a[i] ).id;
      auto it = std::find_if( b.begin(), b.end(), [&]( uint32_t x ) { return folded.graph.at( x ).id == id; } );
      if ( it == b.end() )
        throw graph_error( fmt::format( "folded design has no port named {}", id ) );
      pos[i] = static_cast<size_t>( it - b.begin() );
    }
    return pos;
  };
  auto in_pos = match_ports( original.inputs(), folded.graph.inputs() );
  auto out_pos = match_ports( original.outputs(), folded.graph.outputs() );

  simulator ref( original, fmt );
  simulator dut( folded.graph, fmt );
  std::vector<int32_t> in( original.inputs().size() );
  std::vector<int32_t> dut_in( in.size() );
  std::vector<int32_t> zeros( in.size(), 0 );
  for ( uint64_t k = 0; k < samples; ++k )
  {
    for ( size_t i = 0; i < in.size(); ++i )
    {
      in[i] = stim.at( i, k );
      dut_in[in_pos[i]] = in[i];
    }
    ref.step( in );
    for ( uint32_t c = 0; c < n; ++c )
    {
      dut.step( c == 0 ? std::span<int32_t const>( dut_in ) : std::span<int32_t const>( zeros ) );
      if ( c != folded.meta.latency_offset )
        continue;
      for ( size_t o = 0; o < ref.outputs().size(); ++o )
      {
        if ( ref.outputs()[o] != dut.outputs()[out_pos[o]] )
        {
          report.first_mismatch = mismatch{ k, original.at( original.outputs()[o] ).id, ref.outputs()[o], dut.outputs()[out_pos[o]] };
          return report;
        }
      }
    }
  }
  report.pass = true;
  return report;
}

namespace
{

stimuli empty_like( dataflow_graph const& g )
{
  stimuli s;
  for ( auto i : g.inputs() )
    s.names.push_back( g.at( i ).id );
  s.values.resize( g.inputs().size() );
  return s;
}

} // namespace

stimuli random_stimuli( dataflow_graph const& g, uint64_t samples, uint64_t seed, double range, fixed_format const& fmt )
{
  auto s = empty_like( g );
  std::mt19937_64 rng( seed );
  auto span = static_cast<uint64_t>( std::max<int64_t>( 1, 2 * int64_t{ to_raw( range, fmt ) } ) );
  auto lo = -int64_t{ to_raw( range, fmt ) };
  for ( auto& v : s.values )
  {
    v.reserve( samples );
    for ( uint64_t k = 0; k < samples; ++k )
      v.push_back( static_cast<int32_t>( lo + static_cast<int64_t>( rng() % span ) ) );
  }
  return s;
}

stimuli impulse_stimuli( dataflow_graph const& g, uint64_t samples, double amplitude, fixed_format const& fmt )
{
  auto s = empty_like( g );
  for ( auto& v : s.values )
  {
    v.assign( samples, 0 );
    if ( samples > 0 )
      v[0] = to_raw( amplitude, fmt );
  }
  return s;
}

stimuli step_stimuli( dataflow_graph const& g, uint64_t samples, double amplitude, fixed_format const& fmt )
{
  auto s = empty_like( g );
  for ( auto& v : s.values )
    v.assign( samples, to_raw( amplitude, fmt ) );
  return s;
}

namespace
{

std::vector<std::string> split_csv_line( std::string const& line )
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss( line );
  while ( std::getline( ss, cell, ',' ) )
  {
    auto b = cell.find_first_not_of( " \t\r" );
    auto e = cell.find_last_not_of( " \t\r" );
    cells.push_back( b == std::string::npos ? std::string{} : cell.substr( b, e - b + 1 ) );
  }
  return cells;
}

int32_t parse_value( std::string const& cell, fixed_format const& fmt )
{
  if ( cell.starts_with( "0x" ) || cell.starts_with( "0X" ) )
    return static_cast<int32_t>( static_cast<uint32_t>( std::stoull( cell.substr( 2 ), nullptr, 16 ) ) );
  size_t used = 0;
  double v = std::stod( cell, &used );
  if ( used != cell.size() )
    throw std::invalid_argument( cell );
  return to_raw( v, fmt );
}

std::string format_value( int32_t raw, fixed_format const& fmt )
{
  return fmt::format( "{}", to_real( raw, fmt ) );
}

} // namespace

stimuli parse_stimuli_csv( std::string_view text, fixed_format const& fmt )
{
  std::istringstream in{ std::string( text ) };
  std::string line;
  stimuli s;
  size_t lineno = 0;
  bool header = true;
  while ( std::getline( in, line ) )
  {
    ++lineno;
    if ( line.find_first_not_of( " \t\r" ) == std::string::npos )
      continue;
    auto cells = split_csv_line( line );
    if ( header )
    {
      if ( cells.empty() || cells[0] != "cycle" )
        throw parse_error( "stimuli CSV: first column must be 'cycle'" );
      s.names.assign( cells.begin() + 1, cells.end() );
      s.values.resize( s.names.size() );
      header = false;
      continue;
    }
    if ( cells.size() != s.names.size() + 1 )
      throw parse_error( fmt::format( "stimuli CSV line {}: expected {} columns, got {}", lineno, s.names.size() + 1, cells.size() ) );
    for ( size_t k = 0; k < s.names.size(); ++k )
    {
      try
      {
        s.values[k].push_back( parse_value( cells[k + 1], fmt ) );
      }
      catch ( std::exception const& )
      {
        throw parse_error( fmt::format( "stimuli CSV line {}: bad value '{}'", lineno, cells[k + 1] ) );
      }
    }
  }
  if ( header )
    throw parse_error( "stimuli CSV: missing header" );
  return s;
}

std::string stimuli_to_csv( stimuli const& s, fixed_format const& fmt )
{
  std::string out = "cycle";
  for ( auto const& n : s.names )
    out += "," + n;
  out += "\n";
  for ( uint64_t c = 0; c < s.length(); ++c )
  {
    out += std::to_string( c );
    for ( size_t k = 0; k < s.names.size(); ++k )
      out += "," + format_value( s.at( k, c ), fmt );
    out += "\n";
  }
  return out;
}

std::string trace_to_csv( trace const& t, fixed_format const& fmt )
{
  std::string out = "cycle";
  for ( auto const& n : t.names )
    out += "," + n;
  if ( !t.valid.empty() )
    out += ",valid";
  out += "\n";
  for ( size_t r = 0; r < t.cycles.size(); ++r )
  {
    out += std::to_string( t.cycles[r] );
    for ( auto const& v : t.values )
      out += "," + format_value( v[r], fmt );
    if ( !t.valid.empty() )
      out += t.valid[r] ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

} // namespace dfgfold
