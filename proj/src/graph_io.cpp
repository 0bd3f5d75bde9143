#include <dfgfold/graph_io.hpp>

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace dfgfold
{

namespace
{

std::pair<size_t, size_t> line_column( std::string_view text, size_t offset )
{
  size_t line = 1, col = 1;
  for ( size_t i = 0; i < offset && i < text.size(); ++i )
  {
    if ( text[i] == '\n' )
    {
      ++line;
      col = 1;
    }
    else
      ++col;
  }
  return { line, col };
}

std::pair<std::string, uint32_t> port_ref( nlohmann::json const& j, std::string_view what )
{
  if ( j.is_string() )
    return { j.get<std::string>(), 0u };
  if ( j.is_array() && j.size() == 2 && j[0].is_string() && j[1].is_number_unsigned() )
    return { j[0].get<std::string>(), j[1].get<uint32_t>() };
  throw parse_error( fmt::format( "{}: expected \"id\" or [\"id\", port], got {}", what, j.dump() ) );
}

} // namespace

nlohmann::json parse_json_text( std::string_view text )
{
  try
  {
    return nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    auto [line, col] = line_column( text, e.byte == 0 ? 0 : e.byte - 1 );
    throw parse_error( fmt::format( "syntax error at line {}, column {}: {}", line, col, e.what() ) );
  }
}

dataflow_graph graph_from_json( nlohmann::json const& doc )
{
  if ( !doc.is_object() )
    throw parse_error( "graph document must be a JSON object" );
  graph_builder b( doc.value( "name", std::string{} ) );
  try
  {
    for ( auto const& jn : doc.at( "nodes" ) )
    {
      node n;
      n.id = jn.at( "id" ).get<std::string>();
      auto kind_str = jn.at( "kind" ).get<std::string>();
      auto kind = kind_from_name( kind_str );
      if ( !kind )
        throw parse_error( fmt::format( "node '{}': unknown kind '{}'", n.id, kind_str ) );
      n.kind = *kind;
      n.width = jn.value( "width", 32u );
      n.latency = jn.value( "latency", 0u );
      if ( jn.contains( "params" ) )
        n.params = jn["params"];
      b.add_node( std::move( n ) );
    }
    if ( doc.contains( "edges" ) )
    {
      for ( auto const& je : doc["edges"] )
      {
        auto [src, sp] = port_ref( je.at( "from" ), "edge source" );
        auto [dst, dp] = port_ref( je.at( "to" ), "edge sink" );
        b.add_edge( src, sp, dst, dp, je.value( "delay", 0u ) );
      }
    }
    for ( auto const& ji : doc.value( "inputs", nlohmann::json::array() ) )
      b.add_input( port_ref( ji, "input list" ).first );
    for ( auto const& jo : doc.value( "outputs", nlohmann::json::array() ) )
      b.add_output( port_ref( jo, "output list" ).first );
    return b.build();
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw parse_error( fmt::format( "schema error: {}", e.what() ) );
  }
  catch ( parse_error const& )
  {
    throw;
  }
  catch ( graph_error const& e )
  {
    throw parse_error( e.what() );
  }
}

dataflow_graph parse_graph( std::string_view text )
{
  auto g = graph_from_json( parse_json_text( text ) );
  auto violations = validate( g );
  if ( !violations.empty() )
  {
    std::string msg = "invalid graph:";
    for ( auto const& v : violations )
      msg += fmt::format( "\n  [{}] {}", violation_name( v.kind ), v.message );
    throw graph_error( msg );
  }
  return g;
}

nlohmann::json graph_to_json( dataflow_graph const& g )
{
  nlohmann::json doc;
  doc["name"] = g.name();
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for ( auto const& n : g.nodes() )
  {
    nlohmann::json jn{ { "id", n.id }, { "kind", kind_name( n.kind ) }, { "width", n.width } };
    if ( n.latency != 0 )
      jn["latency"] = n.latency;
    if ( !n.params.empty() )
      jn["params"] = n.params;
    nodes.push_back( std::move( jn ) );
  }
  auto& edges = doc["edges"] = nlohmann::json::array();
  for ( auto const& e : g.edges() )
  {
    nlohmann::json je{ { "from", { g.at( e.src ).id, e.src_port } }, { "to", { g.at( e.dst ).id, e.dst_port } } };
    if ( e.delay != 0 )
      je["delay"] = e.delay;
    edges.push_back( std::move( je ) );
  }
  doc["inputs"] = nlohmann::json::array();
  for ( auto i : g.inputs() )
    doc["inputs"].push_back( g.at( i ).id );
  doc["outputs"] = nlohmann::json::array();
  for ( auto o : g.outputs() )
    doc["outputs"].push_back( g.at( o ).id );
  return doc;
}

std::string serialize_graph( dataflow_graph const& g )
{
  return graph_to_json( g ).dump( 1 ) + "\n";
}

std::string read_file( std::string const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw std::runtime_error( fmt::format( "cannot read '{}'", path ) );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file( std::string const& path, std::string const& content )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw std::runtime_error( fmt::format( "cannot write '{}'", path ) );
  out << content;
}

} // namespace dfgfold
