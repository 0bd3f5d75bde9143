#include <dfgfold/design.hpp>

#include <fmt/format.h>

namespace dfgfold
{

std::string_view bucket_name( cost_bucket b )
{
  switch ( b )
  {
  case cost_bucket::core:
    return "core";
  case cost_bucket::remain:
    return "remain";
  case cost_bucket::overhead:
    return "overhead";
  }
  return "remain";
}

std::optional<cost_bucket> bucket_from_name( std::string_view name )
{
  for ( auto b : { cost_bucket::core, cost_bucket::remain, cost_bucket::overhead } )
  {
    if ( bucket_name( b ) == name )
      return b;
  }
  return std::nullopt;
}

std::string port_key( std::string_view node, uint32_t port )
{
  return fmt::format( "{}:{}", node, port );
}

nlohmann::json metadata_to_json( fold_metadata const& m )
{
  nlohmann::json j;
  j["N"] = m.folding_factor;
  j["latency_offset"] = m.latency_offset;
  j["select_table"] = nlohmann::json::object();
  for ( auto const& [mux, table] : m.select_table )
    j["select_table"][mux] = table;
  j["provenance"] = nlohmann::json::object();
  for ( auto const& [id, p] : m.provenance )
  {
    nlohmann::json jp{ { "bucket", bucket_name( p.bucket ) }, { "origin", p.origin } };
    if ( p.class_id )
      jp["class"] = *p.class_id;
    j["provenance"][id] = std::move( jp );
  }
  j["edge_registers"] = nlohmann::json::object();
  for ( auto const& [key, r] : m.edge_registers )
    j["edge_registers"][key] = { { "core", r.core }, { "remain", r.remain }, { "overhead", r.overhead } };
  return j;
}

fold_metadata metadata_from_json( nlohmann::json const& j )
{
  if ( !j.is_object() || !j.contains( "N" ) || !j.contains( "latency_offset" ) )
    throw graph_error( "fold metadata missing: need \"N\" and \"latency_offset\"" );
  fold_metadata m;
  m.folding_factor = j["N"].get<uint32_t>();
  m.latency_offset = j["latency_offset"].get<uint32_t>();
  if ( m.folding_factor == 0 )
    throw graph_error( "fold metadata: N must be >= 1" );
  auto const selects = j.value( "select_table", nlohmann::json::object() );
  auto const provenance = j.value( "provenance", nlohmann::json::object() );
  auto const registers = j.value( "edge_registers", nlohmann::json::object() );
  for ( auto const& [mux, table] : selects.items() )
    m.select_table[mux] = table.get<std::vector<uint32_t>>();
  for ( auto const& [id, jp] : provenance.items() )
  {
    node_provenance p;
    auto b = bucket_from_name( jp.value( "bucket", std::string( "remain" ) ) );
    if ( !b )
      throw graph_error( fmt::format( "fold metadata: bad bucket for '{}'", id ) );
    p.bucket = *b;
    p.origin = jp.value( "origin", std::string{} );
    if ( jp.contains( "class" ) )
      p.class_id = jp["class"].get<uint32_t>();
    m.provenance[id] = std::move( p );
  }
  for ( auto const& [key, jr] : registers.items() )
    m.edge_registers[key] = { jr.value( "core", 0u ), jr.value( "remain", 0u ), jr.value( "overhead", 0u ) };
  return m;
}

} // namespace dfgfold
