#include <dfgfold/config_io.hpp>

#include <dfgfold/bench.hpp>
#include <dfgfold/graph_io.hpp>

#include <fmt/format.h>

namespace dfgfold
{

core_pattern resolve_pattern( nlohmann::json const& ref, std::filesystem::path const& base_dir )
{
  if ( ref.is_object() )
    return parse_pattern( ref.dump() );
  if ( !ref.is_string() )
    throw parse_error( "pattern reference must be a string or an object" );
  auto name = ref.get<std::string>();
  auto path = base_dir / name;
  if ( std::filesystem::is_regular_file( path ) )
    return parse_pattern( read_file( path.string() ) );
  if ( auto p = builtin_pattern( name ) )
    return *p;
  throw parse_error( fmt::format( "pattern '{}' is neither a file under {} nor a built-in pattern", name, base_dir.string() ) );
}

config_document parse_config_document( std::string_view text, std::filesystem::path const& base_dir )
{
  auto j = parse_json_text( text );
  if ( !j.is_object() || !j.contains( "classes" ) || !j["classes"].is_array() )
    throw parse_error( "config document needs a \"classes\" array" );
  config_document doc;
  doc.name = j.value( "name", std::string{} );
  for ( auto const& jc : j["classes"] )
  {
    if ( !jc.is_object() || !jc.contains( "pattern" ) || !jc.contains( "count" ) || !jc["count"].is_number_unsigned() )
      throw parse_error( "each class needs \"pattern\" and a non-negative integer \"count\"" );
    class_entry c;
    c.pattern = resolve_pattern( jc["pattern"], base_dir );
    c.count = jc["count"].get<uint32_t>();
    if ( jc.contains( "instances" ) )
    {
      std::vector<std::map<std::string, std::string>> list;
      for ( auto const& ji : jc["instances"] )
      {
        if ( !ji.is_object() )
          throw parse_error( "instances must map template node ids to circuit node ids" );
        list.push_back( ji.get<std::map<std::string, std::string>>() );
      }
      if ( list.size() != c.count )
        throw parse_error( fmt::format( "class with count {} lists {} instances", c.count, list.size() ) );
      c.instances = std::move( list );
    }
    doc.classes.push_back( std::move( c ) );
  }
  return doc;
}

config_document load_config_document( std::filesystem::path const& path )
{
  return parse_config_document( read_file( path.string() ), path.parent_path() );
}

folding_config instantiate( dataflow_graph const& g, config_document const& doc )
{
  std::vector<cover_request> requests;
  for ( size_t ci = 0; ci < doc.classes.size(); ++ci )
  {
    auto const& c = doc.classes[ci];
    if ( !c.instances )
    {
      requests.push_back( { c.pattern, match_pattern( g, c.pattern ), c.count } );
      continue;
    }
    std::vector<core_instance> list;
    auto const& t = c.pattern.templ;
    for ( auto const& m : *c.instances )
    {
      core_instance inst;
      for ( auto const& tn : t.nodes() )
      {
        auto it = m.find( tn.id );
        if ( it == m.end() )
          throw parse_error( fmt::format( "class {}: instance does not map template node '{}'", ci, tn.id ) );
        auto n = g.find( it->second );
        if ( !n )
          throw parse_error( fmt::format( "class {}: node '{}' does not exist", ci, it->second ) );
        inst.nodes.push_back( *n );
      }
      if ( auto errs = embedding_errors( g, c.pattern, inst ); !errs.empty() )
        throw parse_error( fmt::format( "class {}: not an embedding of {}: {}", ci, c.pattern.name, errs.front() ) );
      list.push_back( std::move( inst ) );
    }
    requests.push_back( { c.pattern, std::move( list ), c.count } );
  }
  return select_cover( requests );
}

nlohmann::json config_to_json( dataflow_graph const& g, folding_config const& config, std::string const& name )
{
  nlohmann::json j;
  j["name"] = name.empty() ? config.notation() : name;
  j["classes"] = nlohmann::json::array();
  for ( auto const& cls : config.classes )
  {
    nlohmann::json jc;
    jc["pattern"] = pattern_to_json( cls.pattern );
    jc["count"] = cls.instances.size();
    jc["instances"] = nlohmann::json::array();
    for ( auto const& inst : cls.instances )
    {
      nlohmann::json ji = nlohmann::json::object();
      for ( uint32_t k = 0; k < inst.nodes.size(); ++k )
        ji[cls.pattern.templ.at( k ).id] = g.at( inst.nodes[k] ).id;
      jc["instances"].push_back( ji );
    }
    j["classes"].push_back( jc );
  }
  return j;
}

} // namespace dfgfold
